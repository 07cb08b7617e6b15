"""Command-line front end: ``anticonc run | sweep | verify``.

Exit codes: 0 success, 2 configuration or layout error, 3 resource cap
exceeded, 4 verification failure, 5 file I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

from . import __version__
from .architectures import all_to_all, brickwork_1d, load_architecture
from .core import ModelParams
from .errors import (
    AnticoncError,
    ArchitectureParseError,
    InvalidInputError,
    ResourceLimitError,
)
from .metrics import (
    MetricsReport,
    moment_metrics,
    projector_moments,
    projector_ranks,
    spectral_coeffs,
    unitary_metrics,
)
from .montecarlo import (
    PROJECTOR_CAP_EXPONENT,
    SPECTRAL_CAP_EXPONENT,
    estimate_collision,
    estimate_projector_moments,
    estimate_spectral,
)
from .statmech import (
    TRANSFER_CAP_N,
    collision_probability,
    evolve,
    evolve_layers,
    gate_gamma,
    initial_moment,
    transfer_matrix,
    transfer_matrix_layers,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_VERIFY = 4
EXIT_IO = 5

SEED_ENV = "ANTICONC_SEED"
MC_CAP_N = 10


class ConfigError(AnticoncError):
    pass


@dataclass
class RunConfig:
    command: str
    arch: str = "brickwork"
    file: str | None = None
    n: int | None = None
    q: int = 2
    depth: int | None = None
    depth_range: str | None = None
    n_list: str | None = None
    boundary: str = "open"
    seed: int = 0
    samples: int = 10000
    out: str | None = None
    format: str = "json"
    unitary_diagnostics: bool = False
    cap_n_transfer: int = TRANSFER_CAP_N
    cap_n_mc: int = MC_CAP_N
    workers: int = 1
    fault_gamma_scale: float | None = None

    def resolved(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d.pop("workers")
        if d["fault_gamma_scale"] is None:
            d.pop("fault_gamma_scale")
        return d


# ---------------------------------------------------------------- formatting

def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x} in report")
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def dump_json(obj, indent=2, _level=0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dump_json(v, indent, _level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dump_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):
        return dump_json(obj.item(), indent, _level)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_float(v)
    return str(v)


def dump_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(row.get(h)) for h in header])
    return buf.getvalue()


def _write(text: str, path):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


# ------------------------------------------------------------------ building

def _parse_range(text):
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise ConfigError(f"--depth-range must look like A:B, got {text!r}") from None


def _parse_n_list(cfg):
    if cfg.n_list:
        try:
            return [int(v) for v in cfg.n_list.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"--n-list must be comma-separated integers, got {cfg.n_list!r}") from None
    if cfg.n is not None:
        return [cfg.n]
    raise ConfigError("system size missing: pass --n or --n-list")


def build_architecture(cfg: RunConfig, n: int | None, depth: int | None):
    """Architecture for ``cfg`` at size ``n`` and ``depth`` layers."""
    if cfg.arch == "file":
        if not cfg.file:
            raise ConfigError("--arch file requires --file PATH")
        arch = load_architecture(cfg.file)
        if n is not None and n != arch.params.n:
            raise ConfigError(f"--n {n} conflicts with n={arch.params.n} in {cfg.file}")
        if depth is not None:
            if depth > arch.depth:
                raise ConfigError(f"depth {depth} exceeds the {arch.depth} layers in {cfg.file}")
            arch = arch.truncated(depth)
        return arch
    if cfg.file:
        raise ConfigError("--file is only valid with --arch file")
    if n is None:
        raise ConfigError("--n is required for generated architectures")
    if depth is None:
        raise ConfigError("--depth is required")
    params = ModelParams(n, cfg.q)
    if cfg.arch == "brickwork":
        return brickwork_1d(params, depth, cfg.boundary)
    if cfg.arch == "alltoall":
        return all_to_all(params, depth, cfg.seed)
    raise ConfigError(f"unknown architecture kind {cfg.arch!r}")


def _descriptor(cfg, arch):
    d = {"kind": cfg.arch, "n": arch.params.n, "q": arch.params.q, "depth": arch.depth}
    if cfg.arch == "brickwork":
        d["boundary"] = cfg.boundary
    elif cfg.arch == "alltoall":
        d["seed"] = cfg.seed
    else:
        d["file"] = cfg.file
    return d


def _header(cfg):
    return {"tool": "anticonc", "version": __version__, "command": cfg.command,
            "config": cfg.resolved(), "seed": cfg.seed}


# ------------------------------------------------------------------ commands

def _gamma(cfg, q):
    if cfg.fault_gamma_scale is None:
        return None
    return gate_gamma(q) * cfg.fault_gamma_scale


def cmd_run(cfg: RunConfig) -> str:
    arch = build_architecture(cfg, cfg.n, cfg.depth)
    params = arch.params
    m = evolve(initial_moment(params), arch, gamma=_gamma(cfg, params.q))
    report = MetricsReport(**moment_metrics(m), architecture=_descriptor(cfg, arch),
                           seed=cfg.seed, depth=arch.depth)
    if cfg.unitary_diagnostics:
        if params.n > cfg.cap_n_transfer:
            raise ResourceLimitError(
                f"unitary diagnostics need n <= {cfg.cap_n_transfer}, got n={params.n}")
        report.unitary = unitary_metrics(
            transfer_matrix(arch, cap_n=cfg.cap_n_transfer, gamma=_gamma(cfg, params.q)))
    if cfg.format == "csv":
        row = {k: v for k, v in report.to_dict().items() if k not in ("architecture", "unitary")}
        row.update({f"arch_{k}": v for k, v in report.architecture.items()})
        if report.unitary:
            row.update({k: v for k, v in report.unitary.items() if not isinstance(v, list)})
        return dump_csv(list(row), [row])
    return dump_json({**_header(cfg), "report": report.to_dict()}) + "\n"


SWEEP_COLUMNS = ["n", "depth", "Z_nu", "eps_ac", "eps_state", "eps_prime", "holder_upper",
                 "theorem1_holds", "d_star"]
UNITARY_COLUMNS = ["unitary_design_error", "diagonal_error", "max_on_diagonal"]


def _sweep_one(cfg: RunConfig, n, lo: int, hi: int):
    arch = build_architecture(cfg, n, hi)
    params = arch.params
    g = _gamma(cfg, params.q)
    want_u = cfg.unitary_diagnostics and params.n <= cfg.cap_n_transfer
    ws = transfer_matrix_layers(arch, cap_n=cfg.cap_n_transfer, gamma=g) if want_u else None
    rows, d_star = [], None
    for depth, m in enumerate(evolve_layers(initial_moment(params), arch, gamma=g)):
        w = next(ws) if ws is not None else None
        met = moment_metrics(m)
        if d_star is None and met["eps_ac"] <= 1.0:
            d_star = depth
        if depth < lo:
            continue
        row = {"n": params.n, "depth": depth, **met}
        if w is not None:
            u = unitary_metrics(w)
            row.update({k: u[k] for k in UNITARY_COLUMNS})
        rows.append(row)
    for row in rows:
        row["d_star"] = d_star
    return params.n, rows, d_star


def sweep_rows(cfg: RunConfig):
    """Rows for every (n, depth) of the sweep and the onset depth per n.

    ``d_star`` is the least depth in ``0..B`` with ``eps_ac <= 1`` (``None`` if
    not reached by the top of the range). With ``cfg.workers > 1`` the sizes
    are evaluated in a process pool; rows are assembled in input order.
    """
    if cfg.depth_range is not None:
        lo, hi = _parse_range(cfg.depth_range)
    elif cfg.depth is not None:
        lo = hi = cfg.depth
    else:
        raise ConfigError("sweep needs --depth-range A:B or --depth")
    if lo < 0:
        raise ConfigError("depths must be non-negative")
    ns = [None] if cfg.arch == "file" and not (cfg.n_list or cfg.n) else _parse_n_list(cfg)
    rows, onset = [], {}
    if hi < lo:
        return rows, onset
    if cfg.workers > 1 and len(ns) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_sweep_one, [cfg] * len(ns), ns, [lo] * len(ns),
                                    [hi] * len(ns)))
    else:
        results = [_sweep_one(cfg, n, lo, hi) for n in ns]
    for n, per_n, d_star in results:
        onset[n] = d_star
        rows.extend(per_n)
    return rows, onset


def cmd_sweep(cfg: RunConfig) -> str:
    rows, onset = sweep_rows(cfg)
    columns = SWEEP_COLUMNS + (UNITARY_COLUMNS if cfg.unitary_diagnostics else [])
    if cfg.format == "csv":
        return dump_csv(columns, rows)
    slim = [{k: r.get(k) for k in columns} for r in rows]
    return dump_json({**_header(cfg), "d_star": {str(k): v for k, v in onset.items()},
                      "rows": slim}) + "\n"


def verification_labels(n: int):
    """Three projector-moment labels checked by ``verify``."""
    if n == 1:
        return [(0, 0), (1, 1), (0, 1)]
    return [(0, 0), (3, 0), (1, 1 << (n - 1))]


def verify_report(cfg: RunConfig) -> dict:
    arch = build_architecture(cfg, cfg.n, cfg.depth)
    params = arch.params
    if params.n > cfg.cap_n_mc:
        raise ResourceLimitError(f"Monte Carlo needs n <= {cfg.cap_n_mc}, got n={params.n}")
    g = _gamma(cfg, params.q)
    m = evolve(initial_moment(params), arch, gamma=g)
    checks = []

    def record(name, exact, est):
        checks.append({"quantity": name, "exact": float(exact), "mean": est.mean,
                       "stderr": est.stderr, "samples": est.samples,
                       "pass": est.agrees_with(exact)})

    record("collision_probability", collision_probability(m),
           estimate_collision(arch, cfg.samples, cfg.seed, workers=cfg.workers))
    log_q = math.log2(params.q)
    if 2 * params.n * log_q <= SPECTRAL_CAP_EXPONENT:
        exact = spectral_coeffs(m).lam * projector_ranks(params)
        for a, est in enumerate(estimate_spectral(arch, cfg.samples, cfg.seed, workers=cfg.workers)):
            record(f"tr(P_{a:0{params.n}b} m)", exact[a], est)
    if params.n * log_q <= PROJECTOR_CAP_EXPONENT and params.n <= cfg.cap_n_transfer:
        mt = projector_moments(transfer_matrix(arch, cap_n=cfg.cap_n_transfer, gamma=g))
        ranks = projector_ranks(params)
        labels = verification_labels(params.n)
        ests = estimate_projector_moments(arch, labels, cfg.samples, cfg.seed, workers=cfg.workers)
        for (a, b), est in zip(labels, ests):
            record(f"tr(P_{a:0{params.n}b} M(P_{b:0{params.n}b}))", mt.mtilde[a, b] * ranks[a], est)
    return {**_header(cfg), "architecture": _descriptor(cfg, arch),
            "criterion": "|exact - mean| <= 4 stderr", "checks": checks,
            "passed": all(c["pass"] for c in checks)}


def cmd_verify(cfg: RunConfig) -> tuple[str, bool]:
    rep = verify_report(cfg)
    if cfg.format == "csv":
        text = dump_csv(["quantity", "exact", "mean", "stderr", "samples", "pass"], rep["checks"])
    else:
        text = dump_json(rep) + "\n"
    return text, rep["passed"]


# ---------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--arch", choices=["brickwork", "alltoall", "file"])
    common.add_argument("--file", metavar="PATH", help="architecture JSON file")
    common.add_argument("--n", type=int)
    common.add_argument("--q", type=int)
    grp = common.add_mutually_exclusive_group()
    grp.add_argument("--depth", type=int)
    grp.add_argument("--depth-range", metavar="A:B", help="inclusive depth range")
    common.add_argument("--n-list", metavar="N1,N2,...", help="system sizes (sweep)")
    common.add_argument("--boundary", choices=["open", "periodic"])
    common.add_argument("--seed", type=int, help=f"defaults to ${SEED_ENV}, else 0")
    common.add_argument("--samples", type=int)
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--unitary-diagnostics", action="store_true", default=None)
    common.add_argument("--cap-n-transfer", type=int)
    common.add_argument("--cap-n-mc", type=int)
    common.add_argument("--workers", type=int, help="worker processes (default 1)")
    common.add_argument("--config", metavar="PATH", help="JSON file overriding flags")
    common.add_argument("--fault-gamma-scale", type=float, help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="anticonc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"anticonc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="metrics for one circuit layout")
    sub.add_parser("sweep", parents=[common], help="metrics over depth and size grids")
    sub.add_parser("verify", parents=[common], help="exact engine vs Monte Carlo oracle")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    names = {f.name for f in fields(RunConfig)} - {"command"}
    values = {k: v for k, v in vars(args).items() if k in names and v is not None}
    if "seed" not in values and os.environ.get(SEED_ENV):
        try:
            values["seed"] = int(os.environ[SEED_ENV])
        except ValueError:
            raise ConfigError(f"${SEED_ENV} must be an integer") from None
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                overrides = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: {exc}") from None
        if not isinstance(overrides, dict):
            raise ConfigError(f"{args.config}: expected a JSON object")
        unknown = set(overrides) - names
        if unknown:
            raise ConfigError(f"{args.config}: unknown keys {sorted(unknown)}")
        values.update(overrides)
        for k in ("depth_range", "n_list"):
            if isinstance(values.get(k), list):
                sep = ":" if k == "depth_range" else ","
                values[k] = sep.join(str(v) for v in values[k])
    cfg = RunConfig(command=args.command, **values)
    if cfg.samples < 2:
        raise ConfigError("--samples must be >= 2")
    if cfg.seed < 0:
        raise ConfigError("--seed must be non-negative")
    if cfg.workers < 1:
        raise ConfigError("--workers must be >= 1")
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if cfg.command == "run":
            text, ok = cmd_run(cfg), True
        elif cfg.command == "sweep":
            text, ok = cmd_sweep(cfg), True
        else:
            text, ok = cmd_verify(cfg)
        _write(text, cfg.out)
    except (ConfigError, ArchitectureParseError, InvalidInputError) as exc:
        print(f"anticonc: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimitError as exc:
        print(f"anticonc: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as exc:
        print(f"anticonc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if not ok:
        print("anticonc: verification failed", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
