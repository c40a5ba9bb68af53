"""Command-line front end.

    priorquant design      --k 3
    priorquant sweep       --k-range 1..8 --preset uniform-c4
    priorquant highrate    --prior beta:5,2
    priorquant populations --w 3 --b 1 --k-total 5
    priorquant verify      --n 1000000

Settings come from (lowest to highest precedence) built-in defaults, a named
``--preset``, a flat JSON ``--config`` file and explicit flags.  Tables are
written as CSV (17 significant digits) or JSON.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .design import (
    ConvergenceWarning,
    DesignOptions,
    design_lloyd_max,
    design_mae,
    mbre,
)
from .detection import CostPair, GaussianMeasurementModel, error_probabilities
from .highrate import (
    distortion_bound,
    mae_distortion,
    mae_point_density,
    point_density,
    rate_gap,
)
from .mc import simulate_decision_rate, simulate_error_probabilities, simulate_mbre
from .populations import PopulationScenario, allocate, decision_rate, delta_curve, dividing_line_scan
from .priors import parse_prior

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NONCONVERGED = 0, 1, 2, 3

PRESETS = {
    "uniform-equal": {"prior": "uniform", "c10": 1.0, "c01": 1.0},
    "uniform-c4": {"prior": "uniform", "c10": 1.0, "c01": 4.0},
    "beta52-equal": {"prior": "beta:5,2", "c10": 1.0, "c01": 1.0},
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    mu: float = 1.0
    sigma: float = 1.0
    c10: float = 1.0
    c01: float = 1.0
    prior: str = "uniform"
    k: int = 2
    k_range: str | None = None
    restarts: int = 10
    tolerance: float = 1e-10
    seed: int = 0
    output_path: str | None = None
    format: str = "csv"
    w: float = 3.0
    b: float = 1.0
    k_total: int = 5
    k_w: int | None = None
    k_b: int | None = None
    ratio_grid: str = "0.125..8:25"
    n: int = 1_000_000
    a: float = 0.3
    preset: str | None = None

    # -- derived objects -------------------------------------------------
    def validate(self) -> "RunConfig":
        def need(cond, field, msg):
            if not cond:
                raise ConfigError(f"{field}: {msg}")

        for name in ("mu", "sigma", "c10", "c01", "tolerance", "w", "b", "a"):
            v = getattr(self, name)
            need(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v),
                 name, f"expected a finite number, got {v!r}")
        for name in ("k", "restarts", "seed", "k_total", "n"):
            v = getattr(self, name)
            need(isinstance(v, int) and not isinstance(v, bool), name, f"expected an integer, got {v!r}")
        need(self.k >= 1, "k", f"must be >= 1, got {self.k}")
        need(self.restarts >= 0, "restarts", "must be >= 0")
        need(self.n >= 2, "n", "must be >= 2")
        need(self.tolerance > 0, "tolerance", "must be positive")
        need(self.format in ("csv", "json"), "format", f"must be 'csv' or 'json', got {self.format!r}")
        need(0.0 < self.a < 1.0, "a", "must lie in (0, 1)")
        for name, fn in (("mu/sigma", self.model), ("c10/c01", self.costs), ("prior", self.prior_dist),
                         ("w/b/k_total", self.scenario)):
            try:
                fn()
            except ValueError as exc:
                raise ConfigError(f"{name}: {exc}") from None
        if self.k_range is not None:
            self.ks()
        self.ratios()
        for name in ("k_w", "k_b"):
            v = getattr(self, name)
            need(v is None or (isinstance(v, int) and v >= 1), name, f"must be a positive integer, got {v!r}")
        return self

    def model(self):
        return GaussianMeasurementModel(float(self.mu), float(self.sigma))

    def costs(self):
        return CostPair(float(self.c10), float(self.c01))

    def prior_dist(self):
        return parse_prior(self.prior)

    def scenario(self):
        return PopulationScenario(float(self.w), float(self.b), int(self.k_total))

    def options(self):
        return DesignOptions(tol=float(self.tolerance), restarts=int(self.restarts), seed=int(self.seed))

    def ks(self, default: str = "1..8") -> list[int]:
        text = self.k_range if self.k_range is not None else default
        try:
            if ".." in str(text):
                lo, hi = (int(x) for x in str(text).split(".."))
                ks = list(range(lo, hi + 1))
            else:
                ks = [int(x) for x in str(text).split(",")]
        except ValueError:
            raise ConfigError(f"k_range: expected 'A..B' or a comma list, got {text!r}") from None
        if not ks or min(ks) < 1:
            raise ConfigError(f"k_range: needs positive K values, got {text!r}")
        return ks

    def ratios(self) -> np.ndarray:
        text = self.ratio_grid
        try:
            if isinstance(text, (list, tuple)):
                grid = np.array([float(x) for x in text])
            elif ".." in text:
                span, _, count = text.partition(":")
                lo, hi = (float(x) for x in span.split(".."))
                grid = np.geomspace(lo, hi, int(count or 25))
            else:
                grid = np.array([float(x) for x in text.split(",")])
        except ValueError:
            raise ConfigError(f"ratio_grid: expected 'LO..HI:N' or a comma list, got {text!r}") from None
        if grid.size < 2 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
            raise ConfigError("ratio_grid: must be a positive increasing grid with at least 2 points")
        return grid


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}
_INT_FIELDS = {"k", "restarts", "seed", "k_total", "n", "k_w", "k_b"}


def load_config(path: str | None, preset: str | None, overrides: dict) -> RunConfig:
    values: dict = {}
    file_values: dict = {}
    if path is not None:
        try:
            file_values = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {path}: {exc}") from None
        if not isinstance(file_values, dict):
            raise ConfigError("config: expected a flat JSON object")
        if "out" in file_values and "output_path" not in file_values:
            file_values["output_path"] = file_values.pop("out")
        unknown = sorted(set(file_values) - _FIELDS)
        if unknown:
            raise ConfigError(f"{unknown[0]}: unknown configuration key")
    name = overrides.get("preset") or preset or file_values.get("preset")
    if name is not None:
        if name not in PRESETS:
            raise ConfigError(f"preset: unknown preset {name!r}; choose from {sorted(PRESETS)}")
        values.update(PRESETS[name])
        values["preset"] = name
    values.update(file_values)
    values.update({k: v for k, v in overrides.items() if v is not None})
    for key in _INT_FIELDS:
        v = values.get(key)
        if isinstance(v, float) and v.is_integer():
            values[key] = int(v)
    return RunConfig(**values).validate()


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_tables(tables: list[tuple[str, list[str], list[list]]], cfg: RunConfig, stdout) -> None:
    """Write named tables; the first one is the command's primary table."""
    if cfg.format == "json":
        doc = {name: {c: [_jsonable(r[i]) for r in rows] for i, c in enumerate(cols)}
               for name, cols, rows in tables}
        text = json.dumps(doc, indent=2) + "\n"
        if cfg.output_path:
            Path(cfg.output_path).write_text(text)
        else:
            stdout.write(text)
        return
    if cfg.output_path:
        out = Path(cfg.output_path)
        for i, (name, cols, rows) in enumerate(tables):
            target = out if i == 0 else out.with_name(f"{out.stem}_{name}{out.suffix or '.csv'}")
            target.write_text(_csv_text(cols, rows))
        return
    for i, (name, cols, rows) in enumerate(tables):
        if len(tables) > 1:
            stdout.write(("\n" if i else "") + f"# {name}\n")
        stdout.write(_csv_text(cols, rows))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _design(cfg: RunConfig, k: int):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        return design_lloyd_max(cfg.model(), cfg.costs(), cfg.prior_dist(), k, cfg.options())


def cmd_design(cfg: RunConfig, stdout=sys.stdout, save_quantizer: str | None = None) -> int:
    model, costs, prior = cfg.model(), cfg.costs(), cfg.prior_dist()
    q, report = _design(cfg, cfg.k)
    q_mae = design_mae(prior, cfg.k)
    cells = [[j + 1, q.boundaries[j], q.boundaries[j + 1], q.reps[j], q_mae.reps[j]] for j in range(q.k)]
    summary = [[q.k, report.mbre, mbre(model, costs, prior, q_mae), report.iterations,
                report.converged, report.restarts_used]]
    write_tables([
        ("quantizer", ["cell", "lower", "upper", "rep", "mae_rep"], cells),
        ("summary", ["K", "mbre", "mbre_mae", "iterations", "converged", "restarts"], summary),
    ], cfg, stdout)
    if save_quantizer:
        Path(save_quantizer).write_text(q.dumps() + "\n")
    return EXIT_OK if report.converged else EXIT_NONCONVERGED


def cmd_sweep(cfg: RunConfig, stdout=sys.stdout) -> int:
    model, costs, prior = cfg.model(), cfg.costs(), cfg.prior_dist()
    rows, ok = [], True
    for k in cfg.ks():
        q, report = _design(cfg, k)
        ok &= report.converged
        rows.append([k, report.mbre, mbre(model, costs, prior, design_mae(prior, k)),
                     report.iterations, report.converged])
    write_tables([("sweep", ["K", "mbre_opt", "mbre_mae", "iterations", "converged"], rows)], cfg, stdout)
    return EXIT_OK if ok else EXIT_NONCONVERGED


def cmd_highrate(cfg: RunConfig, stdout=sys.stdout) -> int:
    model, costs, prior = cfg.model(), cfg.costs(), cfg.prior_dist()
    ks = cfg.ks(default="1,2,4,8,16,32,64")
    dist = []
    for k in ks:
        s = distortion_bound(model, costs, prior, k)
        dist.append([k, s.rate_bits, s.d_l, mae_distortion(model, costs, prior, k)])
    grid = np.linspace(0.0, 1.0, 512)
    inner = np.clip(grid, 1e-12, 1.0 - 1e-12)
    lam = np.asarray(point_density(model, costs, prior, inner))
    lam_mae = np.asarray(mae_point_density(prior, inner))
    density = [[float(p), float(x), float(y)] for p, x, y in zip(grid, lam, lam_mae)]
    s = distortion_bound(model, costs, prior, 1)
    gap = [[rate_gap(model, costs, prior), s.norm_one_third]]
    write_tables([
        ("distortion", ["K", "rate_bits", "dl_mbre", "dl_mae"], dist),
        ("density", ["p0", "lambda_mbre", "lambda_mae"], density),
        ("gap", ["rate_gap_bits", "norm_one_third"], gap),
    ], cfg, stdout)
    return EXIT_OK


def cmd_populations(cfg: RunConfig, stdout=sys.stdout) -> int:
    model, costs, prior = cfg.model(), cfg.costs(), cfg.prior_dist()
    opts = cfg.options()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        res = allocate(model, costs, prior, cfg.scenario(), opts)
        k_w = cfg.k_w if cfg.k_w is not None else res.k_w
        k_b = cfg.k_b if cfg.k_b is not None else res.k_b
        grid = cfg.ratios()
        deltas = delta_curve(model, prior, k_w, k_b, grid, opts)
        try:
            m = dividing_line_scan(model, prior, k_w, k_b, grid, opts)
        except ValueError:
            m = float("nan")
    alloc_rows = [[kw, kb, d2, (kw, kb) == (res.k_w, res.k_b)] for kw, kb, d2 in res.per_allocation_d2]
    write_tables([
        ("allocation", ["k_w", "k_b", "d2", "chosen"], alloc_rows),
        ("delta", ["ratio_c01_c10", "delta"], [[float(r), float(d)] for r, d in zip(grid, deltas)]),
        ("summary", ["k_w", "k_b", "d2", "delta_k_w", "delta_k_b", "crossing_ratio"],
         [[res.k_w, res.k_b, res.d2, k_w, k_b, m]]),
    ], cfg, stdout)
    return EXIT_OK


def verification_rows(cfg: RunConfig, tamper: dict | None = None) -> list[list]:
    """Analytic vs Monte Carlo comparison rows for the configured setting."""
    model, costs, prior = cfg.model(), cfg.costs(), cfg.prior_dist()
    q, _ = _design(cfg, cfg.k)
    p1, p2 = error_probabilities(model, costs, cfg.a)
    s1, s2 = simulate_error_probabilities(model, costs, cfg.a, cfg.n, cfg.seed)
    checks = [
        ("p_I", p1, s1),
        ("p_II", p2, s2),
        ("mbre", mbre(model, costs, prior, q), simulate_mbre(model, costs, prior, q, cfg.n, cfg.seed)),
        ("decision_rate", decision_rate(model, costs, prior, q),
         simulate_decision_rate(model, costs, prior, q, cfg.n, cfg.seed)),
    ]
    rows = []
    for name, analytic, sim in checks:
        analytic = float(analytic) + (tamper or {}).get(name, 0.0)
        z = (analytic - sim.estimate) / sim.std_error if sim.std_error > 0 else (0.0 if analytic == sim.estimate else math.inf)
        rows.append([name, analytic, sim.estimate, sim.std_error, z, abs(z) <= 4.0])
    return rows


def cmd_verify(cfg: RunConfig, stdout=sys.stdout, tamper: dict | None = None) -> int:
    rows = verification_rows(cfg, tamper)
    write_tables([("verify", ["quantity", "analytic", "empirical", "std_error", "z", "pass"], rows)], cfg, stdout)
    return EXIT_OK if all(r[-1] for r in rows) else EXIT_VERIFY


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat JSON configuration file")
    common.add_argument("--preset", choices=sorted(PRESETS))
    common.add_argument("--mu", type=float)
    common.add_argument("--sigma", type=float)
    common.add_argument("--c10", type=float)
    common.add_argument("--c01", type=float)
    common.add_argument("--prior", metavar="STR", help="'uniform' or 'beta:ALPHA,BETA'")
    common.add_argument("--k", type=int, metavar="N")
    common.add_argument("--k-range", dest="k_range", metavar="A..B")
    common.add_argument("--restarts", type=int)
    common.add_argument("--tolerance", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", dest="output_path", metavar="PATH")
    common.add_argument("--format", choices=["csv", "json"])

    parser = _Parser(prog="priorquant", description="Quantizers of prior probabilities for hypothesis testing.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("design", parents=[common], help="design one MBRE-optimal quantizer")
    p.add_argument("--save-quantizer", metavar="PATH", help="also write the 'K; b...; a...' record")
    sub.add_parser("sweep", parents=[common], help="MBRE against K for the optimal and MAE quantizers")
    sub.add_parser("highrate", parents=[common], help="high-rate distortion, point densities and rate gap")
    p = sub.add_parser("populations", parents=[common], help="two-population allocation and Delta scan")
    p.add_argument("--w", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--k-total", dest="k_total", type=int)
    p.add_argument("--k-w", dest="k_w", type=int)
    p.add_argument("--k-b", dest="k_b", type=int)
    p.add_argument("--ratio-grid", dest="ratio_grid", metavar="LO..HI:N")
    p = sub.add_parser("verify", parents=[common], help="Monte Carlo cross-check of analytic values")
    p.add_argument("--n", type=int)
    p.add_argument("--a", type=float, help="assumed prior for the error-probability check")
    p.add_argument("--tamper", action="append", default=[], help=argparse.SUPPRESS)
    return parser


def main(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = _build_parser()
    args = parser.parse_args(argv)
    keys = ("preset", "mu", "sigma", "c10", "c01", "prior", "k", "k_range", "restarts", "tolerance",
            "seed", "output_path", "format", "w", "b", "k_total", "k_w", "k_b", "ratio_grid", "n", "a")
    overrides = {k: getattr(args, k, None) for k in keys}
    try:
        cfg = load_config(args.config, None, overrides)
        tamper = {}
        for item in getattr(args, "tamper", []):
            name, _, value = item.partition("=")
            tamper[name] = float(value)
    except (ConfigError, ValueError) as exc:
        print(f"priorquant: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "design":
        return cmd_design(cfg, stdout, args.save_quantizer)
    if args.command == "sweep":
        return cmd_sweep(cfg, stdout)
    if args.command == "highrate":
        return cmd_highrate(cfg, stdout)
    if args.command == "populations":
        return cmd_populations(cfg, stdout)
    return cmd_verify(cfg, stdout, tamper)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
