"""Acceptance criteria 1-11.

Each test records one PASS/FAIL line, printed in the pytest terminal summary
(and by ``python3 tests/test_acceptance.py``).  Tolerances and runtime limits
are the stated ones.
"""

import subprocess
import sys
import time

import numpy as np
import pytest

from priorquant.cli import RunConfig, verification_rows
from priorquant.design import brute_force_design, design_lloyd_max, design_mae, mbre
from priorquant.detection import (
    CostPair,
    GaussianMeasurementModel,
    bayes_risk_error,
    curvature,
    curvature_from_slope,
    error_probabilities,
    error_probability_derivatives,
    error_probability_second_derivatives,
)
from priorquant.highrate import distortion_bound, rate_gap
from priorquant.populations import PopulationScenario, allocate, discrimination_delta, dividing_line_scan
from priorquant.priors import parse_prior

M = GaussianMeasurementModel(1.0, 1.0)
EQ = CostPair(1.0, 1.0)
U = parse_prior("uniform")
B52 = parse_prior("beta:5,2")
PRESETS = {
    "uniform-equal": (EQ, U),
    "uniform-c4": (CostPair(1.0, 4.0), U),
    "beta52-equal": (EQ, B52),
}

RESULTS: dict[int, str] = {}


def record(n: int, title: str, ok: bool, detail: str) -> None:
    RESULTS[n] = f"criterion {n:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    print(RESULTS[n])
    assert ok, RESULTS[n]


def test_criterion_01_nonnegativity_and_convexity():
    t0 = time.perf_counter()
    g = np.arange(1, 100) / 100.0
    p, a = np.meshgrid(g, g, indexing="ij")
    d = bayes_risk_error(M, EQ, p, a)
    diag = np.array([bayes_risk_error(M, EQ, x, x) for x in g])
    # second differences in p0 on the grid (step 0.01) for every a
    second = d[2:, :] - 2.0 * d[1:-1, :] + d[:-2, :]
    elapsed = time.perf_counter() - t0
    ok = d.min() >= -1e-12 and diag.max() <= 1e-12 and second.min() >= -1e-9 and elapsed < 5.0
    record(1, "d >= 0, d(a,a) = 0, convex in p0", ok,
           f"min d={d.min():.3g}, max d(a,a)={diag.max():.3g}, min 2nd diff={second.min():.3g}, {elapsed:.2f}s")


def test_criterion_02_single_stationary_point():
    t0 = time.perf_counter()
    a = np.arange(1, 1000) / 1000.0
    changes = []
    for p0 in np.arange(1, 10) / 10.0:
        deriv = np.gradient(bayes_risk_error(M, EQ, p0, a), a)
        s = np.sign(deriv)
        s = s[s != 0]
        changes.append(int(np.sum(s[1:] != s[:-1])))
    elapsed = time.perf_counter() - t0
    ok = all(c == 1 for c in changes) and elapsed < 5.0
    record(2, "d/da changes sign exactly once", ok, f"sign changes per p0={changes}, {elapsed:.2f}s")


def test_criterion_03_closed_forms():
    worst1 = worst2 = 0.0
    configs = [(M, EQ), (M, CostPair(1.0, 4.0)), (GaussianMeasurementModel(2.0, 0.7), CostPair(3.0, 0.5))]
    for model, costs in configs:
        for a in (0.2, 0.3, 0.5, 0.7, 0.8):
            h = 1e-6
            hi, lo = error_probabilities(model, costs, a + h), error_probabilities(model, costs, a - h)
            for exact, fd in zip(error_probability_derivatives(model, costs, a),
                                 ((hi[0] - lo[0]) / (2 * h), (hi[1] - lo[1]) / (2 * h))):
                worst1 = max(worst1, abs(exact - fd) / abs(exact))
            h = 1e-4
            hi, mid, lo = (error_probabilities(model, costs, x) for x in (a + h, a, a - h))
            for i, exact in enumerate(error_probability_second_derivatives(model, costs, a)):
                fd = (hi[i] - 2 * mid[i] + lo[i]) / h**2
                worst2 = max(worst2, abs(exact - fd) / abs(exact))
    p = np.linspace(0.01, 0.99, 99)
    worst_b = max(float(np.max(np.abs(curvature(m, c, p) / curvature_from_slope(m, c, p) - 1.0))) for m, c in configs)
    ok = worst1 <= 1e-5 and worst2 <= 1e-4 and worst_b <= 1e-10
    record(3, "derivative closed forms and B", ok,
           f"first rel err={worst1:.2g}, second rel err={worst2:.2g}, B rel err={worst_b:.2g}")


def test_criterion_04_low_rate_uniform():
    q1, _ = design_lloyd_max(M, EQ, U, 1)
    q2, _ = design_lloyd_max(M, EQ, U, 2)
    m1, m2 = design_mae(U, 1), design_mae(U, 2)
    err = max(abs(q1.reps[0] - 0.5), abs(q2.boundaries[1] - 0.5),
              abs(q2.reps[0] - 0.25), abs(q2.reps[1] - 0.75),
              *np.abs(np.subtract(q1.reps, m1.reps)), *np.abs(np.subtract(q2.reps, m2.reps)),
              *np.abs(np.subtract(q2.boundaries, m2.boundaries)))
    record(4, "K=1,2 designs equal the uniform quantizer", err <= 1e-8, f"max deviation={err:.2g}")


def test_criterion_05_reps_pulled_to_center():
    details, ok = [], True
    for k in (3, 4):
        q, _ = design_lloyd_max(M, EQ, U, k)
        uni = (2 * np.arange(1, k + 1) - 1) / (2 * k)
        for a, u in zip(q.reps, uni):
            if abs(u - 0.5) < 1e-15:
                inside = abs(a - 0.5) < 1e-8
            else:
                inside = min(u, 0.5) < a < max(u, 0.5)
            ok &= bool(inside)
        details.append(f"K={k} reps={np.round(q.reps, 4).tolist()}")
    record(5, "K=3,4 reps between uniform reps and 1/2", ok, "; ".join(details))


def test_criterion_06_monotone_and_beats_mae():
    t0 = time.perf_counter()
    ok, worst_inc, worst_gap = True, -np.inf, -np.inf
    for costs, prior in PRESETS.values():
        d = np.array([design_lloyd_max(M, costs, prior, k)[1].mbre for k in range(1, 9)])
        dm = np.array([mbre(M, costs, prior, design_mae(prior, k)) for k in range(1, 9)])
        worst_inc = max(worst_inc, float(np.max(np.diff(d))))
        worst_gap = max(worst_gap, float(np.max(d - dm)))
    elapsed = time.perf_counter() - t0
    ok = worst_inc <= 1e-10 and worst_gap <= 0.0 and elapsed < 60.0
    record(6, "MBRE*(K) nonincreasing and <= MAE", ok,
           f"max increase={worst_inc:.3g}, max(opt - mae)={worst_gap:.3g}, {elapsed:.1f}s")


def test_criterion_07_brute_force():
    t0 = time.perf_counter()
    margins = []
    for k in (1, 2, 3):
        lm = design_lloyd_max(M, EQ, U, k)[1].mbre
        bf = mbre(M, EQ, U, brute_force_design(M, EQ, U, k, 2e-3))
        margins.append(lm - bf)
    elapsed = time.perf_counter() - t0
    ok = max(margins) <= 1e-6 and elapsed < 600.0
    record(7, "Lloyd-Max no worse than brute force", ok,
           f"lloyd - brute per K={[f'{m:.3g}' for m in margins]}, {elapsed:.1f}s")


def test_criterion_08_high_rate():
    ks = (8, 16, 32, 64)
    rel = []
    for k in ks:
        dl = distortion_bound(M, EQ, U, k).d_l
        rel.append(abs(design_lloyd_max(M, EQ, U, k)[1].mbre - dl) / dl)
    gaps = [rate_gap(M, c, p) for c, p in PRESETS.values()]
    ok = rel[-1] <= 0.10 and all(np.diff(rel) < 0) and max(gaps) <= 0.0
    record(8, "high-rate D_L consistency", ok,
           f"rel err K=8..64={[f'{r:.3g}' for r in rel]}, rate gaps={[f'{g:.4f}' for g in gaps]}")


def test_criterion_09_monte_carlo():
    cfg = RunConfig(k=3, n=10**6)
    hits = {}
    for seed in range(20):
        cfg.seed = seed
        for name, *_, passed in verification_rows(cfg):
            hits[name] = hits.get(name, 0) + int(passed)
    ok = len(hits) == 4 and min(hits.values()) >= 19
    record(9, "Monte Carlo within 4 SE", ok, ", ".join(f"{k} {v}/20" for k, v in hits.items()))


def test_criterion_10_dividing_line():
    grid = np.geomspace(1 / 8, 8, 25)
    m_u = dividing_line_scan(M, U, 3, 2, grid)
    m_b = dividing_line_scan(M, B52, 3, 2, grid)
    same = [discrimination_delta(M, c, p, k, k) for c, p in PRESETS.values() for k in (1, 3, 6)]
    configs = [(c, p, PopulationScenario(w, 1.0, kt)) for (c, p) in ((EQ, U), (EQ, B52)) for w, kt in ((3.0, 5), (2.0, 6), (10.0, 7))]
    splits = [(r.k_w, r.k_b) for r in (allocate(M, c, p, s) for c, p, s in configs)]
    ok = abs(m_u - 1.0) <= 1e-3 and m_b > 1.0 and all(x == 0.0 for x in same) and all(kw >= kb for kw, kb in splits)
    record(10, "dividing line and majority allocation", ok,
           f"m uniform={m_u:.6f}, m beta52={m_b:.4f}, Delta(k,k) all zero={all(x == 0.0 for x in same)}, splits={splits}")


def test_criterion_11_cli_determinism(tmp_path):
    commands = [
        ["design", "--k", "4", "--preset", "beta52-equal"],
        ["sweep", "--k-range", "1..5", "--preset", "uniform-c4"],
        ["highrate"],
        ["populations"],
        ["verify", "--n", "200000"],
    ]
    same = []
    for args in commands:
        outs = []
        for run in range(2):
            for fmt in ("csv", "json"):
                target = tmp_path / f"{args[0]}_{run}.{fmt}"
                proc = subprocess.run([sys.executable, "-m", "priorquant", *args, "--seed", "5",
                                       "--format", fmt, "--out", str(target)], capture_output=True)
                siblings = sorted(tmp_path.glob(f"{args[0]}_{run}_*.{fmt}"))
                outs.append((run, fmt, proc.returncode,
                             target.read_bytes() + b"".join(s.read_bytes() for s in siblings)))
        by_fmt = {}
        for run, fmt, code, data in outs:
            by_fmt.setdefault(fmt, []).append((code, data))
        same.append(all(v[0] == v[1] and v[0][0] == 0 for v in by_fmt.values()))
    record(11, "CLI output byte-identical across runs", all(same),
           ", ".join(f"{c[0]}={'same' if s else 'DIFFERENT'}" for c, s in zip(commands, same)))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
