"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line (echoed in the terminal summary) and
then asserts, so a red criterion shows both in the summary and as a failure.
Targets are the reference values; where our computation disagrees the
criterion is left red rather than loosened.
"""

import json
import time

import numpy as np
import pytest

from conftest import proportional_pair, random_mixture, record
from ridgetopo import cli, curvature, model, oracle, piplot, ridgeline as rl, topo
from ridgetopo.model import FIXTURE_DIR, Mixture


def within(values, targets, tol):
    values, targets = np.asarray(values, dtype=float), np.asarray(targets, dtype=float)
    return values.shape == targets.shape and bool(np.all(np.abs(values - targets) <= tol))


def fmt(values):
    return "(" + ", ".join(f"{v:.6g}" for v in np.atleast_1d(values)) + ")"


def test_criterion_01_example1_analyze(tmp_path):
    path = tmp_path / "report.json"
    start = time.perf_counter()
    code = cli.main(["analyze", str(FIXTURE_DIR / "example1.json"), "--out", str(path)])
    elapsed = time.perf_counter() - start
    rep = json.loads(path.read_text())
    ok = code == 0 and rep["mode_count"] == 3 and rep["saddle_count"] == 2 and elapsed < 1.0
    assert record(1, "Example 1 has 3 modes and 2 saddles in < 1 s", ok,
                  f"{rep['mode_count']} modes, {rep['saddle_count']} saddles, {elapsed:.2f} s")


def test_criterion_02_example1_bands(ex1):
    bands = piplot.modality_bands(ex1, 0, 1)
    tri = bands.region(3)
    uni = (bands.breakpoints[0], bands.breakpoints[-1])
    ok_tri = within(tri, (0.256, 0.744), 1.5e-3)
    ok_uni = within(uni, (0.0225, 0.975), 1.5e-3)
    assert record(2, "Example 1 trimodal band and unimodal thresholds (+-1.5e-3)", ok_tri and ok_uni,
                  f"trimodal {fmt(tri)} vs (0.256, 0.744) {'ok' if ok_tri else 'off'}; "
                  f"thresholds {fmt(uni)} vs (0.0225, 0.975) {'ok' if ok_uni else 'off'}")


def test_criterion_03_example1_crossings(ex1):
    sol = piplot.solve_pi_equation(ex1, 0, 1, 0.5)
    alphas = [s.alpha for s in sol]
    ok = len(sol) == 5 and within(alphas[1:4], (0.004, 0.5, 0.996), 1e-3)
    assert record(3, "Example 1 has five crossings at pi = 0.5, middle three at (0.004, 0.5, 0.996) +-1e-3", ok,
                  f"{len(sol)} crossings at {fmt(alphas)}")


def test_criterion_04_example2(ex2):
    start = time.perf_counter()
    rep = topo.full_topography(ex2)
    bands = piplot.modality_bands(ex2, 0, 1)
    elapsed = time.perf_counter() - start
    modes = sorted(c.alpha[1] for c in rep.modes)
    checks = {
        "modes": within(modes, (0.00084, 0.137, 0.863, 0.99916), 1e-4),
        "4-band": within(bands.region(4), (0.49974, 0.50026), 1e-4),
        ">=2-band": within(bands.region(2), (0.25, 0.75), 1e-3),
        ">=3-band": within(bands.region(3), (0.489, 0.511), 1e-3),
        "time": elapsed < 5.0,
    }
    detail = (f"modes {fmt(modes)}; 4-band {fmt(bands.region(4))}; >=2 {fmt(bands.region(2))}; "
              f">=3 {fmt(bands.region(3))}; {elapsed:.2f} s; failing: "
              + (", ".join(k for k, v in checks.items() if not v) or "none"))
    assert record(4, "Example 2 mode locations and bands", all(checks.values()), detail)


def test_criterion_05_example3(ex3):
    grid = rl.simplex_grid_elevation(ex3, 200)
    rep = topo.full_topography(ex3, resolution=200)
    dist = [float(np.min(np.linalg.norm(ex3.means - c.x, axis=1))) for c in rep.modes]
    ok = len(grid.maxima()) == 3 and rep.mode_count == 3 and max(dist) <= 0.25
    assert record(5, "Example 3 has 3 grid modes, each within 0.25 of a mean", ok,
                  f"{len(grid.maxima())} grid maxima, {rep.mode_count} refined modes, distances {fmt(dist)}")


def test_criterion_06_example4(ex4):
    start = time.perf_counter()
    rep = topo.full_topography(ex4, resolution=400)
    elapsed = time.perf_counter() - start
    crossings = [len(piplot.solve_pi_equation(ex4, i, j, topo.pair_weight(ex4, i, j))) for i, j in ((0, 1), (1, 2))]
    ok = rep.mode_count == 5 and crossings == [5, 5] and elapsed < 30.0
    assert record(6, "Example 4 has 5 modes; pairs {1,2} and {2,3} cross 5 times", ok,
                  f"{rep.mode_count} modes in {elapsed:.2f} s, crossings {crossings}")


def test_criterion_07_example1_arclength(ex1):
    total = rl.arclength(ex1, 1.0)
    centre = min(topo.full_topography(ex1).modes, key=lambda c: abs(c.alpha[1] - 0.5))
    at_mode = rl.arclength(ex1, float(centre.alpha[1]))
    ok_total, ok_mode = abs(total - 2.0) <= 0.05, abs(at_mode - 1.0) <= 0.05
    assert record(7, "Example 1 arclength L(1) = 2 and central mode at L = 1 (+-0.05)", ok_total and ok_mode,
                  f"L(1) = {total:.6f} {'ok' if ok_total else 'off'}; "
                  f"central mode at L = {at_mode:.6f} {'ok' if ok_mode else 'off'}")


def test_criterion_08_closed_forms():
    rng = np.random.default_rng(2024)
    disagree, worst, bimodal = 0, 0.0, 0
    for _ in range(200):
        m = proportional_pair(rng)
        rep = curvature.special_case_analysis(m, 0, 1)
        bands = piplot.modality_bands(m, 0, 1)
        unimodal = all(b.modes == 1 for b in bands.bands)
        if unimodal != rep.unimodal_for_all_pi or not rep.routes_agree:
            disagree += 1
        elif not unimodal:
            bimodal += 1
            worst = max(worst, float(np.max(np.abs(np.subtract(bands.region(2), rep.pi_interval)))))
    bound = curvature.rf_bound(1.0)
    ok = disagree == 0 and worst <= 1e-8 and bound == 4.0
    assert record(8, "Closed forms agree with bands on 200 proportional pairs; rf_bound(1) = 4", ok,
                  f"{disagree} disagreements, {bimodal} bimodal, worst endpoint gap {worst:.2e}, "
                  f"rf_bound(1) = {bound!r}")


@pytest.mark.slow
def test_criterion_09_oracle_equivalence():
    rng = np.random.default_rng(9)
    start = time.perf_counter()
    mismatched, worst = [], 0.0
    for n in range(100):
        m = random_mixture(rng, k=2, d=int(rng.integers(1, 4)))
        exact = np.array(sorted(tuple(c.x) for c in topo.full_topography(m).modes))
        grid = np.array(sorted(tuple(x) for x in oracle.grid_modes(m)))
        if exact.shape != grid.shape:
            mismatched.append(n)
            continue
        worst = max(worst, float(np.max(np.abs(exact - grid))))
    elapsed = time.perf_counter() - start
    ok = not mismatched and worst <= 1e-3 and elapsed < 300.0
    assert record(9, "Grid oracle and exact topography agree on 100 random pairs", ok,
                  f"count mismatches {mismatched}, worst location gap {worst:.2e}, {elapsed:.1f} s")


def test_criterion_10_identities():
    rng = np.random.default_rng(10)
    fixed_point = 0.0
    for n in (1, 2, 3, 4):
        m = model.load_example(n)
        for c in topo.full_topography(m).critical_points:
            fixed_point = max(fixed_point, float(np.max(np.abs(model.posterior(m, c.x) - c.alpha))))

    symmetry, ends, fd_g, fd_h, orth_fail = 0.0, 0.0, 0.0, 0.0, 0
    for _ in range(50):
        d = int(rng.integers(1, 4))
        m = random_mixture(rng, k=2, d=d)
        fixed_point = max(fixed_point, max(
            float(np.max(np.abs(model.posterior(m, c.x) - c.alpha))) for c in topo.full_topography(m).critical_points))
        t = rng.uniform(0.01, 0.99)
        p1, p2 = m.precs
        s = (1 - t) * p1 + t * p2
        left, right = p1 @ np.linalg.solve(s, p2), p2 @ np.linalg.solve(s, p1)
        symmetry = max(symmetry, float(np.max(np.abs(left - right)) / np.max(np.abs(left))))
        _, q, _ = curvature.curvature_arrays(m, 0, 1, [0.0, 1.0])
        ends = max(ends, float(np.max(np.abs(q - 1.0))))
        for x in oracle.random_points(m, 4, seed=int(rng.integers(1 << 30))):
            g, h = oracle.derivative_errors(m, x)
            fd_g, fd_h = max(fd_g, g), max(fd_h, h)

        # maximality across the ridgeline, in dimensions where there is an across
        k = int(rng.integers(2, 4))
        m = random_mixture(rng, k=k, d=int(rng.integers(k, 5)))
        alpha = rng.dirichlet(np.ones(k))
        x0 = rl.ridgeline_point(m, alpha)
        reach = 3.0 * np.sqrt(max(np.linalg.norm(c, 2) for c in m.covs))
        deltas = np.linspace(-reach, reach, 121)
        deltas = deltas[np.abs(deltas) > 1e-9]
        for w in rl.tangent_frame(m, alpha).w_basis:
            pts = x0 + deltas[:, None] * (w / np.linalg.norm(w))
            if not np.all(model.log_density(m, pts) < model.log_density(m, x0)):
                orth_fail += 1

    checks = {"fixed point": fixed_point <= 1e-8, "symmetry": symmetry <= 1e-10, "q ends": ends <= 1e-12,
              "orthogonal maximality": orth_fail == 0, "fd gradient": fd_g <= 1e-5, "fd hessian": fd_h <= 1e-4}
    detail = (f"fixed point {fixed_point:.1e}, symmetry {symmetry:.1e}, q ends {ends:.1e}, "
              f"orthogonal failures {orth_fail}/50, fd gradient {fd_g:.1e}, fd hessian {fd_h:.1e}")
    assert record(10, "Identity suite", all(checks.values()), detail)


def test_criterion_11_real_data():
    """Non-blocking: the original fits are not recoverable, so this only checks the qualitative story."""
    datasets = pytest.importorskip("sklearn.datasets")
    from ridgetopo import em

    x = datasets.load_iris().data
    fit = em.fit_em(x, 3, n_seeds=50, seed=0)
    counts = [topo.analyze_pair(fit.mixture, i, j).mode_count
              for i, j in ((0, 1), (1, 2), (0, 2))]
    iris_ok = all(c >= 2 for c in counts)
    record(11, "Real data (non-blocking): iris pairs bimodal; skull data not bundled", iris_ok,
           f"iris log-likelihood {fit.log_likelihood:.3f}, pairwise mode counts {counts}; "
           "skull periods unavailable offline, not run")
    assert iris_ok


def test_single_gaussian_sanity():
    # not a numbered criterion; guards the K = 1 path used by every workflow above
    m = Mixture.from_arrays([[0.0, 0.0]], [np.eye(2)], [1.0])
    assert topo.full_topography(m).mode_count == 1
