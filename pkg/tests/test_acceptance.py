"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line; the lines are repeated
in the terminal summary. Data are regenerated from fixed input
ellipsoids with seeds 0..49.
"""
import time

import numpy as np
import pytest

import ellipsoid_fit.fit as fit_mod
from ellipsoid_fit import FitConfig, fit_ellipsoid, single_pass_fit
from ellipsoid_fit.lsq import inner_fit
from ellipsoid_fit.orientation import angle_difference, euler_to_matrix, matrix_to_euler
from ellipsoid_fit.quadric import constraint_matrix, invariants_IJ
from ellipsoid_fit.synth import SynthSpec, generate, sample_quadric

SEEDS = range(50)
RESULTS: dict[str, str] = {}

ALIGNED_CHI_1_5 = ((12, 10, 8), (0, 0, 0))
ALIGNED_CHI_5 = ((5, 3, 1), (0, 0, 0))
ALIGNED_CHI_10 = ((10, 6, 1), (0, 0, 0))
TILTED_CHI_1_5 = ((12, 10, 8), (30, 80, 70))
TILTED_ASCENDING = ((1, 3, 5), (70, 10, 30))
TILTED_CHI_10 = ((10, 3, 1), (50, 60, 40))
EXTREME = ((10000, 50, 1), (30, 80, 70))


def report(name: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    RESULTS[name] = line
    print(line)


class Run:
    """One fit of one seeded data set, with its errors against the truth."""

    def __init__(self, axes, angles, seed, method="iterative"):
        self.spec = SynthSpec(axes, angles, n_points=6, seed=seed)
        self.points = generate(self.spec)
        cfg = FitConfig(rng_seed=seed, axis_order=self.spec.semi_axes)
        fitter = fit_ellipsoid if method == "iterative" else single_pass_fit
        t0 = time.perf_counter()
        self.report = fitter(self.points, cfg)
        self.seconds = time.perf_counter() - t0
        g = self.report.geometry
        truth = np.asarray(axes, dtype=float)
        self.axis_err = float(np.max(np.abs(np.asarray(g.semi_axes) - truth) / truth))
        self.angle_err = max(angle_difference(a, b) for a, b in zip(g.euler_deg, angles))

    def ok(self, axis_tol, angle_tol=np.inf) -> bool:
        return self.report.converged and self.axis_err <= axis_tol and self.angle_err <= angle_tol


_cache: dict = {}


def runs(case, method="iterative") -> list[Run]:
    key = (case, method)
    if key not in _cache:
        _cache[key] = [Run(*case, seed, method) for seed in SEEDS]
    return _cache[key]


def surface_residual(rep) -> float:
    d = rep.points - np.asarray(rep.geometry.center)
    return float(np.abs(np.einsum("ni,ij,nj->n", d, rep.fisher_original_frame, d) - 1).max())


def test_criterion_1_aligned_low_elongation():
    rs = runs(ALIGNED_CHI_1_5)
    good = sum(r.ok(1e-3, 0.01) for r in rs)
    slowest = max(r.seconds for r in rs)
    ok = good == 50 and slowest < 0.1
    report("criterion 1 (chi=1.5 aligned)", ok,
           f"{good}/50 within 1e-3 rel and 0.01 deg; slowest fit {slowest:.4f} s")
    assert ok


def test_criterion_2_aligned_elongated():
    counts = [sum(r.ok(1e-3) for r in runs(t)) for t in (ALIGNED_CHI_5, ALIGNED_CHI_10)]
    ok = counts == [50, 50]
    report("criterion 2 (chi=5, 10 aligned)", ok,
           f"(5,3,1): {counts[0]}/50, (10,6,1): {counts[1]}/50 within 1e-3 rel")
    assert ok


def test_criterion_3_non_aligned():
    tilted = (TILTED_CHI_1_5, TILTED_ASCENDING, TILTED_CHI_10)
    counts = [sum(r.ok(1e-2, 0.1) for r in runs(t)) for t in tilted]
    worst = max(r.angle_err for t in tilted for r in runs(t))
    ok = min(counts) >= 48
    report("criterion 3 (non-aligned)", ok,
           f"counts {counts} of 50 within 1e-2 rel and 0.1 deg; worst angle err {worst:.2e} deg")
    assert ok


def test_criterion_4_baseline_contrast():
    lines, ok = [], True
    for t in (ALIGNED_CHI_5, ALIGNED_CHI_10, TILTED_CHI_10):
        base_bad = sum(r.axis_err > 0.05 for r in runs(t, "single-pass"))
        it_good = sum(r.axis_err < 0.01 for r in runs(t))
        ok &= base_bad >= 40 and it_good == 50
        lines.append(f"{t[0]}: baseline >5% in {base_bad}/50, iterative <1% in {it_good}/50")
    report("criterion 4 (baseline contrast)", ok, "; ".join(lines))
    assert ok


def test_criterion_5_extreme_elongation():
    rs = runs(EXTREME)
    good = 0
    for r in rs:
        trace = [rec.off_diag_norm for rec in r.report.per_iteration_trace]
        falls = trace[-1] <= 1e-8 and trace[-1] < trace[0]
        good += r.ok(1e-3, 0.1) and r.report.outer_iterations <= 100 and falls
    slowest = max(r.seconds for r in rs)
    ok = good >= 45 and slowest < 5.0
    report("criterion 5 (chi=1e4)", ok,
           f"{good}/50 converged within 1e-3 rel and 0.1 deg; slowest fit {slowest:.3f} s")
    assert ok


def test_criterion_6_iteration_budget():
    rs = runs(EXTREME)
    inner = float(np.median([r.report.inner_iterations for r in rs]))
    outer = float(np.median([r.report.outer_iterations for r in rs]))
    ok = inner <= 80 and outer <= 40
    report("criterion 6 (iteration budget)", ok,
           f"median inner {inner:g} (<= 80), median outer {outer:g} (<= 40)")
    assert ok


@pytest.fixture
def recorded_inner_fits(monkeypatch):
    seen = []

    def spy(*args, **kwargs):
        fit = inner_fit(*args, **kwargs)
        seen.append(fit)
        return fit

    monkeypatch.setattr(fit_mod, "inner_fit", spy)
    return seen


def test_criterion_7_properties(recorded_inner_fits):
    parts = {}
    rng = np.random.default_rng(2024)

    # fits over every reference case and a batch of random ellipsoids
    reports = []
    for case in (ALIGNED_CHI_1_5, ALIGNED_CHI_5, ALIGNED_CHI_10, TILTED_CHI_1_5, TILTED_ASCENDING,
                 TILTED_CHI_10, EXTREME):
        for seed in range(10):
            reports.append(Run(*case, seed).report)
    for seed in range(100):
        axes = tuple(np.exp(rng.uniform(np.log(0.01), np.log(100), 3)))
        spec = SynthSpec(axes, tuple(rng.uniform(-180, 180, 3)), n_points=6 + seed % 10,
                         seed=seed)
        reports.append(fit_ellipsoid(generate(spec), FitConfig(rng_seed=seed)))

    # (a) every reported rotation is orthonormal
    rot = max(np.abs(m @ m.T - np.eye(3)).max()
              for rep in reports
              for m in [rep.rotation] + [r.rotation for r in rep.per_iteration_trace])
    parts["a"] = (rot <= 1e-10, f"max |RR^T - I| {rot:.1e}")

    # (b) accepted inner fits sit on the constraint surface
    accepted = [f for f in recorded_inner_fits if f.accepted]
    norm = max(abs(f.coeffs @ constraint_matrix(f.k_used) @ f.coeffs - 1) for f in accepted)
    parts["b"] = (norm <= 1e-8, f"{len(accepted)} fits, max |v^T C v - 1| {norm:.1e}")

    # (c) the constraint matrix encodes kJ - I^2
    ident = 0.0
    for _ in range(10_000):
        v = rng.uniform(-1, 1, 10)
        k = rng.uniform(4, 256)
        i, j = invariants_IJ(v)
        ident = max(ident, abs(v @ constraint_matrix(k) @ v - (k * j - i * i)))
    parts["c"] = (ident <= 1e-12, f"max identity err {ident:.1e}")

    # (d) noiseless fits pass through the data
    resid = max(surface_residual(rep) for rep in reports if rep.converged)
    conv = sum(rep.converged for rep in reports)
    parts["d"] = (resid <= 1e-6 and conv == len(reports),
                  f"{conv}/{len(reports)} converged, max residual {resid:.1e}")

    # (e) Euler angles survive matrix roundtrip
    eul = 0.0
    for _ in range(10_000):
        a, g = rng.uniform(-180, 180, 2)
        b = rng.uniform(-89.9, 89.9)
        back = matrix_to_euler(euler_to_matrix(a, b, g))
        eul = max(eul, angle_difference(back.alpha, a), abs(back.beta - b),
                  angle_difference(back.gamma, g))
    parts["e"] = (eul <= 1e-9, f"max roundtrip err {eul:.1e} deg")

    # (f) scale equivariance and rotation invariance of semi-axes
    eq = 0.0
    for seed in range(30):
        axes = tuple(np.exp(rng.uniform(0, np.log(50), 3)))
        pts = generate(SynthSpec(axes, tuple(rng.uniform(-90, 90, 3)), seed=seed))
        cfg = FitConfig(rng_seed=seed)
        ref = np.sort(fit_ellipsoid(pts, cfg).geometry.semi_axes)
        s = float(np.exp(rng.uniform(-3, 3)))
        q = euler_to_matrix(*rng.uniform(-180, 180, 3))
        scaled = np.sort(fit_ellipsoid(pts * s, cfg).geometry.semi_axes) / s
        turned = np.sort(fit_ellipsoid(pts @ q.T, cfg).geometry.semi_axes)
        eq = max(eq, np.abs(scaled / ref - 1).max(), np.abs(turned / ref - 1).max())
    parts["f"] = (eq <= 1e-6, f"max relative change {eq:.1e}")

    # (g) random SPD matrices recovered from sampled level sets
    spd = 0.0
    for i in range(100):
        q = euler_to_matrix(*rng.uniform(-180, 180, 3))
        g = q.T @ np.diag(np.exp(rng.uniform(np.log(0.1), np.log(10), 3))) @ q
        level = float(np.exp(rng.uniform(np.log(0.01), np.log(10))))
        pts = sample_quadric(g, level, 6 + i % 15, seed=i)
        est = level * fit_ellipsoid(pts, FitConfig(rng_seed=i)).fisher_original_frame
        scale = np.sqrt(np.outer(np.diag(g), np.diag(g)))
        spd = max(spd, (np.abs(est - g) / scale).max())
    parts["g"] = (spd <= 1e-6, f"max entrywise err {spd:.1e}")

    ok = all(p[0] for p in parts.values())
    detail = "; ".join(f"({k}) {'ok' if v[0] else 'FAIL'} {v[1]}" for k, v in parts.items())
    report("criterion 7 (properties)", ok, detail)
    assert ok


def test_criterion_8_metric_level_set():
    level = 0.03
    spec = SynthSpec((2.14, 0.047, 0.004), (33.72, 7.72, 19.53))
    g = level * spec.fisher
    pts = sample_quadric(g, level, 6, seed=97)
    rep = fit_ellipsoid(pts, FitConfig(rng_seed=97))
    spray = sample_quadric(rep.fisher_original_frame, 1.0, 40_000, seed=3)
    vals = np.einsum("ni,ij,nj->n", spray, g, spray) / level
    lo, hi = vals.min() - 1, vals.max() - 1
    ok = rep.converged and lo >= -1e-4 and hi <= 1e-4
    report("criterion 8 (metric level-set workflow)", ok,
           f"converged={rep.converged}; p^T G p / level - 1 in [{lo:.1e}, {hi:.1e}]")
    assert ok
