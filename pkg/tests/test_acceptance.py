"""Acceptance suite.

Each test realizes one quantitative exit criterion at its stated tolerance
and prints a single PASS line (pytest's failure report marks the FAIL
case). Run with ``pytest tests/test_acceptance.py -v -s`` to see the
verdict lines.
"""

import math
import time

import numpy as np
import pytest

from weyl_lab.analysis import (bound_report, counting_data, duality_check,
                               riesz_mean, tauberian_run, weyl_fit)
from weyl_lab.geometry import Box, inner_set
from weyl_lab.spectral import (apply, build_operator, coherent_expectation,
                               coherent_probe, dense_spectrum,
                               dirichlet_interval_spectrum, lowest_eigenvalues)
from weyl_lab.symbols import (Symbol, check_assumption_one, check_assumption_two,
                              midpoint_defect, phase_volume, principal_part,
                              radial_angular_samples, sublevel_volume_identity)

QUADRATIC_1D = Symbol("power", 1, s=1.0)
INTERVAL = Box((0.0,), (1.0,))
UNIT_SQUARE = Box((0.0, 0.0), (1.0, 1.0))
DIRECTIONAL_HALF = Symbol("directional", 2, s=0.5)

BUILTIN_SAMPLERS = [
    ("power s=1", lambda d: Symbol("power", d, s=1.0)),
    ("power s=1/2", lambda d: Symbol("power", d, s=0.5)),
    ("directional s=1/2", lambda d: Symbol("directional", d, s=0.5)),
    ("mixed +(3,1)", lambda d: Symbol("mixed", d, alpha=3.0, beta=1.0, sign=1)),
    ("mixed -(2,1)", lambda d: Symbol("mixed", d, alpha=2.0, beta=1.0, sign=-1)),
]


def verdict(num, text):
    print(f"\nACCEPTANCE {num:02d} PASS: {text}")


def directional_volume(s, d):
    return (2 * math.gamma(1 + 1 / (2 * s))) ** d / math.gamma(1 + d / (2 * s))


@pytest.fixture(scope="module")
def interval_run():
    start = time.monotonic()
    op = build_operator(QUADRATIC_1D, INTERVAL, 512, pad=0.5)
    spectrum = lowest_eigenvalues(op, 5, tol=1e-8, seed=0)
    return op, spectrum, time.monotonic() - start


@pytest.fixture(scope="module")
def square_run():
    op = build_operator(DIRECTIONAL_HALF, UNIT_SQUARE, 256, pad=0.5)
    spectrum = lowest_eigenvalues(op, 80, tol=1e-8, seed=0)
    return op, spectrum


@pytest.fixture(scope="module")
def oracle_long():
    return dirichlet_interval_spectrum(350)


def test_criterion_01_dirichlet_interval_convergence(interval_run):
    op, spectrum, elapsed = interval_run
    exact = (np.pi * np.arange(1, 6)) ** 2
    rel = np.abs(spectrum.eigenvalues - exact) / exact
    assert np.all(rel <= 0.02)
    assert elapsed <= 60.0
    verdict(1, f"interval eigenvalues within {rel.max():.2%} of (pi k)^2 "
               f"(n=512, M=5) in {elapsed:.1f}s")


def test_criterion_02_dense_matrix_free_equivalence():
    worst = 0.0
    rect_rng = np.random.default_rng(5)
    a1 = rect_rng.uniform(-0.9, 0.0); b1 = a1 + rect_rng.uniform(0.5, 1.5)
    a2 = rect_rng.uniform(-0.9, 0.0); b2 = a2 + rect_rng.uniform(0.5, 1.5)
    rectangle = Box((a1, a2), (b1, b2))
    for name, make in BUILTIN_SAMPLERS:
        for d, n, dom in ((1, 64, INTERVAL), (2, 16, rectangle)):
            op = build_operator(make(d), dom, n, pad=0.5)
            count = min(10, op.dim - 1)
            krylov = lowest_eigenvalues(op, count, tol=1e-8, seed=1)
            dense = dense_spectrum(op)
            gap = np.abs(krylov.eigenvalues - dense.eigenvalues[:count]).max()
            worst = max(worst, gap)
            assert gap <= 1e-8, f"{name} d={d}"
    verdict(2, f"dense and matrix-free spectra agree to {worst:.1e} "
               f"(5 builtin symbols, d=1 n=64 and d=2 n=16)")


def test_criterion_03_berezin_bound(oracle_long, interval_run, square_run):
    # analytic spectrum: zero slack over 200 log-spaced energies
    grid = np.geomspace(1.0, 1e6, 200)
    closed = (2 / 3) * (2 * np.pi) ** -1 * 2.0 * grid**1.5
    s_vals = np.array([riesz_mean(oracle_long, lam) for lam in grid])
    assert np.all(s_vals <= closed)

    # computed spectra: 2% slack over the trusted range
    for (op, spectrum), symbol, domain in (
            (interval_run[:2], QUADRATIC_1D, INTERVAL),
            (square_run, DIRECTIONAL_HALF, UNIT_SQUARE)):
        lam_grid = np.geomspace(spectrum.eigenvalues[0] * 0.5,
                                spectrum.eigenvalues[-1], 60)
        report = bound_report(spectrum, symbol, domain, lam_grid, slack=0.02)
        assert report.passed["berezin"]
    verdict(3, "trace bound holds: zero slack on the analytic spectrum, "
               "2% slack on computed interval and square spectra")


def test_criterion_04_liyau_bound(oracle_long, interval_run, square_run):
    from weyl_lab.analysis import liyau_bound
    sums = np.cumsum(oracle_long.eigenvalues)
    for m in range(1, len(oracle_long) + 1):
        assert sums[m - 1] >= liyau_bound(QUADRATIC_1D, INTERVAL, m)

    for (op, spectrum), symbol, domain in (
            (interval_run[:2], QUADRATIC_1D, INTERVAL),
            (square_run, DIRECTIONAL_HALF, UNIT_SQUARE)):
        lam_grid = np.geomspace(spectrum.eigenvalues[0], spectrum.eigenvalues[-1], 8)
        report = bound_report(spectrum, symbol, domain, lam_grid, slack=0.02)
        assert report.passed["liyau"]
    verdict(4, "eigenvalue-sum bound holds: zero slack analytic, "
               "2% slack computed, every index with a trusted eigenvalue")


def test_criterion_05_weyl_trend(oracle_long, square_run):
    grid = np.geomspace((30 * np.pi) ** 2 * 1.001, (200 * np.pi) ** 2, 100)
    fit = weyl_fit(counting_data(oracle_long, grid), QUADRATIC_1D, INTERVAL)
    assert abs(fit.slope - 0.5) <= 0.005
    assert abs(fit.ratio_at_max - 1.0) <= 0.01

    op, spectrum = square_run
    ev = spectrum.eigenvalues
    sq_grid = np.geomspace(ev[5] * 1.01, ev[-1] * 0.999, 48)
    sq_fit = weyl_fit(counting_data(spectrum, sq_grid), DIRECTIONAL_HALF, UNIT_SQUARE)
    assert abs(sq_fit.slope - 2.0) <= 0.2
    assert 0.8 <= sq_fit.ratio_at_max <= 1.15
    verdict(5, f"counting trend: analytic slope {fit.slope:.4f}, ratio "
               f"{fit.ratio_at_max:.3f}; square slope {sq_fit.slope:.3f}, "
               f"final ratio {sq_fit.ratio_at_max:.3f}")


def test_criterion_06_phase_volume_closed_forms():
    for d in (1, 2):
        for s in (0.5, 0.75, 1.0):
            pp = principal_part(Symbol("directional", d, s=s))
            quad = phase_volume(pp, "tensor_quadrature")
            assert quad == pytest.approx(directional_volume(s, d), rel=1e-3)
    for s in (0.5, 0.75, 1.0):
        pp3 = principal_part(Symbol("directional", 3, s=s))
        est = phase_volume(pp3, "monte_carlo", n_samples=10**6, seed=17)
        assert abs(est.value - directional_volume(s, 3)) <= 4 * est.stderr
    assert phase_volume(principal_part(Symbol("directional", 2, s=0.5)),
                        "closed_form") == pytest.approx(2.0)
    assert phase_volume(principal_part(Symbol("directional", 2, s=1.0)),
                        "closed_form") == pytest.approx(math.pi)
    verdict(6, "phase volumes: quadrature within 1e-3 (d<=2), Monte Carlo "
               "within 4 sigma (d=3), spot values 2 and pi exact")


def test_criterion_07_sublevel_integral_identity():
    worst = 0.0
    for kind in ("power", "directional"):
        for d in (1, 2):
            for s in (0.5, 0.75, 1.0):
                pp = principal_part(Symbol(kind, d, s=s))
                ident = sublevel_volume_identity(pp, 1.0)
                rel = abs(ident.riesz_quadrature - ident.riesz_closed) / ident.riesz_closed
                worst = max(worst, rel)
                assert rel <= 1e-3
    verdict(7, f"momentum-integral identity verified for all homogeneous "
               f"builtins at d<=2 (worst relative defect {worst:.1e})")


def test_criterion_08_tauberian_lemma():
    linear = tauberian_run({"kind": "power", "exponent": 1.0}, 1.0,
                           np.geomspace(10.0, 1e4, 50))
    quadratic = tauberian_run({"kind": "power", "exponent": 2.0}, 0.5,
                              np.geomspace(100.0, 1e6, 50))
    for run in (linear, quadratic):
        assert 0.99 <= run.ratio <= 1.01
        assert run.min_increment_margin >= -1e-9 * run.lambdas[-1]
    verdict(8, f"Tauberian transfer: ratios {linear.ratio:.4f} and "
               f"{quadratic.ratio:.4f}; increment inequality exact on all pairs")


def test_criterion_09_duality_identity(oracle_long, interval_run, square_run, rng):
    specs = [oracle_long, interval_run[1], square_run[1]]
    specs.append(dirichlet_interval_spectrum(50))
    worst = 0.0
    for spec in specs:
        for m in range(1, len(spec)):
            lhs, rhs, gap = duality_check(spec, m)
            worst = max(worst, abs(gap) / max(lhs, 1.0))
            assert abs(gap) <= 1e-10 * max(lhs, 1.0)
    verdict(9, f"Legendre duality: worst relative gap {worst:.1e} over every "
               f"computed and analytic spectrum and every valid index")


def test_criterion_10_assumption_certificates():
    sq = Symbol("power", 2, s=1.0)
    p = radial_angular_samples(2, 32.0)
    eta = radial_angular_samples(2, 8.0)
    defect = midpoint_defect(sq, p[:, None, :], eta[None, :, :])
    target = np.sum(eta**2, axis=-1)[None, :]
    scale = 1.0 + np.sum(p**2, axis=-1)[:, None] + target
    assert np.max(np.abs(defect - target) / scale) <= 1e-12

    for s in (0.5, 0.75, 1.0):
        cert = check_assumption_two(Symbol("directional", 2, s=s))
        assert cert.envelope_margin <= 1e-12

    for sign in (1, -1):
        cert = check_assumption_one(Symbol("mixed", 2, alpha=3.0, beta=1.0, sign=sign))
        assert cert.passed and cert.minorant_violation <= 1e-12
    verdict(10, "certificates: quadratic defect exact, directional defects "
                "under the coordinate-wise envelope, mixed symbols verified "
                "with their standard minorants")


def test_criterion_11_coherent_state_bound(rng):
    # quadratic symbol: expectation splits exactly into |p|^2 + bump energy
    sym2 = Symbol("power", 2, s=1.0)
    grid = build_operator(sym2, UNIT_SQUARE, 256, pad=0.5).grid
    step = 2 * np.pi / grid.side
    wave = step * np.array([9, -13])
    probe = coherent_probe(grid, center=(0.5, 0.5), wavevector=wave,
                           radius=0.15, envelope=(1.0, 2))
    value = coherent_expectation(sym2, probe, grid)
    weights = np.abs(np.fft.fftn(probe.bump)) ** 2
    dirichlet = float(np.sum(grid.values * weights) / weights.sum())
    split_error = abs(value - (float(wave @ wave) + dirichlet))
    assert split_error <= 1e-8

    # directional symbol: energy never exceeds T(p) + moment constant
    dgrid = build_operator(DIRECTIONAL_HALF, UNIT_SQUARE, 256, pad=0.5).grid
    delta = 0.24
    inner = inner_set(UNIT_SQUARE, delta)
    envelope = lambda eta: np.sum(np.abs(eta), axis=-1)
    worst = -np.inf
    for _ in range(50):
        while True:
            q = rng.uniform(0.0, 1.0, size=2)
            if inner.contains(q):
                break
        k = rng.integers(-40, 41, size=2)
        probe = coherent_probe(dgrid, center=q, wavevector=step * k,
                               radius=delta / 2, envelope=envelope)
        value = coherent_expectation(DIRECTIONAL_HALF, probe, dgrid)
        margin = value - (float(np.sum(np.abs(step * k))) + probe.moment_constant)
        worst = max(worst, margin)
        assert margin <= 0.0
    verdict(11, f"coherent states: quadratic split exact to {split_error:.1e}; "
                f"directional bound holds at 50 random probes "
                f"(worst margin {worst:.2e})")


def test_criterion_12_property_suites(rng):
    # self-adjointness and shifted positivity, 100 random pairs each
    op = build_operator(QUADRATIC_1D, INTERVAL, 256, pad=0.5)
    outside = ~op.mask.cells
    for _ in range(100):
        u = rng.standard_normal(op.shape); u[outside] = 0.0
        v = rng.standard_normal(op.shape); v[outside] = 0.0
        au, av = apply(op, u), apply(op, v)
        assert abs(np.vdot(u, av) - np.vdot(au, v)) \
            <= 1e-10 * np.linalg.norm(u) * np.linalg.norm(v)
        quad = np.vdot(u, au) - op.shift * np.vdot(u, u)
        assert quad >= (1 - 1e-12) * np.vdot(u, u)

    # mask idempotence, 100 random fields
    small = build_operator(QUADRATIC_1D, INTERVAL, 64, pad=0.5)
    off = ~small.mask.cells
    for _ in range(100):
        w = rng.standard_normal(small.shape)
        out = apply(small, w)
        assert np.all(out[off] == 0.0)
        masked = w.copy(); masked[off] = 0.0
        assert np.array_equal(apply(small, masked), out)

    # domain monotonicity on a shared lattice
    box = ((-0.5,), 2.0)
    lam_small = dense_spectrum(build_operator(QUADRATIC_1D, Box((0.0,), (0.8,)),
                                              64, box=box)).eigenvalues
    lam_large = dense_spectrum(build_operator(QUADRATIC_1D, INTERVAL,
                                              64, box=box)).eigenvalues
    k = min(lam_small.size, lam_large.size)
    assert np.all(lam_small[:k] >= lam_large[:k] - 1e-10)

    # symbol monotonicity on a shared mask
    mixed = Symbol("mixed", 1, alpha=2.0, beta=1.0, sign=-1)
    lam_low = dense_spectrum(build_operator(mixed, INTERVAL, 64)).eigenvalues
    lam_high = dense_spectrum(build_operator(QUADRATIC_1D, INTERVAL, 64)).eigenvalues
    assert np.all(lam_low <= lam_high + 1e-10)

    # counting/riesz structure on 100 random spectra
    from weyl_lab.spectral import Spectrum
    for _ in range(100):
        ev = np.sort(rng.uniform(0.1, 40.0, size=30))
        spec = Spectrum(eigenvalues=ev, residuals=np.zeros(30),
                        reliability_cutoff=np.inf, shift=0.0, metadata={})
        grid = np.linspace(0.5, 45.0, 40)
        data = counting_data(spec, grid)
        assert np.all(np.diff(data.counts) >= 0)
        ds = data.riesz[1:] - data.riesz[:-1]
        dl = np.diff(grid)
        assert np.all(ds - dl * data.counts[:-1] >= -1e-9)
    verdict(12, "property suites at 100 random instances: self-adjointness, "
                "positivity, mask idempotence, domain and symbol "
                "monotonicity, counting structure")
