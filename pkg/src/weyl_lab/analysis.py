"""Spectral statistics and bound verification: eigenvalue counting, Riesz
means, the leading-order counting term, the trace and eigenvalue-sum
bounds, the Legendre-duality identity, and the Tauberian transfer between
the two asymptotic regimes.

Counting uses the strict convention #{k : lambda_k < L}; at a tie the jump
is attributed to the right, matching the 0^0 := 0 reading of the positive
part. S(L) = sum (L - lambda_k)_+ is then exactly the integral of N from 0
to L, which makes the convexity inequality S(L + h) - S(L) >= h N(L) exact
breakpoint arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import DomainError, DomainSet, volume
from .quadrature import MonteCarloEstimate
from .spectral import Spectrum
from .symbols import Symbol, phase_volume, principal_part, riesz_integral


def counting_function(spectrum: Spectrum, lam: float) -> int:
    """N(lambda): number of eigenvalues strictly below lambda."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return int(np.searchsorted(spectrum.eigenvalues, lam, side="left"))


def riesz_mean(spectrum: Spectrum, lam: float) -> float:
    """S(lambda) = sum_k (lambda - lambda_k)_+, the integrated counting
    function."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return float(np.clip(lam - spectrum.eigenvalues, 0.0, None).sum())


def _phase_volume_value(symbol: Symbol) -> float:
    principal = principal_part(symbol)
    result = phase_volume(principal, "auto")
    return result.value if isinstance(result, MonteCarloEstimate) else result


def domain_volume(domain: DomainSet, seed: int = 0) -> float:
    """|Omega| by certified closed form, falling back to Monte Carlo."""
    try:
        return volume(domain, "closed_form")
    except DomainError:
        return volume(domain, "monte_carlo", seed=seed).value


def weyl_term(symbol: Symbol, domain: DomainSet, lam: float,
              volume_value: float | None = None,
              phase_volume_value: float | None = None) -> float:
    """Leading-order counting term W(lambda) = (2 pi)^-d |Omega| V_T
    lambda^(d/alpha)."""
    d = symbol.d
    alpha = symbol.homogeneity_degree
    vt = phase_volume_value if phase_volume_value is not None else _phase_volume_value(symbol)
    vol = volume_value if volume_value is not None else domain_volume(domain)
    return (2.0 * math.pi) ** (-d) * vol * vt * lam ** (d / alpha)


def berezin_bound(symbol: Symbol, domain: DomainSet, lam: float,
                  method: str = "auto", volume_value: float | None = None) -> float:
    """Sharp upper bound on S(lambda): |Omega| (2 pi)^-d times the momentum
    integral of (T - lambda)_-."""
    d = symbol.d
    vol = volume_value if volume_value is not None else domain_volume(domain)
    integral = riesz_integral(symbol, lam, method=method)
    if isinstance(integral, MonteCarloEstimate):
        integral = integral.value
    return (2.0 * math.pi) ** (-d) * vol * integral


def liyau_bound(symbol: Symbol, domain: DomainSet, m: int,
                volume_value: float | None = None,
                phase_volume_value: float | None = None) -> float:
    """Sharp lower bound on the partial eigenvalue sum up to index m."""
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    d = symbol.d
    alpha = symbol.homogeneity_degree
    vt = phase_volume_value if phase_volume_value is not None else _phase_volume_value(symbol)
    vol = volume_value if volume_value is not None else domain_volume(domain)
    return (d / (d + alpha)) * (2.0 * math.pi) ** alpha \
        * (vol * vt) ** (-alpha / d) * float(m) ** (1.0 + alpha / d)


def duality_check(spectrum: Spectrum, m: int) -> tuple[float, float, float]:
    """Partial sum vs its Legendre dual sup_L (m L - S(L)).

    The dual is a concave piecewise-linear maximization whose optimum sits
    at a breakpoint in [lambda_m, lambda_{m+1}], so lambda_{m+1} must be
    available. Returns (lhs, rhs, gap)."""
    ev = spectrum.eigenvalues
    if not 1 <= m < len(ev):
        raise ValueError(f"m must lie in [1, {len(ev) - 1}] so the dual optimum is bracketed")
    lhs = float(ev[:m].sum())
    grid = ev[None, :]
    s_vals = np.clip(grid.T - ev[None, :], 0.0, None).sum(axis=1)
    rhs = float(np.max(m * ev - s_vals))
    return lhs, rhs, lhs - rhs


@dataclass
class CountingData:
    """N and S sampled on a lambda grid with per-point trust flags.

    A point is trusted when it sits below the spectrum's reliability cutoff
    and below the largest computed eigenvalue (beyond which a truncated
    list under-counts).
    """

    lambdas: np.ndarray
    counts: np.ndarray
    riesz: np.ndarray
    trusted: np.ndarray
    reliability_cutoff: float
    coverage: float

    def __len__(self) -> int:
        return self.lambdas.size


def counting_data(spectrum: Spectrum, lambda_grid) -> CountingData:
    lambdas = np.asarray(lambda_grid, dtype=float)
    if lambdas.size == 0 or np.any(lambdas <= 0):
        raise ValueError("lambda grid must be nonempty and positive")
    ev = spectrum.eigenvalues
    counts = np.searchsorted(ev, lambdas, side="left")
    riesz = np.clip(lambdas[:, None] - ev[None, :], 0.0, None).sum(axis=1)
    coverage = float(ev[-1])
    trusted = (lambdas <= spectrum.reliability_cutoff) & (lambdas <= coverage)
    return CountingData(lambdas=lambdas, counts=counts.astype(int), riesz=riesz,
                        trusted=trusted, reliability_cutoff=spectrum.reliability_cutoff,
                        coverage=coverage)


@dataclass
class WeylFit:
    """Log-log least-squares fit of the counting function."""

    slope: float
    slope_target: float
    constant: float
    constant_target: float
    ratio_at_max: float
    lambda_max: float
    points_used: int

    def to_dict(self) -> dict:
        return {
            "slope": self.slope, "slope_target": self.slope_target,
            "constant": self.constant, "constant_target": self.constant_target,
            "ratio_at_max": self.ratio_at_max, "lambda_max": self.lambda_max,
            "points_used": self.points_used,
        }


def weyl_fit(counting: CountingData, symbol: Symbol, domain: DomainSet,
             min_count: int = 5, min_points: int = 10,
             volume_value: float | None = None,
             phase_volume_value: float | None = None) -> WeylFit:
    """Fit log N against log lambda over the trusted grid points with
    N >= min_count, and compare against the leading-order prediction."""
    vt = phase_volume_value if phase_volume_value is not None else _phase_volume_value(symbol)
    vol = volume_value if volume_value is not None else domain_volume(domain)
    keep = counting.trusted & (counting.counts >= min_count)
    if int(keep.sum()) < min_points:
        raise ValueError(
            f"insufficient trusted points for a fit: {int(keep.sum())} < {min_points}")
    x = np.log(counting.lambdas[keep])
    y = np.log(counting.counts[keep].astype(float))
    slope, intercept = np.polyfit(x, y, 1)
    lam_max = float(counting.lambdas[keep].max())
    n_at_max = float(counting.counts[keep][np.argmax(counting.lambdas[keep])])
    w_at_max = weyl_term(symbol, domain, lam_max, volume_value=vol,
                         phase_volume_value=vt)
    d = symbol.d
    alpha = symbol.homogeneity_degree
    return WeylFit(slope=float(slope), slope_target=d / alpha,
                   constant=float(np.exp(intercept)),
                   constant_target=(2.0 * math.pi) ** (-d) * vol * vt,
                   ratio_at_max=n_at_max / w_at_max,
                   lambda_max=lam_max, points_used=int(keep.sum()))


@dataclass
class TauberianRun:
    """Measured transfer from the S-asymptotics to the N-asymptotics for a
    deterministic test sequence."""

    generator: dict
    a: float
    lambdas: np.ndarray
    s_normalized: np.ndarray = field(repr=False)
    n_normalized: np.ndarray = field(repr=False)
    a_estimate: float
    n_constant: float
    ratio: float
    min_increment_margin: float

    def to_dict(self) -> dict:
        return {
            "generator": self.generator, "a": self.a,
            "a_estimate": self.a_estimate, "n_constant": self.n_constant,
            "ratio": self.ratio, "min_increment_margin": self.min_increment_margin,
            "lambda_max": float(self.lambdas[-1]),
        }


def _sequence_terms(generator, limit: float) -> tuple[np.ndarray, dict]:
    if isinstance(generator, dict):
        kind = generator.get("kind")
        if kind != "power":
            raise ValueError(f"unknown sequence generator kind {kind!r}")
        exponent = float(generator["exponent"])
        scale = float(generator.get("scale", 1.0))
        if exponent <= 0 or scale <= 0:
            raise ValueError("power sequence needs positive exponent and scale")
        count = int(math.ceil((limit / scale) ** (1.0 / exponent))) + 2
        terms = scale * np.arange(1, count + 1, dtype=float) ** exponent
        return terms, {"kind": "power", "exponent": exponent, "scale": scale}
    terms = np.asarray(generator, dtype=float)
    if terms.size == 0 or terms[0] <= 0:
        raise ValueError("sequence must be nonempty and positive")
    if np.any(np.diff(terms) < 0):
        raise ValueError("sequence must be non-decreasing")
    if terms[-1] < limit:
        raise ValueError(f"sequence must reach the top of the lambda grid ({limit})")
    return terms, {"kind": "explicit", "count": int(terms.size)}


def tauberian_run(generator, a: float, lambda_grid) -> TauberianRun:
    """Evaluate L^-(a+1) S(L) and L^-a N(L) for a non-decreasing positive
    sequence along a lambda grid.

    Reports the last-point estimates of the S-constant and the N-constant,
    their ratio against the (a+1) transfer factor, and the worst margin of
    the increment inequality S(L') - S(L) >= (L' - L) N(L) over all grid
    pairs (exact up to roundoff, from convexity)."""
    if a <= 0:
        raise ValueError(f"exponent a must be positive, got {a}")
    lambdas = np.asarray(lambda_grid, dtype=float)
    if lambdas.size < 2 or np.any(lambdas <= 0) or np.any(np.diff(lambdas) <= 0):
        raise ValueError("lambda grid must be positive and strictly increasing")
    terms, meta = _sequence_terms(generator, float(lambdas[-1]))

    counts = np.searchsorted(terms, lambdas, side="left").astype(float)
    cumulative = np.concatenate([[0.0], np.cumsum(terms)])
    riesz = lambdas * counts - cumulative[counts.astype(int)]

    s_norm = riesz / lambdas ** (a + 1.0)
    n_norm = counts / lambdas**a
    a_est = float(s_norm[-1])
    n_const = float(n_norm[-1])

    # increment inequality over every ordered grid pair
    ds = riesz[None, :] - riesz[:, None]
    dl = lambdas[None, :] - lambdas[:, None]
    margin = ds - dl * counts[:, None]
    upper = np.triu_indices(lambdas.size, k=1)
    min_margin = float(margin[upper].min())

    return TauberianRun(generator=meta, a=a, lambdas=lambdas,
                        s_normalized=s_norm, n_normalized=n_norm,
                        a_estimate=a_est, n_constant=n_const,
                        ratio=n_const / ((a + 1.0) * a_est),
                        min_increment_margin=min_margin)


@dataclass
class BoundReport:
    """Aggregated bound checks over a lambda grid and an index grid.

    Margins are stored exactly as recomputable quantities: the trace-bound
    margin is bound * (1 + slack) - S and the sum-bound margin is
    sum - bound * (1 - slack); a nonnegative margin passes.
    """

    slack: float
    duality_tol: float
    berezin: dict
    liyau: dict
    weyl: dict
    duality: dict
    passed: dict

    def to_dict(self) -> dict:
        def listify(table: dict) -> dict:
            return {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                    for k, v in table.items()}

        return {
            "slack": self.slack, "duality_tol": self.duality_tol,
            "berezin": listify(self.berezin), "liyau": listify(self.liyau),
            "weyl": listify(self.weyl), "duality": listify(self.duality),
            "passed": dict(self.passed),
        }


def bound_report(spectrum: Spectrum, symbol: Symbol, domain: DomainSet,
                 lambda_grid, m_grid=None, slack: float = 0.02,
                 duality_tol: float = 1e-10, seed: int = 0) -> BoundReport:
    """Evaluate the trace bound, the sum bound, the leading-order counting
    ratio, and the duality identity across the given grids.

    Pass slack=0 for analytic oracle spectra; computed spectra get a small
    allowance for the nonconforming discretization.
    """
    lambdas = np.asarray(lambda_grid, dtype=float)
    if lambdas.size == 0:
        raise ValueError("lambda grid must be nonempty")
    data = counting_data(spectrum, lambdas)
    vol = domain_volume(domain, seed=seed)
    vt = _phase_volume_value(symbol)
    alpha = symbol.homogeneity_degree
    d = symbol.d

    use_closed = symbol.kind in ("power", "directional")
    bounds = np.array([
        berezin_bound(symbol, domain, lam,
                      method="closed_form" if use_closed else "tensor_quadrature",
                      volume_value=vol)
        for lam in lambdas
    ])
    ber_margin = bounds * (1.0 + slack) - data.riesz
    ber_pass = (ber_margin >= 0.0) | ~data.trusted
    berezin = {"lambda": lambdas, "riesz_mean": data.riesz, "bound": bounds,
               "margin": ber_margin, "trusted": data.trusted,
               "passed": ber_pass}

    ev = spectrum.eigenvalues
    trusted_count = int(np.sum(ev <= spectrum.reliability_cutoff))
    if m_grid is None:
        ms = np.arange(1, trusted_count + 1)
    else:
        ms = np.asarray(m_grid, dtype=int)
        if np.any(ms < 1) or np.any(ms > len(ev)):
            raise ValueError("index grid out of range for the spectrum")
    sums = np.cumsum(ev)[ms - 1]
    ly_bounds = np.array([liyau_bound(symbol, domain, int(m), volume_value=vol,
                                      phase_volume_value=vt) for m in ms])
    ly_margin = sums - ly_bounds * (1.0 - slack)
    ly_trusted = ms <= trusted_count
    ly_pass = (ly_margin >= 0.0) | ~ly_trusted
    liyau = {"m": ms, "partial_sum": sums, "bound": ly_bounds,
             "margin": ly_margin, "trusted": ly_trusted, "passed": ly_pass}

    wt = (2.0 * math.pi) ** (-d) * vol * vt * lambdas ** (d / alpha)
    weyl = {"lambda": lambdas, "count": data.counts, "weyl_term": wt,
            "ratio": np.where(wt > 0, data.counts / wt, np.nan),
            "trusted": data.trusted}

    dual_ms = ms[ms < len(ev)]
    lhs = np.empty(dual_ms.size)
    rhs = np.empty(dual_ms.size)
    for i, m in enumerate(dual_ms):
        lhs[i], rhs[i], _ = duality_check(spectrum, int(m))
    gaps = lhs - rhs
    dual_pass = np.abs(gaps) <= duality_tol * np.maximum(lhs, 1.0)
    duality = {"m": dual_ms, "lhs": lhs, "rhs": rhs, "gap": gaps, "passed": dual_pass}

    passed = {
        "berezin": bool(ber_pass.all()),
        "liyau": bool(ly_pass.all()),
        "duality": bool(dual_pass.all()),
    }
    return BoundReport(slack=slack, duality_tol=duality_tol, berezin=berezin,
                       liyau=liyau, weyl=weyl, duality=duality, passed=passed)
