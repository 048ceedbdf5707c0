"""Fourier symbols T(p), their homogeneous principal parts, phase-space
volumes, and sampled certificates for the structural assumptions the
spectral bounds rely on.

Builtin families:

* ``power``        T(p) = |p|^(2s)               (radial fractional kinetic energy)
* ``directional``  T(p) = sum_i |p_i|^(2s)       (coordinate-wise fractional energy)
* ``mixed``        T(p) = |p|^alpha +/- |p|^beta (non-homogeneous perturbation)
* ``user``         arbitrary vectorized evaluator with declared homogeneity data

All evaluators are vectorized over points: input of shape (..., d) yields
output of shape (...).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .quadrature import MonteCarloEstimate, bisect_increasing, gauss_legendre

BUILTIN_KINDS = ("power", "directional", "mixed")

DEFAULT_P_RADIUS = 32.0
DEFAULT_ETA_RADIUS = 8.0
DEFAULT_NU_GRID = tuple(2.0**k for k in range(13))


class SymbolError(ValueError):
    """Invalid symbol specification or usage."""


class UnsupportedSymbolError(SymbolError):
    """Operation not available for this symbol kind."""


class EvaluationError(SymbolError):
    """Symbol evaluator produced a non-finite value."""


class DivergenceError(SymbolError):
    """A sub-level set could not be bounded; the integral diverges."""


@dataclass(frozen=True)
class Symbol:
    """A Fourier multiplier p -> T(p) on R^d.

    For ``user`` kind, ``evaluator`` must accept an (..., d) array and
    return (...); ``alpha`` (and optionally ``t0``, a minorant) must be
    declared for any analysis beyond pointwise evaluation.
    """

    kind: str
    d: int
    s: float | None = None
    alpha: float | None = None
    beta: float | None = None
    sign: int = 1
    evaluator: Callable[[np.ndarray], np.ndarray] | None = None
    t0: Callable[[np.ndarray], np.ndarray] | None = None
    minorant: Callable[[np.ndarray], np.ndarray] | None = None
    minorant_radius: float | None = None
    minorant_scale: float | None = None

    def __post_init__(self):
        if self.d < 1:
            raise SymbolError(f"dimension must be positive, got {self.d}")
        if self.kind in ("power", "directional"):
            if self.s is None or not 0.0 < self.s <= 1.0:
                raise SymbolError(f"kind {self.kind!r} needs exponent s in (0, 1], got {self.s}")
        elif self.kind == "mixed":
            if self.alpha is None or self.beta is None:
                raise SymbolError("mixed kind needs alpha and beta")
            if not 0.0 < self.beta < self.alpha:
                raise SymbolError(f"mixed kind needs 0 < beta < alpha, got ({self.alpha}, {self.beta})")
            if self.sign not in (1, -1):
                raise SymbolError(f"mixed sign must be +1 or -1, got {self.sign}")
        elif self.kind == "user":
            if self.evaluator is None:
                raise SymbolError("user kind needs an evaluator")
        else:
            raise SymbolError(f"unknown symbol kind {self.kind!r}")

    @property
    def homogeneity_degree(self) -> float:
        """Degree alpha of the principal part."""
        if self.kind in ("power", "directional"):
            return 2.0 * self.s
        if self.kind == "mixed":
            return self.alpha
        if self.alpha is None:
            raise UnsupportedSymbolError("user symbol has no declared homogeneity degree")
        return self.alpha

    def config(self) -> dict:
        cfg = {"kind": self.kind, "d": self.d}
        if self.s is not None:
            cfg["s"] = self.s
        if self.kind == "mixed":
            cfg["alpha"] = self.alpha
            cfg["beta"] = self.beta
            cfg["sign"] = "+" if self.sign > 0 else "-"
        return cfg


def symbol_from_config(cfg: dict) -> Symbol:
    """Build a Symbol from its plain-dict specification.

    The ``user`` kind cannot be expressed in a configuration document
    (it needs a callable); construct those programmatically.
    """
    if not isinstance(cfg, dict):
        raise SymbolError("symbol config must be a mapping")
    kind = cfg.get("kind")
    if kind == "user":
        raise SymbolError("user symbols require programmatic construction with an evaluator")
    if kind not in BUILTIN_KINDS:
        raise SymbolError(f"unknown symbol kind {kind!r}")
    d = cfg.get("d")
    if not isinstance(d, int) or d < 1:
        raise SymbolError(f"symbol dimension must be a positive integer, got {d!r}")
    sign = cfg.get("sign", "+")
    if sign in ("+", 1):
        sign = 1
    elif sign in ("-", -1):
        sign = -1
    else:
        raise SymbolError(f"mixed sign must be '+' or '-', got {sign!r}")
    return Symbol(kind=kind, d=d, s=cfg.get("s"), alpha=cfg.get("alpha"),
                  beta=cfg.get("beta"), sign=sign)


def _points(symbol: Symbol, p) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 0:
        if symbol.d != 1:
            raise SymbolError(f"scalar point given for a {symbol.d}-dimensional symbol")
        arr = arr.reshape(1)
    if arr.shape[-1] != symbol.d:
        if symbol.d == 1:
            arr = arr[..., None]
        else:
            raise SymbolError(f"point has dimension {arr.shape[-1]}, symbol expects {symbol.d}")
    if not np.all(np.isfinite(arr)):
        raise SymbolError("evaluation point must be finite")
    return arr


def evaluate(symbol: Symbol, p) -> np.ndarray | float:
    """Evaluate T(p); p has shape (..., d), the result shape (...)."""
    arr = _points(symbol, p)
    if symbol.kind == "power":
        out = np.sum(arr * arr, axis=-1) ** symbol.s
    elif symbol.kind == "directional":
        out = np.sum(np.abs(arr) ** (2.0 * symbol.s), axis=-1)
    elif symbol.kind == "mixed":
        r = np.sqrt(np.sum(arr * arr, axis=-1))
        out = r**symbol.alpha + symbol.sign * r**symbol.beta
    else:
        out = np.asarray(symbol.evaluator(arr), dtype=float)
        if out.shape != arr.shape[:-1]:
            raise EvaluationError(
                f"user evaluator returned shape {out.shape}, expected {arr.shape[:-1]}")
        if not np.all(np.isfinite(out)):
            bad = np.asarray(np.nonzero(~np.isfinite(out))).T
            point = arr[tuple(bad[0])] if bad.size else arr
            raise EvaluationError(f"user evaluator returned a non-finite value at p = {point}")
    if out.ndim == 0:
        return float(out)
    return out


@dataclass
class PrincipalPart:
    """Homogeneous large-momentum limit T0 of a symbol.

    ``phase_volume_value`` caches V_T = |{T0 < 1}| once computed. The
    optional minorant certifies one-sided convergence of nu^-alpha T(nu p)
    for nu >= ``minorant_scale``; it exceeds 1 outside radius
    ``minorant_radius``.
    """

    symbol: Symbol
    evaluator: Callable[[np.ndarray], np.ndarray]
    degree: float
    phase_volume_value: float | None = None
    minorant: Callable[[np.ndarray], np.ndarray] | None = None
    minorant_radius: float | None = None
    minorant_scale: float | None = None
    closed_form_kind: str | None = field(default=None)

    def __call__(self, p) -> np.ndarray | float:
        arr = _points(self.symbol, p)
        out = np.asarray(self.evaluator(arr), dtype=float)
        if out.ndim == 0:
            return float(out)
        return out


def _radial_power(alpha: float) -> Callable[[np.ndarray], np.ndarray]:
    def t0(arr: np.ndarray) -> np.ndarray:
        return np.sqrt(np.sum(arr * arr, axis=-1)) ** alpha

    return t0


def principal_part(symbol: Symbol) -> PrincipalPart:
    """Extract T0 with degree alpha, attaching the standard minorant for
    non-homogeneous kinds.

    For ``mixed`` with + sign the minorant is T0 itself; with - sign it is
    the full symbol, which lies below every rescaling nu^-alpha T(nu p)
    for nu >= 1.
    """
    if symbol.kind == "power":
        alpha = 2.0 * symbol.s
        return PrincipalPart(symbol, lambda a: np.sum(a * a, axis=-1) ** symbol.s,
                             alpha, closed_form_kind="power")
    if symbol.kind == "directional":
        alpha = 2.0 * symbol.s
        return PrincipalPart(symbol, lambda a: np.sum(np.abs(a) ** alpha, axis=-1),
                             alpha, closed_form_kind="directional")
    if symbol.kind == "mixed":
        alpha, beta = symbol.alpha, symbol.beta
        t0 = _radial_power(alpha)
        if symbol.sign > 0:
            return PrincipalPart(symbol, t0, alpha, minorant=t0,
                                 minorant_radius=1.0, minorant_scale=1.0)
        # r with r^alpha - r^beta = 1 marks where the minorant clears 1
        grow = bisect_increasing(
            lambda r: r**alpha - r**beta - 1.0, np.array(1.0), np.array(_mixed_root_hi(alpha, beta)))
        minorant = lambda a: np.asarray(evaluate(symbol, a))
        return PrincipalPart(symbol, t0, alpha, minorant=minorant,
                             minorant_radius=_scalar(grow), minorant_scale=1.0)
    if symbol.alpha is None:
        raise UnsupportedSymbolError("user symbol needs a declared homogeneity degree alpha")
    t0 = symbol.t0 if symbol.t0 is not None else (lambda a: np.asarray(symbol.evaluator(a), dtype=float))
    return PrincipalPart(symbol, t0, symbol.alpha, minorant=symbol.minorant,
                         minorant_radius=symbol.minorant_radius,
                         minorant_scale=symbol.minorant_scale)


def _mixed_root_hi(alpha: float, beta: float) -> float:
    hi = 2.0
    while hi**alpha - hi**beta < 1.0:
        hi *= 2.0
    return hi


def _closed_form_volume(kind: str, s: float, d: int) -> float:
    if kind == "power":
        return math.pi ** (d / 2.0) / math.gamma(1.0 + d / 2.0)
    # directional: measure of {sum |p_i|^(2s) < 1}
    return (2.0 * math.gamma(1.0 + 1.0 / (2.0 * s))) ** d / math.gamma(1.0 + d / (2.0 * s))


def _scalar(x) -> float:
    return float(np.asarray(x).ravel()[0])


def _ray_bound(evaluator, d: int, level: float, inflate: float = 1.1) -> float:
    """Axis-box half-width R with {evaluator < level} inside [-R, R]^d.

    Bisects along the 2d coordinate rays and the main diagonal; the
    resulting width is inflated by 10%. Raises DivergenceError if a ray
    never leaves the sub-level set.
    """
    dirs = []
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        dirs.append(e)
        dirs.append(-e)
    dirs.append(np.ones(d) / math.sqrt(d))
    radius = 0.0
    for v in dirs:
        hi = 1.0
        while _scalar(evaluator((hi * v)[None, :])) < level:
            hi *= 2.0
            if hi > 1e12:
                raise DivergenceError("sub-level set appears unbounded along a sampled ray")
        root = bisect_increasing(
            lambda t: np.asarray(evaluator(np.multiply.outer(np.atleast_1d(t), v))) - level,
            np.array(0.0), np.array(hi))
        radius = max(radius, _scalar(root) * float(np.abs(v).max()))
    if radius == 0.0:
        raise DivergenceError("sub-level set has empty interior along every sampled ray")
    return inflate * radius


def _sliced_sublevel_volume(evaluator, d: int, level: float, nodes: int) -> float:
    """Volume of {T0 < level} by outer Gauss-Legendre x innermost bisection.

    Relies on the slice map t -> T0(p', t e_last) being even and
    non-decreasing in |t|, which holds for every builtin kind.
    """
    bound = _ray_bound(evaluator, d, level)
    if d == 1:
        f0 = _scalar(evaluator(np.zeros((1, 1))))
        if f0 >= level:
            return 0.0
        r = bisect_increasing(
            lambda t: np.asarray(evaluator(np.atleast_1d(t)[:, None])) - level,
            np.array(0.0), np.array(bound))
        return 2.0 * _scalar(r)
    x, w = gauss_legendre(nodes)
    axes = np.meshgrid(*([bound * x] * (d - 1)), indexing="ij")
    outer = np.stack([a.ravel() for a in axes], axis=-1)
    wts = np.ones(1)
    for _ in range(d - 1):
        wts = np.multiply.outer(wts, bound * w).ravel()

    def slice_values(t: np.ndarray) -> np.ndarray:
        pts = np.concatenate([outer, t[:, None]], axis=-1)
        return np.asarray(evaluator(pts)) - level

    center = slice_values(np.zeros(len(outer)))
    occupied = center < 0.0
    half = np.zeros(len(outer))
    if occupied.any():
        sub = outer[occupied]

        def f(t: np.ndarray) -> np.ndarray:
            pts = np.concatenate([sub, t[:, None]], axis=-1)
            return np.asarray(evaluator(pts)) - level

        half[occupied] = bisect_increasing(f, np.zeros(sub.shape[0]),
                                           np.full(sub.shape[0], bound))
    return float(np.sum(wts * 2.0 * half))


def _default_nodes(d: int) -> int:
    return 256 if d <= 2 else 64


def phase_volume(principal: PrincipalPart, method: str = "auto",
                 nodes: int | None = None, n_samples: int = 1_000_000,
                 seed: int = 0):
    """Phase-space volume V_T = |{T0 < 1}|.

    Methods: ``closed_form`` (power/directional kinds), ``tensor_quadrature``
    (outer Gauss-Legendre with the innermost axis resolved by bisection),
    ``monte_carlo`` (returns a MonteCarloEstimate), or ``auto``. The computed
    value is cached on the principal part.
    """
    d = principal.symbol.d
    if method == "auto":
        if principal.closed_form_kind is not None:
            method = "closed_form"
        elif d <= 2:
            method = "tensor_quadrature"
        else:
            method = "monte_carlo"
    if method == "closed_form":
        if principal.closed_form_kind is None:
            raise UnsupportedSymbolError(
                f"no closed-form phase volume for kind {principal.symbol.kind!r}")
        value = _closed_form_volume(principal.closed_form_kind, principal.symbol.s, d)
    elif method == "tensor_quadrature":
        value = _sliced_sublevel_volume(principal.evaluator, d, 1.0,
                                        nodes or _default_nodes(d))
    elif method == "monte_carlo":
        bound = _ray_bound(principal.evaluator, d, 1.0)
        rng = np.random.default_rng(seed)
        hits = np.empty(n_samples, dtype=float)
        box_volume = (2.0 * bound) ** d
        done = 0
        while done < n_samples:  # fixed-size chunks keep memory flat and draws ordered
            m = min(262_144, n_samples - done)
            pts = rng.uniform(-bound, bound, size=(m, d))
            hits[done:done + m] = (np.asarray(principal.evaluator(pts)) < 1.0)
            done += m
        mean = hits.mean()
        stderr = box_volume * hits.std(ddof=1) / math.sqrt(n_samples)
        est = MonteCarloEstimate(box_volume * mean, stderr)
        if est.value <= 0.0:
            raise DivergenceError("Monte Carlo found no sub-level mass")
        principal.phase_volume_value = est.value
        return est
    else:
        raise ValueError(f"unknown phase_volume method {method!r}")
    if value <= 0.0:
        raise DivergenceError("phase volume is not positive")
    principal.phase_volume_value = value
    return value


def sublevel_volume(principal: PrincipalPart, level: float, nodes: int | None = None) -> float:
    """|{T0 < level}| by the sliced quadrature rule."""
    if level <= 0.0:
        return 0.0
    return _sliced_sublevel_volume(principal.evaluator, principal.symbol.d, level,
                                   nodes or _default_nodes(principal.symbol.d))


def riesz_integral(symbol: Symbol, lam: float, method: str = "auto",
                   nodes: int | None = None, n_samples: int = 1_000_000,
                   seed: int = 0):
    """The momentum integral of (T(p) - Lambda)_- over R^d.

    ``closed_form`` applies to the homogeneous builtin kinds and evaluates
    alpha/(d+alpha) * V_T * Lambda^(1+d/alpha); quadrature integrates the
    continuous integrand over a ray-bounded box.
    """
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    d = symbol.d
    if method == "auto":
        method = "closed_form" if symbol.kind in ("power", "directional") else "tensor_quadrature"
    if method == "closed_form":
        if symbol.kind not in ("power", "directional"):
            raise UnsupportedSymbolError("closed form needs a homogeneous builtin symbol")
        alpha = symbol.homogeneity_degree
        vt = _closed_form_volume(symbol.kind, symbol.s, d)
        return alpha / (d + alpha) * vt * lam ** (1.0 + d / alpha)
    eval_t = lambda pts: np.asarray(evaluate(symbol, pts))
    bound = _ray_bound(eval_t, d, lam)
    if method == "tensor_quadrature":
        nodes = nodes or _default_nodes(d)
        x, w = gauss_legendre(nodes)
        axes = np.meshgrid(*([bound * x] * d), indexing="ij")
        pts = np.stack([a.ravel() for a in axes], axis=-1)
        wts = np.ones(1)
        for _ in range(d):
            wts = np.multiply.outer(wts, bound * w).ravel()
        vals = np.clip(lam - eval_t(pts), 0.0, None)
        return float(np.sum(wts * vals))
    if method == "monte_carlo":
        rng = np.random.default_rng(seed)
        box_volume = (2.0 * bound) ** d
        total = np.empty(n_samples, dtype=float)
        done = 0
        while done < n_samples:
            m = min(262_144, n_samples - done)
            pts = rng.uniform(-bound, bound, size=(m, d))
            total[done:done + m] = np.clip(lam - eval_t(pts), 0.0, None)
            done += m
        return MonteCarloEstimate(box_volume * total.mean(),
                                  box_volume * total.std(ddof=1) / math.sqrt(n_samples))
    raise ValueError(f"unknown riesz_integral method {method!r}")


@dataclass
class SublevelIdentity:
    """Both sides of the phase-volume identities at a given level.

    ``riesz_*`` compare the integral of (T0 - 1)_- with alpha/(alpha+d) V_T;
    ``volume_*`` compare |{T0 < Lambda}| with V_T Lambda^(d/alpha).
    """

    lam: float
    riesz_quadrature: float
    riesz_closed: float
    volume_quadrature: float
    volume_scaled: float


def sublevel_volume_identity(principal: PrincipalPart, lam: float,
                             nodes: int | None = None) -> SublevelIdentity:
    """Evaluate the scaling identities with quadrature on one side and the
    phase volume on the other."""
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    d = principal.symbol.d
    alpha = principal.degree
    nodes = nodes or _default_nodes(d)
    eval_t0 = lambda pts: np.asarray(principal.evaluator(pts))
    bound = _ray_bound(eval_t0, d, 1.0)
    x, w = gauss_legendre(nodes)
    axes = np.meshgrid(*([bound * x] * d), indexing="ij")
    pts = np.stack([a.ravel() for a in axes], axis=-1)
    wts = np.ones(1)
    for _ in range(d):
        wts = np.multiply.outer(wts, bound * w).ravel()
    riesz_quad = float(np.sum(wts * np.clip(1.0 - eval_t0(pts), 0.0, None)))
    vt = principal.phase_volume_value
    if vt is None:
        result = phase_volume(principal, "auto")
        vt = result.value if isinstance(result, MonteCarloEstimate) else result
    return SublevelIdentity(
        lam=lam,
        riesz_quadrature=riesz_quad,
        riesz_closed=alpha / (alpha + d) * vt,
        volume_quadrature=_sliced_sublevel_volume(eval_t0, d, lam, nodes),
        volume_scaled=vt * lam ** (d / alpha),
    )


# --------------------------------------------------------------------------
# sampled assumption certificates
# --------------------------------------------------------------------------

@dataclass
class AssumptionCertificate:
    """Outcome of a sampled check of one structural assumption.

    These are certificates over finite sample grids, not proofs; the grids
    are recorded so a report can state exactly what was checked.
    """

    assumption: str
    sample_grid: dict
    worst_case: float
    passed: bool
    tolerance: float | None = None
    fitted_constants: tuple[float, int] | None = None
    minorant_violation: float | None = None
    envelope_margin: float | None = None

    def to_dict(self) -> dict:
        c0, n_exp = (self.fitted_constants if self.fitted_constants else (None, None))
        out = {
            "assumption": self.assumption,
            "worst_case": self.worst_case,
            "C0": c0,
            "N": n_exp,
            "passed": bool(self.passed),
            "samples_used": self.sample_grid,
        }
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
        if self.minorant_violation is not None:
            out["minorant_violation"] = self.minorant_violation
        if self.envelope_margin is not None:
            out["envelope_margin"] = self.envelope_margin
        return out


def radial_angular_samples(d: int, radius: float, n_radii: int = 64,
                           n_angles: int = 16) -> np.ndarray:
    """Sample points on dyadically spaced shells along coordinate-plane circles.

    In one dimension the directions degenerate to {+1, -1}; for d >= 2 each
    unordered axis pair contributes ``n_angles`` equally spaced directions.
    """
    radii = np.geomspace(radius / 256.0, radius, n_radii)
    if d == 1:
        pts = np.concatenate([radii, -radii])[:, None]
        return pts
    dirs = []
    for i in range(d):
        for j in range(i + 1, d):
            theta = 2.0 * np.pi * np.arange(n_angles) / n_angles
            block = np.zeros((n_angles, d))
            block[:, i] = np.cos(theta)
            block[:, j] = np.sin(theta)
            dirs.append(block)
    dirs = np.concatenate(dirs, axis=0)
    return (radii[:, None, None] * dirs[None, :, :]).reshape(-1, d)


def check_assumption_one(symbol: Symbol, nu_grid=None, p_samples=None,
                         tolerance: float = 1e-2) -> AssumptionCertificate:
    """Sampled convergence certificate for nu^-alpha T(nu p) -> T0(p).

    Records the worst deviation at the largest scale nu and verifies the
    minorant inequality at every sampled (p, nu) with nu >= the minorant
    scale, when a minorant is attached.
    """
    principal = principal_part(symbol)
    nu = np.asarray(DEFAULT_NU_GRID if nu_grid is None else nu_grid, dtype=float)
    if nu.size == 0:
        raise ValueError("nu grid must be nonempty")
    if np.any(np.diff(nu) <= 0):
        raise ValueError("nu grid must be increasing")
    pts = (radial_angular_samples(symbol.d, DEFAULT_P_RADIUS)
           if p_samples is None else np.asarray(p_samples, dtype=float))
    if pts.size == 0:
        raise ValueError("p samples must be nonempty")
    if symbol.minorant_scale or principal.minorant_scale:
        scale = principal.minorant_scale or symbol.minorant_scale
        if nu.max() < scale:
            raise ValueError(f"largest nu {nu.max()} is below the minorant scale {scale}")

    t0_vals = np.asarray(principal.evaluator(pts))
    nu_max = nu[-1]
    rescaled = np.asarray(evaluate(symbol, nu_max * pts)) / nu_max**principal.degree
    worst = float(np.max(np.abs(rescaled - t0_vals)))

    violation = None
    if principal.minorant is not None:
        tilde = np.asarray(principal.minorant(pts))
        defects = []
        for scale in nu[nu >= (principal.minorant_scale or 0.0)]:
            resc = np.asarray(evaluate(symbol, scale * pts)) / scale**principal.degree
            defects.append(np.max(tilde - resc))
        violation = float(max(defects)) if defects else 0.0

    passed = worst <= tolerance and (violation is None or violation <= 1e-12 * (1.0 + worst))
    grid_info = {"nu": [float(v) for v in nu], "p_count": int(len(pts)),
                 "p_radius": float(np.max(np.linalg.norm(pts, axis=-1)))}
    return AssumptionCertificate("I", grid_info, worst, passed, tolerance=tolerance,
                                 minorant_violation=violation)


def midpoint_defect(symbol: Symbol, p: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """(T(p+eta) + T(p-eta))/2 - T(p), broadcast over leading axes."""
    plus = np.asarray(evaluate(symbol, p + eta))
    minus = np.asarray(evaluate(symbol, p - eta))
    base = np.asarray(evaluate(symbol, np.broadcast_to(p, (p + eta).shape)))
    return 0.5 * (plus + minus) - base


def _fit_polynomial_envelope(eta_norms: np.ndarray, defect_max: np.ndarray,
                             max_exponent: int = 8,
                             growth_factor: float = 1.6) -> tuple[float, int]:
    """Smallest integer N whose envelope C0 (1+|eta|)^N absorbs the sampled
    defects without the ratio still growing at the edge of the grid.

    For each candidate N the certificate constant is the largest ratio
    defect / (1+|eta|)^N. Growth is judged on the two outermost dyadic
    shells of |eta| (where the polynomial tail dominates): N is accepted
    once the outer-shell constant stops exceeding the next shell's constant
    by more than ``growth_factor``. Falls back to ``max_exponent``.
    """
    top = float(eta_norms.max())
    outer = eta_norms > top / 2.0
    inner = (eta_norms > top / 4.0) & ~outer
    if not inner.any():  # too few distinct scales; split what is there
        order = np.argsort(eta_norms)
        half = max(1, eta_norms.size // 2)
        inner = np.zeros_like(outer)
        inner[order[:half]] = True
        outer = ~inner
    for n_exp in range(max_exponent + 1):
        ratios = defect_max / (1.0 + eta_norms) ** n_exp
        c_inner = float(ratios[inner].max())
        c_outer = float(ratios[outer].max())
        if c_outer <= growth_factor * max(c_inner, 1e-300):
            return max(float(ratios.max()), 0.0), n_exp
    ratios = defect_max / (1.0 + eta_norms) ** max_exponent
    return max(float(ratios.max()), 0.0), max_exponent


def check_assumption_two(symbol: Symbol, p_samples=None, eta_samples=None,
                         fitted_constants: tuple[float, int] | None = None
                         ) -> AssumptionCertificate:
    """Sampled certificate that the midpoint defect grows at most
    polynomially in eta, uniformly over the sampled p.

    With ``fitted_constants`` = (C0, N) given, checks the bound directly;
    otherwise fits the smallest workable integer exponent N in {0..8} and
    its constant. For directional symbols the exact coordinate-wise
    envelope sum_i |eta_i|^(2s) is also checked and its worst margin
    recorded.
    """
    pts = (radial_angular_samples(symbol.d, DEFAULT_P_RADIUS)
           if p_samples is None else np.asarray(p_samples, dtype=float))
    etas = (radial_angular_samples(symbol.d, DEFAULT_ETA_RADIUS)
            if eta_samples is None else np.asarray(eta_samples, dtype=float))
    if pts.size == 0 or etas.size == 0:
        raise ValueError("sample sets must be nonempty")

    defect = midpoint_defect(symbol, pts[:, None, :], etas[None, :, :])
    if not np.all(np.isfinite(defect)):
        raise EvaluationError("midpoint defect is non-finite on the sample grid")
    defect_max = defect.max(axis=0)  # per eta, max over p
    eta_norms = np.linalg.norm(etas, axis=-1)
    worst = float(defect.max())

    envelope_margin = None
    if symbol.kind == "directional":
        envelope = np.sum(np.abs(etas) ** (2.0 * symbol.s), axis=-1)
        envelope_margin = float(np.max(defect - envelope[None, :]))

    if fitted_constants is not None:
        c0, n_exp = float(fitted_constants[0]), int(fitted_constants[1])
        passed = bool(np.all(defect_max <= c0 * (1.0 + eta_norms) ** n_exp))
    else:
        c0, n_exp = _fit_polynomial_envelope(eta_norms, defect_max)
        passed = True
    grid_info = {"p_count": int(len(pts)), "eta_count": int(len(etas)),
                 "p_radius": float(np.max(np.linalg.norm(pts, axis=-1))),
                 "eta_radius": float(eta_norms.max())}
    return AssumptionCertificate("II", grid_info, worst, passed,
                                 fitted_constants=(c0, n_exp),
                                 envelope_margin=envelope_margin)
