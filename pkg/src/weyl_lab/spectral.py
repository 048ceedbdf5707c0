"""Matrix-free discretization of the operator chi_Omega F^-1 T(p) F chi_Omega
on a periodic carrier cube, with Krylov computation of its lowest
eigenvalues, a dense small-problem oracle, and coherent-state probes.

The grid operator acts on real fields supported on the occupied cells of a
GridMask. Because every admissible symbol is effectively even on the
momentum lattice, the action is implemented through real FFTs, which bakes
the even symmetrization of the multiplier into the transform itself.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, lobpcg

from .geometry import DomainSet, GridMask, bounding_box, rasterize
from .symbols import EvaluationError, Symbol, evaluate

DENSE_SIZE_CAP = 4096


class ConvergenceError(RuntimeError):
    """Eigensolver missed the residual contract within the iteration cap."""

    def __init__(self, message: str, eigenvalues=None, residuals=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues
        self.residuals = residuals


@dataclass
class MomentumGrid:
    """Momentum lattice p_k = 2 pi k / L of an n^d carrier cube, with the
    symbol tabulated on it.

    ``values`` holds T on the full FFT-ordered lattice (used for quadratic
    forms of complex fields); ``half_values`` holds it on the real-FFT half
    lattice used by the operator application. User symbols are explicitly
    even-symmetrized; builtins are even already.
    """

    d: int
    n: int
    origin: tuple
    side: float
    symbol: Symbol
    values: np.ndarray = field(repr=False)
    half_values: np.ndarray = field(repr=False)
    t_min: float
    t_max: float

    @property
    def spacing(self) -> float:
        return self.side / self.n

    def axes(self) -> list[np.ndarray]:
        h = self.spacing
        return [np.asarray(self.origin)[i] + (np.arange(self.n) + 0.5) * h
                for i in range(self.d)]

    def momentum_axes(self) -> list[np.ndarray]:
        """Full FFT-ordered momentum axis per dimension."""
        return [2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)] * self.d

    def momentum_cell(self) -> float:
        """Volume (2 pi / L)^d of one momentum lattice cell."""
        return (2.0 * np.pi / self.side) ** self.d


def _lattice_points(axes: list[np.ndarray]) -> np.ndarray:
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack(grids, axis=-1)


def momentum_grid(symbol: Symbol, origin, side: float, n: int) -> MomentumGrid:
    """Tabulate the symbol on the momentum lattice of a carrier cube."""
    if n < 2 or (n & (n - 1)) != 0:
        raise ValueError(f"resolution must be a power of two, got {n}")
    d = symbol.d
    h = side / n
    full_axis = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
    half_axis = 2.0 * np.pi * np.fft.rfftfreq(n, d=h)

    full_pts = _lattice_points([full_axis] * d)
    half_pts = _lattice_points([full_axis] * (d - 1) + [half_axis])
    values = np.asarray(evaluate(symbol, full_pts), dtype=float)
    half_values = np.asarray(evaluate(symbol, half_pts), dtype=float)
    if symbol.kind == "user":
        values = 0.5 * (values + np.asarray(evaluate(symbol, -full_pts)))
        half_values = 0.5 * (half_values + np.asarray(evaluate(symbol, -half_pts)))
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(half_values))):
        raise EvaluationError("symbol is non-finite on the momentum lattice")
    return MomentumGrid(d=d, n=n, origin=tuple(np.asarray(origin, dtype=float)),
                        side=float(side), symbol=symbol, values=values,
                        half_values=half_values,
                        t_min=float(values.min()), t_max=float(values.max()))


@dataclass
class GridOperator:
    """The masked Fourier multiplier on its carrier cube.

    ``shift`` is chosen at build time so that T(p_k) - shift >= 1 on the
    whole lattice, making the shifted operator positive definite on masked
    fields.
    """

    mask: GridMask
    grid: MomentumGrid
    shift: float

    def __post_init__(self):
        m, g = self.mask, self.grid
        if (m.d, m.n) != (g.d, g.n) or m.side != g.side or tuple(m.origin) != tuple(g.origin):
            raise ValueError("mask and momentum grid live on different carrier cubes")
        self._indices = m.indices()

    @property
    def dim(self) -> int:
        return self._indices.size

    @property
    def shape(self) -> tuple:
        return (self.grid.n,) * self.grid.d

    @property
    def reliability_cutoff(self) -> float:
        return self.grid.t_max / 4.0

    def _multiply_packed(self, block: np.ndarray, multiplier: np.ndarray) -> np.ndarray:
        """Apply chi F^-1 multiplier F chi to packed columns (dim, k)."""
        k = block.shape[1]
        n, d = self.grid.n, self.grid.d
        fields = np.zeros((k, n**d))
        fields[:, self._indices] = block.T
        fields = fields.reshape((k,) + self.shape)
        axes = tuple(range(1, d + 1))
        spec = np.fft.rfftn(fields, axes=axes)
        spec *= multiplier[None]
        out = np.fft.irfftn(spec, s=self.shape, axes=axes)
        return out.reshape(k, n**d)[:, self._indices].T

    def pack(self, u: np.ndarray) -> np.ndarray:
        """Restrict a full-grid field to the occupied-cell coordinates."""
        return np.asarray(u).reshape(-1)[self._indices]

    def unpack(self, v: np.ndarray) -> np.ndarray:
        full = np.zeros(self.grid.n**self.grid.d)
        full[self._indices] = v
        return full.reshape(self.shape)


def build_operator(symbol: Symbol, domain: DomainSet, n: int, pad: float = 0.5,
                   box: tuple | None = None) -> GridOperator:
    """Discretize the symbol on a carrier cube around the domain.

    The cube covers the domain's bounding box inflated by ``pad`` times its
    diameter on every side (so pad=0.5 adds one diameter in total per axis).
    Pass ``box`` = (origin, side) to pin the cube explicitly, e.g. to compare
    nested domains on an identical lattice.
    """
    if pad < 0:
        raise ValueError(f"pad must be nonnegative, got {pad}")
    if symbol.d != domain.d:
        raise ValueError("symbol and domain dimensions differ")
    if box is None:
        lo, hi = bounding_box(domain)
        diameter = float(np.linalg.norm(hi - lo))
        side = float(np.max(hi - lo) + 2.0 * pad * diameter)
        center = 0.5 * (lo + hi)
        origin = center - 0.5 * side
    else:
        origin, side = np.asarray(box[0], dtype=float), float(box[1])
    mask = rasterize(domain, origin, side, n)
    grid = momentum_grid(symbol, origin, side, n)
    return GridOperator(mask=mask, grid=grid, shift=grid.t_min - 1.0)


def apply(op: GridOperator, u: np.ndarray) -> np.ndarray:
    """Apply the masked multiplier to a full-grid field.

    The input is masked before and after the transform, so the action maps
    masked fields to masked fields and ``apply o mask == apply``. Complex
    fields are handled componentwise (the operator is real)."""
    arr = np.asarray(u)
    if arr.shape != op.shape:
        raise ValueError(f"field shape {arr.shape} does not match grid shape {op.shape}")
    if np.iscomplexobj(arr):
        return apply(op, arr.real) + 1j * apply(op, arr.imag)
    packed = op.pack(arr)[:, None].astype(float)
    return op.unpack(op._multiply_packed(packed, op.grid.half_values)[:, 0])


@dataclass
class Spectrum:
    """Sorted lowest eigenvalues of a grid operator with solver metadata.

    ``reliability_cutoff`` is a quarter of the lattice symbol ceiling;
    eigenvalues above it are flagged untrusted because lattice truncation
    distorts the upper spectrum.
    """

    eigenvalues: np.ndarray
    residuals: np.ndarray
    reliability_cutoff: float
    shift: float
    metadata: dict

    def __post_init__(self):
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float)
        self.residuals = np.asarray(self.residuals, dtype=float)
        if np.any(np.diff(self.eigenvalues) < 0):
            raise ValueError("eigenvalues must be sorted ascending")

    def __len__(self) -> int:
        return self.eigenvalues.size

    @property
    def trusted(self) -> np.ndarray:
        return self.eigenvalues <= self.reliability_cutoff

    def multiplets(self, rel_tol: float = 1e-6) -> list[tuple[int, int]]:
        """(start, count) groups of eigenvalues equal within rel_tol."""
        groups = []
        start = 0
        for i in range(1, len(self) + 1):
            if i == len(self) or (self.eigenvalues[i] - self.eigenvalues[i - 1]
                                  > rel_tol * (1.0 + abs(self.eigenvalues[i]))):
                groups.append((start, i - start))
                start = i
        return groups


def _solver_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def lowest_eigenvalues(op: GridOperator, count: int, tol: float = 1e-8,
                       seed: int = 0) -> Spectrum:
    """Lowest ``count`` eigenvalues of the masked operator.

    Works on the shifted positive operator A - shift, matrix-free. Small
    subspaces go through restarted Lanczos (ARPACK); larger ones through
    block LOBPCG preconditioned with the free-space inverse multiplier.
    Residuals ||A v - lambda v|| are verified against tol * (lambda - shift)
    and reported per pair; failure raises ConvergenceError with the best
    iterate.
    """
    dim = op.dim
    if not 1 <= count <= dim:
        raise ValueError(f"count must lie in [1, {dim}], got {count}")
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    shifted = op.grid.half_values - op.shift
    iteration_cap = 10 * count + 200

    if count == dim:
        spectrum = dense_spectrum(op)
        spectrum.metadata.update(solver="exhaustive", tol=tol, seed=seed)
        return spectrum

    block = count + max(8, count // 5)
    if dim <= 2048 or dim < 5 * block:
        # restarted Lanczos: robust for small and mid-size subspaces, where
        # the smoothing preconditioner below can stall on boundary detail
        vals, vecs, iterations, solver = _arpack_smallest(op, shifted, count, seed,
                                                          iteration_cap)
    else:
        vals, vecs, iterations, solver = _lobpcg_smallest(op, shifted, count, block,
                                                          tol, seed, iteration_cap)

    order = np.argsort(vals)
    vals = vals[order]
    vecs = vecs[:, order]
    norms = np.linalg.norm(vecs, axis=0)
    vecs = vecs / norms
    residuals = np.linalg.norm(op._multiply_packed(vecs, shifted) - vecs * vals, axis=0)
    lam = vals + op.shift

    contract = tol * np.maximum(vals, 1.0)
    if np.any(residuals > contract):
        raise ConvergenceError(
            f"{solver} residuals exceed the contract after {iterations} iterations "
            f"(worst {residuals.max():.3e} vs allowed {contract[np.argmax(residuals)]:.3e})",
            eigenvalues=lam, residuals=residuals)
    if lam.min() < op.grid.t_min - 1e-9 * (1.0 + abs(op.grid.t_min)):
        raise ConvergenceError(
            f"computed eigenvalue {lam.min():.6g} undercuts the lattice floor {op.grid.t_min:.6g}",
            eigenvalues=lam, residuals=residuals)

    metadata = {
        "solver": solver, "iterations": iterations, "tol": tol, "seed": seed,
        "n": op.grid.n, "L": op.grid.side, "dim": dim, "sigma": op.shift,
        "t_min": op.grid.t_min, "t_max": op.grid.t_max,
    }
    return Spectrum(eigenvalues=lam, residuals=residuals,
                    reliability_cutoff=op.reliability_cutoff,
                    shift=op.shift, metadata=metadata)


def _arpack_smallest(op, shifted, count, seed, iteration_cap):
    dim = op.dim
    operator = LinearOperator(
        (dim, dim),
        matvec=lambda v: op._multiply_packed(np.asarray(v).reshape(-1, 1), shifted)[:, 0],
        matmat=lambda B: op._multiply_packed(np.asarray(B), shifted),
        dtype=float)
    v0 = _solver_rng(seed).standard_normal(dim)
    ncv = min(dim, max(2 * count + 1, 32))
    try:
        vals, vecs = eigsh(operator, k=count, which="SA", v0=v0, ncv=ncv,
                           maxiter=max(iteration_cap, 1000), tol=0)
    except ArpackNoConvergence as exc:  # pragma: no cover
        raise ConvergenceError(str(exc)) from exc
    return vals, vecs, None, "lanczos-arpack"


def _lobpcg_smallest(op, shifted, count, block, tol, seed, iteration_cap):
    dim = op.dim
    inverse = 1.0 / shifted

    def amul(B):
        return op._multiply_packed(np.atleast_2d(B.T).T, shifted)

    def pmul(B):
        return op._multiply_packed(np.atleast_2d(B.T).T, inverse)

    operator = LinearOperator((dim, dim), matvec=lambda v: amul(v.reshape(-1, 1))[:, 0],
                              matmat=amul, dtype=float)
    precond = LinearOperator((dim, dim), matvec=lambda v: pmul(v.reshape(-1, 1))[:, 0],
                             matmat=pmul, dtype=float)
    X = _solver_rng(seed).standard_normal((dim, block))
    chunk = 60
    done = 0
    vals = None
    while done < iteration_cap:
        steps = min(chunk, iteration_cap - done)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # buffer columns may lag; checked below
            vals, X = lobpcg(operator, X, M=precond, tol=tol, maxiter=steps,
                             largest=False)
        done += steps
        order = np.argsort(vals)
        vals = vals[order]
        X = X[:, order]
        lead = X[:, :count] / np.linalg.norm(X[:, :count], axis=0)
        residuals = np.linalg.norm(amul(lead) - lead * vals[:count], axis=0)
        if np.all(residuals <= tol * np.maximum(vals[:count], 1.0)):
            break
    return vals[:count], X[:, :count], done, "lobpcg"


def dense_spectrum(op: GridOperator) -> Spectrum:
    """Full spectrum by explicit assembly on the occupied cells.

    Applies the operator to every occupied-cell indicator, symmetrizes the
    resulting matrix (recording the asymmetry defect), and calls the dense
    symmetric eigensolver. Intended as an oracle for moderate problem sizes.
    """
    dim = op.dim
    if dim > DENSE_SIZE_CAP:
        raise ValueError(f"dense assembly capped at {DENSE_SIZE_CAP} cells, mask has {dim}")
    matrix = np.empty((dim, dim))
    cells = op.grid.n**op.grid.d
    chunk = max(1, min(dim, (1 << 23) // max(cells, 1)))
    eye = np.eye(dim)
    for start in range(0, dim, chunk):
        block = eye[:, start:start + chunk]
        matrix[:, start:start + chunk] = op._multiply_packed(block, op.grid.half_values)
    asymmetry = float(np.abs(matrix - matrix.T).max())
    matrix = 0.5 * (matrix + matrix.T)
    vals, vecs = scipy.linalg.eigh(matrix)
    residuals = np.linalg.norm(matrix @ vecs - vecs * vals, axis=0)
    metadata = {
        "solver": "dense", "iterations": None, "asymmetry_defect": asymmetry,
        "n": op.grid.n, "L": op.grid.side, "dim": dim, "sigma": op.shift,
        "t_min": op.grid.t_min, "t_max": op.grid.t_max,
    }
    return Spectrum(eigenvalues=vals, residuals=residuals,
                    reliability_cutoff=op.reliability_cutoff,
                    shift=op.shift, metadata=metadata)


# --------------------------------------------------------------------------
# coherent-state probes
# --------------------------------------------------------------------------

@dataclass
class CoherentProbe:
    """A normalized modulated bump e^{i p . x} g(x - q) on the grid.

    ``g`` is real with hard support in the ball of the given radius around
    the center; ``moment_constant`` is the momentum-space moment of the
    chosen envelope against |g^|^2, the additive constant in the expected
    energy bound.
    """

    center: np.ndarray
    wavevector: np.ndarray
    radius: float
    bump: np.ndarray = field(repr=False)
    moment_constant: float
    envelope: str = "polynomial"


def coherent_probe(grid: MomentumGrid, center, wavevector, radius: float,
                   envelope, smoothness: int = 8) -> CoherentProbe:
    """Build a probe from the C^k bump (1 - |x-q|^2/r^2)^k, normalized in
    the continuum L2 sense on the grid.

    ``envelope`` is either a pair (C0, N) for the polynomial moment
    C0 (1+|eta|)^N or a vectorized callable eta -> E(eta); its lattice
    moment against |g^|^2 becomes the probe's additive constant. The
    support ball must fit inside the carrier cube.
    """
    d = grid.d
    center = np.asarray(center, dtype=float).reshape(d)
    wavevector = np.asarray(wavevector, dtype=float).reshape(d)
    if radius <= 0:
        raise ValueError(f"support radius must be positive, got {radius}")
    origin = np.asarray(grid.origin)
    if np.any(center - radius < origin) or np.any(center + radius > origin + grid.side):
        raise ValueError("probe support ball is clipped by the carrier cube")

    axes = grid.axes()
    mesh = np.meshgrid(*axes, indexing="ij")
    r2 = sum((m - c) ** 2 for m, c in zip(mesh, center))
    profile = np.clip(1.0 - r2 / radius**2, 0.0, None) ** smoothness
    norm = math.sqrt(float(np.sum(profile**2)) * grid.spacing**d)
    if norm == 0.0:
        raise ValueError("probe support contains no grid cell")
    bump = profile / norm

    weights = np.abs(np.fft.fftn(bump)) ** 2
    weights /= weights.sum()
    eta = _lattice_points(grid.momentum_axes())
    if callable(envelope):
        env_values = np.asarray(envelope(eta), dtype=float)
        env_name = "callable"
    else:
        c0, n_exp = envelope
        env_values = c0 * (1.0 + np.linalg.norm(eta, axis=-1)) ** n_exp
        env_name = f"polynomial(C0={c0}, N={n_exp})"
    moment = float(np.sum(env_values * weights))
    return CoherentProbe(center=center, wavevector=wavevector, radius=radius,
                         bump=bump, moment_constant=moment, envelope=env_name)


def coherent_expectation(symbol: Symbol, probe: CoherentProbe,
                         grid: MomentumGrid) -> float:
    """Quadratic-form energy of the probe: sum_k T(p_k) |F^(p_k)|^2 with
    F = e^{i p . x} g(x - q), normalized by the probe's mass."""
    if symbol.d != grid.d:
        raise ValueError("symbol and grid dimensions differ")
    axes = grid.axes()
    mesh = np.meshgrid(*axes, indexing="ij")
    phase = sum(p * m for p, m in zip(probe.wavevector, mesh))
    fld = np.exp(1j * phase) * probe.bump
    weights = np.abs(np.fft.fftn(fld)) ** 2
    return float(np.sum(grid.values * weights) / weights.sum())


def dirichlet_interval_spectrum(count: int, length: float = 1.0) -> Spectrum:
    """Closed-form spectrum (pi k / length)^2 of the second-derivative
    multiplier on an interval, as an analytic oracle."""
    if count < 1:
        raise ValueError("count must be positive")
    k = np.arange(1, count + 1)
    lam = (np.pi * k / length) ** 2
    return Spectrum(eigenvalues=lam, residuals=np.zeros(count),
                    reliability_cutoff=np.inf, shift=-1.0,
                    metadata={"solver": "oracle-dirichlet-interval",
                              "length": length, "dim": None, "n": None,
                              "L": None, "sigma": -1.0, "tol": 0.0})
