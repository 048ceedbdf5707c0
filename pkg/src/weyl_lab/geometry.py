"""Finite-volume open sets built from boxes, balls, and clipped boxes via
union and difference, with rasterization onto a periodic carrier cube.

All membership tests use strict inequalities (the sets are open); the
boolean tree is evaluated literally, so a difference removes the open
right child pointwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .quadrature import MonteCarloEstimate


class DomainError(ValueError):
    """Invalid domain specification or usage."""


class DegenerateDomainError(DomainError):
    """The set has zero volume or rasterizes to an empty mask."""


class ClosedFormUnavailable(DomainError):
    """The tree cannot certify a closed-form volume."""


def _vec(x, d: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape != (d,):
        raise DomainError(f"expected a point of dimension {d}, got shape {arr.shape}")
    return arr


class DomainSet:
    """Base class for the boolean tree of primitives."""

    d: int
    is_empty = False

    def contains(self, x) -> np.ndarray:
        raise NotImplementedError

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Axis-aligned (lo, hi) arrays covering the support."""
        raise NotImplementedError

    def translate(self, offset) -> "DomainSet":
        raise NotImplementedError

    def inset(self, delta: float) -> "DomainSet":
        """Conservative inner approximation: a subset of the true inner
        parallel set at distance delta."""
        raise NotImplementedError

    def inflate(self, delta: float) -> "DomainSet":
        """Conservative outer approximation: a superset of the delta
        neighborhood."""
        raise NotImplementedError

    def closed_volume(self) -> float:
        raise ClosedFormUnavailable(f"no closed-form volume for {type(self).__name__}")

    def _pts(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 0:
            if self.d != 1:
                raise DomainError(f"scalar point given for a {self.d}-dimensional set")
            arr = arr.reshape(1)
        if arr.shape[-1] != self.d:
            if self.d == 1:
                arr = arr[..., None]
            else:
                raise DomainError(f"point dimension {arr.shape[-1]} != domain dimension {self.d}")
        return arr


class _EmptySet(DomainSet):
    """Result of an inner parallel set that shrank to nothing."""

    is_empty = True
    d = 0

    def contains(self, x):
        arr = np.asarray(x, dtype=float)
        return np.zeros(arr.shape[:-1] if arr.ndim > 1 else (), dtype=bool)

    def bounds(self):
        raise DegenerateDomainError("empty set has no bounding box")

    def translate(self, offset):
        return self

    def inset(self, delta):
        return self

    def inflate(self, delta):
        return self


EMPTY = _EmptySet()


@dataclass(frozen=True)
class Box(DomainSet):
    """Open axis-aligned box, corners lo < hi."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi) or len(lo) == 0:
            raise DomainError("box corners must have equal positive dimension")
        if any(a >= b for a, b in zip(lo, hi)):
            raise DomainError(f"box needs lo < hi per axis, got {lo} / {hi}")

    @property
    def d(self) -> int:
        return len(self.lo)

    def contains(self, x):
        arr = self._pts(x)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((arr > lo) & (arr < hi), axis=-1)

    def bounds(self):
        return np.asarray(self.lo), np.asarray(self.hi)

    def translate(self, offset):
        off = _vec(offset, self.d)
        return Box(tuple(np.asarray(self.lo) + off), tuple(np.asarray(self.hi) + off))

    def inset(self, delta):
        lo = np.asarray(self.lo) + delta
        hi = np.asarray(self.hi) - delta
        if np.any(hi <= lo):
            return EMPTY
        return Box(tuple(lo), tuple(hi))

    def inflate(self, delta):
        return Box(tuple(np.asarray(self.lo) - delta), tuple(np.asarray(self.hi) + delta))

    def closed_volume(self):
        return float(np.prod(np.asarray(self.hi) - np.asarray(self.lo)))


@dataclass(frozen=True)
class Ball(DomainSet):
    """Open Euclidean ball."""

    center: tuple
    radius: float

    def __post_init__(self):
        center = tuple(float(v) for v in np.atleast_1d(self.center))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0:
            raise DomainError(f"ball radius must be positive, got {self.radius}")

    @property
    def d(self) -> int:
        return len(self.center)

    def contains(self, x):
        arr = self._pts(x)
        diff = arr - np.asarray(self.center)
        return np.sum(diff * diff, axis=-1) < self.radius**2

    def bounds(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    def translate(self, offset):
        off = _vec(offset, self.d)
        return Ball(tuple(np.asarray(self.center) + off), self.radius)

    def inset(self, delta):
        if self.radius - delta <= 0:
            return EMPTY
        return Ball(self.center, self.radius - delta)

    def inflate(self, delta):
        return Ball(self.center, self.radius + delta)

    def closed_volume(self):
        d = self.d
        return math.pi ** (d / 2.0) / math.gamma(1.0 + d / 2.0) * self.radius**d


@dataclass(frozen=True)
class ClippedBox(DomainSet):
    """Open box intersected with the open half-space {x . normal < offset}."""

    box: Box
    normal: tuple
    offset: float

    def __post_init__(self):
        n = np.atleast_1d(np.asarray(self.normal, dtype=float))
        norm = float(np.linalg.norm(n))
        if norm == 0.0:
            raise DomainError("clip normal must be nonzero")
        object.__setattr__(self, "normal", tuple(n / norm))
        object.__setattr__(self, "offset", float(self.offset) / norm)
        if len(self.normal) != self.box.d:
            raise DomainError("clip normal dimension must match the box")

    @property
    def d(self) -> int:
        return self.box.d

    def contains(self, x):
        arr = self._pts(x)
        side = arr @ np.asarray(self.normal) < self.offset
        return self.box.contains(arr) & side

    def bounds(self):
        # conservative: the box's own bounds
        return self.box.bounds()

    def translate(self, offset):
        off = _vec(offset, self.d)
        return ClippedBox(self.box.translate(off), self.normal,
                          self.offset + float(off @ np.asarray(self.normal)))

    def inset(self, delta):
        inner = self.box.inset(delta)
        if inner.is_empty:
            return EMPTY
        return ClippedBox(inner, self.normal, self.offset - delta)

    def inflate(self, delta):
        return ClippedBox(self.box.inflate(delta), self.normal, self.offset + delta)


@dataclass(frozen=True)
class Union(DomainSet):
    left: DomainSet
    right: DomainSet

    def __post_init__(self):
        if self.left.d != self.right.d:
            raise DomainError("union children must share a dimension")

    @property
    def d(self) -> int:
        return self.left.d

    def contains(self, x):
        arr = self._pts(x)
        return self.left.contains(arr) | self.right.contains(arr)

    def bounds(self):
        llo, lhi = self.left.bounds()
        rlo, rhi = self.right.bounds()
        return np.minimum(llo, rlo), np.maximum(lhi, rhi)

    def translate(self, offset):
        return Union(self.left.translate(offset), self.right.translate(offset))

    def inset(self, delta):
        a = self.left.inset(delta)
        b = self.right.inset(delta)
        if a.is_empty:
            return b
        if b.is_empty:
            return a
        return Union(a, b)

    def inflate(self, delta):
        return Union(self.left.inflate(delta), self.right.inflate(delta))

    def closed_volume(self):
        llo, lhi = self.left.bounds()
        rlo, rhi = self.right.bounds()
        disjoint = np.any(lhi <= rlo) or np.any(rhi <= llo)
        if not disjoint:
            raise ClosedFormUnavailable(
                "closed-form volume needs bounding-box-disjoint union children")
        return self.left.closed_volume() + self.right.closed_volume()


@dataclass(frozen=True)
class Difference(DomainSet):
    left: DomainSet
    right: DomainSet

    def __post_init__(self):
        if self.left.d != self.right.d:
            raise DomainError("difference children must share a dimension")

    @property
    def d(self) -> int:
        return self.left.d

    def contains(self, x):
        arr = self._pts(x)
        return self.left.contains(arr) & ~self.right.contains(arr)

    def bounds(self):
        # removal never enlarges the support
        return self.left.bounds()

    def translate(self, offset):
        return Difference(self.left.translate(offset), self.right.translate(offset))

    def inset(self, delta):
        a = self.left.inset(delta)
        if a.is_empty:
            return EMPTY
        return Difference(a, self.right.inflate(delta))

    def inflate(self, delta):
        # dropping the removed part is a valid outer approximation
        return self.left.inflate(delta)

    def closed_volume(self):
        rlo, rhi = self.right.bounds()
        corners = np.stack(np.meshgrid(*zip(rlo, rhi), indexing="ij"), axis=-1).reshape(-1, self.d)
        if isinstance(self.left, Box):
            llo, lhi = self.left.bounds()
            inside = np.all((corners >= llo) & (corners <= lhi))
        elif isinstance(self.left, Ball):
            c = np.asarray(self.left.center)
            inside = np.all(np.linalg.norm(corners - c, axis=-1) <= self.left.radius)
        else:
            raise ClosedFormUnavailable(
                "closed-form difference needs a box or ball on the left")
        if not inside:
            raise ClosedFormUnavailable(
                "closed-form difference needs the removed set certifiably inside the left child")
        value = self.left.closed_volume() - self.right.closed_volume()
        if value <= 0.0:
            raise DegenerateDomainError("difference has zero volume")
        return value


# --------------------------------------------------------------------------
# module-level operations
# --------------------------------------------------------------------------

def contains(domain: DomainSet, x) -> bool | np.ndarray:
    """Membership per the literal tree semantics; boundary points are out."""
    out = domain.contains(x)
    if np.ndim(out) == 0:
        return bool(out)
    return out


def bounding_box(domain: DomainSet) -> tuple[np.ndarray, np.ndarray]:
    """Smallest axis-aligned (lo, hi) covering every primitive's support."""
    return domain.bounds()


def volume(domain: DomainSet, method: str = "closed_form",
           n_samples: int = 1_000_000, seed: int = 0):
    """|Omega| by certified closed form or Monte Carlo (with standard error)."""
    if domain.is_empty:
        raise DegenerateDomainError("domain is empty")
    if method == "closed_form":
        value = domain.closed_volume()
        if value <= 0.0:
            raise DegenerateDomainError("domain has zero volume")
        return value
    if method == "monte_carlo":
        lo, hi = domain.bounds()
        rng = np.random.default_rng(seed)
        box_volume = float(np.prod(hi - lo))
        hits = np.empty(n_samples, dtype=float)
        done = 0
        while done < n_samples:
            m = min(262_144, n_samples - done)
            pts = rng.uniform(lo, hi, size=(m, domain.d))
            hits[done:done + m] = domain.contains(pts)
            done += m
        est = MonteCarloEstimate(box_volume * hits.mean(),
                                 box_volume * hits.std(ddof=1) / math.sqrt(n_samples))
        if est.value <= 0.0:
            raise DegenerateDomainError("Monte Carlo found no interior mass")
        return est
    raise ValueError(f"unknown volume method {method!r}")


def inner_set(domain: DomainSet, delta: float) -> DomainSet:
    """Conservative inner parallel set at distance delta (may be EMPTY).

    Primitives shrink exactly; for differences the removed child is inflated,
    so the result is a guaranteed subset of the true inner set.
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    return domain.inset(delta)


@dataclass
class GridMask:
    """Cell-center occupancy of a domain on an n^d carrier cube.

    The cube starts at ``origin`` with side ``side``; cell (i1..id) has its
    center at origin + (i + 1/2) * side/n and is occupied iff the center
    lies in the open set.
    """

    d: int
    n: int
    origin: tuple
    side: float
    cells: np.ndarray

    @property
    def occupied_count(self) -> int:
        return int(np.count_nonzero(self.cells))

    @property
    def spacing(self) -> float:
        return self.side / self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.d

    def indices(self) -> np.ndarray:
        """Flat C-order indices of occupied cells."""
        return np.flatnonzero(self.cells.ravel())

    def axes(self) -> list[np.ndarray]:
        h = self.spacing
        return [np.asarray(self.origin)[i] + (np.arange(self.n) + 0.5) * h
                for i in range(self.d)]

    def centers(self) -> np.ndarray:
        """All cell centers, shape (n^d, d) in C order."""
        grids = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def to_rle(self) -> dict:
        """Run-length encoding of the flattened mask, first run counts False."""
        flat = self.cells.ravel()
        changes = np.flatnonzero(np.diff(flat.astype(np.int8)))
        edges = np.concatenate([[-1], changes, [flat.size - 1]])
        runs = np.diff(edges).tolist()
        if flat[0]:
            runs = [0] + runs
        return {"d": self.d, "n": self.n, "L": self.side,
                "origin": list(self.origin), "runs": [int(r) for r in runs]}

    @classmethod
    def from_rle(cls, data: dict) -> "GridMask":
        n, d = int(data["n"]), int(data["d"])
        flat = np.zeros(n**d, dtype=bool)
        pos = 0
        value = False
        for run in data["runs"]:
            if value:
                flat[pos:pos + run] = True
            pos += run
            value = not value
        if pos != flat.size:
            raise DomainError("run lengths do not cover the mask")
        return cls(d=d, n=n, origin=tuple(float(v) for v in data["origin"]),
                   side=float(data["L"]), cells=flat.reshape((n,) * d))


def rasterize(domain: DomainSet, origin: Sequence[float], side: float, n: int) -> GridMask:
    """Occupancy mask of the domain on the cube [origin, origin + side]^d.

    n must be a power of two and the cube must cover the domain's bounding
    box; an all-empty mask raises DegenerateDomainError.
    """
    if domain.is_empty:
        raise DegenerateDomainError("cannot rasterize an empty set")
    d = domain.d
    origin = _vec(origin, d)
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"resolution must be a power of two, got {n}")
    if side <= 0:
        raise ValueError(f"carrier side must be positive, got {side}")
    lo, hi = domain.bounds()
    if np.any(lo < origin - 1e-12) or np.any(hi > origin + side + 1e-12):
        raise DomainError("carrier cube does not cover the domain's bounding box")
    h = side / n
    axes = [origin[i] + (np.arange(n) + 0.5) * h for i in range(d)]
    grids = np.meshgrid(*axes, indexing="ij")
    centers = np.stack([g.ravel() for g in grids], axis=-1)
    cells = domain.contains(centers).reshape((n,) * d)
    if not cells.any():
        raise DegenerateDomainError("domain rasterizes to an empty mask")
    return GridMask(d=d, n=n, origin=tuple(origin), side=float(side), cells=cells)


def domain_from_config(cfg: dict) -> DomainSet:
    """Build a domain tree from its nested dict specification.

    Leaves: {"shape": "box", "lo": [...], "hi": [...]},
            {"shape": "ball", "center": [...], "radius": r},
            {"shape": "clipped_box", "box": {...}, "normal": [...], "offset": c}.
    Nodes:  {"op": "union" | "difference", "children": [a, b]},
            {"op": "translate", "offset": [...], "child": {...}}.
    """
    if not isinstance(cfg, dict):
        raise DomainError("domain config must be a mapping")
    if "op" in cfg:
        op = cfg["op"]
        if op == "translate":
            return domain_from_config(cfg["child"]).translate(cfg["offset"])
        children = cfg.get("children")
        if not isinstance(children, list) or len(children) != 2:
            raise DomainError(f"op {op!r} needs exactly two children")
        left = domain_from_config(children[0])
        right = domain_from_config(children[1])
        if op == "union":
            return Union(left, right)
        if op == "difference":
            return Difference(left, right)
        raise DomainError(f"unknown domain op {op!r}")
    shape = cfg.get("shape")
    if shape == "box":
        return Box(tuple(cfg["lo"]), tuple(cfg["hi"]))
    if shape == "ball":
        return Ball(tuple(cfg["center"]), cfg["radius"])
    if shape == "clipped_box":
        inner = domain_from_config(cfg["box"])
        if not isinstance(inner, Box):
            raise DomainError("clipped_box needs a box leaf")
        return ClippedBox(inner, tuple(cfg["normal"]), cfg["offset"])
    raise DomainError(f"unknown domain shape {shape!r}")


def domain_config(domain: DomainSet) -> dict:
    """Inverse of domain_from_config for serializable trees."""
    if isinstance(domain, Box):
        return {"shape": "box", "lo": list(domain.lo), "hi": list(domain.hi)}
    if isinstance(domain, Ball):
        return {"shape": "ball", "center": list(domain.center), "radius": domain.radius}
    if isinstance(domain, ClippedBox):
        return {"shape": "clipped_box", "box": domain_config(domain.box),
                "normal": list(domain.normal), "offset": domain.offset}
    if isinstance(domain, Union):
        return {"op": "union", "children": [domain_config(domain.left),
                                            domain_config(domain.right)]}
    if isinstance(domain, Difference):
        return {"op": "difference", "children": [domain_config(domain.left),
                                                 domain_config(domain.right)]}
    raise DomainError(f"cannot serialize {type(domain).__name__}")
