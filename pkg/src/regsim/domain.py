"""Explicit finite probability spaces and exact expectations.

Everything downstream works over a finite domain of N points indexed
0..N-1.  Distributions are probability vectors, bounded functions are
[0, 1]-valued vectors, and every statistic is an exact weighted sum in
double precision.  Tolerances: 1e-12 for structural invariants (vectors
summing to one), 1e-10 for derived sums.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DomainMismatchError, ValidationError

STRUCT_TOL = 1e-12
DERIVED_TOL = 1e-10

VectorLike = Union["BoundedFn", np.ndarray, Sequence[float]]


def _frozen_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be a one-dimensional vector, got shape {arr.shape}")
    if arr.size == 0:
        raise ValidationError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FiniteDomain:
    """A finite set of ``size`` points, optionally carrying an n-bit encoding.

    When ``bit_width`` is set, element i is identified with the n-bit binary
    encoding of i (most-significant bit first), which coordinate families
    read off bit by bit.
    """

    size: int
    bit_width: int | None = None

    def __post_init__(self):
        if self.size < 1:
            raise ValidationError("domain size must be >= 1")
        if self.bit_width is not None:
            if self.bit_width < 0:
                raise ValidationError("bit_width must be nonnegative")
            if self.size > 2 ** self.bit_width:
                raise ValidationError(
                    f"domain size {self.size} does not fit in {self.bit_width} bits"
                )

    def to_json(self) -> dict:
        d = {"size": self.size}
        if self.bit_width is not None:
            d["bit_width"] = self.bit_width
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "FiniteDomain":
        return cls(size=obj["size"], bit_width=obj.get("bit_width"))


@dataclass(frozen=True)
class Distribution:
    """A probability vector: nonnegative weights summing to one (1e-12)."""

    weights: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.weights, "distribution weights")
        if np.any(arr < 0):
            raise ValidationError("distribution weights must be nonnegative")
        total = float(arr.sum())
        if abs(total - 1.0) > STRUCT_TOL:
            raise ValidationError(f"distribution weights sum to {total!r}, not 1 within 1e-12")
        object.__setattr__(self, "weights", arr)

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def to_json(self) -> list[float]:
        return [float(w) for w in self.weights]

    @classmethod
    def uniform(cls, n: int) -> "Distribution":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point(cls, n: int, index: int) -> "Distribution":
        w = np.zeros(n)
        w[index] = 1.0
        return cls(w)


@dataclass(frozen=True)
class BoundedFn:
    """A [0, 1]-valued function on the domain, stored as a value vector.

    Out-of-range inputs are rejected, never clipped: a target or simulator
    that leaves [0, 1] is a caller bug the audits must surface, not hide.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.values, "function values")
        if np.any(arr < 0) or np.any(arr > 1):
            raise ValidationError("function values must lie in [0, 1]")
        object.__setattr__(self, "values", arr)

    @property
    def size(self) -> int:
        return int(self.values.size)

    def to_json(self) -> list[float]:
        return [float(v) for v in self.values]

    @classmethod
    def constant(cls, n: int, value: float) -> "BoundedFn":
        return cls(np.full(n, float(value)))

    @classmethod
    def indicator(cls, n: int, index: int) -> "BoundedFn":
        v = np.zeros(n)
        v[index] = 1.0
        return cls(v)


def as_values(f: VectorLike) -> np.ndarray:
    """Extract the raw value vector from a BoundedFn or array-like."""
    if isinstance(f, BoundedFn):
        return f.values
    arr = np.asarray(f, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"expected a vector, got shape {arr.shape}")
    return arr


def _check_size(n: int, arr: np.ndarray, what: str) -> None:
    if arr.size != n:
        raise DomainMismatchError(n, arr.size, what)


def expectation(f: VectorLike, dist: Distribution) -> float:
    """E_{x~D}[f(x)] as an exact weighted sum.

    Accepts signed vectors as well as BoundedFn; only the domain size is
    checked here.
    """
    fv = as_values(f)
    _check_size(dist.size, fv, "function")
    return float(np.dot(dist.weights, fv))


def correlation(f: VectorLike, g: BoundedFn, h: BoundedFn, dist: Distribution) -> float:
    """E_{x~D}[f(x) (g(x) - h(x))] for a signed test f with values in [-1, 1]."""
    fv = as_values(f)
    _check_size(dist.size, fv, "test function")
    _check_size(dist.size, g.values, "target")
    _check_size(dist.size, h.values, "simulator")
    if np.any(fv < -1) or np.any(fv > 1):
        raise ValidationError("test function values must lie in [-1, 1]")
    return float(np.dot(dist.weights, fv * (g.values - h.values)))


def tv_distance(p: Distribution, q: Distribution) -> float:
    """Total variation distance: half the L1 gap between the weight vectors."""
    _check_size(p.size, q.weights, "second distribution")
    return 0.5 * float(np.abs(p.weights - q.weights).sum())


def l1_half(a: np.ndarray, b: np.ndarray) -> float:
    """Half L1 distance between raw nonnegative vectors (sub-probability safe)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size != b.size:
        raise DomainMismatchError(a.size, b.size, "vector")
    return 0.5 * float(np.abs(a - b).sum())


def potential(g: BoundedFn, h: BoundedFn, dist: Distribution) -> float:
    """The squared-error potential E_{x~D}[(g(x) - h(x))^2] driving every
    termination argument in the boosting modules."""
    _check_size(dist.size, g.values, "target")
    _check_size(dist.size, h.values, "simulator")
    diff = g.values - h.values
    return float(np.dot(dist.weights, diff * diff))


def round_to_grid(values: np.ndarray, step: float) -> np.ndarray:
    """Round each entry to the nearest multiple of ``step`` (ties to even),
    then clip back into [0, 1].

    Clipping after rounding keeps the top point of the grid at exactly 1.0,
    so the worst-case rounding error is step/2 everywhere in [0, 1].
    """
    if step <= 0:
        raise ValidationError("grid step must be positive")
    return np.clip(np.round(np.asarray(values, dtype=float) / step) * step, 0.0, 1.0)
