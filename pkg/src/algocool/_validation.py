"""Argument checking and small numeric helpers used across modules.

Arrays flowing through the simulator are either ``float64`` or ``object``
arrays of :class:`fractions.Fraction`.  The latter keeps every population
exact, which matters when a quantity of interest is a difference that has
decayed far below the populations it is taken from.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction
from numbers import Integral, Real
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ShapeError

#: Sum-to-one tolerance accepted without complaint.
NORM_TOL = 1e-12
#: Largest deviation that is silently renormalized away.
RENORM_TOL = 1e-9
#: Column-sum tolerance for left-stochastic matrices.
STOCHASTIC_TOL = 1e-12

DEFAULT_MAX_QUBITS = 14


def max_qubits() -> int:
    """Register-size cap, overridable through ``ALGOCOOL_MAX_QUBITS``."""
    raw = os.environ.get("ALGOCOOL_MAX_QUBITS")
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_QUBITS
    try:
        value = int(raw)
    except ValueError as exc:
        raise DomainError(f"ALGOCOOL_MAX_QUBITS must be an integer, got {raw!r}") from exc
    if value < 1:
        raise DomainError("ALGOCOOL_MAX_QUBITS must be positive")
    return value


def check_beta_omega(value, *, name: str = "beta_omega", allow_negative: bool = True,
                     allow_inf: bool = True) -> float:
    """Return ``value`` as a float after range checks.

    ``+inf`` stands for a zero-temperature bath.  NaN is always rejected.
    """
    if not isinstance(value, Real):
        raise DomainError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if math.isnan(value):
        raise DomainError(f"{name} must not be NaN")
    if math.isinf(value):
        if not allow_inf or value < 0:
            raise DomainError(f"{name}={value} is not allowed here")
    if not allow_negative and value < 0:
        raise DomainError(f"{name} must be non-negative, got {value}")
    return value


def check_int(value, *, name: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_dims(dims: Iterable[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise ShapeError("dims must be nonempty")
    if any(d < 1 for d in dims):
        raise ShapeError(f"subsystem dimensions must be positive, got {dims}")
    return dims


def check_positions(positions: Iterable[int], n_subsystems: int, *,
                    allow_empty: bool = False) -> tuple[int, ...]:
    """Validate subsystem positions (0-based) and reject duplicates."""
    if isinstance(positions, Integral):
        positions = (positions,)
    out = tuple(int(p) for p in positions)
    if not out and not allow_empty:
        raise DomainError("at least one subsystem position is required")
    for p in out:
        if p < 0 or p >= n_subsystems:
            raise DomainError(f"position {p} out of range for {n_subsystems} subsystems")
    if len(set(out)) != len(out):
        raise DomainError(f"duplicate positions in {out}")
    return out


def is_exact(array: np.ndarray) -> bool:
    return array.dtype == object


def to_exact(array) -> np.ndarray:
    """Exact rational copy of ``array`` (floats convert without rounding)."""
    arr = np.asarray(array)
    flat = [v if isinstance(v, Fraction) else Fraction(v) for v in arr.ravel().tolist()]
    out = np.empty(len(flat), dtype=object)
    out[:] = flat
    return out.reshape(arr.shape)


def to_float(array) -> np.ndarray:
    arr = np.asarray(array)
    if arr.dtype == object:
        return np.array([float(v) for v in arr.ravel()], dtype=float).reshape(arr.shape)
    return arr.astype(float, copy=False)


def normalized_probabilities(probs, *, name: str = "probs") -> np.ndarray:
    """Validate a probability vector and return a float copy.

    Entries must be finite and non-negative.  A total that misses one by less
    than :data:`RENORM_TOL` is rescaled; anything larger is rejected.
    """
    arr = np.array(to_float(probs), dtype=float).ravel()
    if arr.size == 0:
        raise ShapeError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite entries")
    if np.any(arr < 0):
        if arr.min() < -NORM_TOL:
            raise DomainError(f"{name} has a negative entry {arr.min():.3e}")
        arr = np.clip(arr, 0.0, None)
    total = arr.sum()
    deviation = abs(total - 1.0)
    if deviation > RENORM_TOL:
        raise DomainError(f"{name} sums to {total!r}, not 1")
    if deviation > 0.0:
        arr = arr / total
    return arr


def prod(values: Sequence[int]) -> int:
    return int(math.prod(values))
