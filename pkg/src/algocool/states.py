"""Diagonal states, diagonal Hamiltonians and the functionals defined on them.

Registers are stored as flat probability vectors.  The basis is ordered
lexicographically with the first subsystem as the most significant digit,
so ``product([a, b])`` is ``numpy.kron(a, b)`` and index ``2`` of a
two-qubit register is the string ``10``.  All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from ._validation import (
    check_beta_omega,
    check_dims,
    check_int,
    check_positions,
    is_exact,
    normalized_probabilities,
    prod,
    to_float,
)
from .errors import DomainError, ShapeError

__all__ = [
    "Repr",
    "QubitParam",
    "convert",
    "DiagonalState",
    "DiagonalHamiltonian",
    "thermal_qubit",
    "qubit_state",
    "thermal_oscillator",
    "oscillator_tail_mass",
    "thermal_populations",
    "gibbs_state",
    "product",
    "marginal",
    "energy",
    "entropy",
    "binary_entropy",
    "relative_entropy",
    "mutual_information",
    "trace_distance",
    "entropy_change",
    "entropy_delta",
    "marginal_array",
]


# ---------------------------------------------------------------------------
# single-qubit parameters


class Repr(str, Enum):
    """The four equivalent ways of describing a diagonal qubit state."""

    GROUND_POP = "p"
    EXCITED_POP = "delta"
    POLARIZATION = "epsilon"
    BETA_OMEGA = "beta_omega"


_RANGES = {
    Repr.GROUND_POP: (0.0, 1.0),
    Repr.EXCITED_POP: (0.0, 1.0),
    Repr.POLARIZATION: (-1.0, 1.0),
}


def _logit(p: float) -> float:
    if p == 0.0:
        return -math.inf
    if p == 1.0:
        return math.inf
    return math.log(p) - math.log1p(-p)


def _sigmoid(x: float) -> float:
    if x == math.inf:
        return 1.0
    if x == -math.inf:
        return 0.0
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _polar_to_beta(eps: float) -> float:
    # log((1+eps)/(1-eps)) written through atanh for accuracy near eps = 0
    if eps == 1.0:
        return math.inf
    if eps == -1.0:
        return -math.inf
    return 2.0 * math.atanh(eps)


_G, _D, _E, _B = Repr.GROUND_POP, Repr.EXCITED_POP, Repr.POLARIZATION, Repr.BETA_OMEGA

_FORMULAS = {
    (_G, _D): lambda p: 1.0 - p,
    (_G, _E): lambda p: 2.0 * p - 1.0,
    (_G, _B): _logit,
    (_D, _G): lambda d: 1.0 - d,
    (_D, _E): lambda d: 1.0 - 2.0 * d,
    (_D, _B): lambda d: -_logit(d),
    (_E, _G): lambda e: (1.0 + e) / 2.0,
    (_E, _D): lambda e: (1.0 - e) / 2.0,
    (_E, _B): _polar_to_beta,
    (_B, _G): _sigmoid,
    (_B, _D): lambda b: _sigmoid(-b),
    (_B, _E): lambda b: math.tanh(b / 2.0),
}


@dataclass(frozen=True)
class QubitParam:
    """A qubit state described by one number in a chosen representation."""

    value: float
    repr: Repr

    def __post_init__(self):
        rep = Repr(self.repr)
        object.__setattr__(self, "repr", rep)
        if rep is Repr.BETA_OMEGA:
            value = float(self.value)
            if math.isnan(value):
                raise DomainError("beta_omega must not be NaN")
            object.__setattr__(self, "value", value)
            return
        value = float(self.value)
        lo, hi = _RANGES[rep]
        if math.isnan(value) or value < lo or value > hi:
            raise DomainError(f"{rep.value}={self.value} outside [{lo}, {hi}]")
        object.__setattr__(self, "value", value)


def convert(param: QubitParam, target: Repr | str) -> QubitParam:
    """Express ``param`` in the ``target`` representation.

    >>> round(convert(QubitParam(0.5, "epsilon"), "beta_omega").value, 4)
    1.0986
    """
    target = Repr(target)
    if param.repr is target:
        return param
    return QubitParam(_FORMULAS[(param.repr, target)](param.value), target)


def thermal_populations(beta_omega: float, levels: int = 2) -> np.ndarray:
    """Normalized Boltzmann weights ``e^{-i*beta_omega}`` for ``i < levels``."""
    beta_omega = check_beta_omega(beta_omega)
    if beta_omega == math.inf:
        out = np.zeros(levels)
        out[0] = 1.0
        return out
    if levels == 2:
        p = _sigmoid(beta_omega)
        return np.array([p, 1.0 - p])
    i = np.arange(levels, dtype=float)
    logw = -i * beta_omega
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


# ---------------------------------------------------------------------------
# states and Hamiltonians


def _default_dims(size: int) -> tuple[int, ...]:
    n = size.bit_length() - 1
    if size >= 2 and (1 << n) == size:
        return (2,) * n
    return (size,)


@dataclass(frozen=True, eq=False)
class DiagonalState:
    """Probability vector of a diagonal density operator.

    Parameters
    ----------
    probs : array_like
        Populations in the lexicographic basis.  A total within ``1e-9`` of
        one is renormalized on construction.
    dims : sequence of int, optional
        Subsystem dimensions.  Defaults to qubits when the length is a power
        of two, otherwise to a single subsystem.
    """

    probs: np.ndarray
    dims: tuple[int, ...] = field(default=None)

    def __post_init__(self):
        arr = normalized_probabilities(self.probs)
        dims = _default_dims(arr.size) if self.dims is None else check_dims(self.dims)
        if prod(dims) != arr.size:
            raise ShapeError(f"dims {dims} do not match {arr.size} populations")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)
        object.__setattr__(self, "dims", dims)

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def __len__(self) -> int:
        return self.probs.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.probs, dtype=dtype)

    def __repr__(self) -> str:
        return f"DiagonalState(dims={self.dims}, probs={np.array2string(self.probs, precision=6)})"

    def marginal(self, keep: Iterable[int]) -> "DiagonalState":
        return marginal(self, keep)

    def polarization(self) -> float:
        """Ground minus excited population; meaningful for a single qubit."""
        if self.dims != (2,):
            raise ShapeError("polarization is defined for a single qubit")
        return float(self.probs[0] - self.probs[1])


@dataclass(frozen=True, eq=False)
class DiagonalHamiltonian:
    """Energy levels of a register with a non-interacting (local) structure.

    ``levels[i]`` holds the local spectrum of subsystem ``i``; the register
    energies are their Kronecker sum.
    """

    levels: tuple[np.ndarray, ...]

    def __post_init__(self):
        lv = []
        for spectrum in self.levels:
            arr = np.array(spectrum, dtype=float).ravel()
            if arr.size < 1 or not np.all(np.isfinite(arr)):
                raise DomainError("each local spectrum must be finite and nonempty")
            arr.setflags(write=False)
            lv.append(arr)
        if not lv:
            raise ShapeError("a Hamiltonian needs at least one subsystem")
        object.__setattr__(self, "levels", tuple(lv))

    @classmethod
    def qubits(cls, gaps: Sequence[float] | int) -> "DiagonalHamiltonian":
        """Qubit register; an integer means that many unit gaps."""
        if isinstance(gaps, (int, np.integer)):
            gaps = [1.0] * check_int(gaps, name="n_qubits", minimum=1)
        return cls(tuple(np.array([0.0, float(g)]) for g in gaps))

    @classmethod
    def qubit_oscillator(cls, omega: float = 1.0, truncation: int = 64,
                         omega_oscillator: float | None = None) -> "DiagonalHamiltonian":
        truncation = check_int(truncation, name="truncation", minimum=2)
        wa = omega if omega_oscillator is None else omega_oscillator
        return cls((np.array([0.0, float(omega)]), float(wa) * np.arange(truncation, dtype=float)))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(lv.size for lv in self.levels)

    @property
    def energies(self) -> np.ndarray:
        out = np.zeros(1)
        for lv in self.levels:
            out = np.add.outer(out, lv).ravel()
        return out

    def restrict(self, keep: Iterable[int]) -> "DiagonalHamiltonian":
        keep = sorted(check_positions(keep, len(self.levels)))
        return DiagonalHamiltonian(tuple(self.levels[i] for i in keep))

    def local_energies(self, positions: Iterable[int]) -> np.ndarray:
        """Energies of the listed subsystems, broadcast over the full register."""
        positions = set(check_positions(positions, len(self.levels)))
        out = np.zeros(1)
        for i, lv in enumerate(self.levels):
            out = np.add.outer(out, lv if i in positions else np.zeros_like(lv)).ravel()
        return out


def thermal_qubit(beta_omega: float) -> DiagonalState:
    """Gibbs state ``(p_b, 1 - p_b)`` of a unit-gap qubit."""
    return DiagonalState(thermal_populations(beta_omega, 2), (2,))


def qubit_state(p: float) -> DiagonalState:
    """Qubit with ground population ``p``."""
    QubitParam(p, Repr.GROUND_POP)
    return DiagonalState(np.array([p, 1.0 - p]), (2,))


def oscillator_tail_mass(beta_omega: float, truncation: int) -> float:
    """Weight of the levels ``>= truncation`` in the untruncated Gibbs state."""
    beta_omega = check_beta_omega(beta_omega)
    if beta_omega <= 0:
        raise DomainError("an oscillator bath needs beta_omega > 0")
    return math.exp(-truncation * beta_omega)


def thermal_oscillator(beta_omega: float, truncation: int) -> DiagonalState:
    """Truncated Gibbs state of a harmonic mode with unit spacing.

    Populations are proportional to ``e^{-i*beta_omega}`` and renormalized
    over the ``truncation`` kept levels; :func:`oscillator_tail_mass` gives
    the weight that was dropped.
    """
    truncation = check_int(truncation, name="truncation", minimum=2)
    beta_omega = check_beta_omega(beta_omega)
    if beta_omega <= 0:
        raise DomainError("thermal_oscillator needs beta_omega > 0 for a finite truncation")
    return DiagonalState(thermal_populations(beta_omega, truncation), (truncation,))


def gibbs_state(hamiltonian: DiagonalHamiltonian, beta: float) -> DiagonalState:
    """Product Gibbs state of a local Hamiltonian at inverse temperature ``beta``."""
    beta = check_beta_omega(beta, name="beta")
    factors = []
    for lv in hamiltonian.levels:
        if beta == math.inf:
            w = (lv == lv.min()).astype(float)
            factors.append(w / w.sum())
        elif lv.size == 2 and lv[0] <= lv[1]:
            # same arithmetic as thermal_qubit, so resets and initial states agree bitwise
            factors.append(thermal_populations(beta * (lv[1] - lv[0]), 2))
        else:
            logw = -beta * (lv - lv.min())
            w = np.exp(logw - logw.max())
            factors.append(w / w.sum())
    out = np.ones(1)
    for f in factors:
        out = np.kron(out, f)
    return DiagonalState(out, hamiltonian.dims)


def product(states: Sequence[DiagonalState]) -> DiagonalState:
    """Tensor product in the lexicographic (Kronecker) convention."""
    states = list(states)
    if not states:
        raise ShapeError("product of an empty list")
    probs = np.ones(1)
    dims: tuple[int, ...] = ()
    for s in states:
        probs = np.kron(probs, s.probs)
        dims += s.dims
    return DiagonalState(probs, dims)


def marginal_array(probs: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Sum ``probs`` (float or exact) over every subsystem not in ``keep``."""
    keep = sorted(check_positions(keep, len(dims)))
    drop = tuple(i for i in range(len(dims)) if i not in keep)
    if not drop:
        return np.asarray(probs).copy()
    return np.asarray(probs).reshape(tuple(dims)).sum(axis=drop).ravel()


def marginal(state: DiagonalState, keep: Iterable[int]) -> DiagonalState:
    """Reduced state on the subsystems in ``keep`` (0-based positions)."""
    keep = tuple(keep) if not isinstance(keep, int) else (keep,)
    if len(keep) == 0:
        raise DomainError("marginal needs at least one kept subsystem")
    keep = sorted(check_positions(keep, state.n_subsystems))
    return DiagonalState(marginal_array(state.probs, state.dims, keep),
                         tuple(state.dims[i] for i in keep))


def _check_same(a, b):
    if tuple(a.dims) != tuple(b.dims):
        raise ShapeError(f"dimension mismatch: {a.dims} vs {b.dims}")


def energy(state: DiagonalState, hamiltonian: DiagonalHamiltonian) -> float:
    """Mean energy ``sum_i p_i E_i``."""
    _check_same(state, hamiltonian)
    return float(np.dot(state.probs, hamiltonian.energies))


def _xlogx(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p, dtype=float)
    m = p > 0
    out[m] = p[m] * np.log(p[m])
    return out


def entropy(state: DiagonalState | np.ndarray) -> float:
    """Shannon entropy of the populations, in nats."""
    p = state.probs if isinstance(state, DiagonalState) else to_float(state)
    return float(-_xlogx(np.asarray(p, dtype=float)).sum())


def binary_entropy(p: float) -> float:
    """``h(p) = -p log p - (1-p) log(1-p)``."""
    QubitParam(p, Repr.GROUND_POP)
    return entropy(np.array([p, 1.0 - p]))


def relative_entropy(p_state: DiagonalState, q_state: DiagonalState) -> float:
    """Kullback-Leibler divergence; ``inf`` when the support is not contained."""
    _check_same(p_state, q_state)
    p, q = p_state.probs, q_state.probs
    m = p > 0
    if np.any(q[m] == 0):
        return math.inf
    return float(np.sum(p[m] * (np.log(p[m]) - np.log(q[m]))))


def _check_partition(partition, n: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    try:
        a, b = partition
    except (TypeError, ValueError) as exc:
        raise DomainError("partition must be a pair of position sets") from exc
    a = check_positions(a, n)
    b = check_positions(b, n)
    if set(a) & set(b) or len(a) + len(b) != n:
        raise DomainError(f"partition {partition} must split all {n} subsystems disjointly")
    return tuple(sorted(a)), tuple(sorted(b))


def mutual_information(joint: DiagonalState, partition) -> float:
    a, b = _check_partition(partition, joint.n_subsystems)
    return entropy(marginal(joint, a)) + entropy(marginal(joint, b)) - entropy(joint)


def trace_distance(a: DiagonalState, b: DiagonalState) -> float:
    """Half the 1-norm distance between two population vectors."""
    _check_same(a, b)
    return 0.5 * float(np.abs(a.probs - b.probs).sum())


def entropy_delta(p: np.ndarray, d: np.ndarray, q: np.ndarray | None = None) -> float:
    """``S(p + d) - S(p)`` evaluated without cancelling two nearly equal sums.

    Where ``p_i > 0`` the change of ``-p log p`` is split as
    ``-d log(p + d) - p log(1 + d / p)``, which stays accurate when ``d`` is
    many orders of magnitude below ``p``.  When an entry loses more than half
    of its weight, ``log1p(d / p)`` inherits the rounding of ``p`` amplified
    by ``p / q``; passing the post vector ``q`` lets those entries use
    ``log q - log p`` instead.
    """
    p = np.asarray(p, dtype=float)
    d = np.asarray(d, dtype=float)
    q = p + d if q is None else np.asarray(q, dtype=float)
    total = 0.0
    m = p > 0
    live = m & (q > 0)
    if np.any(live):
        pm, dm, qm = p[live], d[live], q[live]
        total -= float(np.sum(dm * np.log(qm)))
        big = dm < -0.5 * pm
        ratio = np.empty_like(pm)
        ratio[big] = np.log(qm[big]) - np.log(pm[big])
        ratio[~big] = np.log1p(dm[~big] / pm[~big])
        total -= float(np.sum(pm * ratio))
    emptied = m & (q <= 0)
    if np.any(emptied):
        total += float(np.sum(p[emptied] * np.log(p[emptied])))
    z = (~m) & (q > 0)
    if np.any(z):
        total -= float(np.sum(q[z] * np.log(q[z])))
    return total


def entropy_change(pre: DiagonalState, post: DiagonalState) -> float:
    """``S(post) - S(pre)`` via :func:`entropy_delta`."""
    _check_same(pre, post)
    return entropy_delta(pre.probs, post.probs - pre.probs, post.probs)
