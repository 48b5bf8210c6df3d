"""Transition matrices (left-stochastic G-matrices) for control and bath steps.

A matrix ``G`` maps a population vector ``x`` to ``G @ x`` and every column
of ``G`` is a probability distribution.  Three concrete flavours exist:

* :class:`TransitionMatrix` holds a dense matrix.
* :class:`PermutationMatrix` stores only the destination index of every
  basis state, so large registers never allocate a ``D x D`` array.
* :class:`LocalMap` acts with a small matrix on a few subsystems and as the
  identity elsewhere, applied by tensor contraction.

Constructors accept ``exact=True`` to build entries as
:class:`fractions.Fraction`; complementary entries such as ``1 - p`` are then
formed exactly so columns sum to one without rounding.
"""

from __future__ import annotations

import math
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ._validation import (
    STOCHASTIC_TOL,
    check_beta_omega,
    check_dims,
    check_positions,
    is_exact,
    prod,
    to_exact,
    to_float,
)
from .errors import DomainError, ShapeError
from .states import DiagonalHamiltonian, DiagonalState, gibbs_state, thermal_populations

__all__ = [
    "StepKind",
    "TransitionMatrix",
    "PermutationMatrix",
    "LocalMap",
    "identity",
    "gamma1",
    "gamma2",
    "cms_on",
    "pauli_x",
    "pauli_x_on",
    "beta_swap",
    "u_ppa3",
    "sort_compression",
    "energy_ordered_compression",
    "energy_basis_order",
    "descending_order",
    "compose",
    "reset_qubits",
    "reset_subsystems",
    "lift",
    "is_gibbs_stochastic",
    "is_left_stochastic",
]

#: Relative gap below which two populations count as tied when sorting.
TIE_RTOL = 1e-12


class StepKind(str, Enum):
    CONTROL = "CONTROL"
    THERMALIZATION = "THERMALIZATION"


def _as_kind(kind) -> StepKind | None:
    return None if kind is None else StepKind(kind)


class TransitionMatrix:
    """Dense left-stochastic matrix between two registers.

    Parameters
    ----------
    entries : array_like, shape (D_out, D_in)
    dims_in, dims_out : sequence of int
        Subsystem dimensions on each side; ``dims_out`` defaults to ``dims_in``.
    kind : StepKind, optional
    label : str
        Free-form name used in traces and error messages.
    """

    def __init__(self, entries, dims_in, dims_out=None, kind=None, label: str = "",
                 *, validate: bool = True):
        arr = np.array(entries, dtype=object if np.asarray(entries).dtype == object else float)
        if arr.ndim != 2:
            raise ShapeError("entries must be a 2-D array")
        self.dims_in = check_dims(dims_in)
        self.dims_out = self.dims_in if dims_out is None else check_dims(dims_out)
        if arr.shape != (prod(self.dims_out), prod(self.dims_in)):
            raise ShapeError(f"entries shape {arr.shape} does not match dims "
                             f"{self.dims_out} x {self.dims_in}")
        arr.setflags(write=False)
        self._entries = arr
        self._float_entries = None
        self._exact_entries = None
        self.kind = _as_kind(kind)
        self.label = label
        if validate and not is_left_stochastic(self):
            raise DomainError(f"{label or 'matrix'} is not left-stochastic")

    # -- basic protocol ----------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (prod(self.dims_out), prod(self.dims_in))

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def is_permutation(self) -> bool:
        e = to_float(self.entries)
        if e.shape[0] != e.shape[1]:
            return False
        ones = np.isclose(e, 1.0, rtol=0, atol=STOCHASTIC_TOL)
        zeros = np.isclose(e, 0.0, rtol=0, atol=STOCHASTIC_TOL)
        return bool(np.all(ones | zeros) and np.all(ones.sum(axis=0) == 1)
                    and np.all(ones.sum(axis=1) == 1))

    def _entries_for(self, x: np.ndarray) -> np.ndarray:
        if is_exact(x):
            if self._exact_entries is None:
                self._exact_entries = (self._entries if is_exact(self._entries)
                                       else to_exact(self._entries))
            return self._exact_entries
        if self._float_entries is None:
            self._float_entries = to_float(self._entries)
        return self._float_entries

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Return ``G @ x`` for a raw population vector (float or exact)."""
        x = np.asarray(x)
        if x.shape != (self.shape[1],):
            raise ShapeError(f"vector of length {x.size} does not fit {self.shape}")
        return self._entries_for(x) @ x

    def __call__(self, state: DiagonalState) -> DiagonalState:
        if tuple(state.dims) != self.dims_in:
            raise ShapeError(f"state dims {state.dims} do not match {self.dims_in}")
        return DiagonalState(self.apply(state.probs), self.dims_out)

    def __matmul__(self, other):
        if isinstance(other, DiagonalState):
            return self(other)
        if isinstance(other, TransitionMatrix):
            return compose(self, other)
        return self.apply(np.asarray(other))

    def __repr__(self) -> str:
        kind = self.kind.value if self.kind else "-"
        return f"{type(self).__name__}({self.label or '?'}, {kind}, {self.shape[0]}x{self.shape[1]})"


class PermutationMatrix(TransitionMatrix):
    """Basis permutation sending basis state ``i`` to ``dest[i]``."""

    def __init__(self, dest, dims, kind=StepKind.CONTROL, label: str = ""):
        dest = np.asarray(dest, dtype=np.intp).ravel()
        self.dims_in = self.dims_out = check_dims(dims)
        if dest.size != prod(self.dims_in):
            raise ShapeError("destination map length does not match dims")
        if not np.array_equal(np.sort(dest), np.arange(dest.size)):
            raise DomainError("destination map is not a permutation")
        dest.setflags(write=False)
        self.dest = dest
        self.kind = _as_kind(kind)
        self.label = label
        self._dense = None
        self._float_entries = self._exact_entries = None

    @property
    def entries(self) -> np.ndarray:
        if self._dense is None:
            d = np.zeros((self.dest.size, self.dest.size))
            d[self.dest, np.arange(self.dest.size)] = 1.0
            d.setflags(write=False)
            self._dense = d
        return self._dense

    @property
    def is_permutation(self) -> bool:
        return True

    @property
    def source(self) -> np.ndarray:
        """Inverse map: ``source[j]`` is the basis state that lands on ``j``."""
        src = np.empty_like(self.dest)
        src[self.dest] = np.arange(self.dest.size)
        return src

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.shape != (self.dest.size,):
            raise ShapeError(f"vector of length {x.size} does not fit {self.shape}")
        out = np.empty_like(x)
        out[self.dest] = x
        return out


class LocalMap(TransitionMatrix):
    """A small matrix acting on ``positions`` of a register, identity elsewhere."""

    def __init__(self, local: TransitionMatrix, dims, positions, kind=None, label: str = ""):
        dims = check_dims(dims)
        positions = check_positions(positions, len(dims))
        expected = tuple(dims[p] for p in positions)
        if local.dims_in != expected and prod(local.dims_in) != prod(expected):
            raise ShapeError(f"local map on {local.dims_in} does not fit subsystems {expected}")
        if prod(local.dims_in) != prod(expected):
            raise ShapeError(f"local map on {local.dims_in} does not fit subsystems {expected}")
        self.local = local
        self.positions = positions
        self.dims_in = dims
        out_dims = list(dims)
        if len(positions) == len(local.dims_out):
            for p, d in zip(positions, local.dims_out):
                out_dims[p] = d
        elif local.dims_out != local.dims_in:
            raise ShapeError("a dimension-changing local map must list one dim per position")
        self.dims_out = tuple(out_dims)
        self.kind = _as_kind(kind) if kind is not None else local.kind
        self.label = label or local.label
        self._dense = None

    @property
    def entries(self) -> np.ndarray:
        if self._dense is None:
            size = prod(self.dims_in)
            eye = np.eye(size)
            cols = [self.apply(eye[:, j]) for j in range(size)]
            self._dense = np.array(cols).T
            self._dense.setflags(write=False)
        return self._dense

    @property
    def is_permutation(self) -> bool:
        return self.local.is_permutation

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.shape != (prod(self.dims_in),):
            raise ShapeError(f"vector of length {x.size} does not fit {self.shape}")
        k = len(self.positions)
        front = list(range(k))
        t = np.moveaxis(x.reshape(self.dims_in), self.positions, front)
        rest = t.shape[k:]
        t = t.reshape(prod(self.local.dims_in), -1)
        if isinstance(self.local, PermutationMatrix):
            t = t[self.local.source]
        else:
            t = self.local._entries_for(x) @ t
        out_local = tuple(self.dims_out[p] for p in self.positions)
        t = t.reshape(out_local + rest)
        return np.moveaxis(t, front, self.positions).ravel()


def compose(a: TransitionMatrix, b: TransitionMatrix) -> TransitionMatrix:
    """Matrix product ``a @ b`` (apply ``b`` first)."""
    if a.dims_in != b.dims_out:
        raise ShapeError(f"cannot compose {a.dims_in} with {b.dims_out}")
    kind = a.kind if a.kind == b.kind else None
    label = f"{a.label}*{b.label}"
    if isinstance(a, PermutationMatrix) and isinstance(b, PermutationMatrix):
        return PermutationMatrix(a.dest[b.dest], b.dims_in, kind=kind, label=label)
    exact = is_exact(np.asarray(a.entries)) or is_exact(np.asarray(b.entries))
    if exact:
        ea, eb = to_exact(a.entries), to_exact(b.entries)
    else:
        ea, eb = to_float(a.entries), to_float(b.entries)
    return TransitionMatrix(ea @ eb, b.dims_in, a.dims_out, kind=kind, label=label)


def is_left_stochastic(g: TransitionMatrix, tol: float = STOCHASTIC_TOL) -> bool:
    """Non-negative entries and unit column sums, to within ``tol``."""
    if isinstance(g, PermutationMatrix):
        return True
    if isinstance(g, LocalMap):
        return is_left_stochastic(g.local, tol)
    e = g.entries
    if is_exact(e):
        if all(isinstance(v, Fraction) for v in e.ravel()):
            return bool(np.all(e >= 0) and all(s == 1 for s in e.sum(axis=0)))
        e = to_float(e)
    return bool(np.all(e >= -tol) and np.all(np.abs(e.sum(axis=0) - 1.0) <= tol))


# ---------------------------------------------------------------------------
# numeric helpers


def _pair(p: float, exact: bool):
    """``(p, 1 - p)`` with the complement formed in the requested arithmetic."""
    if exact:
        fp = Fraction(p)
        return fp, 1 - fp
    return p, 1.0 - p


def _distribution(probs: np.ndarray, exact: bool) -> np.ndarray:
    if not exact:
        return np.asarray(probs, dtype=float)
    vals = [Fraction(float(v)) for v in probs]
    vals[-1] = 1 - sum(vals[:-1], Fraction(0))
    out = np.empty(len(vals), dtype=object)
    out[:] = vals
    return out


def _matrix(rows, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty((len(rows), len(rows[0])), dtype=object)
        for i, row in enumerate(rows):
            for j, v in enumerate(row):
                out[i, j] = v if isinstance(v, Fraction) else Fraction(v)
        return out
    return np.array(rows, dtype=float)


# ---------------------------------------------------------------------------
# elementary maps


def identity(dims) -> PermutationMatrix:
    dims = check_dims(dims)
    return PermutationMatrix(np.arange(prod(dims)), dims, kind=None, label="identity")


def gamma1(beta_omega: float, *, exact: bool = False) -> TransitionMatrix:
    """Full thermalization of one qubit: both columns are the Gibbs state."""
    p, q = _pair(float(thermal_populations(beta_omega)[0]), exact)
    return TransitionMatrix(_matrix([[p, p], [q, q]], exact), (2,),
                            kind=StepKind.THERMALIZATION, label="Gamma1")


def gamma2(beta_omega: float, *, exact: bool = False) -> TransitionMatrix:
    """Two-qubit relaxation that only exchanges population of ``00`` and ``11``.

    The pair equilibrates at the effective gap ``2*omega``, with ground
    weight ``p_b2 = 1 / (1 + exp(-2*beta_omega))``.  ``01`` and ``10`` are
    left untouched.
    """
    beta_omega = check_beta_omega(beta_omega)
    p2, q2 = _pair(float(thermal_populations(2.0 * beta_omega)[0]), exact)
    z, o = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    rows = [[p2, z, z, p2],
            [z, o, z, z],
            [z, z, o, z],
            [q2, z, z, q2]]
    return TransitionMatrix(_matrix(rows, exact), (2, 2),
                            kind=StepKind.THERMALIZATION, label="Gamma2")


def _cms_local(exact: bool) -> TransitionMatrix:
    h = Fraction(1, 2) if exact else 0.5
    return TransitionMatrix(_matrix([[h, h], [h, h]], exact), (2,),
                            kind=StepKind.CONTROL, label="CMS")


def cms_on(dims, position: int, *, exact: bool = False) -> LocalMap:
    """Randomize one qubit to ``(1/2, 1/2)``.

    This is doubly stochastic rather than a permutation, yet it counts as a
    control step: its energy change is booked as work.
    """
    dims = check_dims(dims)
    (position,) = check_positions((position,), len(dims))
    if dims[position] != 2:
        raise DomainError(f"position {position} is not a qubit")
    return LocalMap(_cms_local(exact), dims, (position,), label=f"CMS[{position}]")


def pauli_x() -> PermutationMatrix:
    return PermutationMatrix([1, 0], (2,), label="X")


def pauli_x_on(dims, position: int) -> PermutationMatrix:
    """Bit flip of one qubit in a register, as a full-register permutation."""
    dims = check_dims(dims)
    (position,) = check_positions((position,), len(dims))
    if dims[position] != 2:
        raise DomainError(f"position {position} is not a qubit")
    return lift(pauli_x(), dims, (position,))


def beta_swap(beta_omega: float, *, exact: bool = False) -> TransitionMatrix:
    """Dephasing bath step: ``|1> -> |0>`` surely, ``|0> -> |1>`` with prob ``e^{-beta_omega}``."""
    beta_omega = check_beta_omega(beta_omega, allow_negative=False)
    s = 0.0 if beta_omega == math.inf else math.exp(-beta_omega)
    s, keep = _pair(s, exact)
    z, o = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    return TransitionMatrix(_matrix([[keep, o], [s, z]], exact), (2,),
                            kind=StepKind.THERMALIZATION, label="beta-swap")


def u_ppa3() -> PermutationMatrix:
    """The fixed three-qubit compression: exchange basis states 3 (011) and 4 (100)."""
    dest = np.arange(8)
    dest[3], dest[4] = 4, 3
    return PermutationMatrix(dest, (2, 2, 2), label="U_PPA3")


# ---------------------------------------------------------------------------
# compressions


def descending_order(x: np.ndarray, rtol: float = TIE_RTOL) -> np.ndarray:
    """Indices that sort ``x`` into non-increasing order.

    Ties keep ascending index order.  For float input, values whose relative
    gap is at most ``rtol`` count as tied: products that agree in exact
    arithmetic can land an ulp apart after rounding, and a plain stable sort
    would then order them by noise.  Exact (rational) input uses exact ties.
    """
    x = np.asarray(x)
    if is_exact(x):
        return np.argsort(-x, kind="stable")
    order = np.argsort(-x, kind="stable")
    xs = x[order]
    gaps = xs[:-1] - xs[1:]
    breaks = gaps > rtol * np.abs(xs[:-1])
    group = np.concatenate(([0], np.cumsum(breaks)))
    return order[np.lexsort((order, group))]


def _probs_and_dims(state, dims=None):
    if isinstance(state, DiagonalState):
        return state.probs, state.dims
    x = np.asarray(state)
    if dims is None:
        n = x.size.bit_length() - 1
        dims = (2,) * n if (1 << n) == x.size else (x.size,)
    return x, check_dims(dims)


def sort_compression(state, dims=None) -> PermutationMatrix:
    """Permutation that rearranges the populations in non-increasing order.

    ``state`` may be a :class:`DiagonalState` or a raw vector with ``dims``.
    """
    x, dims = _probs_and_dims(state, dims)
    order = descending_order(x)
    dest = np.empty(order.size, dtype=np.intp)
    dest[order] = np.arange(order.size)
    return PermutationMatrix(dest, dims, label="SORT")


def energy_basis_order(hamiltonian: DiagonalHamiltonian, target_position: int = 0) -> np.ndarray:
    """Basis indices listed by target level, then machine energy, then index."""
    dims = hamiltonian.dims
    (target_position,) = check_positions((target_position,), len(dims))
    machine = [i for i in range(len(dims)) if i != target_position]
    tgt_levels = hamiltonian.levels[target_position]
    tgt_rank = np.empty(tgt_levels.size, dtype=np.intp)
    tgt_rank[np.argsort(tgt_levels, kind="stable")] = np.arange(tgt_levels.size)
    grids = np.indices(dims).reshape(len(dims), -1)
    rank = tgt_rank[grids[target_position]]
    e_machine = hamiltonian.local_energies(machine) if machine else np.zeros(prod(dims))
    idx = np.arange(prod(dims))
    return idx[np.lexsort((idx, e_machine, rank))]


def energy_ordered_compression(state, hamiltonian: DiagonalHamiltonian,
                               target_position: int = 0) -> PermutationMatrix:
    """Descending sort against an energy-aware basis ordering.

    The largest populations go to the target's lowest level.  Within each
    target level, larger populations go to lower-energy machine states, so
    the target ends up exactly as cold as after :func:`sort_compression`
    while the machine ends up colder, which costs less work.
    """
    x, dims = _probs_and_dims(state, hamiltonian.dims)
    if tuple(dims) != hamiltonian.dims:
        raise ShapeError(f"state dims {dims} do not match Hamiltonian dims {hamiltonian.dims}")
    slots = energy_basis_order(hamiltonian, target_position)
    order = descending_order(x)
    dest = np.empty(order.size, dtype=np.intp)
    dest[order] = slots
    return PermutationMatrix(dest, dims, label="E-SORT")


# ---------------------------------------------------------------------------
# bath resets and lifting


def reset_subsystems(dims, positions, beta_omega: float, *, exact: bool = False,
                     hamiltonian: DiagonalHamiltonian | None = None) -> LocalMap:
    """Trace out ``positions`` and re-inject their Gibbs state at ``beta_omega``.

    Qubits use unit gaps and other subsystems an evenly spaced ladder with
    unit spacing, unless ``hamiltonian`` provides the local spectra.  The
    result is a rank-one map on the addressed subsystems.
    """
    dims = check_dims(dims)
    positions = tuple(sorted(check_positions(positions, len(dims))))
    if hamiltonian is None:
        hamiltonian = DiagonalHamiltonian(tuple(np.arange(d, dtype=float) for d in dims))
    elif hamiltonian.dims != dims:
        raise ShapeError("Hamiltonian dims do not match the register")
    fresh = gibbs_state(hamiltonian.restrict(positions), beta_omega).probs
    col = _distribution(fresh, exact)
    local = np.empty((col.size, col.size), dtype=col.dtype)
    local[:, :] = col[:, None]
    g = TransitionMatrix(local, tuple(dims[p] for p in positions),
                         kind=StepKind.THERMALIZATION, label="reset")
    return LocalMap(g, dims, positions, label=f"reset{list(positions)}")


def reset_qubits(dims, positions, beta_omega: float, *, exact: bool = False) -> LocalMap:
    """Replace the listed qubits by fresh thermal qubits at ``beta_omega``."""
    dims = check_dims(dims)
    positions = check_positions(positions, len(dims))
    if any(dims[p] != 2 for p in positions):
        raise DomainError("reset_qubits addresses qubits only; use reset_subsystems")
    return reset_subsystems(dims, positions, beta_omega, exact=exact)


def lift(local: TransitionMatrix, dims, positions) -> TransitionMatrix:
    """Embed ``local`` on ``positions`` of a register, identity elsewhere.

    Permutations stay permutations, so the lifted map is stored as an index
    map whatever the register size.
    """
    dims = check_dims(dims)
    positions = check_positions(positions, len(dims))
    if tuple(dims[p] for p in positions) != local.dims_in:
        raise ShapeError(f"local dims {local.dims_in} do not match subsystems "
                         f"{tuple(dims[p] for p in positions)}")
    lm = LocalMap(local, dims, positions)
    if local.is_permutation and local.dims_in == local.dims_out:
        if not isinstance(local, PermutationMatrix):
            local = PermutationMatrix(np.argmax(to_float(local.entries), axis=0),
                                      local.dims_in, kind=local.kind, label=local.label)
            lm = LocalMap(local, dims, positions)
        landed = lm.apply(np.arange(prod(dims), dtype=float))
        src = np.rint(landed).astype(np.intp)
        dest = np.empty_like(src)
        dest[src] = np.arange(src.size)
        return PermutationMatrix(dest, dims, kind=local.kind,
                                 label=f"{local.label}{list(positions)}")
    return lm


def trace_out_matrix(dims, keep) -> TransitionMatrix:
    """Rectangular 0/1 matrix summing over every subsystem not in ``keep``."""
    dims = check_dims(dims)
    keep = tuple(sorted(check_positions(keep, len(dims))))
    size = prod(dims)
    grids = np.indices(dims).reshape(len(dims), -1)
    kept_dims = tuple(dims[k] for k in keep)
    rows = np.ravel_multi_index(tuple(grids[k] for k in keep), kept_dims)
    e = np.zeros((prod(kept_dims), size))
    e[rows, np.arange(size)] = 1.0
    return TransitionMatrix(e, dims, kept_dims, label="trace-out")


def injection_matrix(dims, positions, local_state: np.ndarray) -> TransitionMatrix:
    """Rectangular matrix tensoring ``local_state`` into ``positions``.

    ``dims`` is the full output register; the input is the register with
    ``positions`` removed.
    """
    dims = check_dims(dims)
    positions = tuple(sorted(check_positions(positions, len(dims))))
    rest = tuple(i for i in range(len(dims)) if i not in positions)
    local_state = np.asarray(local_state)
    exact = is_exact(local_state)
    size = prod(dims)
    grids = np.indices(dims).reshape(len(dims), -1)
    in_dims = tuple(dims[i] for i in rest)
    cols = np.ravel_multi_index(tuple(grids[i] for i in rest), in_dims) if rest else np.zeros(size, dtype=np.intp)
    locs = np.ravel_multi_index(tuple(grids[i] for i in positions), tuple(dims[i] for i in positions))
    e = np.zeros((size, prod(in_dims)), dtype=object if exact else float)
    if exact:
        e[:, :] = Fraction(0)
    e[np.arange(size), cols] = local_state[locs]
    return TransitionMatrix(e, in_dims if in_dims else (1,), dims, label="inject")


def is_gibbs_stochastic(g: TransitionMatrix, hamiltonian: DiagonalHamiltonian,
                        beta_omega: float, tol: float = 1e-10) -> bool:
    """True when ``g`` fixes the Gibbs state of ``hamiltonian`` to ``tol`` (sup norm)."""
    if g.dims_in != g.dims_out:
        return False
    if g.dims_in != hamiltonian.dims:
        raise ShapeError(f"matrix dims {g.dims_in} do not match Hamiltonian {hamiltonian.dims}")
    th = gibbs_state(hamiltonian, beta_omega).probs
    return bool(np.max(np.abs(to_float(g.apply(th)) - th)) < tol)
