"""Protocol rounds, multi-round simulation and thermodynamic bookkeeping.

Every protocol is a sequence of rounds.  A round is a list of
:class:`Step` objects, each a transition matrix tagged as a control step
(work-bearing) or a thermalization step (heat exchange with the bath).
:func:`run` applies the rounds and records, per round, the state together
with the work and the energy changes of target, machine and bath.

Positions are 0-based: the target is subsystem ``0``.

``run(..., exact=True)`` carries the populations as exact rationals.  Every
float parameter (for example the bath population ``p_b``) converts to a
rational without rounding, so the simulation is exact for those inputs and
round-to-round differences keep full relative precision even after they
have decayed far below the populations themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from ._validation import (
    check_beta_omega,
    check_int,
    is_exact,
    max_qubits,
    to_exact,
    to_float,
)
from .channels import (
    StepKind,
    TransitionMatrix,
    beta_swap,
    cms_on,
    energy_ordered_compression,
    gamma1,
    gamma2,
    lift,
    pauli_x_on,
    reset_qubits,
    reset_subsystems,
    sort_compression,
    u_ppa3,
)
from .errors import ConvergenceError, DomainError, ShapeError
from .states import (
    DiagonalHamiltonian,
    DiagonalState,
    entropy,
    entropy_delta,
    gibbs_state,
    marginal_array,
    product,
    qubit_state,
    thermal_populations,
)

__all__ = [
    "Protocol",
    "ProtocolPlan",
    "make_plan",
    "Step",
    "StepRecord",
    "RoundRecord",
    "CoolingTrace",
    "round_steps",
    "run",
    "advance",
    "asymptotic_state",
    "reduced_target_matrix",
    "stationary_target",
    "single_shot_compress",
    "improved_xhbac_run",
    "FIXED_ROUND_PROTOCOLS",
]


class Protocol(str, Enum):
    PPA = "PPA"
    IMPROVED_PPA = "ImprovedPPA"
    NOE2 = "NOE2"
    SR2 = "SR2"
    XHBAC1 = "XHBAC1"
    IMPROVED_XHBAC = "ImprovedXHBAC"
    SINGLE_SHOT = "SingleShot"


_ALIASES = {
    "ppa": Protocol.PPA,
    "improvedppa": Protocol.IMPROVED_PPA,
    "eppa": Protocol.IMPROVED_PPA,
    "noe2": Protocol.NOE2,
    "noe": Protocol.NOE2,
    "sr2": Protocol.SR2,
    "sr": Protocol.SR2,
    "xhbac1": Protocol.XHBAC1,
    "xhbac": Protocol.XHBAC1,
    "improvedxhbac": Protocol.IMPROVED_XHBAC,
    "singleshot": Protocol.SINGLE_SHOT,
}


def parse_protocol(name: str | Protocol) -> tuple[Protocol, int | None]:
    """Parse names such as ``"PPA4"``, ``"ImprovedPPA"`` or ``"xHBAC1"``.

    A trailing integer on PPA-like names is read as the qubit count.
    """
    if isinstance(name, Protocol):
        return name, None
    key = str(name).strip().lower().replace("-", "").replace("_", "").replace(" ", "")
    if key in _ALIASES:
        return _ALIASES[key], None
    digits = ""
    while key and key[-1].isdigit():
        digits = key[-1] + digits
        key = key[:-1]
    if key in ("ppa", "improvedppa", "eppa", "singleshot") and digits:
        return _ALIASES[key], int(digits)
    raise DomainError(f"unknown protocol {name!r}")


_FIXED_QUBITS = {Protocol.NOE2: 2, Protocol.SR2: 2, Protocol.XHBAC1: 1}


@dataclass(frozen=True)
class ProtocolPlan:
    """Which protocol to run, on how many qubits, against which bath.

    Parameters
    ----------
    protocol : Protocol or str
    beta_omega : float
        Dimensionless inverse bath temperature.  Every qubit has unit gap.
    n_qubits : int, optional
        Register size.  Fixed for NOE2, SR2 and XHBAC1; required for PPA
        (at least 3), ImprovedPPA and SingleShot.
    truncation : int
        Oscillator levels kept by ImprovedXHBAC (default 64).
    """

    protocol: Protocol
    beta_omega: float
    n_qubits: int | None = None
    truncation: int | None = None

    target_position = 0

    def __post_init__(self):
        proto, n_from_name = parse_protocol(self.protocol)
        object.__setattr__(self, "protocol", proto)
        object.__setattr__(self, "beta_omega", check_beta_omega(self.beta_omega))
        n = self.n_qubits if self.n_qubits is not None else n_from_name
        if proto in _FIXED_QUBITS:
            fixed = _FIXED_QUBITS[proto]
            if n is not None and n != fixed:
                raise DomainError(f"{proto.value} runs on {fixed} qubit(s), got {n}")
            n = fixed
        elif proto is Protocol.IMPROVED_XHBAC:
            if n not in (None, 1):
                raise DomainError("ImprovedXHBAC has one qubit plus an oscillator")
            n = 1
            y = 64 if self.truncation is None else check_int(self.truncation, name="truncation",
                                                             minimum=2)
            object.__setattr__(self, "truncation", y)
        else:
            if n is None:
                raise DomainError(f"{proto.value} needs n_qubits")
            minimum = {Protocol.PPA: 3, Protocol.IMPROVED_PPA: 2, Protocol.SINGLE_SHOT: 1}[proto]
            n = check_int(n, name="n_qubits", minimum=minimum)
        cap = max_qubits()
        if n > cap:
            raise DomainError(f"{n} qubits exceeds the cap of {cap} (set ALGOCOOL_MAX_QUBITS)")
        object.__setattr__(self, "n_qubits", int(n))
        if proto is not Protocol.IMPROVED_XHBAC and self.truncation is not None:
            raise DomainError("truncation only applies to ImprovedXHBAC")

    @property
    def name(self) -> str:
        if self.protocol in (Protocol.PPA, Protocol.IMPROVED_PPA, Protocol.SINGLE_SHOT):
            return f"{self.protocol.value}{self.n_qubits}"
        if self.protocol is Protocol.IMPROVED_XHBAC:
            return f"ImprovedXHBAC{self.truncation}"
        return self.protocol.value

    @property
    def dims(self) -> tuple[int, ...]:
        if self.protocol is Protocol.IMPROVED_XHBAC:
            return (2, self.truncation)
        return (2,) * self.n_qubits

    @property
    def hamiltonian(self) -> DiagonalHamiltonian:
        if self.protocol is Protocol.IMPROVED_XHBAC:
            return DiagonalHamiltonian.qubit_oscillator(1.0, self.truncation)
        return DiagonalHamiltonian.qubits(self.n_qubits)

    @property
    def has_fixed_round(self) -> bool:
        """Whether one matrix describes every round, independent of the state."""
        return self.protocol in FIXED_ROUND_PROTOCOLS and (
            self.protocol is not Protocol.PPA or self.n_qubits == 3)

    def thermal_state(self, exact: bool = False) -> np.ndarray:
        """All-thermal register at the bath temperature as a raw vector."""
        probs = gibbs_state(self.hamiltonian, self.beta_omega).probs
        if not exact:
            return probs
        out = np.ones(1, dtype=object)
        out[0] = Fraction(1)
        for lv in self.hamiltonian.levels:
            local = gibbs_state(DiagonalHamiltonian((lv,)), self.beta_omega).probs
            vals = [Fraction(float(v)) for v in local]
            vals[-1] = 1 - sum(vals[:-1], Fraction(0))
            f = np.empty(len(vals), dtype=object)
            f[:] = vals
            out = np.multiply.outer(out, f).ravel()
        return out


FIXED_ROUND_PROTOCOLS = frozenset({Protocol.PPA, Protocol.NOE2, Protocol.SR2, Protocol.XHBAC1})


def make_plan(protocol, beta_omega: float, n_qubits: int | None = None,
              truncation: int | None = None) -> ProtocolPlan:
    return ProtocolPlan(protocol, beta_omega, n_qubits, truncation)


class Step(NamedTuple):
    kind: StepKind
    matrix: TransitionMatrix
    label: str


@lru_cache(maxsize=256)
def _fixed_steps(plan: ProtocolPlan, exact: bool) -> tuple[Step, ...]:
    bw, dims = plan.beta_omega, plan.dims
    p = plan.protocol
    C, T = StepKind.CONTROL, StepKind.THERMALIZATION
    if p is Protocol.PPA:
        return (Step(C, u_ppa3(), "U_PPA3"),
                Step(T, reset_qubits(dims, (1, 2), bw, exact=exact), "reset[1,2]"))
    if p is Protocol.NOE2:
        return (Step(C, cms_on(dims, 1, exact=exact), "CMS[1]"),
                Step(T, gamma2(bw, exact=exact), "Gamma2"))
    if p is Protocol.SR2:
        return (Step(C, pauli_x_on(dims, 1), "X[1]"),
                Step(T, gamma2(bw, exact=exact), "Gamma2"),
                Step(T, lift(gamma1(bw, exact=exact), dims, (1,)), "Gamma1[1]"))
    if p is Protocol.XHBAC1:
        return (Step(C, pauli_x_on(dims, 0), "X"),
                Step(T, beta_swap(bw, exact=exact), "beta-swap"))
    raise AssertionError(p)


def _qubit_ground_pops(x: np.ndarray, n: int) -> list:
    t = x.reshape((2,) * n)
    return [t.sum(axis=tuple(j for j in range(n) if j != i))[0] for i in range(n)]


def round_steps(plan: ProtocolPlan, current_state, *, exact: bool = False) -> list[Step]:
    """Steps of the next round given the state at its start.

    Fixed protocols (PPA on 3 qubits, NOE2, SR2, XHBAC1) return the same
    steps every round.  PPA on more qubits and both improved protocols
    recompute their compression from ``current_state``; ImprovedPPA also
    chooses which qubits to relax by looking at the compressed state.
    """
    x = current_state.probs if isinstance(current_state, DiagonalState) else np.asarray(current_state)
    dims = plan.dims
    if isinstance(current_state, DiagonalState) and tuple(current_state.dims) != dims:
        raise ShapeError(f"state dims {current_state.dims} do not match plan dims {dims}")
    if x.size != math.prod(dims):
        raise ShapeError(f"state of length {x.size} does not match plan dims {dims}")
    if exact and not is_exact(x):
        x = to_exact(x)
    if plan.has_fixed_round:
        return list(_fixed_steps(plan, exact))

    bw, n = plan.beta_omega, plan.n_qubits
    C, T = StepKind.CONTROL, StepKind.THERMALIZATION
    p = plan.protocol
    if p is Protocol.PPA:
        return [Step(C, sort_compression(x, dims), "SORT"),
                Step(T, reset_qubits(dims, (n - 2, n - 1), bw, exact=exact),
                     f"reset[{n - 2},{n - 1}]")]
    if p is Protocol.SINGLE_SHOT:
        return [Step(C, sort_compression(x, dims), "SORT")]
    if p is Protocol.IMPROVED_PPA:
        comp = energy_ordered_compression(x, plan.hamiltonian, 0)
        steps = [Step(C, comp, "E-SORT")]
        after = comp.apply(x)
        pb = float(thermal_populations(bw, 2)[0])
        if exact:
            pb = Fraction(pb)
        # strictly warmer than the bath; a tolerance here stalls the approach
        # to the fixed point a few 1e-8 short of it
        warm = [i for i, g in enumerate(_qubit_ground_pops(after, n)) if i != 0 and g < pb]
        if warm:
            steps.append(Step(T, reset_qubits(dims, warm, bw, exact=exact), f"reset{warm}"))
        return steps
    if p is Protocol.IMPROVED_XHBAC:
        comp = energy_ordered_compression(x, plan.hamiltonian, 0)
        return [Step(C, comp, "E-SORT"),
                Step(T, reset_subsystems(dims, (1,), bw, exact=exact,
                                         hamiltonian=plan.hamiltonian), "reset[osc]")]
    raise AssertionError(p)


# ---------------------------------------------------------------------------
# records


@dataclass(frozen=True, eq=False)
class StepRecord:
    """One step of a round.

    ``delta`` is ``post - pre`` taken before rounding to float, so it keeps
    full precision when ``pre`` and ``post`` agree to many digits.
    """

    kind: StepKind
    label: str
    pre: DiagonalState
    post: DiagonalState
    delta: np.ndarray
    work: float
    dE_t: float
    dE_m: float
    dE_b: float


@dataclass(frozen=True, eq=False)
class RoundRecord:
    """Bookkeeping for round ``index`` (1-based).

    Energies are changes over the round; ``*_cum`` fields accumulate from
    the initial state.  ``dp_t`` and ``dp_t_cum`` are changes of the target
    ground population.
    """

    index: int
    state: DiagonalState
    p_t: float
    excited_t: float
    beta_final_omega: float
    work: float
    dE_t: float
    dE_m: float
    dE_b: float
    S_t: float
    dS_t: float
    dp_t: float
    W_cum: float
    dE_t_cum: float
    dE_m_cum: float
    Q_cum: float
    dS_t_cum: float
    dp_t_cum: float
    norm_drift: float = 0.0
    steps: tuple[StepRecord, ...] = ()

    @property
    def dE_b_cum(self) -> float:
        return self.Q_cum


@dataclass(frozen=True, eq=False)
class CoolingTrace:
    """Immutable result of :func:`run`.

    ``trace[N]`` returns the record of round ``N`` (1-based, like the
    round counter in the formulas); ``trace.series("p_t")`` collects one
    field over all rounds.
    """

    plan: ProtocolPlan
    initial_state: DiagonalState
    rounds: tuple[RoundRecord, ...]
    exact: bool = False

    def __len__(self) -> int:
        return len(self.rounds)

    def __getitem__(self, n: int) -> RoundRecord:
        if not 1 <= n <= len(self.rounds):
            raise IndexError(f"round {n} outside 1..{len(self.rounds)}")
        return self.rounds[n - 1]

    def __iter__(self):
        return iter(self.rounds)

    @property
    def p_t0(self) -> float:
        return float(marginal_array(self.initial_state.probs, self.initial_state.dims, [0])[0])

    @property
    def S_t0(self) -> float:
        return entropy(marginal_array(self.initial_state.probs, self.initial_state.dims, [0]))

    @property
    def final_state(self) -> DiagonalState:
        return self.rounds[-1].state if self.rounds else self.initial_state

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rounds], dtype=float)


def _beta_of(ground, excited) -> float:
    if excited <= 0:
        return math.inf
    if ground <= 0:
        return -math.inf
    return math.log(ground) - math.log(excited)


def _initial_vector(plan: ProtocolPlan, initial_state, exact: bool) -> np.ndarray:
    if initial_state is None:
        return plan.thermal_state(exact)
    if not isinstance(initial_state, DiagonalState):
        initial_state = DiagonalState(np.asarray(initial_state, dtype=float), plan.dims)
    if tuple(initial_state.dims) != plan.dims:
        raise ShapeError(f"initial state dims {initial_state.dims} do not match {plan.dims}")
    x = initial_state.probs.copy()
    return to_exact(x) if exact else x


def advance(plan: ProtocolPlan, x: np.ndarray, *, exact: bool = False) -> np.ndarray:
    """Apply one round to a raw population vector, without bookkeeping."""
    for step in round_steps(plan, x, exact=exact):
        x = step.matrix.apply(x)
    return x


def run(plan: ProtocolPlan, n_rounds: int, initial_state=None, *, exact: bool = False,
        record_steps: bool = True) -> CoolingTrace:
    """Simulate ``n_rounds`` rounds and return the full trace.

    Parameters
    ----------
    plan : ProtocolPlan
    n_rounds : int
        At least one.
    initial_state : DiagonalState, optional
        Defaults to every subsystem thermal at the bath temperature.
    exact : bool
        Use rational arithmetic (see the module notes).  Slower, and the
        cost grows with the number of rounds, so it is meant for small
        registers and a few hundred rounds at most.
    record_steps : bool
        Keep per-step pre/post states.  Needed by the compression-step
        Landauer ratio and the identity checks.
    """
    n_rounds = check_int(n_rounds, name="n_rounds", minimum=1)
    dims = plan.dims
    x = _initial_vector(plan, initial_state, exact)
    init = DiagonalState(to_float(x), dims)
    ham = plan.hamiltonian
    e_tot = ham.energies
    e_t = ham.local_energies([0])
    if exact:
        e_tot, e_t = to_exact(e_tot), to_exact(e_t)
    zero = Fraction(0) if exact else 0.0

    t0 = marginal_array(x, dims, [0])
    t0_f = to_float(t0)
    t_prev = t0
    W = dEt_c = dEm_c = Q = zero
    records = []
    for index in range(1, n_rounds + 1):
        w = dEt = dEm = dEb = zero
        step_records = []
        for step in round_steps(plan, x, exact=exact):
            y = step.matrix.apply(x)
            d = y - x
            de = d @ e_tot
            de_t = d @ e_t
            de_m = de - de_t
            if step.kind is StepKind.CONTROL:
                sw, sb = de, zero
            else:
                sw, sb = zero, -de
            w += sw
            dEt += de_t
            dEm += de_m
            dEb += sb
            if record_steps:
                step_records.append(StepRecord(
                    step.kind, step.label, DiagonalState(to_float(x), dims),
                    DiagonalState(to_float(y), dims), to_float(d),
                    float(sw), float(de_t), float(de_m), float(sb)))
            x = y
        drift = 0.0
        if not exact:
            drift = float(x.sum() - 1.0)
            if abs(drift) > 1e-12:
                x = x / x.sum()
        W += w
        dEt_c += dEt
        dEm_c += dEm
        Q += dEb
        t = marginal_array(x, dims, [0])
        t_f = to_float(t)
        d_round = to_float(t - t_prev)
        d_cum = to_float(t - t0)
        excited = float(t[1]) if exact else float(t_f[1])
        records.append(RoundRecord(
            index=index,
            state=DiagonalState(to_float(x), dims),
            p_t=float(t_f[0]),
            excited_t=excited,
            beta_final_omega=_beta_of(float(t_f[0]), excited),
            work=float(w), dE_t=float(dEt), dE_m=float(dEm), dE_b=float(dEb),
            S_t=entropy(t_f),
            dS_t=entropy_delta(to_float(t_prev), d_round, t_f),
            dp_t=float(d_round[0]),
            W_cum=float(W), dE_t_cum=float(dEt_c), dE_m_cum=float(dEm_c), Q_cum=float(Q),
            dS_t_cum=entropy_delta(t0_f, d_cum, t_f),
            dp_t_cum=float(d_cum[0]),
            norm_drift=drift,
            steps=tuple(step_records),
        ))
        t_prev = t
    return CoolingTrace(plan, init, tuple(records), exact)


# ---------------------------------------------------------------------------
# asymptotics


def asymptotic_state(plan: ProtocolPlan, tol: float = 1e-12, max_rounds: int = 10_000,
                     initial_state=None) -> DiagonalState:
    """Iterate rounds until the state moves by less than ``tol`` (sup norm).

    Raises
    ------
    ConvergenceError
        After ``max_rounds`` rounds; the exception carries the last state.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    max_rounds = check_int(max_rounds, name="max_rounds", minimum=1)
    x = _initial_vector(plan, initial_state, False)
    for k in range(1, max_rounds + 1):
        y = advance(plan, x)
        if np.max(np.abs(y - x)) < tol:
            return DiagonalState(y, plan.dims)
        x = y
    raise ConvergenceError(f"{plan.name} did not settle to {tol:g} within {max_rounds} rounds",
                           state=DiagonalState(x, plan.dims), rounds=max_rounds)


def reduced_target_matrix(plan: ProtocolPlan) -> TransitionMatrix:
    """2x2 map of one round on the target, the machine starting thermal.

    Only defined for protocols whose machine returns to the same state at
    the start of every round (PPA on 3 qubits, NOE2, SR2, XHBAC1).
    """
    if not plan.has_fixed_round:
        raise DomainError(f"{plan.name} has no state-independent round matrix")
    n = plan.n_qubits
    if n == 1:
        machine = np.ones(1)
    else:
        machine = gibbs_state(DiagonalHamiltonian.qubits(n - 1), plan.beta_omega).probs
    cols = []
    for j in range(2):
        e = np.zeros(2)
        e[j] = 1.0
        y = advance(plan, np.kron(e, machine))
        cols.append(marginal_array(y, plan.dims, [0]))
    return TransitionMatrix(np.array(cols).T, (2,), label=f"{plan.name} target")


def stationary_target(plan: ProtocolPlan) -> DiagonalState:
    """Fixed point of :func:`reduced_target_matrix` from its eigendecomposition."""
    g = to_float(reduced_target_matrix(plan).entries)
    vals, vecs = np.linalg.eig(g)
    k = int(np.argmin(np.abs(vals - 1.0)))
    v = np.real(vecs[:, k])
    v = v / v.sum()
    return DiagonalState(np.clip(v, 0.0, None), (2,))


# ---------------------------------------------------------------------------
# one-shot protocols


def single_shot_compress(n: int, p: float) -> tuple[float, float]:
    """Sort-compress ``n`` identical qubits once.

    Returns the target ground population and the work spent (unit gaps).
    """
    n = check_int(n, name="n", minimum=1)
    if n > max_qubits():
        raise DomainError(f"{n} qubits exceeds the cap of {max_qubits()}")
    if not 0.5 <= p <= 1.0:
        raise DomainError(f"single-shot compression assumes p in [1/2, 1], got {p}")
    pre = product([qubit_state(p)] * n)
    g = sort_compression(pre)
    post = g.apply(pre.probs)
    e = DiagonalHamiltonian.qubits(n).energies
    q = float(marginal_array(post, pre.dims, [0])[0])
    return q, float((post - pre.probs) @ e)


def improved_xhbac_run(beta_omega: float, truncation: int = 64, *,
                       exact: bool = False) -> CoolingTrace:
    """One energy-ordered compression of a qubit against a thermal oscillator."""
    truncation = check_int(truncation, name="truncation", minimum=4)
    beta_omega = check_beta_omega(beta_omega)
    if beta_omega <= 0:
        raise DomainError("ImprovedXHBAC needs beta_omega > 0")
    return run(ProtocolPlan(Protocol.IMPROVED_XHBAC, beta_omega, truncation=truncation), 1,
               exact=exact)
