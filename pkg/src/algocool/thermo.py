"""Efficiency metrics over cooling traces and checks of the Landauer identities.

Undefined entries are ``None`` (never NaN).  A ratio is undefined when both
numerator and denominator vanish, or when its denominator has the wrong
sign for the quantity to mean anything (see :func:`cop`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channels import StepKind
from .errors import DomainError, PreconditionError, ShapeError
from .protocols import CoolingTrace, Protocol
from .states import (
    DiagonalHamiltonian,
    DiagonalState,
    entropy,
    entropy_delta,
    gibbs_state,
    marginal,
    marginal_array,
    mutual_information,
    relative_entropy,
    trace_distance,
)

__all__ = [
    "EfficiencyReport",
    "efficiency_report",
    "cop",
    "landauer_ratio",
    "landauer_ratio_via_cop",
    "landauer_ratio_comp",
    "verify_lp_driven",
    "verify_lp_thermalization",
    "theorem2_bound",
    "Theorem2Result",
]

Series = list[Optional[float]]

#: Relative agreement required between the two Landauer-ratio routes.
ROUTE_TOL = 1e-10


def _cop_ratio(gain: float, work: float) -> Optional[float]:
    """``gain / work`` with the conventions for degenerate rounds.

    Positive work gives the plain ratio.  Energy removed for non-positive
    work is reported as ``inf``; nothing removed for no work is undefined.
    """
    if work > 0:
        return gain / work
    if gain > 0:
        return math.inf
    if work == 0:
        return None
    return gain / work


def cop(trace: CoolingTrace, mode: str = "cumulative") -> Series:
    """Coefficient of performance ``-Delta E_t / W`` per round or cumulatively."""
    if len(trace) == 0:
        raise DomainError("trace has no rounds")
    if mode == "per_round":
        return [_cop_ratio(-r.dE_t, r.work) for r in trace]
    if mode == "cumulative":
        return [_cop_ratio(-r.dE_t_cum, r.W_cum) for r in trace]
    raise DomainError(f"mode must be 'per_round' or 'cumulative', got {mode!r}")


def _window(trace: CoolingTrace, mode: str):
    beta = trace.plan.beta_omega
    if mode == "per_round":
        return [(beta * (r.dE_b + r.dE_m), -r.dS_t, -r.dE_t, r.work) for r in trace]
    if mode == "cumulative":
        return [(beta * (r.Q_cum + r.dE_m_cum), -r.dS_t_cum, -r.dE_t_cum, r.W_cum) for r in trace]
    raise DomainError(f"mode must be 'per_round' or 'cumulative', got {mode!r}")


def landauer_ratio_via_cop(trace: CoolingTrace, mode: str = "cumulative") -> Series:
    """Landauer ratio rebuilt from the target cooling and the CoP.

    Uses ``R_L = (-beta Delta E_t / -Delta S_t) (1/K + 1)``; entries where
    the CoP is undefined, zero or infinite are ``None``.
    """
    beta = trace.plan.beta_omega
    out: Series = []
    for (_, neg_ds, gain, work), k in zip(_window(trace, mode), cop(trace, mode)):
        if not neg_ds > 0 or k is None or k == 0 or math.isinf(k):
            out.append(None)
        else:
            out.append(beta * gain / neg_ds * (1.0 / k + 1.0))
    return out


def landauer_ratio(trace: CoolingTrace, mode: str = "cumulative", *, check: bool = True) -> Series:
    """Bath-scaled energy released outside the target over the entropy removed.

    ``beta (Delta E_b + Delta E_m) / (-Delta S_t)``, undefined unless the
    target entropy decreased.  With ``check`` the result is compared with
    :func:`landauer_ratio_via_cop` wherever both are defined.
    """
    direct: Series = []
    for num, neg_ds, _, _ in _window(trace, mode):
        direct.append(num / neg_ds if neg_ds > 0 else None)
    if check:
        for n, (a, b) in enumerate(zip(direct, landauer_ratio_via_cop(trace, mode)), start=1):
            if a is not None and b is not None and abs(a - b) > ROUTE_TOL * max(1.0, abs(a)):
                raise RuntimeError(f"Landauer-ratio routes disagree at round {n}: {a!r} vs {b!r}")
    return direct


def landauer_ratio_comp(trace: CoolingTrace) -> Series:
    """Landauer ratio of each PPA compression step, seen from the computational qubits.

    ``x`` is every qubit except the last two and ``y`` the two reset qubits;
    the entry is ``beta Delta E_y / (-Delta S_x)`` over the control step.
    """
    plan = trace.plan
    if plan.protocol is not Protocol.PPA:
        raise DomainError("landauer_ratio_comp applies to PPA traces")
    n = plan.n_qubits
    x_pos = list(range(n - 2))
    y_pos = [n - 2, n - 1]
    e_y = DiagonalHamiltonian.qubits(2).energies
    out: Series = []
    for r in trace:
        controls = [s for s in r.steps if s.kind is StepKind.CONTROL]
        if not controls:
            raise DomainError("trace was recorded without steps; rerun with record_steps=True")
        s = controls[0]
        dims = s.pre.dims
        pre_x = marginal_array(s.pre.probs, dims, x_pos)
        d_x = marginal_array(s.delta, dims, x_pos)
        d_y = marginal_array(s.delta, dims, y_pos)
        neg_ds = -entropy_delta(pre_x, d_x, marginal_array(s.post.probs, dims, x_pos))
        de_y = float(d_y @ e_y)
        out.append(plan.beta_omega * de_y / neg_ds if neg_ds > 0 else None)
    return out


@dataclass(frozen=True)
class EfficiencyReport:
    """Per-round and cumulative efficiency series of one trace."""

    k: Series
    K: Series
    r_L: Series
    R_L: Series
    beta_final_omega: list[float]


def efficiency_report(trace: CoolingTrace) -> EfficiencyReport:
    return EfficiencyReport(
        k=cop(trace, "per_round"),
        K=cop(trace, "cumulative"),
        r_L=landauer_ratio(trace, "per_round"),
        R_L=landauer_ratio(trace, "cumulative"),
        beta_final_omega=[r.beta_final_omega for r in trace],
    )


# ---------------------------------------------------------------------------
# identities and bounds


def _split(partition, n: int):
    try:
        xs, ys = partition
    except (TypeError, ValueError) as exc:
        raise DomainError("partition must be a pair of position lists") from exc
    xs, ys = sorted(int(i) for i in xs), sorted(int(i) for i in ys)
    if set(xs) & set(ys) or sorted(xs + ys) != list(range(n)) or not xs or not ys:
        raise DomainError(f"partition {partition} must split {n} subsystems into two nonempty parts")
    return xs, ys


def _driven_setting(pre: DiagonalState, post: DiagonalState, partition, h_y, beta):
    if pre.dims != post.dims:
        raise ShapeError("pre and post live on different registers")
    xs, ys = _split(partition, pre.n_subsystems)
    y_dims = tuple(pre.dims[i] for i in ys)
    if h_y is None:
        if any(d != 2 for d in y_dims):
            raise DomainError("a Hamiltonian for y is required unless y is made of qubits")
        h_y = DiagonalHamiltonian.qubits(len(ys))
    if h_y.dims != y_dims:
        raise ShapeError(f"H_y dims {h_y.dims} do not match subsystems {y_dims}")
    rho_x, rho_y = marginal(pre, xs), marginal(pre, ys)
    th = gibbs_state(h_y, beta)
    if np.max(np.abs(rho_y.probs - th.probs)) > 1e-12:
        raise PreconditionError("y part of the initial state is not thermal at beta")
    joint = np.kron(rho_x.probs, rho_y.probs) if xs[-1] < ys[0] else None
    if joint is None:
        t = np.multiply.outer(rho_x.probs.reshape([pre.dims[i] for i in xs]),
                              rho_y.probs.reshape(y_dims))
        order = xs + ys
        joint = np.transpose(t, np.argsort(order)).ravel()
    if np.max(np.abs(joint - pre.probs)) > 1e-12:
        raise PreconditionError("initial state is not a product across the partition")
    if np.max(np.abs(np.sort(pre.probs) - np.sort(post.probs))) > 1e-12:
        raise PreconditionError("post is not a permutation of pre")
    return xs, ys, h_y, rho_x, rho_y


def verify_lp_driven(pre: DiagonalState, post: DiagonalState, partition,
                     hamiltonian_y: DiagonalHamiltonian | None = None,
                     beta: float = 1.0) -> float:
    """Residual of ``beta dE_y = -dS_x + I(x':y') + D(rho_y' || rho_y)``.

    ``pre`` must be a product across ``partition = (x, y)`` with ``y``
    thermal at ``beta``, and ``post`` a permutation of ``pre``.  Returns the
    absolute difference of the two sides (``0`` when both are infinite).
    """
    xs, ys, h_y, rho_x, rho_y = _driven_setting(pre, post, partition, hamiltonian_y, beta)
    post_x, post_y = marginal(post, xs), marginal(post, ys)
    d_y = post_y.probs - rho_y.probs
    if math.isinf(beta):
        # only the ground space of y is populated before; leaving it makes both sides infinite
        excited = h_y.energies > h_y.energies.min()
        lhs = math.inf if np.any(post_y.probs[excited] > 0) else 0.0
    else:
        lhs = beta * float(d_y @ h_y.energies)
    rhs = (-entropy_delta(rho_x.probs, post_x.probs - rho_x.probs, post_x.probs)
           + mutual_information(post, (xs, ys))
           + relative_entropy(post_y, rho_y))
    if math.isinf(lhs) or math.isinf(rhs):
        return 0.0 if lhs == rhs else math.inf
    return abs(lhs - rhs)


def verify_lp_thermalization(pre: DiagonalState, post: DiagonalState,
                             hamiltonian: DiagonalHamiltonian, beta: float) -> float:
    """Residual of ``-beta dE = -dS + D(rho || th) - D(rho' || th)`` for one system."""
    if pre.dims != post.dims or pre.dims != hamiltonian.dims:
        raise ShapeError("pre, post and the Hamiltonian must share dims")
    th = gibbs_state(hamiltonian, beta)
    d = post.probs - pre.probs
    lhs = -beta * float(d @ hamiltonian.energies)
    rhs = (-entropy_delta(pre.probs, d, post.probs)
           + relative_entropy(pre, th) - relative_entropy(post, th))
    if math.isinf(lhs) or math.isinf(rhs):
        return 0.0 if lhs == rhs else math.inf
    return abs(lhs - rhs)


@dataclass(frozen=True)
class Theorem2Result:
    lhs: float
    rhs: float
    holds: bool
    applicable: bool
    eps_x: float
    gamma_y: float
    lambda_xy: float
    d_x: int


def theorem2_bound(pre: DiagonalState, post: DiagonalState, partition,
                   beta: float = 1.0,
                   hamiltonian_y: DiagonalHamiltonian | None = None,
                   resolution: float = 1e-12) -> Theorem2Result:
    """Check the trace-distance lower bound on ``beta dE_y / (-dS_x)``.

    The bound reads
    ``1 + (gamma_y^2 + lambda_xy^2) / (eps_x log(d_x / (2 eps_x)))`` with
    ``eps_x = T(rho_x, rho_x')``, ``gamma_y = T(rho_y, rho_y')`` and
    ``lambda_xy = T(rho_xy', rho_x' (x) rho_y')``.  It applies only when
    ``eps_x <= 1/(2e)`` and the entropy of ``x`` decreased.

    Swapping two populations that agree in exact arithmetic but were rounded
    differently moves ``x`` by about one ulp, and the ratio of two such
    rounding residues means nothing.  Changes with ``eps_x <= resolution``
    therefore count as no change and the bound is reported inapplicable.
    """
    xs, ys, h_y, rho_x, rho_y = _driven_setting(pre, post, partition, hamiltonian_y, beta)
    # everything is taken from the difference vector, so a permutation that
    # moves nothing gives exact zeros and small moves keep relative precision
    dims = pre.dims
    delta = post.probs - pre.probs
    d_x = marginal_array(delta, dims, xs)
    d_y = marginal_array(delta, dims, ys)
    eps_x = 0.5 * float(np.abs(d_x).sum())
    gamma_y = 0.5 * float(np.abs(d_y).sum())
    x_shape = [dims[i] for i in xs]
    y_shape = [dims[i] for i in ys]

    def joint(a, b):
        t = np.multiply.outer(np.reshape(a, x_shape), np.reshape(b, y_shape))
        return np.transpose(t, np.argsort(xs + ys)).ravel()

    corr = delta - joint(d_x, rho_y.probs) - joint(rho_x.probs, d_y) - joint(d_x, d_y)
    lambda_xy = 0.5 * float(np.abs(corr).sum())
    d_x_dim = int(np.prod(x_shape))
    neg_ds = -entropy_delta(rho_x.probs, d_x, marginal_array(post.probs, dims, xs))
    de_y = float(d_y @ h_y.energies)
    applicable = bool(resolution < eps_x <= 1.0 / (2.0 * math.e) and neg_ds > 0)
    lhs = beta * de_y / neg_ds if neg_ds > 0 else math.nan
    if applicable:
        rhs = 1.0 + (gamma_y ** 2 + lambda_xy ** 2) / (eps_x * math.log(d_x_dim / (2.0 * eps_x)))
        holds = bool(lhs >= rhs - 1e-9)
    else:
        rhs, holds = math.nan, False
    return Theorem2Result(lhs, rhs, holds, applicable, eps_x, gamma_y, lambda_xy, d_x_dim)
