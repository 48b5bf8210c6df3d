"""Closed-form results used as independent oracles for the simulator.

Nothing here runs a simulation; every function evaluates a formula.  The
protocol names accepted by :func:`population_closed_form` and
:func:`cop_closed_form` are ``"PPA3"``, ``"NOE2"``, ``"SR2"`` and
``"XHBAC1"``.

Two forms here are fixed by rederiving them from the round matrices:

* the NOE2 population approaches its limit as ``2**-N`` (a sign-flipped
  exponent would diverge), and
* the XHBAC1 cumulative coefficient is linear in the round count ``N``
  in its denominator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._validation import check_beta_omega, check_int
from .errors import DomainError

__all__ = [
    "ClosedFormParams",
    "q_max",
    "compression_mu",
    "q_max_thermo_limit",
    "unified_limit",
    "alpha_of",
    "unified_evolution",
    "evolution_params",
    "population_closed_form",
    "cop_closed_form",
    "work_closed_form",
    "target_energy_drop_closed_form",
    "improved_xhbac_cop",
    "improved_xhbac_work_limit",
    "ppa3_landauer_expression",
    "high_temperature_alpha_fit",
]


def _sigmoid(x: float) -> float:
    if x == math.inf:
        return 1.0
    return 1.0 / (1.0 + math.exp(-x)) if x >= 0 else math.exp(x) / (1.0 + math.exp(x))


@dataclass(frozen=True)
class ClosedFormParams:
    """Bath populations and the shorthand constants of the closed forms.

    ``x = p_b2/(1-p_b2)``, ``y = 2 p_b (1-p_b)``, ``z = p_b^2/(1-p_b)^2``,
    ``w = p_b2 p_b``, ``v = 1 - p_b2 - p_b + w``, ``u = 1 - v - w`` and
    ``s = exp(-beta_omega)``.
    """

    beta_omega: float
    p_b: float
    p_b2: float
    eps_b: float
    x: float
    y: float
    z: float
    w: float
    v: float
    u: float
    s: float

    @classmethod
    def from_beta_omega(cls, beta_omega: float) -> "ClosedFormParams":
        bw = check_beta_omega(beta_omega)
        p_b = _sigmoid(bw)
        p_b2 = _sigmoid(2.0 * bw)
        q = 1.0 - p_b
        w = p_b2 * p_b
        v = 1.0 - p_b2 - p_b + w
        x = math.inf if p_b2 == 1.0 else p_b2 / (1.0 - p_b2)
        z = math.inf if q == 0.0 else p_b * p_b / (q * q)
        return cls(
            beta_omega=bw, p_b=p_b, p_b2=p_b2, eps_b=math.tanh(bw / 2.0) if bw != math.inf else 1.0,
            x=x, y=2.0 * p_b * q, z=z, w=w, v=v, u=1.0 - v - w,
            s=0.0 if bw == math.inf else math.exp(-bw),
        )


def _params(bath) -> ClosedFormParams:
    return bath if isinstance(bath, ClosedFormParams) else ClosedFormParams.from_beta_omega(bath)


# ---------------------------------------------------------------------------
# single-shot compression


def q_max(n: int, p: float) -> float:
    """Best target ground population after one compression of ``n`` qubits.

    For odd ``n`` this is the binomial sum over at most ``(n-1)/2``
    excitations.  For even ``n`` the sum runs to ``n/2`` and half of the
    central term is removed, which makes ``q_max(2j+1) == q_max(2j+2)``.
    """
    n = check_int(n, name="n", minimum=1)
    if not 0.5 <= p <= 1.0:
        raise DomainError(f"q_max needs p in [1/2, 1], got {p}")
    q = 1.0 - p
    top = (n - 1) // 2 if n % 2 else n // 2
    total = math.fsum(math.comb(n, i) * p ** (n - i) * q ** i for i in range(top + 1))
    if n % 2 == 0:
        total -= 0.5 * math.comb(n, n // 2) * (p * q) ** (n // 2)
    return total


def compression_mu(n: int, eps_b: float) -> float:
    """Upper limit ``n eps_b / sqrt(2 n (1 - eps_b^2))`` of the Gaussian integral."""
    n = check_int(n, name="n", minimum=1)
    if not 0.0 <= eps_b < 1.0:
        raise DomainError("eps_b must lie in [0, 1)")
    return n * eps_b / math.sqrt(2.0 * n * (1.0 - eps_b * eps_b))


def q_max_thermo_limit(n: int, eps_b: float, normalization: str = "printed") -> float:
    """Large-``n`` approximation of the compressed target polarization.

    ``normalization="printed"`` evaluates ``(1/sqrt(pi)) * int_0^mu exp(-t^2) dt``,
    that is ``erf(mu)/2``, which can never exceed one half.
    ``normalization="erf"`` returns ``erf(mu)``, the value the central limit
    theorem gives for ``2 q_max - 1``; it is the one that tracks the exact sum.
    """
    mu = compression_mu(n, eps_b)
    if normalization == "printed":
        return 0.5 * math.erf(mu)
    if normalization == "erf":
        return math.erf(mu)
    raise DomainError(f"unknown normalization {normalization!r}")


# ---------------------------------------------------------------------------
# cooling limits


def unified_limit(eps_b: float, alpha: float) -> float:
    """``tanh(alpha * artanh(eps_b))``; ``alpha = inf`` gives 1."""
    if not 0.0 <= eps_b < 1.0:
        raise DomainError("eps_b must lie in [0, 1)")
    if alpha == math.inf:
        return 1.0 if eps_b > 0 else 0.0
    if alpha < 1:
        raise DomainError("alpha must be >= 1")
    return math.tanh(alpha * math.atanh(eps_b))


def alpha_of(protocol: str, n: int | None = None, *, m: int | None = None,
             d: int | None = None) -> float:
    """Temperature-reduction factor of a protocol's cooling limit.

    ``alpha_of("PPA", m=..., d=...)`` gives the generalized partner-pairing
    value ``m * d`` for ``m`` reset qubits with a ``d``-level target.
    """
    key = protocol.strip().lower().replace("-", "").replace("_", "")
    if key.startswith("ppa") and key[3:].isdigit() and n is None:
        n, key = int(key[3:]), "ppa"
    if key == "ppa":
        if m is not None or d is not None:
            if m is None or d is None:
                raise DomainError("the generalized PPA rule needs both m and d")
            return float(m * d)
        if n is None or n < 3:
            raise DomainError("PPA needs n >= 3")
        return float(2 ** (n - 2))
    if key in ("noe2", "noe"):
        return 2.0
    if key.startswith("sr"):
        if key[2:].isdigit() and n is None:
            n = int(key[2:])
        if n is None or n < 1:
            raise DomainError("SR needs n")
        return float(2 ** n - 1)
    if key in ("singleshot", "compression"):
        if n is None or n < 1:
            raise DomainError("single-shot compression needs n")
        return float(math.ceil(n / 2))
    if key in ("xhbac1", "xhbac"):
        return math.inf
    if key in ("improvedppa", "eppa"):
        if n is None or n < 2:
            raise DomainError("ImprovedPPA needs n >= 2")
        return float(n - 1)
    raise DomainError(f"no cooling-limit factor known for {protocol!r}")


def unified_evolution(r: float, eps_inf: float, eps_b: float, k: float) -> float:
    """Polarization after ``k`` rounds, ``eps_inf - r^k (eps_inf - eps_b)``."""
    if not 0.0 <= r < 1.0:
        raise DomainError("the contraction rate r must lie in [0, 1)")
    return eps_inf - r ** k * (eps_inf - eps_b)


def evolution_params(protocol: str, eps_b: float) -> tuple[float, float]:
    """Contraction rate ``r`` and limit ``eps_inf`` for the fixed-round protocols."""
    key = protocol.strip().upper()
    e2 = eps_b * eps_b
    if key == "PPA3":
        return (1.0 - e2) / 2.0, unified_limit(eps_b, 2)
    if key == "NOE2":
        return 0.5, unified_limit(eps_b, 2)
    if key == "SR2":
        return 0.5 * (1.0 - e2) / (1.0 + e2), unified_limit(eps_b, 3)
    if key == "XHBAC1":
        bw = 2.0 * math.atanh(eps_b)
        return math.exp(-bw), 1.0
    raise DomainError(f"no evolution law for {protocol!r}")


# ---------------------------------------------------------------------------
# round-by-round closed forms


_SUPPORTED = ("PPA3", "NOE2", "SR2", "XHBAC1")


def _key(protocol: str) -> str:
    key = protocol.strip().upper().replace("-", "").replace("_", "")
    if key not in _SUPPORTED:
        raise DomainError(f"closed forms exist for {_SUPPORTED}, not {protocol!r}")
    return key


def population_closed_form(protocol: str, N: int, p_t0: float, bath) -> float:
    """Target ground population after ``N`` rounds, starting from ``p_t0``."""
    key = _key(protocol)
    N = check_int(N, name="N", minimum=0)
    c = _params(bath)
    if key == "PPA3":
        lim = c.z / (1.0 + c.z)
        return lim - c.y ** N * (lim - p_t0)
    if key == "NOE2":
        lim = c.x / (1.0 + c.x)
        return lim - 2.0 ** (-N) * (lim - p_t0)
    if key == "SR2":
        lim = c.w / (c.w + c.v)
        return lim - c.u ** N * (lim - p_t0)
    return 1.0 - c.s ** N * (1.0 - p_t0)


def _require_positive_bath(c: ClosedFormParams):
    if not c.beta_omega > 0:
        raise DomainError("the coefficient of performance is undefined for beta_omega <= 0")


def cop_closed_form(protocol: str, N: int, bath, cumulative: bool) -> float:
    """Per-round ``k(N)`` or cumulative ``K(N)`` from an all-thermal start."""
    key = _key(protocol)
    N = check_int(N, name="N", minimum=1)
    c = _params(bath)
    _require_positive_bath(c)
    pb, p2 = c.p_b, c.p_b2
    if key == "PPA3":
        return 1.0
    if key == "NOE2":
        if not cumulative:
            return (p2 - pb) / (2.0 * pb - 1.0) if N == 1 else 0.5
        num = (p2 - pb) * (1.0 - 2.0 ** (-N))
        den = (p2 - 0.5) - 2.0 ** (1 - N) * (p2 - pb)
        return num / den
    if key == "SR2":
        c0 = pb * (1.0 - pb) * (2.0 * p2 - 1.0) / (2.0 * pb - 1.0)
        if not cumulative:
            return c0 * c.u ** (N - 1)
        return c0 * (1.0 - c.u ** N) / (N * (1.0 - c.u))
    s = c.s
    if not cumulative:
        sn = s ** (N - 1)
        return (1.0 - pb) * (1.0 - s) * sn / (1.0 - 2.0 * sn * (1.0 - pb))
    return ((1.0 - pb) * (1.0 - s) * (1.0 - s ** N)
            / (N * (1.0 - s) - 2.0 * (1.0 - pb) * (1.0 - s ** N)))


def work_closed_form(protocol: str, N: int, bath, omega: float = 1.0) -> float:
    """Work ``w(N)`` spent in round ``N`` from an all-thermal start."""
    key = _key(protocol)
    N = check_int(N, name="N", minimum=1)
    c = _params(bath)
    pb, p2 = c.p_b, c.p_b2
    if key == "PPA3":
        return omega * (pb - 0.5) * c.y ** N
    if key == "NOE2":
        return omega * (pb - 0.5) if N == 1 else omega * (p2 - pb) * 2.0 ** (1 - N)
    if key == "SR2":
        return omega * (2.0 * pb - 1.0)
    return omega * (1.0 - 2.0 * c.s ** (N - 1) * (1.0 - pb))


def target_energy_drop_closed_form(protocol: str, N: int, bath, omega: float = 1.0) -> float:
    """``-Delta e_t(N)``, the target energy removed in round ``N``."""
    key = _key(protocol)
    N = check_int(N, name="N", minimum=1)
    c = _params(bath)
    pb, p2 = c.p_b, c.p_b2
    if key == "PPA3":
        return omega * (pb - 0.5) * c.y ** N
    if key == "NOE2":
        return omega * (p2 - pb) * 2.0 ** (-N)
    if key == "SR2":
        return omega * pb * (1.0 - pb) * (2.0 * p2 - 1.0) * c.u ** (N - 1)
    return omega * (1.0 - pb) * (1.0 - c.s) * c.s ** (N - 1)


# ---------------------------------------------------------------------------
# improved xHBAC and Landauer-ratio limits


def improved_xhbac_cop(beta_omega: float) -> float:
    """Infinite-oscillator coefficient of performance, ``tanh(beta_omega / 2)``."""
    bw = check_beta_omega(beta_omega)
    if bw <= 0:
        raise DomainError("needs beta_omega > 0")
    return 1.0 if bw == math.inf else math.tanh(bw / 2.0)


def improved_xhbac_work_limit(beta_omega: float, omega: float = 1.0) -> float:
    """Work of one improved xHBAC round for an untruncated oscillator."""
    bw = check_beta_omega(beta_omega)
    if bw <= 0:
        raise DomainError("needs beta_omega > 0")
    return 0.0 if bw == math.inf else omega / math.expm1(bw)


def _even_series(e: float, tol: float = 1e-14, max_terms: int = 1_000_000) -> float:
    """``sum_j e^{2j} / (j (2j - 1))``, which equals ``2 (log 2 - h((1+e)/2))``."""
    total = 0.0
    e2 = e * e
    power = 1.0
    for j in range(1, max_terms + 1):
        power *= e2
        term = power / (j * (2 * j - 1))
        total += term
        if term <= tol * total:
            return total
    return total


def ppa3_landauer_expression(N: int, eps_b: float) -> float:
    """Cumulative Landauer ratio of PPA3 after ``N`` rounds, in closed form.

    Tends to 4/3 when ``eps_b -> 0`` and ``N -> inf`` and is never below it.
    The entropy series is summed until a term drops below ``1e-14`` of the
    running total.
    """
    N = check_int(N, name="N", minimum=1)
    if not 0.0 < eps_b < 1.0:
        raise DomainError("eps_b must lie in (0, 1)")
    r, eps_inf = evolution_params("PPA3", eps_b)
    gain = (1.0 - r ** N) * (eps_inf - eps_b)
    eps_n = eps_b + gain
    series = _even_series(eps_n) - _even_series(eps_b)
    return 4.0 * math.atanh(eps_b) * gain / series


def high_temperature_alpha_fit(n: float) -> float:
    """Empirical cubic fit of the single-shot limit factor at high temperature.

    Reference only; it is a fit to numerics, not a derived result.
    """
    return 0.886 + 0.226 * n - 0.006665 * n ** 2 + 0.0001 * n ** 3
