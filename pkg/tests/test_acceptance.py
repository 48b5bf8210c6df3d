"""The eleven acceptance criteria, one test each.

Every test appends a PASS/FAIL line to the terminal summary before asserting,
and wall-clock budgets count as part of the criterion.
"""

import itertools
import math
import time
from functools import lru_cache

import numpy as np
import pytest

from algocool import (
    DiagonalHamiltonian,
    ProtocolPlan,
    StepKind,
    asymptotic_state,
    cop,
    improved_xhbac_run,
    is_gibbs_stochastic,
    landauer_ratio,
    landauer_ratio_comp,
    round_steps,
    run,
    verify_lp_driven,
    verify_lp_thermalization,
)
from algocool.analytics import cop_closed_form, population_closed_form, q_max, unified_limit
from algocool.channels import is_left_stochastic
from algocool.protocols import Protocol

from _theorem2 import applicable_results
from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.acceptance

BATHS = (0.5, 1.0, 2.0)
TABLE_PROTOCOLS = (("PPA3", "PPA", 3), ("NOE2", "NOE2", None), ("SR2", "SR2", None),
                   ("XHBAC1", "XHBAC1", None))
LIMIT_PROTOCOLS = (("PPA", 3, 2), ("PPA", 4, 4), ("PPA", 5, 8), ("NOE2", None, 2), ("SR2", None, 3))


def record(num, ok, text, elapsed, budget):
    ok = bool(ok) and elapsed < budget
    ACCEPTANCE_LINES.append((num, ok, f"{text} [{elapsed:.2f}s < {budget:g}s]"))
    assert ok, text


@lru_cache(maxsize=None)
def criterion_traces():
    """Every trace the first three criteria simulate, keyed by (name, beta_omega)."""
    out = {}
    for bw in BATHS:
        out[("PPA3-50", bw)] = run(ProtocolPlan("PPA", bw, 3), 50, exact=True)
        for key, name, n in TABLE_PROTOCOLS:
            out[(key, bw)] = run(ProtocolPlan(name, bw, n), 30, exact=True)
        for name, n, _ in LIMIT_PROTOCOLS:
            out[(f"{name}{n or ''}-limit", bw)] = run(ProtocolPlan(name, bw, n), 60, exact=True)
    out[("XHBAC1-limit", 1.0)] = run(ProtocolPlan("XHBAC1", 1.0), 20, exact=True)
    return out


def test_criterion_01_ppa3_cop_is_one():
    t0 = time.perf_counter()
    worst = 0.0
    for bw in BATHS:
        tr = run(ProtocolPlan("PPA", bw, 3), 50, exact=True)
        for k in cop(tr, "per_round") + cop(tr, "cumulative"):
            worst = max(worst, abs(k - 1.0))
    record(1, worst < 1e-10, f"PPA3 k(N), K(N) = 1 for N=1..50; max |.-1| = {worst:.1e}",
           time.perf_counter() - t0, 1.0)


def test_criterion_02_closed_form_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    for bw in BATHS:
        for key, name, n in TABLE_PROTOCOLS:
            tr = run(ProtocolPlan(name, bw, n), 30, exact=True)
            ks, Ks = cop(tr, "per_round"), cop(tr, "cumulative")
            for r, k, K in zip(tr, ks, Ks):
                N = r.index
                worst = max(worst,
                            abs(r.p_t - population_closed_form(key, N, tr.p_t0, bw)),
                            abs(k - cop_closed_form(key, N, bw, cumulative=False)),
                            abs(K - cop_closed_form(key, N, bw, cumulative=True)))
    record(2, worst < 1e-10, f"p_t, k, K match the closed forms, N=1..30; max error {worst:.1e}",
           time.perf_counter() - t0, 5.0)


def test_criterion_03_unified_limits():
    t0 = time.perf_counter()
    worst = 0.0
    for bw in BATHS:
        eps_b = math.tanh(bw / 2)
        for name, n, alpha in LIMIT_PROTOCOLS:
            p = asymptotic_state(ProtocolPlan(name, bw, n), tol=1e-14).marginal([0]).probs
            worst = max(worst, abs((p[0] - p[1]) - unified_limit(eps_b, alpha)))
    bw = 1.0
    allowed = math.ceil(18.5 / bw) + 1
    tr = run(ProtocolPlan("XHBAC1", bw), allowed)
    reached = next((r.index for r in tr if r.p_t > 1 - 1e-8), None)
    ok = worst < 1e-8 and reached is not None
    record(3, ok, f"asymptotic polarizations within {worst:.1e} of tanh(alpha artanh eps_b); "
                  f"xHBAC1 passes 1-1e-8 at round {reached} (allowed {allowed})",
           time.perf_counter() - t0, 10.0)


def _brute_force(n, p, rng):
    pops = [math.prod(p if b == 0 else 1 - p for b in bits)
            for bits in itertools.product((0, 1), repeat=n)]
    half = len(pops) // 2
    best = math.fsum(sorted(pops, reverse=True)[:half])
    if len(pops) <= 8:
        best_enum = max(math.fsum(perm[:half]) for perm in itertools.permutations(pops))
        assert abs(best_enum - best) <= 1e-15
    else:
        for _ in range(20_000):
            perm = rng.permutation(len(pops))
            assert math.fsum(pops[i] for i in perm[:half]) <= best + 1e-15
    return best


def test_criterion_04_theorem1():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    for n in (2, 3, 4):
        for i in range(9):
            p = 0.55 + 0.05 * i
            worst = max(worst, abs(q_max(n, p) - _brute_force(n, p, rng)))
    examples = abs(q_max(3, 0.6) - 0.648) < 1e-14 and abs(q_max(4, 0.6) - 0.648) < 1e-14
    record(4, worst < 1e-14 and examples,
           f"q_max equals permutation maximum, max error {worst:.1e}; q(0.6,3)=q(0.6,4)=0.648",
           time.perf_counter() - t0, 30.0)


def _beta_final(plan):
    p = asymptotic_state(plan, tol=1e-15, max_rounds=20_000).marginal([0]).probs
    return math.log(p[0] / p[1])


def test_criterion_05_superconducting_example():
    t0 = time.perf_counter()
    ppa4 = _beta_final(ProtocolPlan("PPA", 6.0, 4))
    others = {name: _beta_final(ProtocolPlan(name, 6.0, n))
              for name, n in (("PPA", 3), ("NOE2", None), ("SR2", None))}
    ok = abs(ppa4 - 24.0) < 1e-4 and all(v < 24.0 for v in others.values())
    shown = ", ".join(f"{k}{'3' if k == 'PPA' else ''} {v:.4f}" for k, v in others.items())
    record(5, ok, f"PPA4 at beta_omega=6 reaches {ppa4:.6f}; {shown}",
           time.perf_counter() - t0, 5.0)


def test_criterion_06_landauer_identities():
    t0 = time.perf_counter()
    worst_driven = worst_bath = 0.0
    n_driven = n_bath = 0
    for (_, bw), tr in criterion_traces().items():
        plan = tr.plan
        n = len(plan.dims)
        for r in tr:
            for s in r.steps:
                if s.kind is StepKind.THERMALIZATION:
                    res = verify_lp_thermalization(s.pre, s.post, plan.hamiltonian, bw)
                    worst_bath, n_bath = max(worst_bath, res), n_bath + 1
                elif plan.protocol is Protocol.PPA:
                    res = verify_lp_driven(s.pre, s.post, (list(range(n - 2)), [n - 2, n - 1]),
                                           beta=bw)
                    worst_driven, n_driven = max(worst_driven, res), n_driven + 1
    ok = worst_driven < 1e-10 and worst_bath < 1e-10 and n_driven and n_bath
    record(6, ok, f"driven residual {worst_driven:.1e} over {n_driven} compressions, "
                  f"thermalization residual {worst_bath:.1e} over {n_bath} bath steps",
           time.perf_counter() - t0, 10.0)


def test_criterion_07_landauer_floor_and_limit():
    t0 = time.perf_counter()
    values = []
    for tr in criterion_traces().values():
        values += landauer_ratio(tr, "per_round") + landauer_ratio(tr, "cumulative")
        if tr.plan.protocol is Protocol.PPA:
            values += landauer_ratio_comp(tr)
    for n in (4, 5, 6):
        values += landauer_ratio_comp(run(ProtocolPlan("PPA", 1.0, n), 50))
    defined = [v for v in values if v is not None]
    floor = min(defined)
    tr = run(ProtocolPlan("PPA", 2 * math.atanh(1e-4), 3), 60, exact=True)
    R = landauer_ratio(tr)[-1]
    ok = floor >= 1 - 1e-9 and abs(R - 4 / 3) < 1e-3
    record(7, ok, f"min over {len(defined)} Landauer ratios = {floor:.10f}; "
                  f"PPA3 R_L(60) at eps_b=1e-4 = {R:.10f}",
           time.perf_counter() - t0, 5.0)


def test_criterion_08_compression_ratio_tends_to_one():
    t0 = time.perf_counter()
    finals, ok = {}, True
    for n in (4, 5, 6):
        vals = landauer_ratio_comp(run(ProtocolPlan("PPA", 1.0, n), 50, exact=True))
        tail = vals[25:]
        decreasing = all(b < a for a, b in zip(tail, tail[1:]))
        finals[n] = vals[-1]
        ok = ok and decreasing and 1 < vals[-1] < 1.05
    shown = ", ".join(f"PPA{n} {v - 1:.1e}" for n, v in finals.items())
    record(8, ok, f"r_L,comp decreasing over rounds 26..50, final minus one: {shown}",
           time.perf_counter() - t0, 10.0)


def _monotone_prefix(x, y):
    keep = np.cumprod(np.concatenate([[True], np.diff(x) > 0])).astype(bool)
    return x[keep], y[keep]


def test_criterion_09_improved_protocols():
    t0 = time.perf_counter()
    bw = 1.0
    fixed = {n: abs(_beta_final(ProtocolPlan("ImprovedPPA", bw, n)) - (n - 1) * bw) for n in (3, 5, 9)}
    gaps = {}
    for n in (4, 5):
        a = run(ProtocolPlan("PPA", bw, n), 60, record_steps=False)
        b = run(ProtocolPlan("ImprovedPPA", bw, 2 ** (n - 2) + 1), 60, record_steps=False)
        xa, ya = _monotone_prefix(a.series("beta_final_omega"), np.array(cop(a), float))
        xb, yb = _monotone_prefix(b.series("beta_final_omega"), np.array(cop(b), float))
        grid = np.linspace(max(xa[0], xb[0]), min(xa[-1], xb[-1]), 200)
        gaps[n] = float(np.min(np.interp(grid, xb, yb) - np.interp(grid, xa, ya)))
    xh = {w: abs(cop(improved_xhbac_run(w, 64))[0] - math.tanh(w / 2)) for w in BATHS}
    ok = (all(v < 1e-6 for v in fixed.values()) and all(g >= 0 for g in gaps.values())
          and all(v < 1e-6 for v in xh.values()))
    record(9, ok,
           "ImprovedPPA fixed-point errors " + ", ".join(f"n={n} {v:.1e}" for n, v in fixed.items())
           + "; min K gain at matched temperature " + ", ".join(f"n={n} {g:.3f}" for n, g in gaps.items())
           + "; ImprovedXHBAC(64) K error " + ", ".join(f"bw={w} {v:.1e}" for w, v in xh.items()),
           time.perf_counter() - t0, 20.0)


def test_criterion_10_theorem2_random_suite():
    t0 = time.perf_counter()
    results = applicable_results(500)
    slack = min(r.lhs - r.rhs for r in results)
    ok = len(results) == 500 and slack >= -1e-9
    record(10, ok, f"{len(results)} applicable random transpositions, minimum slack {slack:.3e}",
           time.perf_counter() - t0, 10.0)


def test_criterion_11_property_suite():
    t0 = time.perf_counter()
    plans = [ProtocolPlan(name, bw, n) for bw in BATHS
             for name, n in (("PPA", 3), ("PPA", 4), ("PPA", 5), ("NOE2", None), ("SR2", None),
                             ("XHBAC1", None), ("ImprovedPPA", 3), ("ImprovedPPA", 5),
                             ("ImprovedXHBAC", None), ("SingleShot", 5))]
    bad_stochastic = bad_gibbs = n_matrices = 0
    for plan in plans:
        x = plan.thermal_state()
        for _ in range(10):
            for step in round_steps(plan, x):
                n_matrices += 1
                bad_stochastic += not is_left_stochastic(step.matrix)
                if step.kind is StepKind.THERMALIZATION:
                    bad_gibbs += not is_gibbs_stochastic(step.matrix, plan.hamiltonian,
                                                         plan.beta_omega)
                x = step.matrix.apply(x)
    traces = list(criterion_traces().values()) + [run(p, 10) for p in plans]
    ledger = max(abs(r.dE_t + r.dE_m + r.dE_b - r.work) for tr in traces for r in tr)
    n_rounds = sum(len(tr) for tr in traces)
    ok = bad_stochastic == 0 and bad_gibbs == 0 and ledger < 1e-10
    record(11, ok, f"{n_matrices} matrices: {bad_stochastic} not left-stochastic, {bad_gibbs} "
                   f"bath steps not Gibbs-stochastic; ledger residual {ledger:.1e} over {n_rounds} rounds",
           time.perf_counter() - t0, 5.0)
