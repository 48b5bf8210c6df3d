import math

import numpy as np
import pytest

from algocool import (
    DiagonalHamiltonian,
    DiagonalState,
    PreconditionError,
    ProtocolPlan,
    StepKind,
    beta_swap,
    cop,
    efficiency_report,
    gamma1,
    landauer_ratio,
    landauer_ratio_comp,
    product,
    qubit_state,
    run,
    theorem2_bound,
    thermal_qubit,
    verify_lp_driven,
    verify_lp_thermalization,
)
from algocool.analytics import cop_closed_form
from algocool.errors import DomainError
from algocool.thermo import _cop_ratio, landauer_ratio_via_cop

from _theorem2 import applicable_results

QUBIT = DiagonalHamiltonian.qubits(1)


class TestCoP:
    def test_ppa3_is_one(self):
        tr = run(ProtocolPlan("PPA", 1.0, 3), 30, exact=True)
        assert all(abs(k - 1) < 1e-12 for k in cop(tr, "per_round") + cop(tr, "cumulative"))

    def test_noe2_half_after_first_round(self):
        ks = cop(run(ProtocolPlan("NOE2", 1.0), 10, exact=True), "per_round")
        assert all(k == pytest.approx(0.5, abs=1e-12) for k in ks[1:])

    def test_xhbac1_cumulative(self):
        Ks = cop(run(ProtocolPlan("XHBAC1", 1.3), 20, exact=True), "cumulative")
        for N, K in enumerate(Ks, start=1):
            assert K == pytest.approx(cop_closed_form("XHBAC1", N, 1.3, cumulative=True), abs=1e-10)

    def test_degenerate_conventions(self):
        assert _cop_ratio(0.0, 0.0) is None
        assert _cop_ratio(0.1, 0.0) == math.inf
        assert _cop_ratio(0.1, -1.0) == math.inf
        assert _cop_ratio(-0.2, -1.0) == pytest.approx(0.2)

    def test_infinite_temperature_bath_is_undefined(self):
        tr = run(ProtocolPlan("NOE2", 0.0), 3)
        assert cop(tr) == [None, None, None]
        assert landauer_ratio(tr) == [None, None, None]

    def test_bad_mode(self):
        with pytest.raises(DomainError):
            cop(run(ProtocolPlan("NOE2", 1.0), 1), "sometimes")


class TestLandauerRatio:
    @pytest.mark.parametrize("name,n", [("PPA", 3), ("NOE2", None), ("SR2", None), ("XHBAC1", None), ("PPA", 4)])
    def test_two_routes_and_floor(self, name, n):
        tr = run(ProtocolPlan(name, 1.0, n), 25, exact=True)
        for mode in ("per_round", "cumulative"):
            direct = landauer_ratio(tr, mode, check=False)
            via = landauer_ratio_via_cop(tr, mode)
            for a, b in zip(direct, via):
                if a is not None and b is not None:
                    assert a == pytest.approx(b, rel=1e-10)
                if a is not None:
                    assert a >= 1 - 1e-9

    def test_fig8_shape(self):
        ppa = landauer_ratio(run(ProtocolPlan("PPA", 1.0, 3), 30, exact=True))
        assert all(b < a for a, b in zip(ppa, ppa[1:]))
        xh = landauer_ratio(run(ProtocolPlan("XHBAC1", 1.0), 30, exact=True))
        tail = xh[1:]
        assert all(b > a for a, b in zip(tail, tail[1:]))

    def test_report_fields(self):
        rep = efficiency_report(run(ProtocolPlan("SR2", 1.0), 5))
        assert len(rep.k) == len(rep.K) == len(rep.r_L) == len(rep.R_L) == 5
        assert rep.beta_final_omega[-1] > 1.0


class TestCompressionRatio:
    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_floor(self, n):
        vals = landauer_ratio_comp(run(ProtocolPlan("PPA", 1.0, n), 30, exact=True))
        assert all(v is None or v >= 1 - 1e-9 for v in vals)

    def test_approach_to_one(self):
        vals = landauer_ratio_comp(run(ProtocolPlan("PPA", 1.0, 4), 50, exact=True))
        assert vals[-1] < vals[1]
        v5 = landauer_ratio_comp(run(ProtocolPlan("PPA", 1.0, 5), 50, exact=True))
        assert 1 < v5[-1] < 1.05

    def test_requires_ppa_and_steps(self):
        with pytest.raises(DomainError):
            landauer_ratio_comp(run(ProtocolPlan("NOE2", 1.0), 2))
        with pytest.raises(DomainError):
            landauer_ratio_comp(run(ProtocolPlan("PPA", 1.0, 4), 2, record_steps=False))


class TestLandauerIdentities:
    def test_identity_permutation(self):
        pre = product([qubit_state(0.8), thermal_qubit(1.0)])
        assert verify_lp_driven(pre, pre, ([0], [1])) == 0.0

    def test_ppa3_compression_step(self):
        tr = run(ProtocolPlan("PPA", 1.0, 3), 10)
        for r in tr:
            s = next(s for s in r.steps if s.kind is StepKind.CONTROL)
            assert verify_lp_driven(s.pre, s.post, ([0], [1, 2]), beta=1.0) < 1e-10

    def test_zero_temperature_ground_space(self):
        pre = product([qubit_state(0.7), qubit_state(0.6), DiagonalState([1.0, 0.0])])
        post = DiagonalState(pre.probs[[2, 3, 0, 1, 6, 7, 4, 5]], pre.dims)
        assert verify_lp_driven(pre, post, ([0, 1], [2]), beta=math.inf) < 1e-15

    def test_preconditions(self):
        hot_y = product([qubit_state(0.8), qubit_state(0.55)])
        with pytest.raises(PreconditionError):
            verify_lp_driven(hot_y, hot_y, ([0], [1]), beta=1.0)
        pre = product([qubit_state(0.8), thermal_qubit(1.0)])
        with pytest.raises(PreconditionError):
            verify_lp_driven(pre, DiagonalState([0.25] * 4), ([0], [1]), beta=1.0)
        correlated = DiagonalState([0.5, 0.2, 0.1, 0.2])
        with pytest.raises(PreconditionError):
            verify_lp_driven(correlated, correlated, ([0], [1]), beta=1.0)

    def test_thermalization_examples(self):
        same = qubit_state(0.3)
        assert verify_lp_thermalization(same, same, QUBIT, 1.0) == 0.0
        hot = qubit_state(0.3)
        reset = DiagonalState(gamma1(1.0).apply(hot.probs))
        assert verify_lp_thermalization(hot, reset, QUBIT, 1.0) < 1e-12
        th = thermal_qubit(1.0)
        swapped = DiagonalState(beta_swap(1.0).apply(th.probs))
        assert verify_lp_thermalization(th, swapped, QUBIT, 1.0) < 1e-12

    @pytest.mark.parametrize("name,n", [("PPA", 3), ("PPA", 4), ("NOE2", None), ("SR2", None), ("XHBAC1", None)])
    def test_every_bath_step(self, name, n):
        plan = ProtocolPlan(name, 0.9, n)
        for r in run(plan, 15):
            for s in r.steps:
                if s.kind is StepKind.THERMALIZATION:
                    h = DiagonalHamiltonian.qubits(len(s.pre.dims))
                    assert verify_lp_thermalization(s.pre, s.post, h, 0.9) < 1e-10


class TestTheorem2:
    def test_identity_is_inapplicable(self):
        pre = product([qubit_state(0.8), thermal_qubit(1.0), thermal_qubit(1.0)])
        res = theorem2_bound(pre, pre, ([0], [1, 2]))
        assert not res.applicable and res.eps_x == 0.0

    def test_late_ppa4_round(self):
        tr = run(ProtocolPlan("PPA", 1.0, 4), 40)
        s = next(s for s in tr[40].steps if s.kind is StepKind.CONTROL)
        res = theorem2_bound(s.pre, s.post, ([0, 1], [2, 3]), beta=1.0)
        assert res.applicable and res.holds

    def test_random_transpositions(self):
        results = applicable_results(200, seed=7)
        assert len(results) == 200
        assert all(r.lhs - r.rhs >= -1e-9 for r in results)
