"""A scikit-learn style wrapper around :func:`algocool.protocols.run`.

The protocol has nothing to learn from data, so ``fit`` only simulates the
all-thermal run (kept as ``trace_`` and ``report_``) and checks the width of
``X`` if one is given.  ``transform`` then pushes each row of ``X``, read as
a population vector of the register, through ``n_rounds`` rounds.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import normalized_probabilities
from .errors import ShapeError
from .protocols import ProtocolPlan, advance, run
from .thermo import efficiency_report


class CoolingProtocol(TransformerMixin, BaseEstimator):
    """Run a cooling protocol with an estimator interface.

    Parameters
    ----------
    protocol : str, default="PPA"
        Protocol name, e.g. ``"PPA"``, ``"NOE2"``, ``"SR2"``, ``"XHBAC1"``,
        ``"ImprovedPPA"`` or ``"ImprovedXHBAC"``.
    n_qubits : int or None, default=3
        Register size where the protocol needs one.
    beta_omega : float, default=1.0
        Dimensionless inverse bath temperature.
    n_rounds : int, default=10
    truncation : int or None, default=None
        Oscillator levels for ImprovedXHBAC.
    exact : bool, default=False
        Rational arithmetic for the reference run in ``fit``.

    Attributes
    ----------
    plan_ : ProtocolPlan
    trace_ : CoolingTrace
        Run from the all-thermal state.
    report_ : EfficiencyReport
    n_features_in_ : int
        Register dimension.
    """

    def __init__(self, protocol="PPA", n_qubits=3, beta_omega=1.0, n_rounds=10,
                 truncation=None, exact=False):
        self.protocol = protocol
        self.n_qubits = n_qubits
        self.beta_omega = beta_omega
        self.n_rounds = n_rounds
        self.truncation = truncation
        self.exact = exact

    def _plan(self) -> ProtocolPlan:
        n = self.n_qubits
        if str(self.protocol).upper() in ("NOE2", "SR2", "XHBAC1", "XHBAC", "IMPROVEDXHBAC"):
            n = None
        return ProtocolPlan(self.protocol, self.beta_omega, n, self.truncation)

    def fit(self, X=None, y=None):
        plan = self._plan()
        width = int(np.prod(plan.dims))
        if X is not None:
            X = check_array(X)
            if X.shape[1] != width:
                raise ShapeError(f"expected {width} columns for {plan.name}, got {X.shape[1]}")
        self.plan_ = plan
        self.trace_ = run(plan, self.n_rounds, exact=self.exact)
        self.report_ = efficiency_report(self.trace_)
        self.n_features_in_ = width
        return self

    def transform(self, X):
        check_is_fitted(self, "trace_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ShapeError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        out = np.empty_like(X, dtype=float)
        for i, row in enumerate(X):
            x = normalized_probabilities(row, name=f"row {i}")
            for _ in range(self.n_rounds):
                x = advance(self.plan_, x)
            out[i] = x
        return out

    def target_populations(self) -> np.ndarray:
        """Target ground population after each round of the reference run."""
        check_is_fitted(self, "trace_")
        return self.trace_.series("p_t")
