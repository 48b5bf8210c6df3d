"""Tabular data behind each figure, one table per plotted curve.

Each builder returns ``{file_name: Table}``.  Nothing is plotted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .analytics import q_max
from .errors import DomainError
from .protocols import ProtocolPlan, run
from .thermo import cop, landauer_ratio, landauer_ratio_comp

__all__ = ["Table", "FIGURES", "figure_tables", "format_value", "render_csv"]

#: Registers up to this many basis states are simulated in exact arithmetic
#: when a figure needs per-round differences.
EXACT_DIM_LIMIT = 64


@dataclass(frozen=True)
class Table:
    header: tuple[str, ...]
    rows: tuple[tuple, ...]


def format_value(v) -> str:
    """CSV cell: shortest round-trip float text, ``inf``, or empty when undefined."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    v = float(v)
    if math.isnan(v):
        return ""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def render_csv(table: Table) -> str:
    lines = [",".join(table.header)]
    lines += [",".join(format_value(v) for v in row) for row in table.rows]
    return "\n".join(lines) + "\n"


def _bw_tag(bw: float) -> str:
    return f"bw{format_value(bw)}"


_COOLING_SET = (("PPA", 3), ("PPA", 4), ("PPA", 5), ("NOE2", None), ("SR2", None),
                ("XHBAC1", None))


def _trace(protocol, n, bw, rounds, *, want_exact: bool):
    plan = ProtocolPlan(protocol, bw, n)
    exact = want_exact and math.prod(plan.dims) <= EXACT_DIM_LIMIT
    return plan, run(plan, rounds, exact=exact)


def _fig2(rounds, betas) -> dict[str, Table]:
    grid = [round(0.5 + 0.01 * i, 2) for i in range(51)]
    return {f"fig2_n{n}.csv": Table(("p", "q_max"), tuple((p, q_max(n, p)) for p in grid))
            for n in range(1, 9)}


def _fig4(rounds, betas) -> dict[str, Table]:
    out = {}
    for bw in betas:
        for n in (3, 4, 5, 6):
            plan, tr = _trace("PPA", n, bw, rounds, want_exact=True)
            k = cop(tr, "per_round")
            rows = tuple((r.index, r.beta_final_omega, k[i]) for i, r in enumerate(tr))
            name = f"fig4_{plan.name}.csv" if len(betas) == 1 else f"fig4_{_bw_tag(bw)}_{plan.name}.csv"
            out[name] = Table(("round", "beta_final_omega", "k"), rows)
    return out


def _cumulative(prefix: str, metric: str, rounds, betas) -> dict[str, Table]:
    out = {}
    for bw in betas:
        for protocol, n in _COOLING_SET:
            plan, tr = _trace(protocol, n, bw, rounds, want_exact=False)
            series = cop(tr, "cumulative") if metric == "K" else landauer_ratio(tr, "cumulative")
            rows = tuple((r.index, r.beta_final_omega, series[i]) for i, r in enumerate(tr))
            name = f"{prefix}_{plan.name}.csv" if len(betas) == 1 else f"{prefix}_{_bw_tag(bw)}_{plan.name}.csv"
            out[name] = Table(("round", "beta_final_omega", metric), rows)
    return out


def _fig6(rounds, betas) -> dict[str, Table]:
    out = {}
    for bw in betas:
        for n in (4, 5, 6):
            plan, tr = _trace("PPA", n, bw, rounds, want_exact=True)
            r_comp = landauer_ratio_comp(tr)
            rows = tuple((r.index, r.beta_final_omega, r_comp[i]) for i, r in enumerate(tr))
            name = f"fig6_{plan.name}.csv" if len(betas) == 1 else f"fig6_{_bw_tag(bw)}_{plan.name}.csv"
            out[name] = Table(("round", "beta_final_omega", "r_L_comp"), rows)
    return out


def _fig9(rounds, betas) -> dict[str, Table]:
    out = {}
    for bw in betas:
        for n in (3, 4, 5):
            for protocol, size in (("PPA", n), ("ImprovedPPA", 2 ** (n - 2) + 1)):
                plan, tr = _trace(protocol, size, bw, rounds, want_exact=False)
                K = cop(tr, "cumulative")
                rows = tuple((r.index, r.beta_final_omega, K[i]) for i, r in enumerate(tr))
                tag = f"{plan.name}" if len(betas) == 1 else f"{_bw_tag(bw)}_{plan.name}"
                out[f"fig9_pair{n}_{tag}.csv"] = Table(("round", "beta_final_omega", "K"), rows)
    return out


#: figure id -> (builder, default rounds, default bath temperatures)
FIGURES: dict[str, tuple[Callable, int, tuple[float, ...]]] = {
    "fig2": (_fig2, 1, ()),
    "fig4": (_fig4, 50, (1.0,)),
    "fig5": (lambda r, b: _cumulative("fig5", "K", r, b), 50, (0.5, 1.0, 2.0)),
    "fig6": (_fig6, 50, (1.0,)),
    "fig7": (lambda r, b: _cumulative("fig7", "K", r, b), 30, (6.0,)),
    "fig8": (lambda r, b: _cumulative("fig8", "R_L", r, b), 50, (0.5, 1.0, 2.0)),
    "fig9": (_fig9, 60, (1.0,)),
}


def figure_tables(figure_id: str, rounds: int | None = None,
                  beta_omegas: Sequence[float] | None = None) -> dict[str, Table]:
    """Build every curve of one figure.

    ``rounds`` and ``beta_omegas`` override the figure's defaults; fig2 does
    not depend on either.
    """
    if figure_id not in FIGURES:
        raise DomainError(f"unknown figure {figure_id!r}; choose from {sorted(FIGURES)}")
    builder, default_rounds, default_betas = FIGURES[figure_id]
    rounds = default_rounds if rounds is None else rounds
    if rounds < 1:
        raise DomainError("rounds must be >= 1")
    betas = tuple(default_betas if not beta_omegas else beta_omegas)
    return builder(rounds, betas)
