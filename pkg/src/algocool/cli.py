"""Command-line entry point: ``algocool {simulate,figure,cooling-limit}``.

Exit status is 0 on success, 2 for usage or domain errors and 3 when an
asymptotic iteration fails to converge.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .analytics import alpha_of, unified_limit
from .errors import AlgoCoolError, ConvergenceError
from .figures import FIGURES, Table, figure_tables, format_value, render_csv
from .protocols import Protocol, ProtocolPlan, asymptotic_state, parse_protocol, run, single_shot_compress
from .states import thermal_qubit
from .thermo import cop, landauer_ratio, landauer_ratio_comp

EXIT_OK, EXIT_USAGE, EXIT_CONVERGENCE = 0, 2, 3

SIMULATE_HEADER = ("round", "p_t", "beta_final_omega", "work", "dE_t", "dE_m", "dE_b",
                   "S_t", "W_cum", "K", "R_L")
METRICS = ("population", "cop", "landauer", "lr_comp")
#: auto arithmetic picks exact rationals up to this register dimension and round count
AUTO_EXACT_DIM, AUTO_EXACT_ROUNDS = 64, 200


@dataclass
class SweepSpec:
    protocol: str
    n_qubits: int | None
    beta_omegas: list[float]
    rounds: int
    out: Path | None = None
    metrics: list[str] = field(default_factory=list)
    arithmetic: str = "auto"

    def __post_init__(self):
        if self.rounds < 1:
            raise AlgoCoolError("--rounds must be >= 1")
        if not self.beta_omegas:
            raise AlgoCoolError("at least one --beta-omega is required")


class _UsageError(AlgoCoolError):
    pass


def _plan(protocol: str, n: int | None, bw: float, truncation: int | None = None) -> ProtocolPlan:
    proto, n_name = parse_protocol(protocol)
    return ProtocolPlan(proto, bw, n if n is not None else n_name, truncation)


def simulate_table(spec: SweepSpec, bw: float) -> Table:
    plan = _plan(spec.protocol, spec.n_qubits, bw)
    if spec.arithmetic == "auto":
        exact = math.prod(plan.dims) <= AUTO_EXACT_DIM and spec.rounds <= AUTO_EXACT_ROUNDS
    else:
        exact = spec.arithmetic == "exact"
    tr = run(plan, spec.rounds, exact=exact)
    K = cop(tr, "cumulative")
    R = landauer_ratio(tr, "cumulative")
    header = list(SIMULATE_HEADER)
    extra = []
    if "cop" in spec.metrics:
        header.append("k")
        extra.append(cop(tr, "per_round"))
    if "landauer" in spec.metrics:
        header.append("r_L")
        extra.append(landauer_ratio(tr, "per_round"))
    if "lr_comp" in spec.metrics:
        header.append("r_L_comp")
        extra.append(landauer_ratio_comp(tr))
    rows = []
    for i, r in enumerate(tr):
        rows.append((r.index, r.p_t, r.beta_final_omega, r.work, r.dE_t, r.dE_m, r.dE_b,
                     r.S_t, r.W_cum, K[i], R[i]) + tuple(col[i] for col in extra))
    return Table(tuple(header), tuple(rows))


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_simulate(spec: SweepSpec, stdout=None) -> list[Path]:
    stdout = stdout or sys.stdout
    if spec.out is None and len(spec.beta_omegas) > 1:
        raise _UsageError("several --beta-omega values need --out")
    written = []
    for bw in spec.beta_omegas:
        text = render_csv(simulate_table(spec, bw))
        if spec.out is None:
            stdout.write(text)
            continue
        path = spec.out
        if len(spec.beta_omegas) > 1:
            path = path.with_name(f"{path.stem}_bw{format_value(bw)}{path.suffix or '.csv'}")
        _write(path, text)
        written.append(path)
    return written


def cmd_figure(figure_id: str, out_dir: Path, rounds: int | None = None,
               beta_omegas: Sequence[float] | None = None) -> list[Path]:
    written = []
    for name, table in figure_tables(figure_id, rounds, beta_omegas).items():
        path = out_dir / name
        _write(path, render_csv(table))
        written.append(path)
    return written


def cooling_limit_report(protocol: str, n: int | None, bw: float, tol: float = 1e-12,
                         max_rounds: int = 10_000) -> dict:
    proto, n_name = parse_protocol(protocol)
    n = n if n is not None else n_name
    eps_b = thermal_qubit(bw).polarization()
    key = {Protocol.PPA: "PPA", Protocol.IMPROVED_PPA: "ImprovedPPA", Protocol.NOE2: "NOE2",
           Protocol.SR2: "SR", Protocol.XHBAC1: "XHBAC1",
           Protocol.SINGLE_SHOT: "SingleShot"}.get(proto)
    if key is None:
        raise _UsageError(f"no cooling limit is defined for {proto.value}")
    alpha = alpha_of(key, 2 if proto is Protocol.SR2 else n)
    eps_inf = unified_limit(eps_b, alpha)
    if proto is Protocol.SINGLE_SHOT:
        if n is None:
            raise _UsageError("SingleShot needs --qubits")
        q, _ = single_shot_compress(n, (1.0 + eps_b) / 2.0)
        simulated = 2.0 * q - 1.0
    else:
        plan = _plan(protocol, n, bw)
        state = asymptotic_state(plan, tol=tol, max_rounds=max_rounds)
        simulated = state.marginal([0]).polarization()
    return {
        "protocol": proto.value if n is None or proto in (Protocol.NOE2, Protocol.SR2,
                                                           Protocol.XHBAC1) else f"{proto.value}{n}",
        "beta_omega": bw,
        "alpha": alpha,
        "eps_inf": eps_inf,
        "beta_t_inf_omega": alpha * bw,
        "simulated_eps": simulated,
        "delta": simulated - eps_inf,
    }


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="algocool",
                                     description="Simulate heat-bath algorithmic cooling protocols.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a protocol and write its per-round record as CSV")
    sim.add_argument("--protocol", required=True)
    sim.add_argument("--qubits", type=int)
    sim.add_argument("--beta-omega", type=float, action="append", required=True, dest="beta_omega")
    sim.add_argument("--rounds", type=int, default=20)
    sim.add_argument("--metric", action="append", choices=METRICS, default=[])
    sim.add_argument("--out", type=Path)
    sim.add_argument("--arithmetic", choices=("auto", "float", "exact"), default="auto")

    fig = sub.add_parser("figure", help="write the data series of one figure")
    fig.add_argument("figure_id", choices=sorted(FIGURES))
    fig.add_argument("--out", type=Path, default=Path("."))
    fig.add_argument("--rounds", type=int)
    fig.add_argument("--beta-omega", type=float, action="append", dest="beta_omega")

    lim = sub.add_parser("cooling-limit", help="compare the analytic cooling limit with simulation")
    lim.add_argument("--protocol", required=True)
    lim.add_argument("--qubits", type=int)
    lim.add_argument("--beta-omega", type=float, action="append", required=True, dest="beta_omega")
    lim.add_argument("--tol", type=float, default=1e-12)
    lim.add_argument("--max-rounds", type=int, default=10_000)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            spec = SweepSpec(args.protocol, args.qubits, args.beta_omega, args.rounds,
                             args.out, args.metric, args.arithmetic)
            cmd_simulate(spec)
        elif args.command == "figure":
            for path in cmd_figure(args.figure_id, args.out, args.rounds, args.beta_omega):
                print(path)
        else:
            for bw in args.beta_omega:
                rep = cooling_limit_report(args.protocol, args.qubits, bw, args.tol, args.max_rounds)
                print(" ".join(f"{k}={format_value(v) if not isinstance(v, str) else v}"
                               for k, v in rep.items()))
    except ConvergenceError as exc:
        print(f"algocool: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (AlgoCoolError, ValueError) as exc:
        print(f"algocool: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
