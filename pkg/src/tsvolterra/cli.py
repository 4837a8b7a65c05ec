"""``tsvolterra`` command line.

Usage::

    tsvolterra <verify|solve|bracket|compare> --scenario PATH
               [--out-dir DIR] [--strict-monotone]
               [--penalty-sign corrected|verbatim]

Exit codes: 0 success, 1 mathematical failure (non-convergence, failed
verification, ordering violations), 2 usage or configuration error.

Expression grammar for ``f``, ``k``, ``v``, ``w`` (``^`` is right-associative
and binds tighter than unary minus)::

    expr    = term , { ("+" | "-") , term } ;
    term    = unary , { ("*" | "/") , unary } ;
    unary   = "-" , unary | power ;
    power   = primary , [ "^" , unary ] ;
    primary = number | "t" | "s" | "x" | call | "(" , expr , ")" ;
    call    = ("sin"|"cos"|"exp"|"log"|"sqrt"|"abs"|"min"|"max") , "(" , expr , { "," , expr } , ")" ;

Time scales are written as ``[lo,hi]`` intervals and ``{t1,t2,...}`` point
sets separated by ``;``, e.g. ``[0,1];{2};[3,4]``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bracketing import (
    BracketPair,
    ModifiedKernelConfig,
    PenaltySign,
    default_slack,
    monotone_iterate,
    penalized_solve,
    verify_lower,
    verify_upper,
)
from .calculus import GridFunction
from .dsl import estimate_lipschitz
from .errors import ConfigError, MathError
from .scenario import Scenario, ScenarioError
from .solver import StopReason, picard_solve


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def _json_float(v):
    v = float(v)
    return v if np.isfinite(v) else None


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]):
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


class Runner:
    """Executes one command for one scenario and collects its outputs."""

    def __init__(self, sc: Scenario, out_dir: Path, strict_monotone=False, penalty_sign=None, out=None):
        self.sc = sc
        self.out_dir = out_dir
        self.strict_monotone = strict_monotone
        self.penalty_sign = PenaltySign(penalty_sign or sc.penalty_sign)
        self.out = out or sys.stdout

    def say(self, line=""):
        print(line, file=self.out)

    def _need_bracket(self):
        if not self.sc.has_bracket:
            raise ScenarioError("this command needs both v and w in the scenario")

    def lipschitz(self) -> tuple[float, str]:
        sc = self.sc
        if sc.lipschitz_L is not None:
            return float(sc.lipschitz_L), "user"
        if sc.has_bracket:
            lo = float(sc.sample(sc.v).values.min())
            hi = float(sc.sample(sc.w).values.max())
        else:
            fv = sc.sample(sc.f).values
            lo, hi = float(fv.min()) - 1.0, float(fv.max()) + 1.0
        return estimate_lipschitz(sc.k_expr, sc.grid, lo, hi, 21).L, "estimated"

    # commands

    def verify(self) -> int:
        self._need_bracket()
        sc = self.sc
        v, w = sc.sample(sc.v), sc.sample(sc.w)
        lower = verify_lower(sc.ts, sc.f_expr, sc.k_expr, v, sc.step_h)
        upper = verify_upper(sc.ts, sc.f_expr, sc.k_expr, w, sc.step_h)
        order = float(np.max(v.values - w.values))
        order_ok = order <= 1e-12
        self.say(f"scenario {sc.name}: slack {fmt(default_slack(sc.ts, sc.step_h))}")
        self.say(f"  lower solution v: {'ok' if lower else 'FAIL'}  defect {fmt(lower.defect)} at t={fmt(lower.node)}")
        self.say(f"  upper solution w: {'ok' if upper else 'FAIL'}  defect {fmt(upper.defect)} at t={fmt(upper.node)}")
        self.say(f"  sector v <= w:    {'ok' if order_ok else 'FAIL'}  max(v - w) {fmt(order)}")
        return 0 if (lower and upper and order_ok) else 1

    def run_solve(self):
        sc = self.sc
        L, source = self.lipschitz()
        seed = sc.sample(sc.v) if sc.v is not None else GridFunction.constant(sc.grid, 0.0)
        x, rep = picard_solve(sc.ts, sc.f_expr, sc.k_expr, seed, sc.solve_config(L))
        _write_csv(self.out_dir / f"{sc.name}.solution.csv", ["t", "x"], [sc.grid.nodes, x.values])
        _write_json(
            self.out_dir / f"{sc.name}.report.json",
            {
                "name": sc.name,
                "iterations": rep.iterations,
                "deltas": rep.deltas,
                "apriori_bounds": rep.apriori_bounds,
                "residual": rep.residual,
                "stop_reason": rep.stop_reason.value,
                "L": L,
                "L_source": source,
                "M": rep.M,
            },
        )
        self.say(f"scenario {sc.name}: {len(sc.grid)} nodes on {sc.timescale}")
        self.say(f"  stop reason   {rep.stop_reason.value}")
        self.say(f"  iterations    {rep.iterations}")
        self.say(f"  last delta    {fmt(rep.deltas[-1])}")
        self.say(f"  residual      {fmt(rep.residual)}")
        self.say(f"  {'L (' + source + ')':<14}{fmt(L)}")
        self.say(f"  M             {fmt(rep.M)}")
        self.say(f"  x(b)          {fmt(x.values[-1])}")
        return x, rep

    def solve(self) -> int:
        _, rep = self.run_solve()
        return 1 if rep.stop_reason is StopReason.MAX_ITER else 0

    def run_bracket(self):
        self._need_bracket()
        sc = self.sc
        pair = BracketPair(sc.sample(sc.v), sc.sample(sc.w))
        rep = monotone_iterate(
            sc.ts, sc.f_expr, sc.k_expr, pair, sc.n_bracket_iters, sc.step_h,
            strict_monotone=self.strict_monotone,
        )
        header = ["t"]
        cols = [sc.grid.nodes]
        for i, g in enumerate(rep.v_chain):
            header.append(f"v{i}")
            cols.append(g.values)
        for i in range(len(rep.w_chain) - 1, -1, -1):
            header.append(f"w{i}")
            cols.append(rep.w_chain[i].values)
        header += ["alpha", "beta"]
        cols += [rep.alpha.values, rep.beta.values]
        _write_csv(self.out_dir / f"{sc.name}.bracket.csv", header, cols)

        penalized = {"penalty_sign": self.penalty_sign.value}
        try:
            _, prep = penalized_solve(
                sc.ts, sc.f_expr, sc.k_expr, pair, sc.solve_config(),
                ModifiedKernelConfig(self.penalty_sign),
            )
            penalized.update(
                stop_reason=prep.stop_reason.value,
                iterations=prep.iterations,
                in_sector=prep.in_sector,
                sector_excess=prep.sector_excess,
                original_residual=prep.original_residual,
            )
        except MathError as exc:
            penalized.update(in_sector=False, error=f"{type(exc).__name__}: {exc}")

        _write_json(
            self.out_dir / f"{sc.name}.bracket.json",
            {
                "name": sc.name,
                "n_iters": rep.n_iters,
                "gaps": rep.gaps,
                "gap": rep.gap,
                "ordering_violations": [
                    {"level": o.level, "node": o.node, "magnitude": o.magnitude, "relation": o.relation}
                    for o in rep.ordering_violations
                ],
                "monotone_warning": rep.monotone_warning,
                "penalized": penalized,
            },
        )
        self.say(f"scenario {sc.name}: {rep.n_iters} monotone levels")
        for level, gap in enumerate(rep.gaps):
            self.say(f"  level {level:3d}  gap {fmt(gap)}")
        self.say(f"  ordering violations {len(rep.ordering_violations)}")
        if rep.monotone_warning:
            self.say(f"  warning: {rep.monotone_warning}")
        return rep

    def bracket(self) -> int:
        rep = self.run_bracket()
        return 1 if rep.ordering_violations else 0

    def compare(self) -> int:
        sc = self.sc
        self._need_bracket()
        x, srep = self.run_solve()
        brep = self.run_bracket()
        gap_alpha = x.sup_distance(brep.alpha)
        gap_beta = x.sup_distance(brep.beta)
        slack = default_slack(sc.ts, sc.step_h)
        rows = []
        ok = True
        for n, (d, b) in enumerate(zip(srep.deltas, srep.apriori_bounds), start=1):
            if b > 0:
                ratio = d / b
            else:
                ratio = 0.0 if d == 0 else float("inf")
            within = d <= b + slack
            ok = ok and within
            rows.append({"k": n, "delta": d, "bound": b, "ratio": _json_float(ratio), "within": within})
        self.say(f"|x - alpha| = {fmt(gap_alpha)}")
        self.say(f"|x - beta|  = {fmt(gap_beta)}")
        self.say(f"a-priori bound check (slack {fmt(slack)}):")
        self.say(f"  {'k':>4}  {'measured':>24}  {'bound':>24}  {'ratio':>24}")
        for r in rows:
            ratio = "inf" if r["ratio"] is None else fmt(r["ratio"])
            flag = "" if r["within"] else "  EXCEEDS"
            self.say(f"  {r['k']:>4}  {fmt(r['delta']):>24}  {fmt(r['bound']):>24}  {ratio:>24}{flag}")
        _write_json(
            self.out_dir / f"{sc.name}.compare.json",
            {"name": sc.name, "x_minus_alpha": gap_alpha, "x_minus_beta": gap_beta, "slack": slack, "bound_table": rows},
        )
        failed = srep.stop_reason is StopReason.MAX_ITER or brep.ordering_violations or not ok
        return 1 if failed else 0


COMMANDS = ("verify", "solve", "bracket", "compare")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tsvolterra",
        description="Volterra integral dynamic equations on time scales.",
        epilog=__doc__.split("Exit codes:")[1],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out-dir", default=".", help="directory for CSV/JSON outputs (default: .)")
    p.add_argument("--strict-monotone", action="store_true",
                   help="fail instead of warn when k is not nondecreasing in x")
    p.add_argument("--penalty-sign", choices=[s.value for s in PenaltySign],
                   help="override the scenario's modified-kernel penalty sign")
    return p


def main(argv=None, out=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    err = sys.stderr
    try:
        sc = Scenario.load(args.scenario)
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        runner = Runner(sc, out_dir, args.strict_monotone, args.penalty_sign, out=out)
        return getattr(runner, args.command)()
    except ConfigError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return 2
    except MathError as exc:
        print(f"failed: {type(exc).__name__}: {exc}", file=err)
        return 1
    except (TypeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return 2


if __name__ == "__main__":
    sys.exit(main())
