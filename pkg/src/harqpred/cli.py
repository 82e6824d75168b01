"""Command-line interface: ``harqpred <verb> --scenarios FILE ...``.

Verbs
  validate   check a scenario file and report the number of scenarios
  evaluate   one row per scenario and scheme, EEG against ``--baseline``
  optimize   like evaluate, but exits with status 3 if any row is infeasible
  sweep-eeg  EEG of one scheme against a baseline, plus mean-EEG rows
  simulate   Monte-Carlo estimates next to the analytical values

Schemes: ``re`` reactive, ``pa`` proactive, ``pr`` predictive proactive,
``epr`` predictive proactive with the feedback delay shortened by one
slot. ``epr`` runs at the operating point optimized for ``pr``.

Exit status: 0 success, 1 internal error, 2 invalid input, 3 infeasible.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .errors import HarqError, InfeasibleError, ValidationError
from .model import (
    early_feedback,
    evaluate_early_predictive,
    evaluate_predictive,
    evaluate_proactive,
    evaluate_reactive,
)
from .optimize import DEFAULT_RESTARTS, optimize_operating_point, optimize_reactive_schedule
from .report import RESULT_COLUMNS, SIM_COLUMNS, ResultTable
from .scenarios import default_pack_path, load_scenarios
from .simulate import simulate

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3

SCHEMES = ("re", "pa", "pr", "epr")
FEAS_TOL = 1e-9


class _Solutions:
    """Optimized operating points and schedules, shared by equivalent scenarios.

    The payload size and energy per RV do not change the optimum, so
    scenarios differing only in those reuse one solve.
    """

    def __init__(self, restarts, seed):
        self.restarts = restarts
        self.seed = seed
        self._done = {}

    @staticmethod
    def _key(kind, sc):
        return (kind, sc.delay_budget, sc.feedback_delay, sc.eps_target, sc.profile, sc.roc if kind == "pr" else None)

    def _solve(self, kind, sc):
        try:
            if kind == "pr":
                return optimize_operating_point(sc, restarts=self.restarts, seed=self.seed).op_point
            return optimize_reactive_schedule(sc).schedule
        except InfeasibleError as exc:
            return exc

    def prepare(self, jobs, pool):
        todo = {}
        for kind, sc in jobs:
            key = self._key(kind, sc)
            if key not in self._done and key not in todo:
                todo[key] = (kind, sc)
        for key, result in zip(todo, pool.map(lambda job: self._solve(*job), todo.values())):
            self._done[key] = result

    def get(self, kind, sc):
        return self._done[self._key(kind, sc)]


def _needs(scheme):
    return {"pr": "pr", "epr": "pr", "re": "re"}.get(scheme)


def _jobs(cases, schemes):
    """Optimizations needed for ``schemes``, skipping pinned solutions."""
    jobs = []
    for case in cases:
        for scheme in schemes:
            kind = _needs(scheme)
            pinned = case.op_point if kind == "pr" else case.schedule
            if kind is not None and pinned is None:
                jobs.append((kind, case.scenario))
    return jobs


def _solution(case, scheme, sols):
    kind = _needs(scheme)
    if kind == "pr":
        return case.op_point if case.op_point is not None else sols.get("pr", case.scenario)
    if kind == "re":
        return case.schedule if case.schedule is not None else sols.get("re", case.scenario)
    return None


def _evaluate(case, scheme, sols):
    """Return ``(evaluation or None, solution)``; ``None`` marks infeasibility."""
    sc = case.scenario
    sol = _solution(case, scheme, sols)
    if isinstance(sol, InfeasibleError):
        return None, None
    if scheme == "pa":
        return evaluate_proactive(sc), None
    if scheme == "pr":
        return evaluate_predictive(sc, sol), sol
    if scheme == "epr":
        return evaluate_early_predictive(sc, sol), sol
    return evaluate_reactive(sc, sol), sol


def _solution_cell(sol):
    if sol is None:
        return None
    if hasattr(sol, "p_fp"):
        return tuple(float(v) for v in sol.p_fp)
    return tuple(int(v) for v in sol)


def _key_cells(case, scheme):
    sc = case.scenario
    return dict(
        scheme=scheme,
        scenario=case.id,
        delay_budget=sc.delay_budget,
        feedback_delay=sc.feedback_delay,
        eps_target=sc.eps_target,
        n_bits=sc.n_bits,
    )


def _status(ev, sc):
    if ev is None:
        return "infeasible"
    return "ok" if ev.total_bler <= sc.eps_target + FEAS_TOL else "above-target"


def _parse_schemes(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if part not in SCHEMES:
            raise argparse.ArgumentTypeError(f"unknown scheme {part!r} (choose from {', '.join(SCHEMES)})")
        if part not in out:
            out.append(part)
    if not out:
        raise argparse.ArgumentTypeError("no scheme given")
    return tuple(out)


def _parse_seed(text):
    try:
        seed = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return seed


def _positive(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _check_schemes(cases, schemes):
    for case in cases:
        sc = case.scenario
        for scheme in schemes:
            if scheme in ("pr", "epr") and sc.roc is None:
                raise ValidationError(f"{case.id}: scheme {scheme} needs a roc", case.location)
            if scheme == "epr" and sc.feedback_delay < 2:
                raise ValidationError(f"{case.id}: scheme epr needs feedback delay >= 2", case.location)


def _metadata(args, schemes, label):
    meta = [
        ("command", args.verb),
        ("scenarios", args.scenarios),
        ("label", label),
        ("schemes", ",".join(schemes)),
    ]
    if getattr(args, "baseline", None) is not None:
        meta.append(("baseline", args.baseline))
    meta += [("seed", args.seed), ("restarts", args.restarts)]
    if args.verb == "simulate":
        meta.append(("trials", args.trials))
    return meta


def _result_table(args, sfile, schemes, baseline, pool):
    cases = sfile.cases
    needed = set(schemes) | ({baseline} if baseline else set())
    _check_schemes(cases, needed)
    sols = _Solutions(args.restarts, args.seed)
    sols.prepare(_jobs(cases, sorted(needed)), pool)

    order = list(schemes) + [s for s in sorted(needed) if s not in schemes]
    tasks = [(c, s) for c in cases for s in order]
    flat = list(pool.map(lambda t: _evaluate(t[0], t[1], sols), tasks))
    width = len(order)

    table = ResultTable(RESULT_COLUMNS, _metadata(args, schemes, sfile.label))
    index = {}
    for ci, case in enumerate(cases):
        results = dict(zip(order, flat[ci * width:(ci + 1) * width]))
        base_ev = results[baseline][0] if baseline else None
        for scheme in schemes:
            ev, sol = results[scheme]
            row = table.add(
                **_key_cells(case, scheme),
                status=_status(ev, case.scenario),
                expected_transmissions=None if ev is None else ev.expected_transmissions,
                total_bler=None if ev is None else ev.total_bler,
                energy_efficiency=None if ev is None else ev.energy_efficiency,
                baseline=baseline,
                baseline_energy_efficiency=None if base_ev is None else base_ev.energy_efficiency,
                solution=_solution_cell(sol),
            )
            index[(case.id, scheme)] = row
    return table, index


def _add_means(table, index, cases, scheme, baseline):
    groups = {}
    for case in cases:
        sc = case.scenario
        member = index[(case.id, scheme)]
        groups.setdefault((case.group, sc.feedback_delay, None), []).append(member)
        groups.setdefault((case.group, sc.feedback_delay, sc.eps_target), []).append(member)
    for (group, delay, target), members in groups.items():
        label = f"mean/{group}/fb{delay}" + ("" if target is None else f"/t{format(target, 'g')}")
        table.add_mean(
            members,
            scheme=scheme,
            scenario=label,
            delay_budget=table.rows[members[0]]["delay_budget"],
            feedback_delay=delay,
            eps_target=target,
            baseline=baseline,
        )


def _simulate_table(args, sfile, schemes, pool):
    cases = sfile.cases
    _check_schemes(cases, schemes)
    sols = _Solutions(args.restarts, args.seed)
    sols.prepare(_jobs(cases, schemes), pool)
    tasks = [(c, s) for c in cases for s in schemes]
    seeds = np.random.SeedSequence(args.seed).generate_state(len(tasks), dtype=np.uint64).tolist()

    def run(i):
        case, scheme = tasks[i]
        ev, sol = _evaluate(case, scheme, sols)
        if ev is None:
            return ev, sol, None
        sc = case.scenario
        if scheme == "pa":
            st = simulate(sc, trials=args.trials, seed=seeds[i])
        elif scheme == "pr":
            st = simulate(sc, sol, trials=args.trials, seed=seeds[i])
        elif scheme == "epr":
            st = simulate(early_feedback(sc), sol, trials=args.trials, seed=seeds[i])
        else:
            st = simulate(sc, trials=args.trials, seed=seeds[i], schedule=sol)
        return ev, sol, st

    table = ResultTable(SIM_COLUMNS, _metadata(args, schemes, sfile.label))
    for (case, scheme), (ev, sol, st) in zip(tasks, pool.map(run, range(len(tasks)))):
        table.add(
            **_key_cells(case, scheme),
            status=_status(ev, case.scenario),
            trials=args.trials,
            mean_t=None if st is None else st.mean_t,
            ci_halfwidth_t=None if st is None else st.ci_halfwidth_t,
            bler_hat=None if st is None else st.bler_hat,
            ci_halfwidth_bler=None if st is None else st.ci_halfwidth_bler,
            eta_hat=None if st is None else st.eta_hat,
            ci_halfwidth_eta=None if st is None else st.ci_halfwidth_eta,
            analytic_t=None if ev is None else ev.expected_transmissions,
            analytic_bler=None if ev is None else ev.total_bler,
            analytic_eta=None if ev is None else ev.energy_efficiency,
            solution=_solution_cell(sol),
        )
    return table


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harqpred",
        description="Evaluate, optimize and simulate reactive, proactive and predictive HARQ.",
    )
    parser.add_argument("--version", action="version", version=f"harqpred {__version__}")
    verbs = parser.add_subparsers(dest="verb", required=True, metavar="VERB")

    def common(p, schemes_default, baseline=False, trials=False):
        p.add_argument(
            "--scenarios",
            default=None,
            help="scenario YAML file (default: the bundled synthetic pack)",
        )
        p.add_argument(
            "--scheme",
            type=_parse_schemes,
            default=schemes_default,
            help=f"comma-separated schemes out of {','.join(SCHEMES)} (default: {','.join(schemes_default)})",
        )
        if baseline:
            p.add_argument("--baseline", default="pa", choices=SCHEMES, help="reference scheme for EEG (default: pa)")
        if trials:
            p.add_argument("--trials", type=_positive, default=100_000, help="Monte-Carlo trials per row")
        p.add_argument("--seed", type=_parse_seed, default=0, help="RNG seed (unsigned 64-bit)")
        p.add_argument(
            "--restarts", type=int, default=DEFAULT_RESTARTS, help="random restarts of the operating-point search"
        )
        p.add_argument("--out", default=None, help="output CSV path (default: stdout)")
        p.add_argument("--workers", type=_positive, default=1, help="worker threads")

    p = verbs.add_parser("validate", help="check a scenario file")
    p.add_argument("--scenarios", default=None)
    common(verbs.add_parser("evaluate", help="evaluate schemes per scenario"), ("pa", "pr", "epr"), baseline=True)
    common(verbs.add_parser("optimize", help="optimize operating points or schedules"), ("pr",), baseline=True)
    common(verbs.add_parser("sweep-eeg", help="EEG sweep over feedback delays"), ("pr",), baseline=True)
    common(verbs.add_parser("simulate", help="Monte-Carlo simulation"), ("pa",), trials=True)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    if args.scenarios is None:
        args.scenarios = str(default_pack_path())
    try:
        sfile = load_scenarios(args.scenarios)
        if args.verb == "validate":
            stdout.write(f"{args.scenarios}: {len(sfile)} scenarios valid\n")
            return EXIT_OK
        if args.restarts < 0:
            raise ValidationError("--restarts must be non-negative", "command line")
        if args.verb == "sweep-eeg" and len(args.scheme) != 1:
            raise ValidationError("sweep-eeg compares exactly one scheme with the baseline", "command line")
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            if args.verb == "simulate":
                table = _simulate_table(args, sfile, args.scheme, pool)
            else:
                table, index = _result_table(args, sfile, args.scheme, args.baseline, pool)
                if args.verb == "sweep-eeg":
                    _add_means(table, index, sfile.cases, args.scheme[0], args.baseline)
    except ValidationError as exc:
        stderr.write(f"harqpred: invalid input: {exc}\n")
        return EXIT_VALIDATION
    except HarqError as exc:
        stderr.write(f"harqpred: {exc}\n")
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - reported, not hidden
        stderr.write(f"harqpred: internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL

    try:
        if args.out is None:
            table.write(stdout)
        else:
            table.write(args.out)
    except OSError as exc:
        stderr.write(f"harqpred: cannot write output: {exc}\n")
        return EXIT_INTERNAL
    if args.verb == "optimize" and any(r.get("status") == "infeasible" for r in table.rows):
        stderr.write("harqpred: some scenarios are infeasible\n")
        return EXIT_INFEASIBLE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":  # pragma: no cover
    main()
