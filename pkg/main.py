import argparse
import json
import logging
import sys
import time
from typing import List, Optional

from services.bench import SuiteBudget, SuiteFilter, run_suite, select
from services.compiler import compile_domain, validate
from services.generators import emit, parse_family_spec
from services.generators import build as build_family
from services.history import SuiteHistory
from services.lang import DomainAst, parse_file
from services.oracle import oracle_search
from services.planner import PlannerOptions, run_search, verify_plan
from services.reports import OracleDocument, Outcome, VerifyDocument
from utils.config import RunConfig, Settings, build_run_config, load_settings
from utils.errors import CmbpError, OracleBoundExceeded, UsageError
from utils.util import format_belief, format_elapsed, format_plan, parse_plan

logger = logging.getLogger("cmbp")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_UNKNOWN = 2
EXIT_ERROR = 3


class CliParser(argparse.ArgumentParser):
    """Reports bad arguments as UsageError so they get the error exit status"""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _input_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("file", nargs="?", metavar="FILE", help="Domain description file")
    parser.add_argument("--family", help="Generate a benchmark instance instead, e.g. BTC")
    parser.add_argument("--params", default="", help="Family parameters, e.g. 4,2")
    parser.add_argument("--variant", help="Family variant, e.g. low or corner")


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(
        prog="cmbp",
        description="Conformant planner over binary decision diagrams, with an explicit-state reference search and the benchmark suite",
    )
    parser.add_argument("--config", metavar="PATH", help="TOML config file (default ./cmbp.toml if present)")
    parser.add_argument("--log-level", help="debug, info, warning, error or critical")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    plan = commands.add_parser("plan", help="Find a shortest conformant plan")
    _input_arguments(plan)
    plan.add_argument("--max-depth", type=int, help="Stop with UNKNOWN after this many levels")
    plan.add_argument("--no-prune", dest="prune", action="store_const", const=False, help="Keep plans with repeated belief states")
    plan.add_argument("--all-plans", type=int, metavar="K", help="Report up to K shortest plans")
    plan.add_argument("--json", action="store_true", help="Print the report as JSON")
    plan.add_argument("--stats", action="store_true", help="Print decision-diagram store statistics")
    plan.add_argument("--dot", metavar="FILE", help="Write the last level's relation as DOT")

    verify = commands.add_parser("verify", help="Check that a plan is conformant")
    _input_arguments(verify)
    verify.add_argument("--plan", required=True, help='Semicolon-separated actions, e.g. "Flush;Dunk_1"')
    verify.add_argument("--json", action="store_true", help="Print the result as JSON")

    oracle = commands.add_parser("oracle", help="Explicit breadth-first search over belief states")
    _input_arguments(oracle)
    oracle.add_argument("--bound", type=int, help="Most belief states to expand")
    oracle.add_argument("--json", action="store_true", help="Print the result as JSON")

    bench = commands.add_parser("bench", help="Run benchmark instances against the expected results")
    bench.add_argument("--family", help="Benchmark family, e.g. RING")
    bench.add_argument("--min", type=int, help="Smallest first parameter")
    bench.add_argument("--max", type=int, help="Largest first parameter")
    bench.add_argument("--variant", help="Only this variant")
    bench.add_argument("--emit", metavar="DIR", help="Write the selected descriptions to DIR instead of solving them")
    bench.add_argument("--json", action="store_true", help="Print the suite report as JSON")
    bench.add_argument("--record", action="store_true", default=None, help="Append the rows to the run history")
    bench.add_argument("--with-oracle", action="store_true", default=None, help="Cross-check small instances with the explicit search")

    history = commands.add_parser("history", help="List recorded benchmark runs")
    history.add_argument("--family", help="Only this benchmark family")
    history.add_argument("--since", metavar="TS", help='Only runs at or after "YYYY-MM-DD HH:MM:SS"')
    history.add_argument("--json", action="store_true", help="Print the rows as JSON")
    return parser


def load_domain(cfg: RunConfig) -> DomainAst:
    """Parse the file or generate the family instance, then validate it"""
    if cfg.path is not None:
        ast = parse_file(cfg.path)
    else:
        ast = build_family(parse_family_spec(cfg.family, ",".join(map(str, cfg.params)), cfg.variant))
    return validate(ast)


def cmd_plan(cfg: RunConfig, settings: Settings, args: argparse.Namespace) -> int:
    ast = load_domain(cfg)
    engine = settings.engine.model_copy(update={"unique_table_bits": cfg.unique_table_bits})
    dom = compile_domain(ast, settings=engine)
    opts = PlannerOptions(max_depth=cfg.max_depth, prune=cfg.prune, all_plans=cfg.all_plans)
    report, table = run_search(dom, opts)

    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fp:
            fp.write(dom.store.to_dot(table.relation, name=f"level{table.level}"))

    if cfg.json_output:
        print(report.document("plan").model_dump_json(indent=2))
    else:
        print(f"instance: {report.instance}")
        print(f"outcome:  {report.outcome.value}")
        if report.outcome == Outcome.PLAN:
            for plan in report.plans:
                print(f"plan:     {format_plan(plan)}")
            print(f"length:   {report.length}")
        elif report.outcome == Outcome.FAIL:
            print("no conformant solution")
        else:
            print(f"no plan up to depth {report.level}")
        print(f"#BS: {report.bs_inserted}  #BSH: {report.bs_hits}")
        for level in report.levels:
            print(f"  level {level.level}: {level.relation_nodes} nodes, {level.plans_kept} plans")
        print(f"elapsed:  {format_elapsed(report.elapsed_ms)}")
    if args.stats:
        for key, value in report.store_stats.items():
            print(f"{key}: {value}")

    return {Outcome.PLAN: EXIT_OK, Outcome.FAIL: EXIT_FAIL}.get(report.outcome, EXIT_UNKNOWN)


def cmd_verify(cfg: RunConfig, settings: Settings, args: argparse.Namespace) -> int:
    ast = load_domain(cfg)
    engine = settings.engine.model_copy(update={"unique_table_bits": cfg.unique_table_bits})
    dom = compile_domain(ast, settings=engine)
    plan = parse_plan(args.plan)
    check = verify_plan(dom, plan)
    trace = [format_belief(belief) for belief in check.trace]

    if cfg.json_output:
        doc = VerifyDocument(instance=dom.name, conformant=check.conformant, plan=plan, trace=trace)
        print(doc.model_dump_json(indent=2))
    else:
        for step, belief in enumerate(trace):
            states = "  ".join("{" + ", ".join(s) + "}" for s in belief)
            label = "initial" if step == 0 else plan[step - 1]
            print(f"{step} {label}: {states}")
        if check.conformant:
            print("conformant")
        elif len(trace) <= len(plan):
            print(f"not conformant: {plan[len(trace) - 1]} is not applicable after {len(trace) - 1} steps")
        else:
            print("not conformant: the final belief state leaves the goal")
    return EXIT_OK if check.conformant else EXIT_FAIL


def cmd_oracle(cfg: RunConfig, settings: Settings, args: argparse.Namespace) -> int:
    ast = load_domain(cfg)
    start = time.perf_counter()
    try:
        result = oracle_search(ast, bound=cfg.oracle_bound, max_fluents=settings.oracle.max_fluents)
        doc = OracleDocument(
            instance=ast.name,
            outcome=result.outcome.value,
            plan=result.plan,
            length=result.length,
            expanded=result.expanded,
        )
    except OracleBoundExceeded as e:
        logger.warning("%s", e)
        doc = OracleDocument(instance=ast.name, outcome="INCONCLUSIVE", expanded=cfg.oracle_bound)
    doc.elapsed_ms = (time.perf_counter() - start) * 1000.0

    if cfg.json_output:
        print(doc.model_dump_json(indent=2))
    else:
        print(f"instance: {doc.instance}")
        print(f"outcome:  {doc.outcome}")
        if doc.outcome == Outcome.PLAN.value:
            print(f"plan:     {format_plan(doc.plan)}")
            print(f"length:   {doc.length}")
        elif doc.outcome == Outcome.FAIL.value:
            print("no conformant solution")
        else:
            print(f"explicit search gave up after {cfg.oracle_bound} belief states")
        print(f"expanded: {doc.expanded}")
        print(f"elapsed:  {format_elapsed(doc.elapsed_ms)}")
    return {"PLAN": EXIT_OK, "FAIL": EXIT_FAIL}.get(doc.outcome, EXIT_UNKNOWN)


def cmd_bench(cfg: RunConfig, settings: Settings, args: argparse.Namespace) -> int:
    suite_filter = SuiteFilter(family=args.family, min=args.min, max=args.max, variant=args.variant)
    if args.emit:
        for record in select(suite_filter):
            print(emit(record.spec, args.emit))
        return EXIT_OK

    with_oracle = settings.bench.with_oracle if args.with_oracle is None else args.with_oracle
    budget = SuiteBudget(
        max_depth=cfg.max_depth,
        with_oracle=with_oracle,
        oracle_bound=cfg.oracle_bound,
        oracle_max_fluents=settings.bench.oracle_max_fluents,
        engine=settings.engine.model_copy(update={"unique_table_bits": cfg.unique_table_bits}),
    )
    report = run_suite(suite_filter, budget)

    record = settings.bench.record_history if args.record is None else args.record
    if record and report.rows:
        history = SuiteHistory(settings.bench.history_db)
        written = history.record(report)
        history.close()
        logger.info("recorded %d rows in %s", written, settings.bench.history_db)

    if cfg.json_output:
        print(report.model_dump_json(indent=2))
    else:
        print(report.render_table(), end="")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_history(cfg: RunConfig, settings: Settings, args: argparse.Namespace) -> int:
    history = SuiteHistory(settings.bench.history_db)
    runs = history.runs(family=args.family, since=args.since)
    history.close()
    if cfg.json_output:
        print(json.dumps(runs, indent=2))
        return EXIT_OK
    for run in runs:
        length = "-" if run["length"] is None else run["length"]
        print(
            f"{run['timestamp']}  {run['instance']}  {run['outcome']} {length}  {run['status']}"
            f"  #BS {run['bs_inserted']}  #BSH {run['bs_hits']}  {run['elapsed_ms']:.1f} ms"
        )
    return EXIT_OK


COMMANDS = {
    "plan": cmd_plan,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
    "bench": cmd_bench,
    "history": cmd_history,
}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        settings = load_settings(args.config)
        log_level = (args.log_level or settings.general.log_level).upper()
        if not isinstance(logging.getLevelName(log_level), int):
            raise UsageError(f"unknown log level '{args.log_level}'")
        logging.basicConfig(
            level=log_level,
            format="%(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )

        flags = {"command": args.command, "json_output": getattr(args, "json", False)}
        if args.command in ("plan", "verify", "oracle"):
            flags["path"] = args.file
            if args.family is not None:
                spec = parse_family_spec(args.family, args.params, args.variant)
                flags.update(family=spec.family, params=spec.params, variant=spec.variant)
        if args.command == "plan":
            flags.update(max_depth=args.max_depth, prune=args.prune, all_plans=args.all_plans)
        if args.command == "oracle":
            flags["oracle_bound"] = args.bound
        cfg = build_run_config(settings, **flags)
        return COMMANDS[args.command](cfg, settings, args)
    except (CmbpError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
