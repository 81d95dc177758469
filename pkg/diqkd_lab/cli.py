"""Unified CLI dispatcher for all diqkd-lab commands."""

import argparse
import logging
import sys

from diqkd_lab.common.config import Config
from diqkd_lab.common.errors import DomainError, NumericFailure

logger = logging.getLogger(__name__)

SCENARIOS = ("di", "standard", "detection", "partial")


def _scenario(args):
    from diqkd_lab.bounds import Scenario

    if args.scenario == "standard":
        return Scenario.standard()
    if args.scenario == "detection":
        return Scenario.detection_efficiency(args.eta)
    if args.scenario == "partial":
        if args.q is None:
            raise DomainError("--q is required for the partial scenario")
        return Scenario.partial_knowledge(args.q)
    return Scenario.device_independent()


def cmd_rate(args):
    from diqkd_lab import bounds
    from diqkd_lab.common import format_bits, format_section_header

    if args.scenario == "detection" and args.eta is not None and args.Q is None and args.S is None:
        report = bounds.detection_efficiency_rate(args.eta)
    else:
        if args.Q is None or args.S is None:
            raise DomainError("--Q and --S are required (or --scenario detection with --eta)")
        report = bounds.keyrate(args.Q, args.S, _scenario(args))

    lines = [
        format_section_header("Key Rate"),
        report.to_text(),
        "",
        f"Rate: {format_bits(report.rate)} ({'secure' if report.secure else 'no key'})",
    ]
    print("\n".join(lines))
    return Config.exit_ok


_FIGURES = {
    "2": ("Q", 0.0, 0.12, 121),
    "3": ("eta", 0.9, 1.0, 101),
    "partial": ("Q", 0.0, 0.12, 121),
}


def cmd_curve(args):
    from pathlib import Path

    from diqkd_lab import bounds
    from diqkd_lab.bounds import Scenario
    from diqkd_lab.common import format_section_header, format_sig

    xlabel, start, stop, steps = _FIGURES[args.figure]
    steps = args.steps or steps
    if args.figure == "3":
        scenario = Scenario.detection_efficiency()
        name = "figure3_detection"
    elif args.figure == "partial":
        if args.q is None:
            raise DomainError("--q is required for --figure partial")
        scenario = Scenario.partial_knowledge(args.q)
        name = f"partial_q{format_sig(args.q, 4)}"
    else:
        scenario = Scenario.standard() if args.scenario == "standard" else Scenario.device_independent()
        name = f"figure2_{args.scenario}"

    rows = bounds.curve(scenario, start, stop, steps)
    if args.out:
        out = Path(args.out)
    else:
        Config.ensure_dirs()
        out = Config.output_dir / f"{name}.csv"
    bounds.write_curve_csv(rows, out)

    crossing = bounds.curve_zero_crossing(rows)
    lines = [
        format_section_header(f"Key-rate curve ({scenario.label})"),
        f"Rows: {len(rows)} over {xlabel} in [{start}, {stop}]",
        f"CSV: {out}",
        f"Zero crossing: {format_sig(crossing, 6) if crossing is not None else 'none in range'}",
    ]
    if args.gnuplot:
        script = out.with_suffix(".gp")
        script.write_text(bounds.gnuplot_script(out, xlabel, scenario.label))
        lines.append(f"Gnuplot script: {script}")
    print("\n".join(lines))
    return Config.exit_ok


def cmd_attack(args):
    from pathlib import Path

    from diqkd_lab import eve
    from diqkd_lab.common import format_key_value, format_section_header

    spec = eve.build_attack(args.S, args.Q)
    check = eve.attack_saturation(spec)
    lines = [
        format_section_header("Optimal Collective Attack"),
        spec.to_text(),
        "",
        format_section_header("Saturation Check"),
    ]
    lines += [format_key_value(k, v) for k, v in check.items()]
    text = "\n".join(lines)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return Config.exit_ok if check["saturated"] else Config.exit_verification


def cmd_verify(args):
    from pathlib import Path

    from diqkd_lab import verify
    from diqkd_lab.common import format_section_header, format_timestamp

    reports = verify.run_suite(args.suite, args.samples, args.seed, args.phi_grid)
    if args.out:
        out = Path(args.out)
    else:
        Config.ensure_dirs()
        out = Config.output_dir / f"verify_{args.suite}.csv"
    verify.write_report_csv(reports, out)

    lines = [
        format_section_header("Verification Report"),
        f"Time: {format_timestamp()}",
        f"Seed: {args.seed}",
        "",
    ]
    for r in reports:
        status = "OK" if r["success"] else "FAILED"
        lines.append(f"{r['check']}: {status} ({r['checked']} checked, {r['total_issues']} issues)")
        for v in r["violations"][:5]:
            lines.append(f"  {v['check']}: value {v['value']:.12g} vs bound {v['bound']:.12g}")
    lines += ["", f"Failures CSV: {out}"]
    print("\n".join(lines))
    return Config.exit_ok if all(r["success"] for r in reports) else Config.exit_verification


def _parse_state(spec: str):
    """phiplus | werner:p | attack:S,Q → (state, measurements)."""
    from diqkd_lab import chsh, eve

    kind, _, params = spec.partition(":")
    try:
        if kind == "phiplus" and not params:
            return chsh.werner_state(1.0), chsh.MeasurementSet.protocol()
        if kind == "werner":
            return chsh.werner_state(float(params)), chsh.MeasurementSet.protocol()
        if kind == "attack":
            s, q = (float(v) for v in params.split(","))
            attack = eve.build_attack(s, q)
            return attack.density, attack.measurements
    except DomainError:
        raise
    except ValueError as e:
        raise DomainError(f"malformed --state {spec!r}: {e}") from e
    raise DomainError(f"unknown --state {spec!r}; use phiplus, werner:p or attack:S,Q")


def cmd_simulate(args):
    from diqkd_lab import protocol
    from diqkd_lab.common import format_key_value, format_section_header, format_timestamp

    state, measurements = _parse_state(args.state)
    cfg = protocol.ProtocolConfig(
        n_rounds=args.n,
        eta=args.eta,
        seed=args.seed,
        symmetrize_marginals=not args.no_symmetrize,
        workers=args.workers,
    )
    run = protocol.run_protocol(state, measurements, cfg)

    lines = [
        format_section_header("Protocol Simulation"),
        f"Time: {format_timestamp()}",
        f"State: {args.state}",
        "",
        run.report.to_text(),
        format_key_value("alice_marginal_A0", run.table.alice_marginal(0)),
        format_key_value("bob_marginal_B1", run.table.bob_marginal(1)),
    ]
    if args.log:
        lines.append(f"Round log: {run.log.to_csv(args.log)}")
    if args.table:
        lines.append(f"Table: {run.table.to_csv(args.table)}")
    print("\n".join(lines))
    return Config.exit_ok


def cmd_bb84_demo(args):
    from diqkd_lab import chsh
    from diqkd_lab.common import format_section_header, format_sig

    demo = chsh.bb84_counterexample()
    lines = [format_section_header("BB84 Statistics From A Separable State"), "", "X Y  a  b  P(ab|XY)"]
    for x, y, a, b, p, _ in demo.table.rows():
        lines.append(f"{x} {y} {a:+d} {b:+d}  {p}")

    lines += ["", format_section_header("Eve's Uncertainty")]
    for side, h in demo.eve_conditional_entropy.items():
        lines.append(f"H({side} output | Eve) = {format_sig(h, 6)}")

    lines += ["", format_section_header("CHSH Over Role Assignments")]
    for (x1, x2, y1, y2), s in sorted(demo.role_assignments.items()):
        lines.append(f"x=({x1},{x2}) y=({y1},{y2}): |S| = {format_sig(s, 6)}")
    verdict = "local (S ≤ 2): no device-independent security" if demo.max_chsh <= Config.local_bound + 1e-12 else "nonlocal"
    lines += ["", f"Max |S| = {format_sig(demo.max_chsh, 6)} → {verdict}"]
    print("\n".join(lines))
    return Config.exit_ok


def _configure_logging(verbosity: int):
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = getattr(logging, str(Config.log_level).upper(), logging.WARNING)
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diqkd-lab",
        description="diqkd-lab — device-independent QKD key rates, attacks, proof checks and simulation",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="Log to stderr (-v info, -vv debug)")
    subparsers = parser.add_subparsers(dest="command")

    # rate
    rate_parser = subparsers.add_parser("rate", help="Devetak-Winter key rate for observed (Q, S)")
    rate_parser.add_argument("--Q", type=float, default=None, help="Quantum bit error rate")
    rate_parser.add_argument("--S", type=float, default=None, help="CHSH value")
    rate_parser.add_argument("--scenario", choices=SCENARIOS, default="di", help="Security scenario (default: di)")
    rate_parser.add_argument("--eta", type=float, default=None, help="Detection efficiency (detection scenario)")
    rate_parser.add_argument("--q", type=float, default=None, help="Setting-knowledge probability (partial scenario)")

    # curve
    curve_parser = subparsers.add_parser("curve", help="Tabulate a key-rate curve to CSV")
    curve_parser.add_argument("--figure", choices=sorted(_FIGURES), default="2", help="2: rate vs QBER (one scenario per CSV; run once with --scenario di and once with --scenario standard for both curves), 3: rate vs eta, partial: rate vs QBER at fixed q")
    curve_parser.add_argument("--scenario", choices=("di", "standard"), default="di", help="Scenario for --figure 2; each run writes one curve")
    curve_parser.add_argument("--q", type=float, default=None, help="Setting-knowledge probability for --figure partial")
    curve_parser.add_argument("--steps", type=int, default=None, help="Number of rows")
    curve_parser.add_argument("--out", default=None, help="CSV path (default: output directory)")
    curve_parser.add_argument("--gnuplot", action="store_true", help="Also write a gnuplot script next to the CSV")

    # attack
    attack_parser = subparsers.add_parser("attack", help="Build the optimal attack for (S, Q) and check saturation")
    attack_parser.add_argument("--S", type=float, required=True, help="Target CHSH value in (2, 2√2]")
    attack_parser.add_argument("--Q", type=float, default=0.0, help="Target QBER (default: 0)")
    attack_parser.add_argument("--out", default=None, help="Also write the attack description to this path")

    # verify
    verify_parser = subparsers.add_parser("verify", help="Numerical verification sweeps of the security proof")
    verify_parser.add_argument("--suite", choices=("all",) + _suites(), default="all", help="Suite to run (default: all)")
    verify_parser.add_argument("--samples", type=int, default=10_000, help="Sample count (default: 10000)")
    verify_parser.add_argument("--seed", type=int, default=42, help="Random seed (default: 42)")
    verify_parser.add_argument("--phi-grid", type=int, default=Config.verify_phi_grid, help="φ grid for theorem1")
    verify_parser.add_argument("--out", default=None, help="Failure CSV path (default: output directory)")

    # simulate
    sim_parser = subparsers.add_parser("simulate", help="Monte-Carlo protocol simulation")
    sim_parser.add_argument("--state", default="phiplus", help="phiplus, werner:p or attack:S,Q")
    sim_parser.add_argument("--n", type=int, default=100_000, help="Number of rounds (default: 100000)")
    sim_parser.add_argument("--eta", type=float, default=1.0, help="Detection efficiency (default: 1)")
    sim_parser.add_argument("--seed", type=int, default=42, help="Random seed (default: 42)")
    sim_parser.add_argument("--workers", type=int, default=1, help="Worker threads (default: 1)")
    sim_parser.add_argument("--no-symmetrize", action="store_true", help="Skip marginal symmetrization")
    sim_parser.add_argument("--log", default=None, help="Write the per-round log CSV here")
    sim_parser.add_argument("--table", default=None, help="Write the empirical correlation table CSV here")

    # bb84-demo
    subparsers.add_parser("bb84-demo", help="Separable state reproducing BB84 statistics")

    return parser


def _suites() -> tuple:
    from diqkd_lab.verify import SUITES

    return SUITES


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)

    commands = {
        "rate": cmd_rate,
        "curve": cmd_curve,
        "attack": cmd_attack,
        "verify": cmd_verify,
        "simulate": cmd_simulate,
        "bb84-demo": cmd_bb84_demo,
    }

    if args.command not in commands:
        parser.print_help()
        return Config.exit_usage

    try:
        return commands[args.command](args)
    except DomainError as e:
        print(f"Error: {e}", file=sys.stderr)
        return Config.exit_usage
    except NumericFailure as e:
        logger.exception("numeric failure in %s", args.command)
        print(f"Error: numeric failure: {e}", file=sys.stderr)
        return Config.exit_numeric


if __name__ == "__main__":
    sys.exit(main())
