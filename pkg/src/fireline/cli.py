"""Command-line harness.

Subcommands: ``run`` (one episode), ``campaign`` (multi-seed policy
comparison), ``calibrate`` (fit spread preset p0 values), ``report``
(re-emit aggregates from a finished campaign directory).

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .episode import DispatchPolicy, Timeline, run_episode
from .errors import ConfigError, FirelineError
from .experiments import CampaignConfig, CaseDefinition, REPORT_FORMATS, \
    calibrate_spread, emit_report, load_campaign, run_campaign, run_one, \
    _surveillance_setup, _suppression_setup
from .presets import SPREAD_PRESETS, params_for_scenario
from .scenario_io import load_scenario

POLICY_CHOICES = ("localized", "global", "immediate", "technique", "off")
SURVEILLANCE_CHOICES = ("uncertainty", "belief_baseline", "off")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--case", type=int, choices=(1, 2, 3, 4), default=1,
                   help="benchmark case id")
    p.add_argument("--spread", choices=SPREAD_PRESETS, default=None,
                   help="override the case's spread preset")
    p.add_argument("--surveillance", choices=SURVEILLANCE_CHOICES,
                   default="uncertainty", help="surveillance model")
    p.add_argument("--perfect-info", action="store_true",
                   help="planners see the true fire state every minute")
    p.add_argument("--dispatch", action="store_true",
                   help="enable early dispatch of a second aircraft")
    p.add_argument("--asr", type=int, choices=(1, 2, 3), default=2,
                   help="action space restriction method")
    p.add_argument("--quantile", type=float, default=90.0,
                   help="distance percentile for ASR methods 2 and 3")
    p.add_argument("--rollout-depth", type=int, default=10,
                   help="internal rollout depth per planning step")
    p.add_argument("--iters", type=int, default=None,
                   help="search iterations per decision (default: planner defaults)")
    p.add_argument("--time-limit", type=float, default=None,
                   help="per-decision wall-clock limit in seconds")
    p.add_argument("--seed", type=int, default=0, help="base random seed")
    p.add_argument("--out", type=Path, default=Path("fireline-out"),
                   help="output directory")


def _campaign_config(args) -> CampaignConfig:
    return CampaignConfig(
        spread=args.spread,
        surveillance=args.surveillance,
        perfect_info=args.perfect_info,
        dispatch=args.dispatch,
        asr_method=args.asr,
        quantile_q=args.quantile,
        rollout_ro=args.rollout_depth,
        iters=args.iters,
        time_limit_s=args.time_limit,
        jobs=getattr(args, "jobs", 1),
    )


def _cmd_run(args) -> int:
    cfg = _campaign_config(args)
    if args.scenario_dir is not None:
        scenario = load_scenario(args.scenario_dir)
        if args.spread:
            scenario.spread_preset = args.spread
        params = params_for_scenario(scenario)
        log = run_episode(scenario, _surveillance_setup(cfg),
                          _suppression_setup(args.policy, cfg),
                          DispatchPolicy(enabled=args.dispatch),
                          seed=args.seed, timeline=Timeline(), params=params)
    else:
        log = run_one(CaseDefinition.for_id(args.case), args.policy,
                      args.seed, cfg)
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / "episode.csv"
    log.to_csv(path)
    final = log.final
    print(f"episode written to {path}")
    print(f"outcome: {log.outcome.value}")
    print(f"final destruction: {final.destruction:.2f}, "
          f"burning cells: {final.burning_count}, "
          f"ring radius: {final.ring_radius_m:.1f} m")
    return 0


def _cmd_campaign(args) -> int:
    cfg = _campaign_config(args)
    policies = args.policy or ["localized"]
    report = run_campaign(CaseDefinition.for_id(args.case), policies,
                          args.runs, args.seed, cfg, out_dir=args.out)
    written = []
    for fmt in ("csv", "text", "svg"):
        written.extend(emit_report(report, fmt, args.out / "report"))
    print(f"campaign outputs under {args.out}")
    for policy in report.policies:
        stats = report.finals[policy]["destruction"]
        print(f"  {policy}: final destruction {stats.mean:.2f}")
    print(f"  report files: {len(written)}")
    return 0


def _cmd_calibrate(args) -> int:
    presets = SPREAD_PRESETS if args.spread is None else (args.spread,)
    seeds = list(range(args.seed, args.seed + args.calib_seeds))
    table_path = args.out
    for preset in presets:
        p0 = calibrate_spread(preset, args.target, args.tolerance, seeds,
                              table_path=table_path)
        print(f"{preset}: p0 = {p0:.6f}")
    print(f"table written to {table_path}")
    return 0


def _cmd_report(args) -> int:
    report = load_campaign(args.campaign_dir)
    written = emit_report(report, args.format, args.out)
    for path in written:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fireline",
        description="Wildfire initial-attack simulation and planning")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one episode")
    _add_common_flags(p_run)
    p_run.add_argument("--policy", choices=POLICY_CHOICES, default="localized",
                       help="suppression policy")
    p_run.add_argument("--scenario-dir", type=Path, default=None,
                       help="load a scenario directory instead of a case")
    p_run.set_defaults(func=_cmd_run)

    p_camp = sub.add_parser("campaign", help="multi-seed policy comparison")
    _add_common_flags(p_camp)
    p_camp.add_argument("--policy", choices=POLICY_CHOICES, action="append",
                        default=None,
                        help="suppression policy (repeatable)")
    p_camp.add_argument("--runs", type=int, default=20,
                        help="number of seeded runs per policy")
    p_camp.add_argument("--jobs", type=int, default=1,
                        help="parallel episode workers")
    p_camp.set_defaults(func=_cmd_campaign)

    p_cal = sub.add_parser("calibrate", help="fit spread preset p0 values")
    p_cal.add_argument("--spread", choices=SPREAD_PRESETS, default=None,
                       help="single preset (default: all)")
    p_cal.add_argument("--target", type=float, default=None,
                       help="target burned fraction (default: preset's)")
    p_cal.add_argument("--tolerance", type=float, default=0.02)
    p_cal.add_argument("--calib-seeds", type=int, default=8,
                       help="number of seeds per evaluation")
    p_cal.add_argument("--seed", type=int, default=0, help="first seed")
    p_cal.add_argument("--out", type=Path,
                       default=Path("spread_presets.txt"),
                       help="table file to write")
    p_cal.set_defaults(func=_cmd_calibrate)

    p_rep = sub.add_parser("report", help="re-emit campaign reports")
    p_rep.add_argument("--campaign-dir", type=Path, required=True,
                       help="directory written by the campaign subcommand")
    p_rep.add_argument("--format", choices=REPORT_FORMATS, default="csv")
    p_rep.add_argument("--out", type=Path, default=Path("fireline-report"))
    p_rep.set_defaults(func=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FirelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
