"""Command-line front end.

    cmabpta run --config exp.json --out results/cts.csv
    cmabpta reproduce table1|fig1|fig2-scaled --out results/
    cmabpta diagnose instance.json
    cmabpta bound instance.json --epsilon 1e-3 --rho 0.5
    cmabpta validate instance.json --samples 100000

Exit codes: 0 success, 1 usage or bad input, 2 validation failure, 3 runtime error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .analysis import diagnose, theorem1_bound
from .environments import InstanceSpecError, load_instance
from .harness import ExperimentConfig, run_experiment, write_results
from .model import CmabError
from .validation import AUDIT_CAP, audit

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2, 3

# (R, K, delta) -> (CTS mean, CTS std, CUCB mean, CUCB std), p = 0.2
TABLE1 = {
    (16, 2, 0.15): (155.4, 14.1, 1284.1, 52.4),
    (16, 4, 0.15): (103.2, 9.0, 998.9, 33.2),
    (16, 8, 0.15): (52.1, 9.8, 549.5, 16.8),
    (32, 2, 0.15): (321.4, 18.9, 2718.8, 61.2),
    (32, 4, 0.15): (252.2, 17.0, 2227.0, 55.4),
    (32, 8, 0.15): (155.4, 25.7, 1531.0, 21.9),
    (16, 2, 0.075): (276.9, 50.7, 2057.6, 79.6),
    (16, 4, 0.075): (205.4, 25.7, 1496.5, 65.2),
    (16, 8, 0.075): (113.1, 40.4, 719.4, 53.7),
}

TARGETS = {
    "table1": {"T": 100_000, "n_runs": 20, "record_every": 100},
    "fig1": {"T": 1600, "n_runs": 100, "record_every": 1, "L": 20, "R": 100, "K": 5},
    # desk-scale stand-in for R = 10^6, K = 10^6 - 1
    "fig2-scaled": {"T": 160, "n_runs": 100, "record_every": 1, "R": 1000, "K": 999, "bad_value": 1 / 3},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _say(*parts):
    print(*parts, flush=True)


def _overrides(args, target):
    base = TARGETS[target]
    return {
        "T": args.horizon or base["T"],
        "n_runs": args.runs or base["n_runs"],
        "record_every": args.record_every or base["record_every"],
        "master_seed": args.seed,
        "parallelism": args.parallelism or 1,
    }


def _run_pair(instance, common, out_dir: Path, stem: str):
    results = {}
    for learner in ("cts", "cucb"):
        config = ExperimentConfig(instance=instance, learner=learner, **common)
        agg = run_experiment(config)
        write_results(agg, out_dir / f"{stem}_{learner}.csv")
        results[learner] = agg
    return results


def reproduce_table1(args, out_dir: Path) -> dict:
    common = _overrides(args, "table1")
    _say(f"table1: B_LB(R, K, 0.2, delta), T={common['T']}, runs={common['n_runs']}, seed={common['master_seed']}")
    rows = []
    for (R, K, delta), ref in TABLE1.items():
        instance = {"type": "blb", "R": R, "K": K, "p": 0.2, "delta": delta}
        res = _run_pair(instance, common, out_dir / "table1", f"R{R}_K{K}_D{delta}")
        row = {"R": R, "K": K, "delta": delta,
               "cts_mean": res["cts"].final_mean, "cts_std": res["cts"].final_std,
               "cucb_mean": res["cucb"].final_mean, "cucb_std": res["cucb"].final_std,
               "ref_cts_mean": ref[0], "ref_cts_std": ref[1],
               "ref_cucb_mean": ref[2], "ref_cucb_std": ref[3]}
        rows.append(row)
        _say(f"  R={R:<3d} K={K} delta={delta:<6} CTS {row['cts_mean']:8.1f} ({row['cts_std']:5.1f})"
             f"   CUCB {row['cucb_mean']:8.1f} ({row['cucb_std']:5.1f})"
             f"   reference {ref[0]:.1f} / {ref[2]:.1f}")
    with (out_dir / "table1_summary.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return {"target": "table1", "rows": rows}


def crossover_round(rounds, cts, cucb):
    """First recorded round from which CTS regret stays strictly below CUCB's; None if never."""
    below = cts < cucb
    if not below[-1]:
        return None
    last_bad = np.flatnonzero(~below)
    return int(rounds[0] if last_bad.size == 0 else rounds[last_bad[-1] + 1])


def reproduce_fig(args, out_dir: Path, target: str) -> dict:
    common = _overrides(args, target)
    spec = TARGETS[target]
    if target == "fig1":
        instance = {"type": "uniform", "L": spec["L"], "R": spec["R"], "K": spec["K"], "seed": args.seed}
        _say(f"fig1: disjunctive, L={spec['L']}, R={spec['R']}, K={spec['K']}, "
             f"attractions ~ U[0,1] (seed {args.seed}), T={common['T']}, runs={common['n_runs']}")
    else:
        instance = {"type": "needle", "R": spec["R"], "K": spec["K"], "bad_page": 0, "bad_value": spec["bad_value"]}
        _say(f"fig2-scaled: conjunctive, L=1, R={spec['R']}, K={spec['K']}, one page at 1/3 "
             f"(scaled down from R=10^6), T={common['T']}, runs={common['n_runs']}")
    res = _run_pair(instance, common, out_dir, target)
    cts, cucb = res["cts"], res["cucb"]
    summary = {"target": target, "cts_final": cts.final_mean, "cts_final_std": cts.final_std,
               "cucb_final": cucb.final_mean, "cucb_final_std": cucb.final_std,
               "crossover_round": crossover_round(cts.rounds, cts.mean, cucb.mean)}
    _say(f"  CTS  final regret {cts.final_mean:.3f} ({cts.final_std:.3f})")
    _say(f"  CUCB final regret {cucb.final_mean:.3f} ({cucb.final_std:.3f})")
    _say(f"  CTS stays below CUCB from round: {summary['crossover_round']}")
    return summary


def cmd_reproduce(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.target == "table1":
        summary = reproduce_table1(args, out_dir)
    else:
        summary = reproduce_fig(args, out_dir, args.target)
    (out_dir / f"{args.target}_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


def cmd_run(args) -> int:
    config = ExperimentConfig.load(args.config)
    for flag, name in (("seed", "master_seed"), ("runs", "n_runs"), ("horizon", "T"), ("parallelism", "parallelism")):
        value = getattr(args, flag)
        if value is not None:
            setattr(config, name, value)
    config = ExperimentConfig.from_dict(config.to_dict())
    agg = run_experiment(config)
    path = write_results(agg, args.out)
    _say(f"{config.learner}: final regret {agg.final_mean:.3f} ({agg.final_std:.3f}) over {agg.n_runs} runs -> {path}")
    return EXIT_OK


def _instance_path(args):
    path = args.instance or args.config
    if path is None:
        raise InstanceSpecError("an instance path is required")
    return path


def cmd_diagnose(args) -> int:
    diag = diagnose(load_instance(_instance_path(args)))
    _say(json.dumps(diag.to_dict(), indent=2))
    return EXIT_OK


def cmd_bound(args) -> int:
    instance = load_instance(_instance_path(args))
    B = args.lipschitz if args.lipschitz is not None else instance.lipschitz
    bound = theorem1_bound(diagnose(instance), B, args.epsilon, args.rho, args.alpha, args.horizon)
    _say(json.dumps(bound.to_dict(), indent=2))
    return EXIT_OK


def cmd_validate(args) -> int:
    instance = load_instance(_instance_path(args))
    rng = np.random.Generator(np.random.Philox(args.seed))
    report = audit(instance, args.samples, rng, cap=args.max_super_arms)
    _say(f"{report.checks} checks ({report.exact_checks} exact) over {args.samples} samples per super arm")
    for v in report.violations:
        where = f"arm {v.arm}" if v.arm is not None else "reward"
        _say(f"  VIOLATION {v.super_arm} {where}: empirical {v.empirical:.6f}, "
             f"expected {v.expected:.6f}, tolerance {v.tolerance:.6f}")
    _say("ok" if report.ok else f"{len(report.violations)} violations")
    return EXIT_OK if report.ok else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cmabpta", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, seed_default):
        p.add_argument("--seed", type=int, default=seed_default)
        p.add_argument("--runs", type=int)
        p.add_argument("--horizon", type=int)
        p.add_argument("--parallelism", type=int, default=None)

    p = sub.add_parser("run", help="run the experiment described by a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    common(p, None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("reproduce", help="reproduce a published experiment")
    p.add_argument("target", choices=sorted(TARGETS))
    p.add_argument("--out", required=True)
    p.add_argument("--record-every", type=int)
    common(p, 0)
    p.set_defaults(func=cmd_reproduce)

    for name, func, hlp in (("diagnose", cmd_diagnose, "exact instance diagnostics"),
                            ("bound", cmd_bound, "CTS regret bound components"),
                            ("validate", cmd_validate, "Monte Carlo audit of the triggering law")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("instance", nargs="?")
        p.add_argument("--config")
        p.set_defaults(func=func)
        if name == "bound":
            p.add_argument("--epsilon", type=float, required=True)
            p.add_argument("--rho", type=float, required=True)
            p.add_argument("--alpha", type=float, default=1.0)
            p.add_argument("--horizon", "-T", type=int, default=100_000)
            p.add_argument("--lipschitz", "-B", type=float)
        if name == "validate":
            p.add_argument("--samples", type=int, default=100_000)
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--max-super-arms", type=int, default=AUDIT_CAP)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InstanceSpecError as exc:
        print(f"cmabpta: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CmabError as exc:
        print(f"cmabpta: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"cmabpta: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
