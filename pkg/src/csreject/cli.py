"""`bench` command line: grid runs, aggregation, theorem audits, gradcheck."""

from __future__ import annotations

import argparse
import os
import sys

from . import harness, theory
from .checks import run_gradcheck


def _parse_costs(text: str) -> tuple[float, ...]:
    """Either a comma list '0.1,0.2' or a range 'start:stop:step' (inclusive)."""
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        costs = []
        c = start
        while c <= stop + 1e-12:
            costs.append(round(c, 10))
            c += step
        return tuple(costs)
    return tuple(float(v) for v in text.split(","))


def cmd_run(args) -> int:
    grid = harness.GridSpec(
        datasets=tuple(args.dataset.split(",")),
        methods=tuple(args.methods.split(",")),
        costs=_parse_costs(args.costs),
        trials=args.trials,
        setting=args.setting,
        master_seed=args.seed,
        noise_rate=args.noise_rate,
        prior=args.prior,
        epochs=args.epochs,
        batch_size=args.batch_size,
    )
    skip = []
    existing = []
    if args.resume and os.path.exists(args.out):
        existing = harness.read_csv(args.out)
        skip = [r.key() for r in existing]
        print(f"resuming: {len(skip)} rows already present")
    rows = harness.run_grid(grid, skip_keys=skip, jobs=args.jobs)
    merged = sorted(existing + rows, key=lambda r: (r.dataset, r.method, r.cost, r.trial))
    harness.write_csv(merged, args.out)
    n_flagged = sum(r.flagged for r in rows)
    print(f"wrote {len(merged)} rows to {args.out} ({n_flagged} flagged)")
    return 1 if n_flagged else 0


def cmd_aggregate(args) -> int:
    rows = harness.read_csv(args.infile)
    summaries = harness.aggregate(rows)
    harness.write_summary_csv(summaries, args.out, rescale_0_100=args.rescale)
    print(f"wrote {len(summaries)} summary rows to {args.out}")
    return 0


def cmd_audit(args) -> int:
    ok = True

    checked, disagreements = theory.audit_oracle_equivalence(args.draws, seed=args.seed)
    line_ok = disagreements == 0
    ok &= line_ok
    print(f"[{'PASS' if line_ok else 'FAIL'}] oracle equivalence: {checked} draws, {disagreements} disagreements")

    for name, (n, dis) in theory.audit_calibration(n_draws=args.calibration_draws, seed=args.seed + 1).items():
        line_ok = dis == 0
        ok &= line_ok
        print(f"[{'PASS' if line_ok else 'FAIL'}] calibration ({name}): {n} draws, {dis} disagreements")

    n, viol, psi_viol = theory.audit_excess_random(args.excess_instances, seed=args.seed + 2)
    line_ok = viol == 0 and psi_viol == 0
    ok &= line_ok
    print(
        f"[{'PASS' if line_ok else 'FAIL'}] excess-risk chain: {n} instances, "
        f"{viol} violations, {psi_viol} psi-bound violations"
    )

    from .core import RejectionCost

    witness = theory.miscalibrated_witness(RejectionCost(0.2))
    ok &= witness
    print(f"[{'PASS' if witness else 'FAIL'}] miscalibrated-loss witness disagrees with the oracle")
    return 0 if ok else 1


def cmd_gradcheck(args) -> int:
    results = run_gradcheck(seed=args.seed)
    ok = True
    for name, (err, passed) in sorted(results.items()):
        ok &= passed
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: max rel err {err:.2e}")
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment grid")
    p.add_argument("--dataset", default="twonorm")
    p.add_argument("--methods", default="cs-sigmoid,cs-hinge,sce,defer,angle")
    p.add_argument("--setting", default="clean", choices=harness.SETTINGS)
    p.add_argument("--costs", default="0.1:0.4:0.05")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--noise-rate", type=float, default=0.25)
    p.add_argument("--prior", type=float, default=0.7)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("aggregate", help="aggregate result rows to mean +- SE")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rescale", action="store_true", help="report on the 0-100 scale")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("audit", help="run the theorem audits")
    p.add_argument("--draws", type=int, default=100_000)
    p.add_argument("--calibration-draws", type=int, default=1000)
    p.add_argument("--excess-instances", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("gradcheck", help="finite-difference gradient suite")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gradcheck)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
