"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data or file error, 3 a
verification check failed.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import warnings

from . import datagen, icnn, loadpaths, trainer, verify
from .models import load_model, model_class
from .refmodels import KINDS, RefEnergy
from .tensor3 import det

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CHECK = 0, 1, 2, 3

log = logging.getLogger("cssvnn")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cssvnn", description="Polyconvex signed-singular-value network energies.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-data", help="write a training dataset")
    g.add_argument("--model", required=True, choices=KINDS)
    g.add_argument("--out", required=True)

    t = sub.add_parser("train", help="train a network over several restarts")
    t.add_argument("--data", required=True)
    t.add_argument("--kind", required=True, choices=("cssv", "pann"))
    t.add_argument("--arch", required=True, help='layer sizes, e.g. "7-8-4-4-1"')
    t.add_argument("--mode", choices=trainer.MODES, default="stress")
    t.add_argument("--restarts", type=_positive_int, default=30)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--alpha", type=float, default=1.0, help="hull penalty factor")
    t.add_argument("--workers", type=_positive_int, default=1)
    t.add_argument("--quick", action="store_true", help="divide epochs and restarts by 10")
    t.add_argument("--out", required=True, help="checkpoint path")
    t.add_argument("--report", help="training report path (JSON)")
    t.add_argument("--losses-csv", help="per-restart final losses (CSV)")

    e = sub.add_parser("eval", help="sample a model along load paths into CSV")
    e.add_argument("--model", required=True)
    e.add_argument("--paths", default="all", choices=(*loadpaths.PATHS, "all"))
    e.add_argument("--range-extend", type=float, default=1.0)
    e.add_argument("--samples", type=_positive_int, default=50)
    e.add_argument("--ref", choices=("ssve", "hencky"))
    e.add_argument("--csv", required=True)

    v = sub.add_parser("verify", help="run the constraint checks on a checkpoint")
    v.add_argument("--model", required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=_positive_int, default=1000)
    v.add_argument("--hull-data", help="strain-energy dataset for the hull feasibility check")
    v.add_argument("--json", help="write the machine-readable report here")
    return p


def cmd_gen_data(args) -> int:
    ref = RefEnergy(args.model)
    ds = datagen.gen_nematic_grid(ref) if args.model == "nematic" else datagen.gen_stress_dataset(ref)
    datagen.save(ds, args.out)
    print(f"wrote {len(ds)} records to {args.out} sha256:{datagen.checksum(ds)}")
    return EXIT_OK


def cmd_train(args) -> int:
    try:
        arch = icnn.IcnnArch.parse(args.arch)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cls = model_class(args.kind)
    if arch.n_in != cls.n_in:
        raise UsageError(f"{args.kind} needs input size {cls.n_in}; architecture {arch} has {arch.n_in}")
    ds = datagen.load(args.data)
    cfg = trainer.TrainConfig.default(args.mode, restarts=args.restarts, base_seed=args.seed, penalty_alpha=args.alpha)
    if args.quick:
        cfg = cfg.scaled(10)
    print(f"training {args.kind} {arch} ({icnn.param_count(arch)} parameters) on {len(ds)} records, "
          f"{cfg.restarts} restarts, epochs {[s.epochs for s in cfg.stages]}")

    def progress(r):
        log.info("restart %d seed %d loss %.6g%s", r.restart, r.seed, r.final_loss, " FAILED" if r.failed else "")

    model, report = trainer.train(args.kind, arch, ds, cfg, workers=args.workers, progress=progress)
    model.save(args.out)
    if args.report:
        report.save(args.report)
    if args.losses_csv:
        report.write_csv(args.losses_csv)
    print(f"best restart {report.best_index} seed {report.restarts[report.best_index].seed} "
          f"final loss {report.best_loss!r} ({report.wall_time:.1f} s)")
    return EXIT_OK


def cmd_eval(args) -> int:
    model = load_model(args.model)
    ref = RefEnergy(args.ref) if args.ref else None
    names = list(loadpaths.PATHS) if args.paths == "all" else [args.paths]
    header = ["path", "load", "psi_nn", "p_nn"] + (["psi_ref", "p_ref"] if ref else [])
    with open(args.csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for name in names:
            a, b = loadpaths.component(name)
            for t in loadpaths.sample(name, args.samples, args.range_extend):
                f = loadpaths.defgrad(name, float(t))
                if det(f) <= 0.0:
                    warnings.warn(f"{name} at {t}: det F <= 0, energy has no physical meaning")
                row = [name, repr(float(t)), repr(model.energy(f)), repr(float(model.stress(f)[a, b]))]
                if ref:
                    row += [repr(ref.energy(f)), repr(float(ref.stress(f)[a, b]))]
                w.writerow(row)
    print(f"wrote {len(names) * args.samples} rows to {args.csv}")
    return EXIT_OK


def cmd_verify(args) -> int:
    model = load_model(args.model)
    hull = datagen.load(args.hull_data) if args.hull_data else None
    results = verify.run_suite(model, trials=args.trials, seed=args.seed, hull_data=hull)
    print(f"seed={args.seed}")
    print(verify.format_report(results))
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(verify.report_json(results) + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


COMMANDS = {"gen-data": cmd_gen_data, "train": cmd_train, "eval": cmd_eval, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"cssvnn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, KeyError) as exc:
        print(f"cssvnn: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
