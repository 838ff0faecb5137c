"""Command-line pipeline: simulate, extract, augment, train, predict, evaluate, sweep.

Every stage reads and writes plain files so each step can be inspected on
its own.  Errors end the run with exit code 1 and one ``error:`` line on
stderr.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, config as config_mod, fnn, pipeline
from .dataset import Dataset
from .evaluation import MetricsTable

log = logging.getLogger("wheelflat")


def _run_config(args) -> config_mod.RunConfig:
    cfg = config_mod.load(args.config) if args.config else config_mod.RunConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.level is not None:
        cfg = replace(cfg, level=args.level)
    if getattr(args, "heights", None):
        cfg = replace(cfg, heights_mm=tuple(args.heights))
    if getattr(args, "levels", None):
        cfg = replace(cfg, levels=tuple(args.levels))
    if getattr(args, "max_iter", None) is not None:
        cfg = replace(cfg, train=replace(cfg.train, max_iter=args.max_iter))
    return cfg


def _heights_m(cfg) -> list[float]:
    return [h * 1e-3 for h in cfg.heights_mm]


def cmd_simulate(args, cfg):
    records = pipeline.simulate_all(cfg.sim, _heights_m(cfg))
    paths = pipeline.write_records(records, args.out)
    log.info("wrote %d records to %s", len(paths), args.out)


def cmd_extract(args, cfg):
    records = pipeline.load_records(args.signals, cfg.sim)
    data = pipeline.extract_datasets(records, cfg, [cfg.level])[cfg.level]
    data.to_csv(args.out)
    log.info("wrote %d x %d features to %s", len(data), data.features.shape[1], args.out)


def cmd_augment(args, cfg):
    data = pipeline.prepare(Dataset.from_csv(args.data), replace(cfg, augment=True))
    data.to_csv(args.out, provenance=True)
    log.info("wrote %d augmented rows to %s", len(data), args.out)


def _report_path(model_path) -> Path:
    model_path = Path(model_path)
    return model_path.with_name(model_path.stem + ".report.json")


def cmd_train(args, cfg):
    data = Dataset.from_csv(args.data)
    model, report = fnn.train(data, cfg.train)
    fnn.save(model, args.out)
    report.save(_report_path(args.out))
    log.info(
        "model saved to %s (mse %.3e, %d iterations, %s)",
        args.out, report.final_mse, report.iterations, report.stop_reason,
    )


def cmd_predict(args, cfg):
    model = fnn.load(args.model)
    data = Dataset.from_csv(args.data)
    pred = fnn.forward(model, data.features)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["FL", "FR", "RL", "RR", "position"])
        for row in pred:
            w.writerow([repr(float(v)) for v in row] + [("FL", "FR", "RL", "RR")[int(np.argmax(row))]])
    log.info("wrote %d predictions to %s", len(pred), args.out)


def cmd_evaluate(args, cfg):
    model = fnn.load(args.model)
    data = Dataset.from_csv(args.data)
    rows = None
    report = Path(args.report) if args.report else _report_path(args.model)
    if report.exists():
        rows = fnn.TrainReport.load(report).val_idx
        if rows.size and rows.max() >= len(data):
            raise ValueError(f"{report}: validation indices exceed {args.data} row count")
    det, loc = pipeline.evaluate_model(model, data, rows)
    table = MetricsTable([data.level], det[:, None], loc[:, None])
    table.to_csv(args.out)
    log.info(
        "detection %.4f localization %.4f -> %s",
        table.detection_average[0], table.localization_average[0], args.out,
    )


def cmd_sweep(args, cfg):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.signals:
        records = pipeline.load_records(args.signals, cfg.sim)
    else:
        records = pipeline.simulate_all(cfg.sim, _heights_m(cfg))
    table = pipeline.sweep(records, cfg)
    table.to_csv(out / "metrics.csv")
    table.to_long_csv(out / "metrics_long.csv")
    log.info(
        "localization average by level: %s",
        " ".join(f"L{j}={v:.3f}" for j, v in zip(table.levels, table.localization_average)),
    )


COMMANDS = {
    "simulate": cmd_simulate,
    "extract": cmd_extract,
    "augment": cmd_augment,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="seed for simulation and training")
    common.add_argument("--level", type=int, help="WPD level for single-level stages")
    common.add_argument("--out", required=True, help="output file or directory")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="wheelflat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"wheelflat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="write surrogate ABA CSVs")
    p.add_argument("--heights", type=float, nargs="+", metavar="MM", help="flat heights in mm")

    p = sub.add_parser("extract", parents=[common], help="ABA CSVs -> feature CSV")
    p.add_argument("--signals", required=True, help="directory of aba_h*_*.csv files")

    p = sub.add_parser("augment", parents=[common], help="feature CSV -> augmented CSV")
    p.add_argument("--data", required=True)

    p = sub.add_parser("train", parents=[common], help="dataset CSV -> model file")
    p.add_argument("--data", required=True)
    p.add_argument("--max-iter", type=int)

    p = sub.add_parser("predict", parents=[common], help="model + features -> predictions CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)

    p = sub.add_parser("evaluate", parents=[common], help="model + dataset -> metrics CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--report", help="training report (defaults to <model>.report.json)")

    p = sub.add_parser("sweep", parents=[common], help="levels 0-6 end to end")
    p.add_argument("--signals", help="read ABA CSVs instead of simulating in memory")
    p.add_argument("--levels", type=int, nargs="+")
    p.add_argument("--heights", type=float, nargs="+", metavar="MM")
    p.add_argument("--max-iter", type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = _run_config(args)
        log.info("wheelflat %s %s", __version__, args.command)
        log.info("config %s", cfg.dumps())
        t0 = time.perf_counter()
        COMMANDS[args.command](args, cfg)
        log.info("%s finished in %.1f s", args.command, time.perf_counter() - t0)
    except Exception as exc:  # noqa: BLE001 - single-line report for any stage failure
        msg = " ".join(str(exc).split())
        print(f"error: {args.command}: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
