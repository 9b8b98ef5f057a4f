"""Command-line entry point: ``pretrain``, ``adapt``, ``sweep`` and ``check``.

Exit codes: 0 success, 1 property-check failure, 2 configuration or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from realm_tta import __version__, checks, data, experiment
from realm_tta.adapt import write_records_csv, write_summary_json
from realm_tta.config import ConfigError, RunConfig, apply_overrides, load, parse_value
from realm_tta.model import ToyClassifier, init_model

SWEEP_AXES = ("lr_alpha_lambda", "severity", "n_target", "d", "alpha0", "lambda0", "strategy")
SWEEP_COLUMNS = ("value", "strategy", "steps", "updates", "final_accuracy", "heldout_accuracy",
                 "collapsed", "final_alpha", "final_lambda", "anomalies")


def _resolve(args, extra) -> RunConfig:
    cfg = load(args.config) if args.config else RunConfig()
    return apply_overrides(cfg, extra)


def _prepare_out(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {path} is not writable: {exc}") from None
    return path


def _manifest(out: Path, cfg: RunConfig, command: str, **extra) -> None:
    doc = {"tool": "realm-tta", "version": __version__, "command": command,
           "config": cfg.to_dict(), **extra}
    (out / "manifest.json").write_text(json.dumps(doc, indent=2))
    (out / "config.txt").write_text(cfg.to_text())


def cmd_pretrain(cfg: RunConfig) -> int:
    out = _prepare_out(Path(cfg.out_dir))
    sets = experiment.build_data(cfg)
    model, report = experiment.pretrained_model(cfg, sets["source"])
    model.save(out / "model.json")
    doc = {"source_accuracy": report.accuracy, "seed": cfg.seed, "epochs": report.epochs,
           "converged": report.converged, "accuracy_floor": report.floor}
    (out / "pretrain_report.json").write_text(json.dumps(doc, indent=2))
    if not cfg.source_csv:
        (out / "dataset.json").write_text(data.dataset_manifest(experiment.shift_for(cfg), sets))
    _manifest(out, cfg, "pretrain")
    print(f"source accuracy {report.accuracy:.4f}  model -> {out / 'model.json'}")
    if not report.converged:
        print(f"warning: source accuracy below floor {cfg.pretrain_floor}", file=sys.stderr)
    return 0


def _load_model(path) -> ToyClassifier:
    try:
        return ToyClassifier.load(path)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read model file {path}: {exc}") from None


def _adapt_once(cfg: RunConfig, model: ToyClassifier, out: Path):
    sets = experiment.build_data(cfg)
    records, summary, engine = experiment.adapt_on_target(cfg, model, sets)
    write_records_csv(records, out / "steps.csv")
    write_summary_json(summary, out / "summary.json")
    with open(out / "online_accuracy.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "online_accuracy", "updates", "alpha", "lambda"])
        updates = 0
        curve = summary.online_accuracy or [""] * len(records)
        for r, acc in zip(records, curve):
            updates += r.updated
            w.writerow([r.step, repr(acc) if acc != "" else "", updates, repr(r.alpha), repr(r.lam)])
    engine.model.save(out / "adapted_model.json")
    return summary


def cmd_adapt(cfg: RunConfig, model_path) -> int:
    model = _load_model(model_path)
    experiment.make_engine(cfg, model)  # rejects option conflicts before any work
    out = _prepare_out(Path(cfg.out_dir))
    summary = _adapt_once(cfg, model, out)
    _manifest(out, cfg, "adapt", model_file=str(model_path))
    acc = summary.final_accuracy
    print(f"{summary.strategy}: updates {summary.updates}/{summary.steps}"
          + ("" if acc is None else f"  online accuracy {acc:.4f}")
          + f"  collapsed {summary.collapsed}")
    return 0


def _sweep_point(args):
    cfg, model_doc, out = args
    model = ToyClassifier.from_dict(model_doc) if model_doc else None
    if model is None:
        sets = experiment.build_data(cfg)
        model, _ = experiment.pretrained_model(cfg, sets["source"])
    return _adapt_once(cfg, model, Path(out)).to_dict()


def _sort_key(v):
    return (0, v, "") if isinstance(v, (int, float)) else (1, 0, str(v))


def cmd_sweep(cfg: RunConfig, axis: str, values: list[str], model_path=None, jobs: int = 1) -> int:
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {', '.join(SWEEP_AXES)}")
    parsed = sorted({parse_value(axis, v) for v in values}, key=_sort_key)
    if not parsed:
        raise ConfigError("no sweep values given")
    out = _prepare_out(Path(cfg.out_dir))
    model_doc = _load_model(model_path).to_dict() if model_path else None
    tasks = []
    for v in parsed:
        point = cfg.replace(**{axis: v})
        # reject bad values up front, before any engine runs
        experiment.shift_for(point)
        experiment.make_engine(point, ToyClassifier.from_dict(model_doc) if model_doc else
                               init_model(point.d_in, point.d_feat, point.n_classes, point.seed))
        sub = out / f"{axis}={v}"
        sub.mkdir(exist_ok=True)
        tasks.append((point, model_doc, str(sub)))
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            summaries = list(pool.map(_sweep_point, tasks))
    else:
        summaries = [_sweep_point(t) for t in tasks]
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for v, s in zip(parsed, summaries):
            w.writerow([v, s["strategy"], s["steps"], s["updates"], s.get("final_accuracy", ""),
                        s.get("heldout_accuracy", ""), int(s["collapsed"]), repr(s["final_alpha"]),
                        repr(s["final_lambda"]), s["anomalies"]])
            print(f"{axis}={v}: acc {s.get('final_accuracy', float('nan')):.4f} "
                  f"heldout {s.get('heldout_accuracy', float('nan')):.4f} updates {s['updates']}")
    _manifest(out, cfg, "sweep", axis=axis, values=[str(v) for v in parsed])
    return 0


def cmd_check() -> int:
    results = checks.run_all()
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} properties hold")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="realm-tta",
        description="Online single-sample test-time adaptation experiments.",
        epilog="Any RunConfig key may be overridden with --key value.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("pretrain", "adapt", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value config file")
        if name in ("adapt", "sweep"):
            p.add_argument("--model", required=name == "adapt", help="model JSON from pretrain")
        if name == "sweep":
            p.add_argument("--axis", required=True)
            p.add_argument("--values", required=True, help="comma-separated values")
            p.add_argument("--jobs", type=int, default=1)
    sub.add_parser("check")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        if args.command == "check":
            if extra:
                raise ConfigError(f"check takes no options: {extra}")
            return cmd_check()
        cfg = _resolve(args, extra)
        if args.command == "pretrain":
            return cmd_pretrain(cfg)
        if args.command == "adapt":
            return cmd_adapt(cfg, args.model)
        return cmd_sweep(cfg, args.axis, args.values.split(","), args.model, args.jobs)
    except (ConfigError, data.DataFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
