"""Command-line driver: prepare, train, evaluate, recommend, reproduce.

Every command that writes an artifact also writes a ``*.manifest.json``
recording the command, its inputs, the seed and a sha256 of each output, so
that re-runs can be checked for bit-identical artifacts.  ``SEMIAE_LOG``
(debug/info/warning/error) controls log verbosity.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import dataset as ds_mod
from . import evaluation, trainer
from .dataset import PreparedData, binarize, load_raw_directory, read_prepared, split, write_prepared
from .evaluation import EvalReport, most_popular, num_users_with_test_items, recall_at_n, rmse
from .trainer import TrainConfig, TrainedModel, load_model, predict_ratings, recommend_top_n, save_model, write_training_log

log = logging.getLogger(__name__)

# Published benchmark numbers the reproduce command prints next to ours.
PUBLISHED_RMSE = {
    "ml-100k": {0.8: 0.896, 0.5: 0.926},
    "ml-1m": {0.8: 0.858, 0.5: 0.882},
}
PUBLISHED_RECALL = {  # ml-100k, by train fraction / method / N
    0.3: {"semi-autoencoder": {5: 9.487, 10: 14.836},
          "most-popular": {5: 7.036, 10: 11.297}},
    0.5: {"semi-autoencoder": {5: 9.543, 10: 15.909},
          "most-popular": {5: 7.535, 10: 13.185}},
}

TABLE1_FRACTIONS = (0.8, 0.5)
TABLE2_FRACTIONS = (0.3, 0.5)
RECALL_NS = (5, 10)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(primary_out: Path, command: str, args: dict,
                    outputs: list[Path], seed=None) -> None:
    doc = {
        "command": command,
        "args": {k: str(v) for k, v in args.items() if v is not None},
        "seed": seed,
        "output_dir": str(primary_out.parent.resolve()),
        "outputs": {str(p): _sha256(p) for p in outputs},
        "created_unix": time.time(),
    }
    with open(primary_out.with_suffix(primary_out.suffix + ".manifest.json"),
              "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)


def _load_config(config_path: str | None, task: str) -> TrainConfig:
    if config_path is None:
        return TrainConfig.defaults(task)
    with open(config_path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{config_path}: config must be a flat JSON object")
    return TrainConfig.from_dict(doc, task)


def _train_test(prepared: PreparedData, fraction: float | None, seed: int):
    """Split the prepared ratings, or use everything as training data."""
    if fraction is None or fraction >= 1.0:
        return prepared.ratings, None
    return split(prepared.ratings, fraction, seed)


def cmd_prepare(args) -> int:
    data = load_raw_directory(args.raw, args.format)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_prepared(out, data)
    ds = data.ratings
    print(f"M={ds.num_users} N={ds.num_items} |Omega|={len(ds)} "
          f"K_user={data.user_side.dim} K_item={data.item_side.dim}")
    _write_manifest(out, "prepare",
                    {"raw": args.raw, "format": args.format, "out": args.out},
                    [out])
    return 0


def _fit(prepared: PreparedData, cfg: TrainConfig, train_fraction: float | None
         ) -> tuple[TrainedModel, object]:
    train, _ = _train_test(prepared, train_fraction, cfg.seed)
    if cfg.task == "ranking":
        train = binarize(train, cfg.binarize_threshold, cfg.binarize_comparison)
        model = trainer.train_ranking(train, prepared.user_side, cfg)
    else:
        model = trainer.train_rating(train, prepared.item_side, cfg)
    return model, train


def cmd_train(args) -> int:
    prepared = read_prepared(args.data)
    cfg = _load_config(args.config, args.task)
    model, _ = _fit(prepared, cfg, args.train_fraction)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(out, model, {"train_fraction": args.train_fraction})
    log_path = Path(args.log) if args.log else out.with_suffix(".losses.csv")
    write_training_log(log_path, model.loss_history)
    print(f"trained {cfg.task} model: hidden={cfg.hidden_dim} "
          f"epochs={cfg.epochs} final_loss={model.loss_history[-1]:.6f}")
    _write_manifest(out, "train",
                    {"data": args.data, "task": args.task, "config": args.config,
                     "train_fraction": args.train_fraction, "out": args.out},
                    [out, log_path], seed=cfg.seed)
    return 0


def _evaluate_model(model: TrainedModel, prepared: PreparedData,
                    train_fraction: float, seed: int,
                    recall_ns: list[int] | None) -> EvalReport:
    train, test = split(prepared.ratings, train_fraction, seed)
    echo = {"train_fraction": train_fraction,
            "config": model.config.to_dict() if model.config else None}
    if model.task == "rating":
        preds = predict_ratings(model, train, prepared.item_side)
        return EvalReport(task="rating", rmse=rmse(preds, test),
                          num_evaluated_users=len(np.unique(test.users)),
                          config_echo=echo, seed=seed)
    cfg = model.config or TrainConfig.defaults("ranking")
    btrain = binarize(train, cfg.binarize_threshold, cfg.binarize_comparison)
    btest = binarize(test, cfg.binarize_threshold, cfg.binarize_comparison)
    ns = recall_ns or list(RECALL_NS)
    top = max(ns)

    def recommender(user: int) -> list[int]:
        return recommend_top_n(model, btrain, prepared.user_side, user, top)

    values = {n: recall_at_n(recommender, btest, n) for n in sorted(ns)}
    return EvalReport(task="ranking", recall=values,
                      num_evaluated_users=num_users_with_test_items(btest),
                      config_echo=echo, seed=seed)


def _warn_on_split_mismatch(model_path: str, model: TrainedModel,
                            train_fraction: float, seed: int) -> None:
    """Held-out scores are only honest when evaluate reuses the training
    split; flag diverging split parameters."""
    from .model import load_params

    _, echo = load_params(model_path)
    if "train_fraction" in echo:
        trained = echo["train_fraction"]
        if trained is None:
            log.warning("model was trained on the full dataset; every "
                        "held-out rating was part of its training input")
        elif float(trained) != train_fraction:
            log.warning("model was trained on a %s split but evaluating with "
                        "--train-fraction %s; the test half overlaps the "
                        "training data", trained, train_fraction)
    if model.config is not None and model.config.seed != seed:
        log.warning("model was trained with seed %d but evaluating with "
                    "--seed %d; the splits differ", model.config.seed, seed)


def cmd_evaluate(args) -> int:
    model = load_model(args.model)
    prepared = read_prepared(args.data)
    _warn_on_split_mismatch(args.model, model, args.train_fraction, args.seed)
    recall_ns = None
    if args.recall:
        recall_ns = _parse_ints(args.recall)
        if not recall_ns:
            raise ValueError("--recall needs at least one N value")
    if recall_ns and model.task == "rating":
        raise ValueError("--recall is a ranking metric; this model predicts "
                         "ratings (use it without --recall)")
    report = _evaluate_model(model, prepared, args.train_fraction, args.seed,
                             recall_ns)
    payload = json.dumps(report.to_dict(), sort_keys=True, indent=2)
    print(payload)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        report.save(out)
        _write_manifest(out, "evaluate",
                        {"model": args.model, "data": args.data,
                         "train_fraction": args.train_fraction,
                         "recall": args.recall, "out": args.out},
                        [out], seed=args.seed)
    return 0


def cmd_recommend(args) -> int:
    model = load_model(args.model)
    if model.task != "ranking":
        raise ValueError("recommend needs a ranking-task model")
    prepared = read_prepared(args.data)
    ds = prepared.ratings
    try:
        user_index = ds.user_ids.index(args.user)
    except ValueError:
        raise ValueError(f"user id {args.user} not in the dataset") from None
    cfg = model.config or TrainConfig.defaults("ranking")
    train, _ = _train_test(prepared, args.train_fraction,
                           args.seed if args.seed is not None else cfg.seed)
    btrain = binarize(train, cfg.binarize_threshold, cfg.binarize_comparison)
    items = recommend_top_n(model, btrain, prepared.user_side, user_index, args.n)
    for rank, item in enumerate(items, start=1):
        print(f"{rank}\t{ds.item_ids[item]}")
    return 0


def _aggregate(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, np.float64)
    return float(arr.mean()), float(arr.std(ddof=0))


class _TableWriter:
    """Accumulates benchmark rows and renders deterministic CSV bytes."""

    COLUMNS = ["dataset", "task", "train_fraction", "seed", "method",
               "metric", "value"]

    def __init__(self) -> None:
        self.rows: list[list] = []

    def add(self, dataset: str, task: str, fraction: float, seed,
            method: str, metric: str, value: float) -> None:
        self.rows.append([dataset, task, repr(fraction), str(seed), method,
                          metric, repr(float(value))])

    def render(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.COLUMNS)
        writer.writerows(self.rows)
        return buf.getvalue()


def _reproduce_rating(prepared: PreparedData, dataset_name: str,
                      seeds: list[int], config_path: str | None,
                      table: _TableWriter, summary: list[str]) -> None:
    for fraction in TABLE1_FRACTIONS:
        per_seed = []
        for seed in seeds:
            cfg = _load_config(config_path, "rating")
            cfg = TrainConfig.from_dict({**cfg.to_dict(), "seed": seed})
            model, train = _fit(prepared, cfg, fraction)
            _, test = split(prepared.ratings, fraction, seed)
            value = rmse(predict_ratings(model, train, prepared.item_side), test)
            table.add(dataset_name, "rating", fraction, seed,
                      "semi-autoencoder", "rmse", value)
            per_seed.append(value)
            log.info("rating %s fraction=%s seed=%d rmse=%.4f",
                     dataset_name, fraction, seed, value)
        mean, std = _aggregate(per_seed)
        table.add(dataset_name, "rating", fraction, "mean",
                  "semi-autoencoder", "rmse", mean)
        table.add(dataset_name, "rating", fraction, "std",
                  "semi-autoencoder", "rmse", std)
        published = PUBLISHED_RMSE.get(dataset_name, {}).get(fraction)
        ref = f" (published {published})" if published is not None else ""
        summary.append(f"{dataset_name} rating {int(fraction * 100)}% train: "
                       f"RMSE {mean:.4f} +- {std:.4f}{ref}")


def _reproduce_ranking(prepared: PreparedData, dataset_name: str,
                       seeds: list[int], config_path: str | None,
                       table: _TableWriter, summary: list[str]) -> None:
    for fraction in TABLE2_FRACTIONS:
        per_seed: dict[tuple[str, int], list[float]] = {}
        for seed in seeds:
            cfg = _load_config(config_path, "ranking")
            cfg = TrainConfig.from_dict({**cfg.to_dict(), "seed": seed})
            model, btrain = _fit(prepared, cfg, fraction)
            _, test = split(prepared.ratings, fraction, seed)
            btest = binarize(test, cfg.binarize_threshold,
                             cfg.binarize_comparison)
            top = max(RECALL_NS)

            def ours(user: int) -> list[int]:
                return recommend_top_n(model, btrain, prepared.user_side,
                                       user, top)

            def baseline(user: int) -> list[int]:
                return most_popular(btrain, user, top)

            for method, rec in (("semi-autoencoder", ours),
                                ("most-popular", baseline)):
                for n in RECALL_NS:
                    value = recall_at_n(rec, btest, n)
                    table.add(dataset_name, "ranking", fraction, seed,
                              method, f"recall@{n}", value)
                    per_seed.setdefault((method, n), []).append(value)
            log.info("ranking %s fraction=%s seed=%d done",
                     dataset_name, fraction, seed)
        for (method, n), values in sorted(per_seed.items()):
            mean, std = _aggregate(values)
            table.add(dataset_name, "ranking", fraction, "mean", method,
                      f"recall@{n}", mean)
            table.add(dataset_name, "ranking", fraction, "std", method,
                      f"recall@{n}", std)
            published = PUBLISHED_RECALL.get(fraction, {}).get(method, {}).get(n)
            ref = f" (published {published})" if published is not None else ""
            summary.append(f"{dataset_name} ranking {int(fraction * 100)}% "
                           f"train, {method} Recall@{n}: {mean:.3f} +- "
                           f"{std:.3f}{ref}")


def cmd_reproduce(args) -> int:
    seeds = _parse_ints(args.seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    prepared = load_raw_directory(args.raw, args.format)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    table = _TableWriter()
    summary: list[str] = []
    if args.table == 1:
        _reproduce_rating(prepared, args.format, seeds, args.config,
                          table, summary)
    else:
        _reproduce_ranking(prepared, args.format, seeds, args.config,
                           table, summary)

    csv_path = out_dir / f"table{args.table}.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(table.render())
    summary_path = out_dir / f"table{args.table}_summary.txt"
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(summary) + "\n")
    print("\n".join(summary))
    print(f"wrote {csv_path}")
    _write_manifest(csv_path, "reproduce",
                    {"table": args.table, "raw": args.raw,
                     "format": args.format, "seeds": args.seeds,
                     "config": args.config, "out_dir": args.out_dir},
                    [csv_path, summary_path])
    return 0


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"expected a comma-separated integer list, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semiae",
        description="Semi-autoencoder collaborative filtering benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="parse a raw MovieLens directory")
    p.add_argument("--raw", required=True, help="raw dataset directory")
    p.add_argument("--format", choices=ds_mod.FORMATS, default="ml-100k")
    p.add_argument("--out", required=True, help="prepared-dataset JSON path")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train a model on prepared data")
    p.add_argument("--data", required=True, help="prepared-dataset JSON")
    p.add_argument("--task", choices=trainer.TASKS, required=True)
    p.add_argument("--config", help="flat JSON config (strict keys)")
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--log", help="training-log CSV path "
                                 "(default: <out>.losses.csv)")
    p.add_argument("--train-fraction", type=float,
                   help="train on a seeded split instead of all ratings")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a model on a held-out split")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--train-fraction", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--recall", help="comma-separated N values, e.g. 5,10")
    p.add_argument("--out", help="write the report JSON here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("recommend", help="top-n items for one user")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--user", type=int, required=True, help="raw user id")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--train-fraction", type=float,
                   help="restrict the input interactions to a seeded split")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("reproduce", help="rerun the benchmark tables")
    p.add_argument("--table", type=int, choices=(1, 2), required=True)
    p.add_argument("--raw", required=True, help="raw dataset directory")
    p.add_argument("--format", choices=ds_mod.FORMATS, default="ml-100k")
    p.add_argument("--seeds", default="1,2,3,4,5")
    p.add_argument("--config", help="config overrides applied to the defaults")
    p.add_argument("--out-dir", default="reproduction")
    p.set_defaults(func=cmd_reproduce)
    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("SEMIAE_LOG", "warning").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
