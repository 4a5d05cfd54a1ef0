"""Command-line pipeline: ``rboqe generate | train | predict | analyze``.

Artifacts are plain files in ``--out``; each stage reads what the previous one
wrote. Every artifact carries the config hash and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from ._io import atomic_write_text, config_hash, dumps
from .analysis import overlay_rows, rows_to_csv
from .dataset import RbDataset, attach_prediction, split_dataset
from .learn.bfgs import NonFiniteObjectiveError
from .learn.estimator import DEFAULT_DEPTH_SCHEDULE, train
from .nonmarkov import DEFAULT_BUFFER, measure_report
from .oqe import OqeModel
from .simulator import Decoherence, TwoQubitModel, generate_dataset

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
K_MIN, K_MAX = 2, 200
WORKERS_ENV = "RBOQE_WORKERS"
TRAIN_FILE = "train_val.jsonl"
PRED_FILE = "pred.jsonl"


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass
class ExperimentConfig:
    J: float = 11.3
    delta_h: float = 50.0
    segment_time: float = 100.0
    gate_time_unit: float = 20.0
    fixed_duration: bool = True
    decoherence: dict | None = None
    train_k: list = field(default_factory=lambda: [2, 40])
    pred_k: list = field(default_factory=lambda: [2, 60])
    n: int = 200
    shots: int | None = None
    train_fraction: float = 0.6
    chi_max: int = 6
    restarts: int = 5
    max_iters: int = 200
    depth_schedule: list | None = field(default_factory=lambda: list(DEFAULT_DEPTH_SCHEDULE))
    seed: int = 0
    analyze_k: int = 40
    buffer: int = DEFAULT_BUFFER
    dense_k: int = 0
    construction: str = "modified_trace"
    out: str = "run"

    def validate(self) -> None:
        for name in ("train_k", "pred_k"):
            lo_hi = getattr(self, name)
            if not (isinstance(lo_hi, list) and len(lo_hi) == 2 and all(isinstance(v, int) for v in lo_hi)):
                raise UsageError(f"config field {name!r}: expected [k_min, k_max] integers, got {lo_hi!r}")
            if not K_MIN <= lo_hi[0] <= lo_hi[1] <= K_MAX:
                raise UsageError(f"config field {name!r}: range must lie within [{K_MIN}, {K_MAX}], got {lo_hi}")
        positive = {"n": self.n, "chi_max": self.chi_max, "restarts": self.restarts, "max_iters": self.max_iters}
        for name, value in positive.items():
            if not isinstance(value, int) or value < 1:
                raise UsageError(f"config field {name!r}: must be a positive integer, got {value!r}")
        if self.shots is not None and (not isinstance(self.shots, int) or self.shots < 1):
            raise UsageError(f"config field 'shots': must be null or a positive integer, got {self.shots!r}")
        if not 0 < self.train_fraction < 1:
            raise UsageError(f"config field 'train_fraction': must be in (0, 1), got {self.train_fraction}")
        if self.buffer < 0 or self.dense_k < 0 or self.dense_k > 4 or self.analyze_k < 1:
            raise UsageError("config fields 'buffer', 'dense_k', 'analyze_k': need buffer >= 0, 0 <= dense_k <= 4, analyze_k >= 1")
        if self.construction not in ("modified_trace", "main_text"):
            raise UsageError(f"config field 'construction': unknown value {self.construction!r}")
        try:
            self.truth()
        except (TypeError, ValueError) as exc:
            raise UsageError(f"config model parameters: {exc}") from None

    def truth(self) -> TwoQubitModel:
        deco = Decoherence(**self.decoherence) if self.decoherence else None
        return TwoQubitModel.from_detuning(
            self.J,
            self.delta_h,
            segment_time=self.segment_time,
            gate_time_unit=self.gate_time_unit,
            fixed_duration=self.fixed_duration,
            decoherence=deco,
        )

    def hashed(self) -> dict:
        # the output location does not change results
        d = asdict(self)
        d.pop("out")
        return d

    @property
    def hash(self) -> str:
        return config_hash(self.hashed())

    def stamp(self) -> dict:
        return {"config_hash": self.hash, "seed": self.seed}


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise UsageError(f"{path}: top level must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise UsageError(f"{path}: unknown config field(s) {unknown}")
    return ExperimentConfig(**data)


FLAG_FIELDS = {
    "seed": "seed",
    "out": "out",
    "chi_max": "chi_max",
    "restarts": "restarts",
    "max_iters": "max_iters",
    "buffer": "buffer",
    "dense_k": "dense_k",
    "fixed_duration": "fixed_duration",
    "shots": "shots",
}


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    for flag, name in FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, name, value)
    cfg.validate()
    return cfg


def _workers() -> int | None:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None or raw == "":
        return None
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"{WORKERS_ENV} must be >= 1, got {n}")
    return n


def _load_dataset(path) -> RbDataset:
    try:
        return RbDataset.load(path)
    except OSError as exc:
        raise DataError(f"cannot read dataset {path}: {exc.strerror}") from None
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def _load_model(path) -> tuple[OqeModel, dict]:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise DataError(f"cannot read model {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    try:
        return OqeModel.from_dict(data["model"]), data
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: invalid model ({exc})") from None


def _csv_with_stamp(cfg: ExperimentConfig, body: str) -> str:
    return f"# config_hash={cfg.hash} seed={cfg.seed}\n" + body


def cmd_generate(cfg: ExperimentConfig, out: Path) -> int:
    truth = cfg.truth()
    lo, hi = cfg.train_k
    ds = generate_dataset(truth, range(lo, hi + 1), cfg.n, shots=cfg.shots, seed=[cfg.seed, 0])
    ds = split_dataset(ds, cfg.train_fraction, seed=[cfg.seed, 2])
    lo, hi = cfg.pred_k
    pred = generate_dataset(truth, range(lo, hi + 1), cfg.n, shots=cfg.shots, seed=[cfg.seed, 1])
    pred = RbDataset(pred.k, pred.sequences, pred.f, ["pred"] * len(pred), pred.metadata)
    for d in (ds, pred):
        d.metadata.update(cfg.stamp())
    ds.save(out / TRAIN_FILE)
    pred.save(out / PRED_FILE)
    atomic_write_text(out / "config.json", dumps(dict(cfg.hashed(), **cfg.stamp())))
    print(f"wrote {len(ds)} train/val records to {out / TRAIN_FILE}")
    print(f"wrote {len(pred)} prediction records to {out / PRED_FILE}")
    return EXIT_OK


def cmd_train(cfg: ExperimentConfig, out: Path, data: str | None, pred: str | None) -> int:
    ds = _load_dataset(data or out / TRAIN_FILE)
    if not len(ds.indices("train")):
        raise DataError("dataset has no train split")
    pred_path = Path(pred) if pred else out / PRED_FILE
    if pred or pred_path.exists():
        ds = attach_prediction(ds, _load_dataset(pred_path))
    workers = _workers()
    rows = []
    for chi in range(1, cfg.chi_max + 1):
        rep = train(
            ds,
            chi,
            restarts=cfg.restarts,
            seed=cfg.seed,
            max_iter=cfg.max_iters,
            n_jobs=workers,
            depth_schedule=cfg.depth_schedule,
        )
        stamp = cfg.stamp()
        atomic_write_text(out / f"model_chi{chi}.json", dumps({**stamp, "chi": chi, "model": rep.model.to_dict()}))
        atomic_write_text(out / f"report_chi{chi}.json", dumps({**stamp, **rep.to_dict()}))
        curve = [{"restart": r, "iteration": i, "loss": v} for r, c in enumerate(rep.loss_curves) for i, v in enumerate(c)]
        atomic_write_text(out / f"loss_curve_chi{chi}.csv", _csv_with_stamp(cfg, rows_to_csv(curve, ["restart", "iteration", "loss"])))
        rows.append({"chi": chi, "train_loss": rep.train_loss, "val_loss": rep.val_loss, "pred_loss": rep.pred_loss})
        print(f"chi={chi} train={rep.train_loss:.3e} val={rep.val_loss} pred={rep.pred_loss}")
    atomic_write_text(out / "summary.csv", _csv_with_stamp(cfg, rows_to_csv(rows, ["chi", "train_loss", "val_loss", "pred_loss"])))
    return EXIT_OK


def cmd_predict(cfg: ExperimentConfig, out: Path, model_path: str, data: str | None, split: str | None) -> int:
    model, meta = _load_model(model_path)
    if "chi" in meta and int(meta["chi"]) != model.chi:
        raise DataError(f"{model_path}: header chi={meta['chi']} but unitary implies chi={model.chi}")
    ds = _load_dataset(data or out / PRED_FILE)
    try:
        ds.indices(split)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = overlay_rows(ds, model, split)
    if not rows:
        print("warning: dataset selection is empty; writing an empty table", file=sys.stderr)
    else:
        X, y = ds.xy(split)
        pred = model.predict_many(X)
        print(f"loss={float(((pred - y) ** 2).mean()):.6e} records={len(y)}")
    name = f"predict_{Path(model_path).stem}_{split or 'all'}.csv"
    atomic_write_text(out / name, _csv_with_stamp(cfg, rows_to_csv(rows, ["k", "F_k", "F_tilde_k", "stderr"])))
    print(f"wrote {out / name}")
    return EXIT_OK


def _parse_pairs(text: str | None):
    if not text:
        return None
    pairs = []
    for item in text.split(","):
        try:
            x, y = (int(v) for v in item.split(":"))
        except ValueError:
            raise UsageError(f"--pairs: expected x:y items, got {item!r}") from None
        pairs.append((x, y))
    return pairs


def cmd_analyze(cfg: ExperimentConfig, out: Path, model_path: str, k: int | None, pairs) -> int:
    model, _ = _load_model(model_path)
    k = k or cfg.analyze_k
    if pairs and any(not 1 <= y < x for x, y in pairs):
        raise UsageError("--pairs: need 1 <= y < x for every pair")
    stem = Path(model_path).stem
    rep = measure_report(
        model, k=k, pairs=pairs, buffer=cfg.buffer, dense_k=cfg.dense_k, construction=cfg.construction, model_id=stem
    )
    atomic_write_text(out / f"measures_{stem}.json", dumps({**cfg.stamp(), **rep.to_dict()}))
    atomic_write_text(out / f"measures_{stem}.csv", _csv_with_stamp(cfg, rep.measures_csv()))
    atomic_write_text(out / f"mutual_information_{stem}.csv", _csv_with_stamp(cfg, rep.mutual_information_csv()))
    print(f"M_{k}={rep.memory_complexity[-1]:.6f} N_{k}={rep.osee[-1]:.6f}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config JSON")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="artifact directory")
    common.add_argument("--chi-max", dest="chi_max", type=int)
    common.add_argument("--restarts", type=int)
    common.add_argument("--max-iters", dest="max_iters", type=int)
    common.add_argument("--buffer", type=int)
    common.add_argument("--dense-k", dest="dense_k", type=int)
    common.add_argument("--fixed-duration", dest="fixed_duration", type=_bool, metavar="BOOL")
    common.add_argument("--shots", type=int)

    parser = _Parser(prog="rboqe", description="Learn OQE models from RB data and measure their memory.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("generate", parents=[common], help="simulate train/val and prediction datasets")
    p = sub.add_parser("train", parents=[common], help="fit models for chi = 1..chi_max")
    p.add_argument("--data", help="train/val dataset (default: OUT/train_val.jsonl)")
    p.add_argument("--pred", help="prediction dataset (default: OUT/pred.jsonl if present)")
    p = sub.add_parser("predict", parents=[common], help="overlay model predictions on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", help="dataset (default: OUT/pred.jsonl)")
    p.add_argument("--split", choices=["train", "val", "pred"])
    p = sub.add_parser("analyze", parents=[common], help="memory and non-Markovianity measures")
    p.add_argument("--model", required=True)
    p.add_argument("--k", type=int, help="largest j (default: config analyze_k)")
    p.add_argument("--pairs", help="comma-separated x:y slot pairs (default: (j, j-1) for all j)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = Path(cfg.out)
        if args.command == "generate":
            return cmd_generate(cfg, out)
        if args.command == "train":
            return cmd_train(cfg, out, args.data, args.pred)
        if args.command == "predict":
            return cmd_predict(cfg, out, args.model, args.data, args.split)
        return cmd_analyze(cfg, out, args.model, args.k, _parse_pairs(args.pairs))
    except UsageError as exc:
        print(f"rboqe: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"rboqe: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NonFiniteObjectiveError, FloatingPointError, OverflowError) as exc:
        print(f"rboqe: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"rboqe: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
