"""Experiment orchestration: train, attack, defend, score, report.

A run sweeps target-feature fractions x independent trials. Every cell
derives its own child seed from the master seed, so runs are reproducible
record-for-record and cells can execute in parallel in any order.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from decimal import ROUND_FLOOR, Decimal

import numpy as np

from . import data as data_mod
from .attacks import (
    GrnConfig,
    SurrogateConfig,
    baseline_gaussian_batch,
    baseline_uniform_batch,
    constraint_matches,
    default_num_dummy,
    distill_rf,
    esa_batch,
    grn_infer_batch,
    grn_train,
    path_constraints,
    pra_candidates,
    pra_infer,
)
from .errors import AttackInfeasibleError, ConfigError, InputError
from .linalg import Rng, derive_seed
from .metrics import cbr as cbr_metric
from .metrics import mse_per_feature, mse_upper_bound
from .models import (
    DecisionTree,
    ForestConfig,
    LogRegConfig,
    MlpConfig,
    RandomForest,
    TreeConfig,
    predict_confidence_batch,
    train_forest,
    train_logreg,
    train_mlp,
    train_tree,
)
from .partition import sample_partition

MODEL_KINDS = ("logreg", "mlp", "tree", "forest")
ATTACK_KINDS = ("esa", "pra", "grna")
DEFAULT_FRACS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)

REPORT_FIELDS = (
    "dataset",
    "model",
    "attack",
    "defense",
    "d_target_frac",
    "trial",
    "seed",
    "n_pred",
    "mse",
    "cbr",
    "upper_bound",
)


@dataclass
class DefenseConfig:
    rounding_digits: int = None
    dropout: float = None

    def label(self) -> str:
        parts = []
        if self.rounding_digits is not None:
            parts.append(f"round{self.rounding_digits}")
        if self.dropout is not None:
            parts.append(f"dropout{self.dropout:g}")
        return "+".join(parts) if parts else "none"


@dataclass
class ExperimentConfig:
    dataset: dict
    model: dict
    attack: dict
    defense: DefenseConfig = field(default_factory=DefenseConfig)
    target_fracs: list = field(default_factory=lambda: list(DEFAULT_FRACS))
    trials: int = 10
    train_frac: float = 0.5
    pred_frac: float = 0.3
    seed: int = 0
    retrain_per_trial: bool = True


@dataclass
class ReportRecord:
    dataset: str
    model: str
    attack: str
    defense: str
    d_target_frac: float
    trial: int
    seed: int
    n_pred: int
    mse: float = None
    cbr: float = None
    upper_bound: float = None
    runtime_ms: float = None  # excluded from reports by default: wall time is not reproducible


def config_from_dict(obj: dict) -> ExperimentConfig:
    """Build and validate a config, reporting every problem at once."""
    problems = []
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    for key in obj:
        if key not in known:
            problems.append(f"unknown config key {key!r}")
    dataset = obj.get("dataset")
    if not isinstance(dataset, dict) or dataset.get("kind") not in ("synth", "csv"):
        problems.append("dataset.kind must be 'synth' or 'csv'")
        dataset = {"kind": "synth"}
    elif dataset["kind"] == "synth":
        for key in ("n", "d", "c"):
            if not isinstance(dataset.get(key), int) or dataset[key] < 2:
                problems.append(f"dataset.{key} must be an integer >= 2")
    elif not dataset.get("path"):
        problems.append("dataset.path is required for csv datasets")
    model = obj.get("model")
    if not isinstance(model, dict) or model.get("kind") not in MODEL_KINDS:
        problems.append(f"model.kind must be one of {MODEL_KINDS}")
        model = {"kind": "logreg"}
    attack = obj.get("attack")
    if not isinstance(attack, dict) or attack.get("kind") not in ATTACK_KINDS:
        problems.append(f"attack.kind must be one of {ATTACK_KINDS}")
        attack = {"kind": "esa"}
    else:
        kind = attack["kind"]
        if kind == "esa" and model["kind"] != "logreg":
            problems.append("esa requires model.kind == 'logreg'")
        if kind == "pra" and model["kind"] != "tree":
            problems.append("pra requires model.kind == 'tree'")
        if kind == "grna" and model["kind"] == "tree":
            problems.append("grna supports logreg, mlp, and forest models")
    defense_obj = obj.get("defense") or {}
    if isinstance(defense_obj, DefenseConfig):
        defense = defense_obj
    else:
        defense = DefenseConfig(
            rounding_digits=defense_obj.get("rounding_digits"),
            dropout=defense_obj.get("dropout"),
        )
    if defense.rounding_digits is not None and defense.rounding_digits < 1:
        problems.append("defense.rounding_digits must be >= 1")
    if defense.dropout is not None:
        if not (0.0 <= defense.dropout < 1.0):
            problems.append("defense.dropout must lie in [0, 1)")
        if model.get("kind") != "mlp":
            problems.append("the dropout defense applies to mlp models only")
    fracs = obj.get("target_fracs", list(DEFAULT_FRACS))
    if not fracs or any(not (0.0 < f < 1.0) for f in fracs):
        problems.append("target_fracs must be nonempty fractions in (0, 1)")
    trials = obj.get("trials", 10)
    if not isinstance(trials, int) or trials < 1:
        problems.append("trials must be a positive integer")
    train_frac = obj.get("train_frac", 0.5)
    pred_frac = obj.get("pred_frac", 0.3)
    if train_frac <= 0 or pred_frac <= 0 or train_frac + pred_frac > 1.0:
        problems.append("train_frac and pred_frac must be positive and sum <= 1")
    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(
        dataset=dataset,
        model=model,
        attack=attack,
        defense=defense,
        target_fracs=[float(f) for f in fracs],
        trials=trials,
        train_frac=float(train_frac),
        pred_frac=float(pred_frac),
        seed=int(obj.get("seed", 0)),
        retrain_per_trial=bool(obj.get("retrain_per_trial", True)),
    )


def load_config(path) -> ExperimentConfig:
    with open(str(path)) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"config is not valid JSON: {exc}"]) from exc
    return config_from_dict(obj)


def apply_rounding(v: np.ndarray, b: int) -> np.ndarray:
    """Truncate each confidence to b decimal digits (floor, never nearest).

    Truncation happens on the shortest decimal representation of each
    float, matching what an adversary reading printed scores would see.
    """
    if b < 1:
        raise InputError("rounding needs at least one digit")
    v = np.asarray(v, dtype=np.float64)
    quantum = Decimal(1).scaleb(-b)
    flat = [
        float(Decimal(repr(float(x))).quantize(quantum, rounding=ROUND_FLOOR))
        for x in v.ravel()
    ]
    return np.asarray(flat, dtype=np.float64).reshape(v.shape)


def dataset_name(dataset_cfg: dict) -> str:
    if dataset_cfg["kind"] == "synth":
        return "synth"
    return str(dataset_cfg["path"]).rsplit("/", 1)[-1].rsplit(".", 1)[0]


def build_dataset(cfg: ExperimentConfig) -> data_mod.Dataset:
    """Materialize and min-max normalize the experiment dataset."""
    spec = cfg.dataset
    if spec["kind"] == "synth":
        ds = data_mod.synth_generate(
            data_mod.SynthConfig(
                n=spec["n"],
                d=spec["d"],
                c=spec["c"],
                class_sep=spec.get("class_sep", 1.0),
                mix_strength=spec.get("mix_strength", 0.0),
                seed=derive_seed(cfg.seed, "dataset"),
            )
        )
    else:
        ds = data_mod.load_csv(
            spec["path"],
            label_column=spec.get("label_column", "label"),
            delimiter=spec.get("delimiter", ","),
        )
    normalized, _ = data_mod.minmax_normalize(ds)
    return normalized


def _train_model(model_cfg: dict, ds: data_mod.Dataset, seed: int, defense: DefenseConfig):
    kind = model_cfg["kind"]
    if kind == "logreg":
        return train_logreg(
            ds,
            LogRegConfig(
                lr=model_cfg.get("lr", 0.1),
                epochs=model_cfg.get("epochs", 100),
                batch=model_cfg.get("batch", 32),
                seed=seed,
            ),
        )
    if kind == "mlp":
        hidden = model_cfg.get("hidden", [600, 300, 100])
        dropout = defense.dropout if defense.dropout is not None else model_cfg.get("dropout", 0.0)
        return train_mlp(
            ds.features,
            ds.labels,
            MlpConfig(
                sizes=[ds.d, *hidden, ds.num_classes],
                head="softmax",
                dropout=dropout,
                layer_norm=model_cfg.get("layer_norm", False),
                lr=model_cfg.get("lr", 0.01),
                epochs=model_cfg.get("epochs", 50),
                batch=model_cfg.get("batch", 32),
                seed=seed,
            ),
        )
    if kind == "tree":
        return train_tree(
            ds,
            cfg=TreeConfig(
                max_depth=model_cfg.get("max_depth", 5),
                min_leaf=model_cfg.get("min_leaf", 1),
                seed=seed,
            ),
        )
    if kind == "forest":
        return train_forest(
            ds,
            ForestConfig(
                num_trees=model_cfg.get("num_trees", 100),
                max_depth=model_cfg.get("max_depth", 3),
                feature_subsample=model_cfg.get("feature_subsample"),
                bootstrap=model_cfg.get("bootstrap", True),
                seed=seed,
            ),
        )
    raise ConfigError([f"unknown model kind {kind!r}"])


def _grn_config(attack_cfg: dict, seed: int) -> GrnConfig:
    return GrnConfig(
        hidden=tuple(attack_cfg.get("hidden", (600, 200, 100))),
        epochs=attack_cfg.get("epochs", 100),
        batch=attack_cfg.get("batch", 64),
        lr=attack_cfg.get("lr", 0.01),
        momentum=attack_cfg.get("momentum", 0.9),
        lambda_var=attack_cfg.get("lambda_var", 1.0),
        tau=attack_cfg.get("tau", 0.25),
        squash=attack_cfg.get("squash", True),
        layer_norm=attack_cfg.get("layer_norm", True),
        input_mode=attack_cfg.get("input_mode", "full"),
        init_scale=attack_cfg.get("init_scale", 0.1),
        seed=seed,
    )


def run_cell(cfg: ExperimentConfig, ds: data_mod.Dataset, fi: int, trial: int):
    """All records of one (fraction, trial) cell."""
    frac = cfg.target_fracs[fi]
    cell_seed = derive_seed(cfg.seed, f"cell/{fi}/{trial}")
    rng = Rng(cell_seed)
    if cfg.retrain_per_trial:
        split_seed = derive_seed(cell_seed, "split")
        model_seed = derive_seed(cell_seed, "model")
    else:
        split_seed = derive_seed(cfg.seed, "frozen/split")
        model_seed = derive_seed(cfg.seed, "frozen/model")
    train_ds, _, pred_ds = data_mod.split(
        ds, (cfg.train_frac, 0.0, cfg.pred_frac), split_seed
    )
    part = sample_partition(ds.d, frac, rng.fork("partition"))
    model = _train_model(cfg.model, train_ds, model_seed, cfg.defense)
    confidences = predict_confidence_batch(model, pred_ds.features)
    if cfg.defense.rounding_digits is not None:
        confidences = apply_rounding(confidences, cfg.defense.rounding_digits)
    x_adv_rows, truth_target = part.split(pred_ds.features)

    base = dict(
        dataset=dataset_name(cfg.dataset),
        model=cfg.model["kind"],
        defense=cfg.defense.label(),
        d_target_frac=frac,
        trial=trial,
        seed=cell_seed,
        n_pred=pred_ds.n,
    )
    kind = cfg.attack["kind"]
    records = []
    if kind == "esa":
        start = time.perf_counter()
        inferred = esa_batch(
            model, part, x_adv_rows, confidences, cfg.attack.get("rel_cutoff", 1e-12)
        )
        elapsed = (time.perf_counter() - start) * 1000.0
        records.append(
            ReportRecord(
                **base,
                attack="esa",
                mse=mse_per_feature(inferred, truth_target).mse,
                upper_bound=mse_upper_bound(truth_target),
                runtime_ms=elapsed,
            )
        )
        records.extend(_baseline_records(base, truth_target, None, part, rng))
    elif kind == "pra":
        start = time.perf_counter()
        matched = total = 0
        infeasible = 0  # counted, never fatal
        for i in range(pred_ds.n):
            observed = int(np.argmax(confidences[i]))
            result = pra_candidates(model, part, x_adv_rows[i], observed)
            try:
                result = pra_infer(result, rng.fork(f"pra/{i}"))
            except AttackInfeasibleError:
                infeasible += 1
                continue
            m, t = constraint_matches(result.branch_constraints, pred_ds.features[i])
            matched += m
            total += t
        elapsed = (time.perf_counter() - start) * 1000.0
        records.append(
            ReportRecord(
                **base,
                attack="pra",
                cbr=(matched / total) if total else None,
                runtime_ms=elapsed,
            )
        )
        records.append(_random_path_record(base, model, part, pred_ds, rng))
    else:  # grna
        start = time.perf_counter()
        attack_model = model
        if isinstance(model, RandomForest):
            surrogate_cfg = cfg.attack.get("surrogate", {})
            attack_model, _ = distill_rf(
                model,
                ds.d,
                SurrogateConfig(
                    num_dummy=surrogate_cfg.get("num_dummy", default_num_dummy(pred_ds.n)),
                    hidden=tuple(surrogate_cfg.get("hidden", (2000, 200))),
                    epochs=surrogate_cfg.get("epochs", 20),
                    batch=surrogate_cfg.get("batch", 64),
                    lr=surrogate_cfg.get("lr", 0.05),
                    seed=derive_seed(cell_seed, "surrogate"),
                ),
                rng.fork("dummy"),
            )
        generator, _ = grn_train(
            attack_model,
            part,
            x_adv_rows,
            confidences,
            _grn_config(cfg.attack, derive_seed(cell_seed, "grn")),
        )
        inferred = grn_infer_batch(
            generator, part, x_adv_rows, rng.fork("infer"),
            cfg.attack.get("input_mode", "full"),
        )
        elapsed = (time.perf_counter() - start) * 1000.0
        trees = model if isinstance(model, (RandomForest, DecisionTree)) else None
        records.append(
            ReportRecord(
                **base,
                attack="grna",
                mse=mse_per_feature(inferred, truth_target).mse,
                cbr=cbr_metric(trees, part, inferred, pred_ds.features) if trees else None,
                upper_bound=mse_upper_bound(truth_target),
                runtime_ms=elapsed,
            )
        )
        records.extend(_baseline_records(base, truth_target, trees, part, rng, pred_ds))
    return records


def _baseline_records(base, truth_target, trees, part, rng, pred_ds=None):
    out = []
    n, d_target = truth_target.shape
    for name, draw in (
        ("uniform", baseline_uniform_batch),
        ("gaussian", baseline_gaussian_batch),
    ):
        start = time.perf_counter()
        guess = draw(n, d_target, rng.fork(f"baseline/{name}"))
        score = mse_per_feature(guess, truth_target)
        out.append(
            ReportRecord(
                **base,
                attack=name,
                mse=score.mse,
                cbr=(
                    cbr_metric(trees, part, guess, pred_ds.features)
                    if trees is not None
                    else None
                ),
                upper_bound=mse_upper_bound(truth_target),
                runtime_ms=(time.perf_counter() - start) * 1000.0,
            )
        )
    return out


def _random_path_record(base, tree, part, pred_ds, rng):
    """PRA baseline: pick among all root-to-leaf paths, ignoring evidence."""
    start = time.perf_counter()
    paths = tree.leaf_paths()
    matched = total = 0
    for i in range(pred_ds.n):
        pick = int(rng.fork(f"rand-path/{i}").integers(0, len(paths)))
        constraints = path_constraints(tree, part, paths[pick])
        m, t = constraint_matches(constraints, pred_ds.features[i])
        matched += m
        total += t
    return ReportRecord(
        **base,
        attack="random_path",
        cbr=(matched / total) if total else None,
        runtime_ms=(time.perf_counter() - start) * 1000.0,
    )


def _cell_worker(cfg_json: str, fi: int, trial: int):
    cfg = config_from_dict(json.loads(cfg_json))
    ds = build_dataset(cfg)
    return run_cell(cfg, ds, fi, trial)


def run_experiment(cfg: ExperimentConfig, parallel: int = 1):
    """Execute the full fraction x trial grid, ordered by (fraction, trial)."""
    cells = [(fi, t) for fi in range(len(cfg.target_fracs)) for t in range(cfg.trials)]
    if parallel > 1:
        cfg_json = json.dumps(_config_to_jsonable(cfg))
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            chunks = list(pool.map(_cell_worker, *zip(*[(cfg_json, fi, t) for fi, t in cells])))
    else:
        ds = build_dataset(cfg)
        chunks = [run_cell(cfg, ds, fi, t) for fi, t in cells]
    records = [rec for chunk in chunks for rec in chunk]
    return records


def _config_to_jsonable(cfg: ExperimentConfig) -> dict:
    obj = asdict(cfg)
    obj["defense"] = {
        "rounding_digits": cfg.defense.rounding_digits,
        "dropout": cfg.defense.dropout,
    }
    return obj


def record_to_dict(record: ReportRecord, include_runtime: bool = False) -> dict:
    out = {name: getattr(record, name) for name in REPORT_FIELDS}
    if include_runtime:
        out["runtime_ms"] = record.runtime_ms
    return out


def emit_report(records, path, fmt: str = "jsonl", include_runtime: bool = False) -> None:
    """Write one line per record; jsonl and csv carry identical fields."""
    if not records:
        raise InputError("no records to write")
    fields = list(REPORT_FIELDS) + (["runtime_ms"] if include_runtime else [])
    with open(str(path), "w", newline="") as fh:
        if fmt == "jsonl":
            for rec in records:
                fh.write(json.dumps(record_to_dict(rec, include_runtime)) + "\n")
        elif fmt == "csv":
            fh.write(",".join(fields) + "\n")
            for rec in records:
                row = record_to_dict(rec, include_runtime)
                fh.write(",".join("" if row[f] is None else repr(row[f]) if isinstance(row[f], float) else str(row[f]) for f in fields) + "\n")
        else:
            raise InputError(f"unknown report format {fmt!r}")


def parse_report(path):
    """Read a report back into a list of dicts (jsonl or csv by content)."""
    rows = []
    with open(str(path)) as fh:
        first = fh.readline()
        fh.seek(0)
        if first.lstrip().startswith("{"):
            for line in fh:
                if line.strip():
                    rows.append(json.loads(line))
        else:
            import csv as csv_mod

            for row in csv_mod.DictReader(fh):
                parsed = {}
                for key, value in row.items():
                    if value == "" or value is None:
                        parsed[key] = None
                    elif key in ("trial", "seed", "n_pred"):
                        parsed[key] = int(value)
                    elif key in ("d_target_frac", "mse", "cbr", "upper_bound", "runtime_ms"):
                        parsed[key] = float(value)
                    else:
                        parsed[key] = value
                rows.append(parsed)
    return rows


def aggregate_records(rows):
    """Mean mse/cbr over trials for each configuration point."""
    groups = {}
    for row in rows:
        if not isinstance(row, dict):
            row = record_to_dict(row)
        key = (row["dataset"], row["model"], row["attack"], row["defense"], row["d_target_frac"])
        groups.setdefault(key, []).append(row)
    out = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], k[2], k[3], k[4])):
        rows_k = groups[key]
        mses = [r["mse"] for r in rows_k if r.get("mse") is not None]
        cbrs = [r["cbr"] for r in rows_k if r.get("cbr") is not None]
        bounds = [r["upper_bound"] for r in rows_k if r.get("upper_bound") is not None]
        out.append(
            {
                "dataset": key[0],
                "model": key[1],
                "attack": key[2],
                "defense": key[3],
                "d_target_frac": key[4],
                "trials": len(rows_k),
                "mean_mse": float(np.mean(mses)) if mses else None,
                "mean_cbr": float(np.mean(cbrs)) if cbrs else None,
                "mean_upper_bound": float(np.mean(bounds)) if bounds else None,
            }
        )
    return out
