"""Training loop: deterministic data preparation, AdamW epochs, validation
tracking, and checkpoint selection.

Determinism contract: a fully resolved TrainConfig (plus the corpus it names)
fixes every random draw.  Initialization, splitting, and per-epoch shuffles
each use their own seed stream, and the shuffle stream is keyed by epoch
number, so resuming from a mid-run checkpoint replays the exact batches a
straight run would have seen.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .checkpoint import (
    Checkpoint,
    OptimizerSnapshot,
    taxonomy_fingerprint,
    vocab_fingerprint,
)
from .codec import (
    HEAD_MODES,
    MODE_SOFTMAX,
    check_mode_compatible,
    target_for,
    target_width,
)
from .data import (
    CORPUS_FORMATS,
    LabeledCorpus,
    build_vocab,
    encode_corpus,
    generate_synthetic,
    load_corpus,
    load_synthetic_spec,
    resolve_taxonomy,
    split_corpus,
)
from .losses import logit_gradient, loss_value
from .metrics import MetricsReport, evaluate
from .net import ModelConfig, NetError, backward, forward, init_params
from .optim import AdamWConfig, AdamWState, OptimizerError, adamw_step

logger = logging.getLogger(__name__)

_SHUFFLE_STREAM = 303

CONFIG_FORMAT = "emord.train/1"

PRESETS = ("desk", "paper")

#: Preset-dependent defaults; anything not listed here is preset-independent.
_PRESET_DEFAULTS = {
    "desk": {"learning_rate": 1e-3, "max_seq_length": 32},
    "paper": {"learning_rate": 0.6e-5, "max_seq_length": 200},
}


class TrainerError(ValueError):
    """Invalid training configuration or data/config mismatch."""


class TrainingDivergedError(RuntimeError):
    """Loss or gradients went non-finite; carries where it happened."""

    def __init__(self, epoch: int, batch_index: int, detail: str):
        super().__init__(
            f"training diverged at epoch {epoch}, batch {batch_index}: {detail}"
        )
        self.epoch = epoch
        self.batch_index = batch_index


@dataclass(frozen=True)
class TrainConfig:
    """Fully resolved training recipe.

    Width fields left as None take the preset's widths ("desk": laptop-scale,
    "paper": full-scale).  Exactly one data source — `corpus` or `synthetic`
    — should be set unless the corpus is handed to the trainer directly.
    """

    mode: str = MODE_SOFTMAX
    taxonomy: str = "isear-valence"
    corpus: str | None = None
    corpus_format: str = "tsv"
    synthetic: str | None = None
    preset: str = "desk"
    epochs: int = 10
    batch_size: int = 16
    learning_rate: float = 1e-3
    max_seq_length: int = 32
    seed: int = 0
    split: tuple[float, float, float] = (0.8, 0.1, 0.1)
    min_freq: int = 1
    weight_decay: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    loss_weights: tuple[float, float] = (1.0, 1.0)
    embed_dim: int | None = None
    conv_channels: tuple[int, int] | None = None
    kernel_sizes: tuple[int, int] | None = None
    ffnn_hidden: tuple[int, int] | None = None

    def __post_init__(self):
        # JSON documents carry tuples as lists; normalize so equality and
        # downstream unpacking never depend on which door a config came in
        for name in ("split", "loss_weights", "conv_channels", "kernel_sizes", "ffnn_hidden"):
            value = getattr(self, name)
            if isinstance(value, list):
                object.__setattr__(self, name, tuple(value))
        if self.mode not in HEAD_MODES:
            raise TrainerError(f"unknown head mode {self.mode!r}; choose from {HEAD_MODES}")
        if self.preset not in PRESETS:
            raise TrainerError(f"unknown preset {self.preset!r}; choose from {PRESETS}")
        if self.corpus_format not in CORPUS_FORMATS:
            raise TrainerError(f"unknown corpus format {self.corpus_format!r}")
        if self.corpus is not None and self.synthetic is not None:
            raise TrainerError("set corpus or synthetic, not both")
        for name in ("epochs", "batch_size", "max_seq_length", "min_freq"):
            if getattr(self, name) < 1:
                raise TrainerError(f"{name} must be at least 1")
        if self.learning_rate <= 0:
            raise TrainerError("learning_rate must be positive")
        if self.weight_decay < 0:
            raise TrainerError("weight_decay must be non-negative")
        if len(self.split) != 3 or any(r < 0 for r in self.split):
            raise TrainerError("split must be three non-negative ratios")
        if abs(sum(self.split) - 1.0) > 1e-9:
            raise TrainerError(f"split ratios must sum to 1, got {sum(self.split)}")
        if len(self.loss_weights) != 2 or any(w <= 0 for w in self.loss_weights):
            raise TrainerError("loss_weights must be two positive numbers")

    def to_document(self) -> dict:
        """JSON-ready snapshot of every resolved value (manifest embedding)."""
        doc: dict = {"format": CONFIG_FORMAT}
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if isinstance(value, tuple):
                value = list(value)
            doc[field.name] = value
        return doc


_INT_FIELDS = {"epochs", "batch_size", "max_seq_length", "seed", "min_freq", "embed_dim"}
_FLOAT_FIELDS = {"learning_rate", "weight_decay", "beta1", "beta2", "eps"}
_STR_FIELDS = {"mode", "taxonomy", "corpus", "corpus_format", "synthetic", "preset"}
_TUPLE_FIELDS = {
    "split": (3, float),
    "loss_weights": (2, float),
    "conv_channels": (2, int),
    "kernel_sizes": (2, int),
    "ffnn_hidden": (2, int),
}
_NULLABLE = {"corpus", "synthetic", "embed_dim", "conv_channels", "kernel_sizes", "ffnn_hidden"}
_CONFIG_FIELDS = _INT_FIELDS | _FLOAT_FIELDS | _STR_FIELDS | set(_TUPLE_FIELDS)


def _coerce_field(name: str, value, where: str):
    if value is None:
        if name in _NULLABLE:
            return None
        raise TrainerError(f"{where}: {name} must not be null")
    if name in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise TrainerError(f"{where}: {name} must be an integer")
        return value
    if name in _FLOAT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise TrainerError(f"{where}: {name} must be a number")
        return float(value)
    if name in _STR_FIELDS:
        if not isinstance(value, str):
            raise TrainerError(f"{where}: {name} must be a string")
        return value
    length, kind = _TUPLE_FIELDS[name]
    if not isinstance(value, (list, tuple)) or len(value) != length:
        raise TrainerError(f"{where}: {name} must be a list of {length} values")
    out = []
    for item in value:
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise TrainerError(f"{where}: {name} entries must be numbers")
        if kind is int and not isinstance(item, int):
            raise TrainerError(f"{where}: {name} entries must be integers")
        out.append(kind(item))
    return tuple(out)


def load_train_config_file(path: str | Path) -> dict:
    """Strictly parse a training-config JSON file into a field dict."""
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TrainerError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(document, dict):
        raise TrainerError(f"{path}: config must be a JSON object")
    fmt = document.pop("format", CONFIG_FORMAT)
    if fmt != CONFIG_FORMAT:
        raise TrainerError(f"{path}: unsupported format tag {fmt!r}")
    unknown = set(document) - _CONFIG_FIELDS
    if unknown:
        raise TrainerError(f"{path}: unknown config fields {sorted(unknown)}")
    return {
        name: _coerce_field(name, value, str(path)) for name, value in document.items()
    }


def resolve_train_config(
    file_values: dict | None = None, overrides: dict | None = None
) -> TrainConfig:
    """Layer defaults, preset, config file, then explicit overrides.

    Precedence (low to high): dataclass defaults, preset defaults, config
    file values, overrides (CLI flags).  Overrides that are None are treated
    as "not given".
    """
    file_values = dict(file_values or {})
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    unknown = (set(file_values) | set(overrides)) - _CONFIG_FIELDS
    if unknown:
        raise TrainerError(f"unknown config fields {sorted(unknown)}")
    preset = overrides.get("preset", file_values.get("preset", "desk"))
    if preset not in PRESETS:
        raise TrainerError(f"unknown preset {preset!r}; choose from {PRESETS}")
    merged: dict = {"preset": preset}
    merged.update(_PRESET_DEFAULTS[preset])
    merged.update(file_values)
    merged.update(overrides)
    return TrainConfig(**merged)


@dataclass(frozen=True)
class EpochStats:
    """One history line; `seconds` is wall clock and excluded from hashing claims."""

    epoch: int
    train_loss: float
    val_accuracy: float
    val_macro_f1: float
    val_mean_distance: float
    val_mean_error_distance: float
    seconds: float

    def to_dict(self) -> dict:
        # `seconds` stays out on purpose: written artifacts must hash
        # identically across reruns of the same configuration
        return {
            "epoch": self.epoch,
            "train_loss": self.train_loss,
            "val_accuracy": self.val_accuracy,
            "val_macro_f1": self.val_macro_f1,
            "val_mean_distance": self.val_mean_distance,
            "val_mean_error_distance": self.val_mean_error_distance,
        }


@dataclass
class TrainResult:
    final: Checkpoint  # last epoch, with optimizer state (resumable)
    best: Checkpoint  # selected epoch, inference-only
    best_epoch: int
    history: list[EpochStats]


def build_model_config(config: TrainConfig, vocab_size: int, output_width: int) -> ModelConfig:
    builder = ModelConfig.desk if config.preset == "desk" else ModelConfig.paper
    overrides: dict = {"dtype": "float32"}
    for name in ("embed_dim", "conv_channels", "kernel_sizes", "ffnn_hidden"):
        value = getattr(config, name)
        if value is not None:
            overrides[name] = value
    return builder(vocab_size, output_width, config.mode, **overrides)


def load_configured_corpus(config: TrainConfig) -> LabeledCorpus:
    """Materialize the data source a config names."""
    taxonomy = resolve_taxonomy(config.taxonomy)
    if config.synthetic is not None:
        spec = load_synthetic_spec(config.synthetic)
        return generate_synthetic(spec)
    if config.corpus is not None:
        return load_corpus(config.corpus, config.corpus_format, taxonomy)
    raise TrainerError("config names no data source (corpus or synthetic)")


class Trainer:
    """Owns the model state across epochs; one instance per training run."""

    def __init__(self, config: TrainConfig, corpus: LabeledCorpus | None = None):
        self.config = config
        self.taxonomy = resolve_taxonomy(config.taxonomy)
        check_mode_compatible(config.mode, self.taxonomy)
        if corpus is None:
            corpus = load_configured_corpus(config)
        self.train_split, self.val_split, self.test_split = split_corpus(
            corpus, config.split, config.seed
        )
        if len(self.train_split) == 0:
            raise TrainerError("train split is empty")
        if len(self.val_split) == 0:
            logger.warning("validation split is empty; validating on the train split")
            self.val_split = self.train_split
        self.vocab = build_vocab(self.train_split, config.min_freq)
        self.model_config = build_model_config(
            config, self.vocab.size, target_width(config.mode, self.taxonomy)
        )
        if config.max_seq_length < self.model_config.min_seq_length:
            raise TrainerError(
                f"max_seq_length {config.max_seq_length} is shorter than the "
                f"convolutions need ({self.model_config.min_seq_length})"
            )
        self.train_ids, train_labels = encode_corpus(
            self.train_split, self.vocab, config.max_seq_length
        )
        dt = self.model_config.np_dtype
        self.train_targets = np.stack(
            [
                target_for(self.taxonomy, label, config.mode, dtype=dt).values
                for label in train_labels
            ]
        )
        self.params = init_params(self.model_config, config.seed)
        self.adamw = AdamWConfig(
            learning_rate=config.learning_rate,
            beta1=config.beta1,
            beta2=config.beta2,
            eps=config.eps,
            weight_decay=config.weight_decay,
        )
        self.opt_state = AdamWState.initial(self.params)
        self.epochs_done = 0
        self.history: list[EpochStats] = []
        self._best: tuple[float, int, Checkpoint] | None = None

    @classmethod
    def resume(
        cls, config: TrainConfig, ck: Checkpoint, corpus: LabeledCorpus | None = None
    ) -> "Trainer":
        """Continue a run from a checkpoint that carries optimizer state."""
        if ck.optimizer is None:
            raise TrainerError("checkpoint has no optimizer state; cannot resume")
        trainer = cls(config, corpus)
        if vocab_fingerprint(trainer.vocab) != vocab_fingerprint(ck.vocab):
            raise TrainerError("checkpoint vocabulary does not match the configured data")
        if taxonomy_fingerprint(trainer.taxonomy) != taxonomy_fingerprint(ck.taxonomy):
            raise TrainerError("checkpoint taxonomy does not match the config")
        if trainer.model_config != ck.config:
            raise TrainerError("checkpoint model widths do not match the config")
        trainer.params = ck.params.copy()
        trainer.opt_state = AdamWState(
            step=ck.optimizer.state.step,
            m={k: v.copy() for k, v in ck.optimizer.state.m.items()},
            v={k: v.copy() for k, v in ck.optimizer.state.v.items()},
        )
        trainer.epochs_done = ck.epochs_completed
        return trainer

    def checkpoint(self, with_optimizer: bool = False) -> Checkpoint:
        """Deep snapshot of the current model (and optionally optimizer) state."""
        optimizer = None
        if with_optimizer:
            optimizer = OptimizerSnapshot(
                adamw=self.adamw,
                state=AdamWState(
                    step=self.opt_state.step,
                    m={k: v.copy() for k, v in self.opt_state.m.items()},
                    v={k: v.copy() for k, v in self.opt_state.v.items()},
                ),
            )
        return Checkpoint(
            config=self.model_config,
            params=self.params.copy(),
            taxonomy=self.taxonomy,
            vocab=self.vocab,
            max_seq_length=self.config.max_seq_length,
            seed=self.config.seed,
            loss_weights=self.config.loss_weights,
            epochs_completed=self.epochs_done,
            optimizer=optimizer,
        )

    def run_epoch(self) -> EpochStats:
        """One pass over the train split followed by a validation pass."""
        config = self.config
        epoch = self.epochs_done + 1
        started = time.perf_counter()
        n = self.train_ids.shape[0]
        order = np.random.default_rng(
            [config.seed, _SHUFFLE_STREAM, epoch]
        ).permutation(n)
        total_loss = 0.0
        for batch_index, start in enumerate(range(0, n, config.batch_size)):
            picked = order[start : start + config.batch_size]
            ids = self.train_ids[picked]
            targets = self.train_targets[picked]
            try:
                outputs, cache = forward(self.params, self.model_config, ids)
            except NetError as exc:
                # inputs were validated up front, so a failure here means the
                # parameters themselves have gone non-finite
                raise TrainingDivergedError(epoch, batch_index, str(exc)) from exc
            batch_loss = loss_value(outputs, targets, config.mode, config.loss_weights)
            if not np.isfinite(batch_loss):
                raise TrainingDivergedError(epoch, batch_index, f"loss={batch_loss!r}")
            grads = backward(
                self.params,
                self.model_config,
                cache,
                logit_gradient(outputs, targets, config.mode, config.loss_weights),
            )
            try:
                adamw_step(self.params, grads, self.opt_state, self.adamw)
            except OptimizerError as exc:
                raise TrainingDivergedError(epoch, batch_index, str(exc)) from exc
            total_loss += batch_loss * len(picked)
        self.epochs_done = epoch

        val = evaluate(self.checkpoint(), self.val_split).report
        stats = EpochStats(
            epoch=epoch,
            train_loss=total_loss / n,
            val_accuracy=val.accuracy,
            val_macro_f1=val.macro_f1,
            val_mean_distance=val.mean_distance,
            val_mean_error_distance=val.mean_error_distance,
            seconds=time.perf_counter() - started,
        )
        self.history.append(stats)
        self._consider_best(val)
        return stats

    def _consider_best(self, val: MetricsReport) -> None:
        # softmax selects on validation macro-F1 (higher wins); the ordinal
        # modes select on mean scale distance over all examples (lower wins).
        if self.config.mode == MODE_SOFTMAX:
            score = val.macro_f1
            better = self._best is None or score > self._best[0]
        else:
            score = val.mean_distance
            better = self._best is None or score < self._best[0]
        if better:
            self._best = (score, self.epochs_done, self.checkpoint())

    def run(self) -> TrainResult:
        if self.epochs_done >= self.config.epochs:
            raise TrainerError(
                f"nothing to train: {self.epochs_done} epochs already completed"
            )
        while self.epochs_done < self.config.epochs:
            stats = self.run_epoch()
            logger.info(
                "epoch %d/%d train_loss=%.4f val_acc=%.3f val_f1=%.3f val_dist=%.3f",
                stats.epoch,
                self.config.epochs,
                stats.train_loss,
                stats.val_accuracy,
                stats.val_macro_f1,
                stats.val_mean_distance,
            )
        assert self._best is not None
        return TrainResult(
            final=self.checkpoint(with_optimizer=True),
            best=self._best[2],
            best_epoch=self._best[1],
            history=list(self.history),
        )


def train(config: TrainConfig, corpus: LabeledCorpus | None = None) -> TrainResult:
    """Train a model end to end from a resolved config."""
    return Trainer(config, corpus).run()


def write_history(history: list[EpochStats], path: str | Path) -> None:
    """Append-style JSONL: one object per epoch."""
    with open(path, "w", encoding="utf-8") as fh:
        for stats in history:
            fh.write(json.dumps(stats.to_dict(), sort_keys=True) + "\n")
