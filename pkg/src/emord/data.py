"""Corpus loading, tokenization, vocabulary building, deterministic splits,
and a synthetic marker-token corpus generator.

The synthetic generator plants class-marker tokens among filler tokens.  With
`p_confuse > 0` a planted marker is sometimes swapped for the marker of a
nearest neighbor on the emotion scale, which creates exactly the kind of
ambiguity ordinal training is supposed to survive: the confusable classes are
the *adjacent* ones.
"""

from __future__ import annotations

import csv
import json
import logging
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .taxonomy import (
    BUILTIN_TAXONOMIES,
    EmotionTaxonomy,
    builtin_taxonomy,
    label_distance,
    load_taxonomy,
)

logger = logging.getLogger(__name__)

PAD_ID = 0
UNK_ID = 1
_RESERVED = 2  # ids 0 and 1 are never assigned to corpus tokens

_SPLIT_STREAM = 7
_SYNTH_STREAM = 11

SYNTH_FORMAT = "emord.synth/1"

CORPUS_FORMATS = ("tsv", "csv")


class DataError(ValueError):
    """Malformed corpus file, bad split request, or invalid synthetic spec."""


@dataclass(frozen=True)
class LabeledCorpus:
    """Immutable sequence of (text, label) records plus a provenance note."""

    records: tuple[tuple[str, str], ...]
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.records)

    def texts(self) -> list[str]:
        return [text for text, _ in self.records]

    def labels(self) -> list[str]:
        return [label for _, label in self.records]

    def label_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for _, label in self.records:
            counts[label] = counts.get(label, 0) + 1
        return counts


def filter_labels(corpus: LabeledCorpus, keep) -> LabeledCorpus:
    """Sub-corpus containing only records whose label is in `keep`."""
    keep = set(keep)
    records = tuple(rec for rec in corpus.records if rec[1] in keep)
    return LabeledCorpus(records, provenance=f"{corpus.provenance}[filtered]")


def _check_record(text: str, label: str, taxonomy: EmotionTaxonomy, where: str) -> None:
    if not text.strip():
        raise DataError(f"{where}: empty text")
    if label not in taxonomy.labels:
        raise DataError(f"{where}: unknown label {label!r}")


def load_corpus(path: str | Path, fmt: str, taxonomy: EmotionTaxonomy) -> LabeledCorpus:
    """Read a labeled corpus, validating every row against the taxonomy.

    tsv: one record per line, text and label separated by a single tab, no
    header.  csv: RFC-4180 with the exact header ``text,label``.  Errors name
    the offending row (1-based over data rows).
    """
    path = Path(path)
    if fmt not in CORPUS_FORMATS:
        raise DataError(f"unknown corpus format {fmt!r}; choose from {CORPUS_FORMATS}")
    records: list[tuple[str, str]] = []
    with open(path, encoding="utf-8", newline="") as fh:
        if fmt == "tsv":
            for row_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    raise DataError(f"{path} row {row_no}: blank line")
                parts = line.split("\t")
                if len(parts) != 2:
                    raise DataError(
                        f"{path} row {row_no}: expected text<TAB>label, got {len(parts)} fields"
                    )
                text, label = parts
                _check_record(text, label, taxonomy, f"{path} row {row_no}")
                records.append((text, label))
        else:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path}: empty file (missing header)") from None
            if header != ["text", "label"]:
                raise DataError(f"{path}: header must be exactly text,label, got {header}")
            for row_no, row in enumerate(reader, start=1):
                if len(row) != 2:
                    raise DataError(f"{path} row {row_no}: expected 2 fields, got {len(row)}")
                text, label = row
                _check_record(text, label, taxonomy, f"{path} row {row_no}")
                records.append((text, label))
    if not records:
        raise DataError(f"{path}: corpus has no records")
    return LabeledCorpus(tuple(records), provenance=str(path))


def save_corpus_tsv(corpus: LabeledCorpus, path: str | Path) -> None:
    """Write the tab-separated form; rejects texts that cannot survive it."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for text, label in corpus.records:
            if "\t" in text or "\n" in text:
                raise DataError("tsv cannot hold texts containing tabs or newlines")
            fh.write(f"{text}\t{label}\n")


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _clean_token(token: str) -> str:
    start, end = 0, len(token)
    while start < end and _is_punct(token[start]):
        start += 1
    while end > start and _is_punct(token[end - 1]):
        end -= 1
    return token[start:end]


def text_tokens(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip punctuation off token edges."""
    out = []
    for raw in text.lower().split():
        token = _clean_token(raw)
        if token:
            out.append(token)
    return out


@dataclass(frozen=True)
class Vocabulary:
    """Token table: id 0 is padding, id 1 the unknown token, real tokens from 2.

    Real tokens are ordered by descending corpus frequency, ties broken
    lexicographically, so the table never depends on hash or file order.
    """

    tokens: tuple[str, ...]
    min_freq: int = 1
    _index: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_index", {tok: i + _RESERVED for i, tok in enumerate(self.tokens)}
        )

    @property
    def size(self) -> int:
        """Total id range including the two reserved slots."""
        return len(self.tokens) + _RESERVED

    def lookup(self, token: str) -> int:
        return self._index.get(token, UNK_ID)

    def token(self, token_id: int) -> str:
        if not _RESERVED <= token_id < self.size:
            raise DataError(f"id {token_id} is reserved or out of range")
        return self.tokens[token_id - _RESERVED]

    def __contains__(self, token: str) -> bool:
        return token in self._index


def build_vocab(corpus: LabeledCorpus, min_freq: int = 1) -> Vocabulary:
    """Frequency-ordered vocabulary over the corpus (normally the train split)."""
    if min_freq < 1:
        raise DataError("min_freq must be at least 1")
    if len(corpus) == 0:
        raise DataError("cannot build a vocabulary from an empty corpus")
    counts: dict[str, int] = {}
    for text in corpus.texts():
        for token in text_tokens(text):
            counts[token] = counts.get(token, 0) + 1
    kept = sorted(
        (tok for tok, n in counts.items() if n >= min_freq),
        key=lambda tok: (-counts[tok], tok),
    )
    if not kept:
        raise DataError(f"no token reaches min_freq={min_freq}")
    return Vocabulary(tokens=tuple(kept), min_freq=min_freq)


def encode_text(text: str, vocab: Vocabulary, max_len: int) -> np.ndarray:
    """Token ids for one text: truncated to max_len, right-padded with 0."""
    ids = [vocab.lookup(tok) for tok in text_tokens(text)[:max_len]]
    out = np.zeros(max_len, dtype=np.int64)
    out[: len(ids)] = ids
    return out


def encode_corpus(
    corpus: LabeledCorpus, vocab: Vocabulary, max_len: int
) -> tuple[np.ndarray, list[str]]:
    """Id matrix (N, max_len) plus the gold labels, rejecting empty token rows."""
    matrix = np.zeros((len(corpus), max_len), dtype=np.int64)
    for i, (text, _) in enumerate(corpus.records):
        row = encode_text(text, vocab, max_len)
        if row[0] == PAD_ID:
            raise DataError(f"record {i + 1}: no tokens survive normalization: {text!r}")
        matrix[i] = row
    return matrix, corpus.labels()


def _largest_remainder(n: int, ratios: tuple[float, ...]) -> list[int]:
    shares = [n * r for r in ratios]
    base = [int(s) for s in shares]
    short = n - sum(base)
    by_frac = sorted(range(len(ratios)), key=lambda i: (-(shares[i] - base[i]), i))
    for i in by_frac[:short]:
        base[i] += 1
    return base


def split_corpus(
    corpus: LabeledCorpus,
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> tuple[LabeledCorpus, LabeledCorpus, LabeledCorpus]:
    """Stratified train/val/test split, deterministic in (corpus, ratios, seed).

    Each label's records are shuffled and apportioned by largest remainder.
    A label with fewer records than splits goes entirely to train, with a
    warning.  Within each split, records keep their original corpus order.
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise DataError("ratios must be three non-negative numbers")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise DataError(f"ratios must sum to 1, got {sum(ratios)}")
    if len(corpus) == 0:
        raise DataError("cannot split an empty corpus")

    by_label: dict[str, list[int]] = {}
    for i, (_, label) in enumerate(corpus.records):
        by_label.setdefault(label, []).append(i)

    rng = np.random.default_rng([seed, _SPLIT_STREAM])
    assigned: list[list[int]] = [[], [], []]
    for label, indices in by_label.items():
        order = rng.permutation(len(indices))
        shuffled = [indices[j] for j in order]
        if len(shuffled) < 3:
            logger.warning(
                "label %r has only %d record(s); all go to the train split",
                label,
                len(shuffled),
            )
            assigned[0].extend(shuffled)
            continue
        counts = _largest_remainder(len(shuffled), ratios)
        start = 0
        for part, count in enumerate(counts):
            assigned[part].extend(shuffled[start : start + count])
            start += count

    splits = []
    for part, name in enumerate(("train", "val", "test")):
        picked = sorted(assigned[part])
        records = tuple(corpus.records[i] for i in picked)
        splits.append(
            LabeledCorpus(records, provenance=f"{corpus.provenance}[{name}]")
        )
    return splits[0], splits[1], splits[2]


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a marker-token corpus.

    Per token position: with probability `p_signal` plant a marker — the
    example's own class marker, or (with probability `p_confuse`) the marker
    of a uniformly chosen nearest scale-neighbor — otherwise draw one of
    `filler_tokens` shared filler tokens.
    """

    taxonomy: EmotionTaxonomy
    examples_per_class: int = 200
    p_signal: float = 0.25
    p_confuse: float = 0.0
    sequence_length: int = 24
    seed: int = 0
    filler_tokens: int = 16

    def __post_init__(self):
        if self.examples_per_class < 1:
            raise DataError("examples_per_class must be positive")
        if not 0.0 < self.p_signal <= 1.0:
            raise DataError("p_signal must be in (0, 1]")
        if not 0.0 <= self.p_confuse < 1.0:
            raise DataError("p_confuse must be in [0, 1)")
        if self.sequence_length < 1:
            raise DataError("sequence_length must be positive")
        if self.filler_tokens < 1:
            raise DataError("filler_tokens must be positive")

    def describe(self) -> str:
        return (
            f"synthetic(classes={self.taxonomy.num_labels},per_class={self.examples_per_class},"
            f"p_signal={self.p_signal},p_confuse={self.p_confuse},"
            f"len={self.sequence_length},seed={self.seed})"
        )


def marker_token(taxonomy: EmotionTaxonomy, label: str) -> str:
    """The signal token planted for a class (index-based, normalization-proof)."""
    return f"cue{taxonomy.index(label)}"


def nearest_neighbor_labels(taxonomy: EmotionTaxonomy, label: str) -> list[str]:
    """Labels at minimal positive scale distance from `label`, in label order."""
    others = [(label_distance(taxonomy, label, other), other)
              for other in taxonomy.labels if other != label]
    best = min(d for d, _ in others)
    return [other for d, other in others if d == best]


def generate_synthetic(spec: SyntheticSpec) -> LabeledCorpus:
    """Deterministically generate the corpus a SyntheticSpec describes."""
    taxonomy = spec.taxonomy
    rng = np.random.default_rng([spec.seed, _SYNTH_STREAM])
    fillers = [f"fill{j}" for j in range(spec.filler_tokens)]
    markers = {label: marker_token(taxonomy, label) for label in taxonomy.labels}
    neighbors = {label: nearest_neighbor_labels(taxonomy, label) for label in taxonomy.labels}

    records: list[tuple[str, str]] = []
    for label in taxonomy.labels:
        for _ in range(spec.examples_per_class):
            tokens = []
            for _pos in range(spec.sequence_length):
                if rng.random() < spec.p_signal:
                    if spec.p_confuse > 0.0 and rng.random() < spec.p_confuse:
                        pool = neighbors[label]
                        tokens.append(markers[pool[rng.integers(len(pool))]])
                    else:
                        tokens.append(markers[label])
                else:
                    tokens.append(fillers[rng.integers(spec.filler_tokens)])
            records.append((" ".join(tokens), label))
    return LabeledCorpus(tuple(records), provenance=spec.describe())


def load_synthetic_spec(path: str | Path) -> SyntheticSpec:
    """Read a synthetic-corpus spec from its JSON document form.

    Fields: "taxonomy" (builtin name, or path resolved relative to the spec
    file), "examples_per_class", "p_signal", "p_confuse", "sequence_length",
    "seed", optional "filler_tokens", optional "format" tag.  Unknown fields
    are rejected.
    """
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(document, dict):
        raise DataError(f"{path}: spec must be a JSON object")
    allowed = {
        "format",
        "taxonomy",
        "examples_per_class",
        "p_signal",
        "p_confuse",
        "sequence_length",
        "seed",
        "filler_tokens",
    }
    unknown = set(document) - allowed
    if unknown:
        raise DataError(f"{path}: unknown spec fields {sorted(unknown)}")
    fmt = document.get("format", SYNTH_FORMAT)
    if fmt != SYNTH_FORMAT:
        raise DataError(f"{path}: unsupported format tag {fmt!r}")
    if "taxonomy" not in document:
        raise DataError(f"{path}: spec needs a taxonomy")
    taxonomy = resolve_taxonomy(document["taxonomy"], relative_to=path.parent)
    kwargs = {}
    for key in ("examples_per_class", "sequence_length", "seed", "filler_tokens"):
        if key in document:
            value = document[key]
            if not isinstance(value, int) or isinstance(value, bool):
                raise DataError(f"{path}: {key} must be an integer")
            kwargs[key] = value
    for key in ("p_signal", "p_confuse"):
        if key in document:
            value = document[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise DataError(f"{path}: {key} must be a number")
            kwargs[key] = float(value)
    return SyntheticSpec(taxonomy=taxonomy, **kwargs)


def synthetic_spec_to_document(spec: SyntheticSpec, taxonomy_ref: str) -> dict:
    """Document form of a spec; `taxonomy_ref` is the name/path to record."""
    return {
        "format": SYNTH_FORMAT,
        "taxonomy": taxonomy_ref,
        "examples_per_class": spec.examples_per_class,
        "p_signal": spec.p_signal,
        "p_confuse": spec.p_confuse,
        "sequence_length": spec.sequence_length,
        "seed": spec.seed,
        "filler_tokens": spec.filler_tokens,
    }


def resolve_taxonomy(ref: str, relative_to: Path | None = None) -> EmotionTaxonomy:
    """Interpret a taxonomy reference: builtin name first, then file path."""
    if not isinstance(ref, str) or not ref:
        raise DataError("taxonomy reference must be a non-empty string")
    if ref in BUILTIN_TAXONOMIES:
        return builtin_taxonomy(ref)
    candidate = Path(ref)
    if not candidate.is_absolute() and relative_to is not None:
        local = relative_to / candidate
        if local.exists():
            candidate = local
    if not candidate.exists():
        raise DataError(f"taxonomy {ref!r} is neither a builtin name nor an existing file")
    return load_taxonomy(candidate)
