"""Training-target codecs: one-hot vectors and thermometer ordinal codes.

Level k among N levels is encoded as a length N-1 binary vector whose first k
entries are 1.  Squared Euclidean distance between two such codewords equals
the level gap |i-j| exactly, so a squared-error loss on these targets charges
a misclassification in proportion to how far up or down the scale it lands.
All functions here are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .taxonomy import EmotionTaxonomy

MODE_SOFTMAX = "softmax"
MODE_ORDINAL_1D = "ordinal-1d"
MODE_ORDINAL_2D = "ordinal-2d"
HEAD_MODES = (MODE_SOFTMAX, MODE_ORDINAL_1D, MODE_ORDINAL_2D)


class CodecError(ValueError):
    """Invalid encode/decode arguments."""


def encode_onehot(k: int, num_classes: int, dtype=np.float64) -> np.ndarray:
    """One-hot vector of length num_classes with entry k set."""
    if not 0 <= k < num_classes:
        raise CodecError(f"class index {k} outside [0, {num_classes - 1}]")
    out = np.zeros(num_classes, dtype=dtype)
    out[k] = 1.0
    return out


def encode_thermometer(k: int, levels: int, dtype=np.float64) -> np.ndarray:
    """Codeword for level k among `levels` levels: k ones then zeros, length levels-1."""
    if levels < 2:
        raise CodecError(f"need at least 2 levels, got {levels}")
    if not 0 <= k < levels:
        raise CodecError(f"level {k} outside [0, {levels - 1}]")
    out = np.zeros(levels - 1, dtype=dtype)
    out[:k] = 1.0
    return out


def codewords(levels: int, dtype=np.float64) -> np.ndarray:
    """All valid codewords as a (levels, levels-1) matrix, row k = level k."""
    return np.stack([encode_thermometer(k, levels, dtype) for k in range(levels)])


def decode_thermometer(values: np.ndarray) -> int:
    """Nearest-codeword decode of a single length-L vector to a level in [0, L].

    Picks the level whose codeword minimizes squared distance to `values`;
    exact ties resolve to the smaller level.  Defined for any finite vector,
    so non-monotone model outputs decode deterministically.
    """
    return int(decode_thermometer_batch(np.asarray(values)[None, :])[0])


def decode_thermometer_batch(values: np.ndarray) -> np.ndarray:
    """Vectorized decode_thermometer over rows of an (N, L) array."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] < 1:
        raise CodecError(f"expected (N, L>=1) array, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise CodecError("non-finite entries in code vector")
    codes = codewords(values.shape[1] + 1)
    dists = ((values[:, None, :] - codes[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(dists, axis=1)  # first minimum wins: low-level tie-break


@dataclass(frozen=True)
class TargetVector:
    """Training target for one example.

    `values` is the vector the matching head is trained against: a length-K
    one-hot (softmax), a length K-1 codeword (ordinal-1d), or the two length
    G-1 codewords for the valence and arousal cells concatenated (ordinal-2d),
    matching the model's head output layout.
    """

    mode: str
    values: np.ndarray

    def parts(self) -> tuple[np.ndarray, np.ndarray]:
        """Valence and arousal codewords of an ordinal-2d target."""
        if self.mode != MODE_ORDINAL_2D:
            raise CodecError("parts() applies to ordinal-2d targets only")
        half = self.values.shape[0] // 2
        return self.values[:half], self.values[half:]


def check_mode_compatible(mode: str, taxonomy: EmotionTaxonomy) -> None:
    """Reject head modes that cannot be trained against the taxonomy."""
    if mode not in HEAD_MODES:
        raise CodecError(f"unknown head mode {mode!r}; choose from {HEAD_MODES}")
    if mode == MODE_ORDINAL_1D and taxonomy.mode != "1d":
        raise CodecError("ordinal-1d head requires a 1d taxonomy")
    if mode == MODE_ORDINAL_2D and taxonomy.mode != "2d":
        raise CodecError("ordinal-2d head requires a 2d taxonomy")


def target_for(
    taxonomy: EmotionTaxonomy, label: str, mode: str, dtype=np.float64
) -> TargetVector:
    """Training target for `label` under the given head mode."""
    check_mode_compatible(mode, taxonomy)
    if mode == MODE_SOFTMAX:
        values = encode_onehot(taxonomy.index(label), taxonomy.num_labels, dtype)
    elif mode == MODE_ORDINAL_1D:
        values = encode_thermometer(taxonomy.rank(label), taxonomy.num_labels, dtype)
    else:
        valence, arousal = taxonomy.cell(label)
        g = taxonomy.grid_size
        values = np.concatenate(
            [encode_thermometer(valence, g, dtype), encode_thermometer(arousal, g, dtype)]
        )
    return TargetVector(mode=mode, values=values)


def target_width(mode: str, taxonomy: EmotionTaxonomy) -> int:
    """Length of the target vector (= model head output width) for a mode."""
    check_mode_compatible(mode, taxonomy)
    if mode == MODE_SOFTMAX:
        return taxonomy.num_labels
    if mode == MODE_ORDINAL_1D:
        return taxonomy.num_labels - 1
    return 2 * (taxonomy.grid_size - 1)
