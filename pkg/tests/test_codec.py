"""Thermometer/one-hot codecs: laws checked exhaustively against oracles."""

import itertools

import numpy as np
import pytest

from emord.codec import (
    MODE_ORDINAL_1D,
    MODE_ORDINAL_2D,
    MODE_SOFTMAX,
    CodecError,
    check_mode_compatible,
    codewords,
    decode_thermometer,
    decode_thermometer_batch,
    encode_onehot,
    encode_thermometer,
    target_for,
    target_width,
)
from emord.taxonomy import builtin_taxonomy


def brute_force_decode(values):
    """Independent oracle: literal nearest-codeword search, low level on ties."""
    values = np.asarray(values, dtype=np.float64)
    levels = values.shape[0] + 1
    best_level, best_dist = None, None
    for k in range(levels):
        code = np.zeros(levels - 1)
        code[:k] = 1.0
        dist = float(((values - code) ** 2).sum())
        if best_dist is None or dist < best_dist - 1e-12:
            best_level, best_dist = k, dist
    return best_level


def test_encode_examples():
    assert encode_thermometer(0, 5).tolist() == [0, 0, 0, 0]
    assert encode_thermometer(3, 5).tolist() == [1, 1, 1, 0]
    assert encode_thermometer(4, 5).tolist() == [1, 1, 1, 1]
    assert encode_onehot(2, 4).tolist() == [0, 0, 1, 0]


def test_encode_bounds():
    with pytest.raises(CodecError):
        encode_thermometer(5, 5)
    with pytest.raises(CodecError):
        encode_thermometer(-1, 5)
    with pytest.raises(CodecError):
        encode_thermometer(0, 1)
    with pytest.raises(CodecError):
        encode_onehot(4, 4)


def test_decode_encode_identity_exhaustive():
    # criterion: decode(encode(k)) == k for every level of every K <= 32
    for levels in range(2, 33):
        for k in range(levels):
            assert decode_thermometer(encode_thermometer(k, levels)) == k


def test_codeword_distance_law_exhaustive():
    # criterion: squared distance between codewords equals the level gap, exactly
    for levels in range(2, 33):
        codes = codewords(levels)
        for i in range(levels):
            for j in range(levels):
                d2 = float(((codes[i] - codes[j]) ** 2).sum())
                assert d2 == abs(i - j)


def test_decode_matches_brute_force_oracle():
    rng = np.random.default_rng(7)
    for levels in (2, 3, 5, 9, 17):
        vals = rng.uniform(-0.5, 1.5, size=(64, levels - 1))
        got = decode_thermometer_batch(vals)
        want = [brute_force_decode(row) for row in vals]
        assert got.tolist() == want


def test_decode_examples_and_tie_break():
    assert decode_thermometer(np.array([0.9, 0.8, 0.1, 0.0, 0.0, 0.0])) == 2
    # exactly between levels 0 and 2: both at distance 0.5; lowest level wins
    assert decode_thermometer(np.array([0.5, 0.5])) == 0
    assert decode_thermometer(np.array([1.0, 1.0])) == 2
    assert decode_thermometer(np.array([0.0])) == 0
    assert decode_thermometer(np.array([1.0])) == 1
    assert decode_thermometer(np.array([0.5])) == 0  # tie toward the lower level


def test_decode_handles_non_monotone_vectors():
    # a non-monotone vector is still decoded to its nearest codeword
    vals = np.array([0.1, 0.9, 0.2, 0.8])
    assert decode_thermometer(vals) == brute_force_decode(vals)


def test_decode_rejects_bad_input():
    with pytest.raises(CodecError):
        decode_thermometer(np.array([0.5, np.nan]))
    with pytest.raises(CodecError):
        decode_thermometer_batch(np.zeros((2, 2, 2)))


def test_mode_compatibility():
    t1 = builtin_taxonomy("isear-valence")
    t2 = builtin_taxonomy("goemotions-grid-5x5")
    check_mode_compatible(MODE_SOFTMAX, t1)
    check_mode_compatible(MODE_SOFTMAX, t2)
    check_mode_compatible(MODE_ORDINAL_1D, t1)
    check_mode_compatible(MODE_ORDINAL_2D, t2)
    with pytest.raises(CodecError):
        check_mode_compatible(MODE_ORDINAL_1D, t2)
    with pytest.raises(CodecError):
        check_mode_compatible(MODE_ORDINAL_2D, t1)
    with pytest.raises(CodecError):
        check_mode_compatible("argmax", t1)


def test_target_widths():
    t1 = builtin_taxonomy("isear-valence")
    t2 = builtin_taxonomy("goemotions-grid-5x5")
    assert target_width(MODE_SOFTMAX, t1) == 7
    assert target_width(MODE_ORDINAL_1D, t1) == 6
    assert target_width(MODE_SOFTMAX, t2) == 23
    assert target_width(MODE_ORDINAL_2D, t2) == 8


def test_target_vectors_1d():
    tax = builtin_taxonomy("isear-valence")
    assert target_for(tax, "sadness", MODE_ORDINAL_1D).values.tolist() == [0] * 6
    assert target_for(tax, "joy", MODE_ORDINAL_1D).values.tolist() == [1] * 6
    anger = target_for(tax, "anger", MODE_ORDINAL_1D).values
    assert anger.tolist() == [1, 1, 0, 0, 0, 0]
    one_hot = target_for(tax, "anger", MODE_SOFTMAX).values
    assert one_hot.sum() == 1.0 and one_hot[tax.index("anger")] == 1.0


def test_target_vectors_2d_layout():
    tax = builtin_taxonomy("goemotions-grid-5x5")
    grief = target_for(tax, "grief", MODE_ORDINAL_2D)
    assert grief.values.tolist() == [0, 0, 0, 0, 0, 0, 0, 0]
    pride = target_for(tax, "pride", MODE_ORDINAL_2D)
    assert pride.values.tolist() == [1, 1, 1, 0, 1, 1, 0, 0]
    v_part, a_part = pride.parts()
    assert v_part.tolist() == [1, 1, 1, 0]
    assert a_part.tolist() == [1, 1, 0, 0]
    # parts() is only meaningful for the two-head layout
    with pytest.raises(CodecError):
        target_for(tax, "pride", MODE_SOFTMAX).parts()


def test_target_vectors_2d_every_label_distinct():
    tax = builtin_taxonomy("goemotions-grid-5x5")
    seen = set()
    for label in tax.labels:
        vec = tuple(target_for(tax, label, MODE_ORDINAL_2D).values.tolist())
        assert vec not in seen
        seen.add(vec)


def test_target_2d_squared_distance_equals_l1():
    # the concatenated codeword geometry carries the L1 grid distance exactly
    tax = builtin_taxonomy("goemotions-grid-5x5")
    from emord.taxonomy import grid_distance

    for a, b in itertools.combinations(tax.labels, 2):
        va = target_for(tax, a, MODE_ORDINAL_2D).values
        vb = target_for(tax, b, MODE_ORDINAL_2D).values
        assert float(((va - vb) ** 2).sum()) == grid_distance(tax, a, b)


def test_codewords_matrix():
    codes = codewords(4)
    assert codes.shape == (4, 3)
    assert codes.tolist() == [
        [0, 0, 0],
        [1, 0, 0],
        [1, 1, 0],
        [1, 1, 1],
    ]


def test_dtype_control():
    assert encode_thermometer(1, 3, dtype=np.float32).dtype == np.float32
    assert target_for(
        builtin_taxonomy("isear-valence"), "joy", MODE_ORDINAL_1D, dtype=np.float32
    ).values.dtype == np.float32
