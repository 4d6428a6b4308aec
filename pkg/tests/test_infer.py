"""Output decoding rules for every head mode, plus text-level prediction."""

import numpy as np
import pytest

from emord.checkpoint import Checkpoint
from emord.codec import encode_thermometer
from emord.data import DataError, LabeledCorpus, build_vocab, encode_text
from emord.infer import decode_outputs, nearest_labeled_cell, predict_ids, predict_text
from emord.net import ModelConfig, forward, init_params
from emord.taxonomy import builtin_taxonomy

ISEAR = builtin_taxonomy("isear-valence")
GRID = builtin_taxonomy("goemotions-grid-5x5")


def test_softmax_decode_fills_rank():
    outputs = np.zeros((2, 7))
    outputs[0, 6] = 1.0  # joy
    outputs[1, 0] = 1.0  # sadness
    preds = decode_outputs(ISEAR, "softmax", outputs)
    assert [p.label for p in preds] == ["joy", "sadness"]
    assert [p.rank for p in preds] == [6, 0]
    assert all(p.cell is None and not p.off_grid for p in preds)


def test_softmax_decode_fills_cell_on_grid():
    outputs = np.zeros((1, 23))
    outputs[0, GRID.index("pride")] = 1.0
    (pred,) = decode_outputs(GRID, "softmax", outputs)
    assert pred.label == "pride"
    assert pred.cell == (3, 2)


def test_ordinal_1d_decode_nearest_codeword():
    # exact codeword for rank 4 -> surprise
    row = encode_thermometer(4, 7)[None, :].astype(np.float64)
    (pred,) = decode_outputs(ISEAR, "ordinal-1d", row)
    assert pred.label == "surprise"
    assert pred.rank == 4
    # muddy outputs still decode to the nearest codeword
    noisy = np.array([[0.9, 0.85, 0.6, 0.2, 0.1, 0.05]])
    (pred,) = decode_outputs(ISEAR, "ordinal-1d", noisy)
    assert pred.rank == 3  # guilt
    assert pred.label == "guilt"


def test_ordinal_2d_decode_labeled_cell():
    target = np.concatenate([encode_thermometer(3, 5), encode_thermometer(2, 5)])
    (pred,) = decode_outputs(GRID, "ordinal-2d", target[None, :].astype(float))
    assert pred.label == "pride"
    assert pred.cell == (3, 2)
    assert not pred.off_grid


def test_ordinal_2d_decode_off_grid_resolution():
    # (2, 0) has no label; nearest labeled cells at distance 1 are
    # remorse (1,0), relief (3,0) -> lower valence wins the tie
    raw = np.concatenate([encode_thermometer(2, 5), encode_thermometer(0, 5)])
    (pred,) = decode_outputs(GRID, "ordinal-2d", raw[None, :].astype(float))
    assert pred.off_grid
    assert pred.cell == (2, 0)  # the raw decoded cell is preserved
    assert pred.label == "remorse"


def test_nearest_labeled_cell_tie_breaks():
    assert nearest_labeled_cell(GRID, (2, 0)) == "remorse"
    # (2,1) neighbors at d=1: disappointment (1,1), caring (3,1),
    # curiosity (2,2) -> lowest valence wins
    assert nearest_labeled_cell(GRID, (2, 1)) == "disappointment"
    # exact hits resolve to themselves
    assert nearest_labeled_cell(GRID, (0, 0)) == "grief"


def test_prediction_to_dict():
    outputs = np.zeros((1, 7))
    outputs[0, 2] = 1.0
    (pred,) = decode_outputs(ISEAR, "softmax", outputs)
    d = pred.to_dict()
    assert d["label"] == "anger"
    assert d["mode"] == "softmax"
    assert d["rank"] == 2
    assert d["off_grid"] is False


def make_checkpoint(mode="softmax"):
    taxonomy = ISEAR
    corpus = LabeledCorpus((("alpha beta gamma delta", "joy"),))
    vocab = build_vocab(corpus)
    width = {"softmax": 7, "ordinal-1d": 6}[mode]
    config = ModelConfig(
        vocab_size=vocab.size,
        output_width=width,
        head_mode=mode,
        embed_dim=4,
        conv_channels=(3, 3),
        kernel_sizes=(6, 4),
        ffnn_hidden=(5, 4),
        dtype="float32",
    )
    return Checkpoint(
        config=config,
        params=init_params(config, seed=0),
        taxonomy=taxonomy,
        vocab=vocab,
        max_seq_length=12,
        seed=0,
    )


def test_predict_ids_matches_forward(mode="ordinal-1d"):
    ck = make_checkpoint(mode)
    rng = np.random.default_rng(1)
    ids = rng.integers(1, ck.vocab.size, size=(7, 12))
    preds = predict_ids(ck, ids, batch_size=3)  # forces chunking
    outputs, _ = forward(ck.params, ck.config, ids)
    direct = decode_outputs(ck.taxonomy, mode, outputs)
    assert [p.label for p in preds] == [p.label for p in direct]


def test_predict_text_roundtrip():
    ck = make_checkpoint()
    pred = predict_text(ck, "alpha beta unknownword gamma")
    ids = encode_text("alpha beta unknownword gamma", ck.vocab, ck.max_seq_length)
    outputs, _ = forward(ck.params, ck.config, ids[None, :])
    (direct,) = decode_outputs(ck.taxonomy, "softmax", outputs)
    assert pred.label == direct.label


def test_predict_text_rejects_vanishing_input():
    ck = make_checkpoint()
    with pytest.raises(DataError, match="no tokens"):
        predict_text(ck, "... !!! ...")
