"""The 5x5 valence/arousal grid: 23 classes, and a class held out entirely.

Part 1 trains softmax and dual-thermometer (ordinal-2d) heads on the same
23-class corpus at the same small budget and compares macro-F1: with 23
sparse classes, sharing structure across the grid pays off quickly.

Part 2 deletes one class ("joy") from training, then asks the ordinal-2d
model where the held-out texts land on the grid.  A label-blind softmax
could only ever answer "one of the 22 seen labels"; the grid model places
them in the right neighborhood, because nearby emotions pull predictions
toward the missing cell.

Run:  python3 demos/04_grid_holdout.py       (about 30 seconds)
"""

from emord import (
    SyntheticSpec,
    builtin_taxonomy,
    evaluate,
    generate_synthetic,
    holdout_proximity,
)
from emord.data import filter_labels
from emord.trainer import TrainConfig, Trainer

taxonomy = builtin_taxonomy("goemotions-grid-5x5")

# ----------------------------------------------------------- part 1: macro-F1
spec = SyntheticSpec(
    taxonomy=taxonomy,
    examples_per_class=100,
    p_signal=0.25,
    p_confuse=0.3,
    sequence_length=20,
    seed=0,
)
corpus = generate_synthetic(spec)
print(f"part 1: {len(corpus)} texts across {taxonomy.num_labels} grid classes")

scores = {}
for mode in ("softmax", "ordinal-2d"):
    config = TrainConfig(
        mode=mode,
        taxonomy="goemotions-grid-5x5",
        epochs=8,
        seed=0,
        learning_rate=3e-3,
    )
    trainer = Trainer(config, corpus)
    result = trainer.run()
    report = evaluate(result.final, trainer.test_split).report
    scores[mode] = report
    print(
        f"  {mode:>10}: macro-F1 {report.macro_f1:.3f}, accuracy {report.accuracy:.3f}, "
        f"mean error distance {report.mean_error_distance:.2f}"
    )
gap = scores["ordinal-2d"].macro_f1 - scores["softmax"].macro_f1
print(f"  macro-F1 gap: {gap:+.3f} in favor of the grid head")
print()

# -------------------------------------------------------- part 2: held-out joy
held_out = "joy"
print(f"part 2: training again WITHOUT {held_out!r} (cell {taxonomy.cell(held_out)})")
spec = SyntheticSpec(
    taxonomy=taxonomy,
    examples_per_class=150,
    p_signal=0.5,
    p_confuse=0.3,
    sequence_length=20,
    seed=0,
)
full = generate_synthetic(spec)
kept = [label for label in taxonomy.labels if label != held_out]

config = TrainConfig(
    mode="ordinal-2d",
    taxonomy="goemotions-grid-5x5",
    epochs=8,
    seed=0,
    learning_rate=3e-3,
)
trainer = Trainer(config, filter_labels(full, kept))
result = trainer.run()

report = holdout_proximity(result.final, filter_labels(full, [held_out]), held_out)
print(f"  {report.n_examples} held-out texts; where do their decoded cells land?")
print()
print("  L1 distance from the true cell -> count")
peak = max(report.distribution.values())
for d, count in sorted(report.distribution.items()):
    if count:
        bar = "#" * max(1, round(50 * count / peak))
        print(f"    {d}: {bar} ({count})")
print()
print(f"  mean distance {report.mean_distance:.2f}")
print("  (a uniform-random cell would average 2.4 from the grid center;")
print("   the model never saw a single 'joy' example, yet lands next door)")
