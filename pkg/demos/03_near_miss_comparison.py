"""Softmax vs ordinal head: same accuracy, very different mistakes.

A synthetic corpus plants class-marker tokens in filler text; 30% of the
markers are swapped for a *neighboring* class's marker, so the signal is
genuinely confusable and no classifier can be perfect.  A plain softmax
head treats all seven emotions as unrelated symbols, so when it misses, it
misses anywhere.  The ordinal head regresses onto thermometer codes, whose
squared distance equals the rank gap; its misses crowd next door.

Run:  python3 demos/03_near_miss_comparison.py       (about 20 seconds)
"""

from emord import SyntheticSpec, builtin_taxonomy, evaluate, generate_synthetic
from emord.trainer import TrainConfig, Trainer

taxonomy = builtin_taxonomy("isear-valence")
print("scale:", " < ".join(taxonomy.labels))

spec = SyntheticSpec(
    taxonomy=taxonomy,
    examples_per_class=400,
    p_signal=0.3,     # 30% of tokens carry class signal...
    p_confuse=0.3,    # ...and 30% of those point at a neighboring class
    sequence_length=16,
    seed=0,
)
corpus = generate_synthetic(spec)
print(f"corpus: {len(corpus)} texts, e.g. {corpus.records[0][0]!r} -> {corpus.records[0][1]}")
print()

reports = {}
for mode in ("softmax", "ordinal-1d"):
    config = TrainConfig(
        mode=mode,
        taxonomy="isear-valence",
        epochs=4,
        seed=0,
        split=(0.7, 0.1, 0.2),
    )
    trainer = Trainer(config, corpus)
    result = trainer.run()
    reports[mode] = evaluate(result.final, trainer.test_split).report
    print(f"trained {mode}: test accuracy {reports[mode].accuracy:.3f}")

print()
print("how far off are the errors?  (distance 1 = adjacent rank)")
print()
print(f"{'distance':>8}  {'softmax':>7}  {'ordinal-1d':>10}")
width = max(max(r.error_histogram.values()) for r in reports.values())
for d in sorted(reports["softmax"].error_histogram):
    base = reports["softmax"].error_histogram[d]
    ordi = reports["ordinal-1d"].error_histogram[d]
    bar_base = "#" * round(30 * base / width)
    bar_ordi = "#" * round(30 * ordi / width)
    print(f"{d:>8}  {base:>7}  {ordi:>10}   {bar_base:<30} | {bar_ordi}")

print()
for mode, report in reports.items():
    errors = sum(report.error_histogram.values())
    far = sum(n for d, n in report.error_histogram.items() if d >= 3)
    print(
        f"{mode:>10}: mean error distance {report.mean_error_distance:.2f}, "
        f"{far}/{errors} errors land 3+ ranks away"
    )
print()
print("same ballpark accuracy, but the ordinal head's mistakes stay close.")
