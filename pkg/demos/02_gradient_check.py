"""Verify the hand-written backward pass against finite differences.

The whole network (embedding -> two 1d convolutions -> masked mean pool ->
three dense layers -> head) is differentiated by hand in numpy.  This demo
compares every layer's analytic gradient with central finite differences on
a tiny float64 model, for each of the three head modes, and then shows that
the harness actually catches a deliberately damaged gradient.

Run:  python3 demos/02_gradient_check.py
"""

from emord.gradcheck import check_gradients

for mode in ("softmax", "ordinal-1d", "ordinal-2d"):
    report = check_gradients(mode, seed=0)
    print(report.format_text())
    print()

# Negative control: nudge one entry of one analytic gradient and the check
# must fail -- otherwise the tolerance would be meaningless.
print("now corrupting one gradient entry on purpose...")
report = check_gradients("softmax", seed=0, corrupt=True)
print(report.format_text())
assert not report.passed, "the corrupted gradient slipped through!"
print()
print("corruption detected, as it should be")
