"""Auditing index distributions against the standard normal.

If the indices are true z-scores of a normal population, each should follow
the standard normal: 94.5% of exams below 1.6 SD, 5.0% between 1.6 and 2.6,
and 0.47% beyond 2.6.  Density curves and their modes reveal when an index
family is shifted; category shares quantify how many exams that pushes over
the screening cutoffs.

Writes density SVGs to demos/out/.

Run:  python demos/05_distribution_audit.py
"""

import dataclasses
import math
from pathlib import Path

import numpy as np

from badlab import published
from badlab.badfit import MODEL_INDICES
from badlab.distributions import category_breakdown, kde, standard_normal_targets
from badlab.svgplot import Series, render_plot
from badlab.synthetic import default_population_spec, make_population

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

targets = standard_normal_targets(1.6, 2.6)
print(f"standard-normal targets: normal {targets.normal:.1%}, suspicious "
      f"{targets.suspicious:.1%}, abnormal {targets.abnormal:.2%}")

# A population whose index means sit at the modes reported for a real
# normal-eye sample (three indices shifted right, one left).
spec = dataclasses.replace(
    default_population_spec(n=4000, seed=29),
    means={name: published.REPORTED_INDEX_MODES[name] for name in MODEL_INDICES},
)
ds = make_population(spec)

print(f"\n{'index':8} {'mode':>7} {'normal':>8} {'susp':>7} {'abn':>7}   reported shares")
for name in MODEL_INDICES:
    values = ds.column(name)
    curve = kde(values)
    shares = category_breakdown(values)
    reported = published.REPORTED_CATEGORY_SHARES[name]
    print(
        f"{name:8} {curve.mode():+7.2f} {shares.normal:8.1%} {shares.suspicious:7.1%}"
        f" {shares.abnormal:7.2%}   ({reported[0]:.1f} / {reported[1]:.1f} / {reported[2]:.1f})"
    )

    reference = np.exp(-0.5 * curve.grid**2) / math.sqrt(2.0 * math.pi)
    svg = render_plot(
        [
            Series(curve.grid, curve.density, label="empirical"),
            Series(curve.grid, reference, label="standard normal", color="#d62728", dashed=True),
        ],
        title=f"density of {name}",
        xlabel=name,
        ylabel="density",
    )
    (OUT / f"density_{name}.svg").write_text(svg)

print("\nA mode shift of +0.76 SD (the progression index) alone pushes ~19% of")
print("a normal population past the suspicious cutoff, mirroring the reported")
print("shares in the right-hand column.")
print(f"density charts written to {OUT}/")
