"""Comparing published normal-group statistics across studies.

Published normal groups report strikingly different means for the model
output, from 0.43 to 1.3 SD.  With group means, SDs, and sizes, Welch's
t-test shows most of those differences are statistically significant; values
published in source units (micrometers of relational thickness, progression
ratios) are converted onto the SD scale through the recovered normalization
so the groups can be compared at all.

Run:  python demos/06_study_comparison.py
"""

from badlab.meta import load_bundled_studies, study_table
from badlab.normalization import reference_estimates

studies = load_bundled_studies()
report = study_table(studies, reference_estimates())

dfinal = [r for r in report.rows if r.quantity == "d_final"]
print(f"{'study':20} {'n':>5} {'mean':>7} {'sd':>6} {'median':>8}")
for row in dfinal:
    mean = "" if row.mean is None else f"{row.mean:7.2f}"
    sd = "" if row.sd is None else f"{row.sd:6.2f}"
    median = "" if row.median is None else f"{row.median:8.2f}"
    print(f"{row.study_id:20} {row.n:5d} {mean:>7} {sd:>6} {median:>8}")

significant = [(a, b, r) for a, b, r in report.welch if r.p < 0.05]
print(f"\npairwise Welch tests on the group means: {len(report.welch)} comparisons, "
      f"{len(significant)} significant at 0.05")
for a, b, r in report.welch:
    marker = "*" if r.p < 0.05 else " "
    print(f"  {marker} {a:18} vs {b:18}  t = {r.t:+6.2f}, df = {r.df:6.1f}, p = {r.p:.2e}")

# Source-unit rows were converted through the normalization; show one.
converted = [r for r in report.rows if r.quantity == "d_aa" and "converted" in r.note]
for row in converted:
    print(f"\nconverted row: {row.study_id} d_aa -> ({row.mean:.2f} ± {row.sd:.2f}) SD")

print("\nGroups drawn from comparable populations should not differ by a full")
print("standard deviation; these gaps point at normative-reference mismatch")
print("rather than at the tested populations themselves.")
