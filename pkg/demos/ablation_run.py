"""
Comparing retrieval modes on a synthetic workload
=================================================

Generates a seeded exam workload, grades it three times (question text only,
plus the reference gate, plus the fact cache and fallback), and prints the
Pearson agreement with the generator's oracle scores at growing prefixes.
"""

from gradekit.pipeline import MODE_ORDER, ablation_suite
from gradekit.synthetic import SyntheticSpec

spec = SyntheticSpec(n_questions=8, n_facts_per_topic=10,
                     n_responses_per_question=20, seed=11)
rows = ablation_suite(spec, seeds=3)

lengths = sorted({n for _, n, _ in rows})
by_mode = {mode: {n: r for m, n, r in rows if m == mode} for mode in
           (m.value for m in MODE_ORDER)}

header = "n".rjust(6) + "".join(mode.rjust(16) for mode in by_mode)
print(header)
for n in lengths:
    cells = "".join(f"{by_mode[mode][n]:16.3f}" for mode in by_mode)
    print(f"{n:6d}{cells}")

final = {mode: series[lengths[-1]] for mode, series in by_mode.items()}
print()
print("each retrieval stage should buy agreement:",
      " <= ".join(f"{v:.3f}" for v in final.values()))
