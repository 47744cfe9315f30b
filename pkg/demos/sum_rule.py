"""
Dirichlet plus free: does the second coefficient cancel?
========================================================

    python demos/sum_rule.py [alpha] [tau_max]
"""
import os
import sys

from elastweyl import assemble_predictions, check_sum_rule, make_material, unit_disk
from elastweyl.spectrum import elastic_spectrum_cached

alpha = float(sys.argv[1]) if len(sys.argv) > 1 else 1 / 3
tau_max = float(sys.argv[2]) if len(sys.argv) > 2 else 2e4
cache = os.environ.get("WEYL_CACHE_DIR", ".weyl_cache")

mat = make_material(1.0, 1.0 / alpha)
sd = elastic_spectrum_cached(mat, "dir", tau_max, cache_dir=cache)[0]
sf = elastic_spectrum_cached(mat, "free", tau_max, cache_dir=cache)[0]
preds = (assemble_predictions(mat, unit_disk(), "dir"),
         assemble_predictions(mat, unit_disk(), "free", "family" if alpha >= 1 else "unit"))
res = check_sum_rule(sd, sf, preds)
print(f"alpha = {alpha:.4g}, tau_max = {tau_max:g}")
print(f"d_dir = {res.d_dir:+.6f}   d_free = {res.d_free:+.6f}")
print(f"sum   = {res.measured_sum:+.6f} +- {res.stderr:.1e}   zero within 2 stderr: {res.within_2_stderr}")
for name, v in res.predicted_sums.items():
    print(f"  predicted by {name:<30} {v:+.6f}")
