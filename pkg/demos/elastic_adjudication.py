"""
Measuring the second heat coefficient of the elastic disk
=========================================================

Computes (or loads from the cache) the free-boundary Lame spectrum of the
unit disk and compares the measured d with every prediction source.

    python demos/elastic_adjudication.py [alpha] [tau_max]
"""
import os
import sys

from elastweyl import adjudicate, assemble_predictions, make_material, unit_disk
from elastweyl.spectrum import elastic_spectrum_cached

alpha = float(sys.argv[1]) if len(sys.argv) > 1 else 0.9
tau_max = float(sys.argv[2]) if len(sys.argv) > 2 else 2e4
cache = os.environ.get("WEYL_CACHE_DIR", ".weyl_cache")

mat = make_material(1.0, 1.0 / alpha)
policy = "family" if alpha >= 1 else "unit"
for bc in ("dir", "free"):
    spec, path, hit = elastic_spectrum_cached(mat, bc, tau_max, cache_dir=cache)
    print(f"\n== alpha = {alpha:g}, {bc}: {spec.total} eigenvalues "
          f"({'cache' if hit else 'computed'}), max residual {spec.residual.max():.1e}")
    preds = assemble_predictions(mat, unit_disk(), bc, "unit" if bc == "dir" else policy)
    rep = adjudicate(spec, preds)
    h = rep.measured["heat_d"]
    print(f"measured d = {h['estimate']:.6f} +- {h['stderr']:.1e}"
          f"   (counting route {rep.measured['counting_d_equivalent']:.4f})")
    for name, dist in sorted(rep.distances.items(), key=lambda kv: kv[1]["abs"]):
        print(f"  {name:<34} {dist['predicted']:>10.5f}   {dist['in_stderr']:>10.1f} stderr")
    print(f"decisive: {rep.decisive}   winner: {rep.winner}")
    for note in rep.notes:
        print("note:", note)
