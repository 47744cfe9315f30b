"""
Rayleigh roots and boundary coefficients across alpha
=====================================================

Prints the real roots of the Rayleigh sextic and the Dirichlet / free beta
coefficients as the ratio alpha = ct2 / cl2 moves towards 1.
"""
import math

from elastweyl import beta_dirichlet, beta_free, rayleigh_roots

# at alpha = 1 the sextic has a double root at 0 and no root in (0, 1)
rr = rayleigh_roots(1.0)
for (g, mult), res in zip(rr.roots, rr.residuals()):
    print(f"gamma = {g:+.12f}   mult {mult}   residual {res:.1e}")
print("root in (0,1):", rr.unit_interval_root)

# the unit-interval root is the Rayleigh wave speed over the shear speed
print(f"\n{'alpha':>7} {'gamma':>10} {'beta_dir':>12} {'beta_free':>12}")
for alpha in (0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999):
    g = rayleigh_roots(alpha).unit_interval_root
    print(f"{alpha:>7g} {g:>10.6f} {beta_dirichlet(alpha):>12.6f} {beta_free(alpha, g):>12.4f}")

# beta_free grows without bound as alpha -> 1 since gamma -> 0
print("\nbeta_dir(1) =", beta_dirichlet(1.0), " (-2 expected)")
# heat coefficient d = Gamma(3/2) beta L / (4 pi ct) with L = 2 pi, ct = 1
L = 2 * math.pi
print("Dirichlet heat d at alpha = 1:", math.gamma(1.5) * beta_dirichlet(1.0) * L / (4 * math.pi),
      " (-sqrt(pi)/2 =", -math.sqrt(math.pi) / 2, ")")
