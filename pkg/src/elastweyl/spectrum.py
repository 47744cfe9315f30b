"""Eigenvalues of the Laplacian and the Lame operator on simple planar domains.

The elastic problem on the unit disk is solved with the Helmholtz ansatz

    u = grad phi + curl(psi z),
    phi = A J_m(k_l r) e^{i m theta},   psi = -i B J_m(k_t r) e^{i m theta},

with k_l = omega / c_l, k_t = omega / c_t and tau = omega^2.  The two boundary
rows (displacement or traction at r = 1) give a 2x2 system in (A, B) whose
determinant is scanned in omega for every angular order m.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy import special
from scipy.optimize import brentq, minimize_scalar

from .material import ElasticMaterial
from .numerics import bessel_derivs, bessel_pair_scaled


class SpectrumError(RuntimeError):
    pass


class CompletenessError(SpectrumError):
    """The Weyl band check failed: roots were probably missed."""


class BudgetError(SpectrumError):
    """An order or index sweep exceeded its configured limit."""


# ---------------------------------------------------------------------------
# domains and containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DomainDescriptor:
    kind: str
    a: Optional[float] = None
    b: Optional[float] = None

    @property
    def vol_n(self) -> float:
        if self.kind == "unit_disk":
            return math.pi
        return self.a * self.b

    @property
    def vol_bdry(self) -> float:
        if self.kind == "unit_disk":
            return 2 * math.pi
        return 2 * (self.a + self.b)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "vol_n": self.vol_n, "vol_bdry": self.vol_bdry}
        if self.kind == "rectangle":
            d.update(a=self.a, b=self.b)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DomainDescriptor":
        if d["kind"] == "unit_disk":
            return unit_disk()
        return rectangle(d["a"], d["b"])


def unit_disk() -> DomainDescriptor:
    return DomainDescriptor("unit_disk")


def rectangle(a: float, b: float) -> DomainDescriptor:
    if a <= 0 or b <= 0:
        raise ValueError("rectangle sides must be positive")
    return DomainDescriptor("rectangle", float(a), float(b))


@dataclass
class CompletenessCert:
    weyl_band_ok: bool
    max_band_deviation: float
    band_limit: float
    scan_step: float
    residual_max: float


@dataclass
class Spectrum:
    tau: np.ndarray
    mult: np.ndarray
    m: np.ndarray
    k: np.ndarray
    residual: np.ndarray
    operator: str
    bc: str
    material: dict
    domain: DomainDescriptor
    tau_max: float
    completeness: Optional[CompletenessCert] = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.tau)

    @property
    def total(self) -> int:
        return int(self.mult.sum())

    def expanded(self) -> np.ndarray:
        """Eigenvalues repeated by multiplicity, ascending."""
        return np.repeat(self.tau, self.mult)

    @property
    def weyl_leading(self) -> float:
        """Leading counting coefficient a in N(tau) ~ a tau (n = 2)."""
        S = self.domain.vol_n
        if self.operator == "lame":
            return (1 / self.material["cl2"] + 1 / self.material["ct2"]) * S / (4 * math.pi)
        return self.material.get("components", 1) * S / (4 * math.pi * self.material["c2"])

    def header(self) -> dict:
        return {
            "operator": self.operator, "bc": self.bc, "material": self.material,
            "domain": self.domain.to_dict(), "tau_max": self.tau_max,
            "certificate": asdict(self.completeness) if self.completeness else None,
            "meta": self.meta,
        }


def _finalize(rows: list[tuple[float, int, int, int, float]], **kw) -> Spectrum:
    """Sort rows (tau, mult, m, k, residual) and merge bit-identical tau values."""
    rows.sort(key=lambda r: (r[0], r[2], r[3]))
    merged: list[list] = []
    for r in rows:
        if merged and merged[-1][0] == r[0]:
            merged[-1][1] += r[1]
            merged[-1][4] = max(merged[-1][4], r[4])
        else:
            merged.append(list(r))
    arr = list(zip(*merged)) if merged else [[], [], [], [], []]
    return Spectrum(tau=np.array(arr[0], dtype=float), mult=np.array(arr[1], dtype=np.int64),
                    m=np.array(arr[2], dtype=np.int64), k=np.array(arr[3], dtype=np.int64),
                    residual=np.array(arr[4], dtype=float), **kw)


def weyl_band(tau: np.ndarray, mult: np.ndarray, a_lead: float, tau_max: float) -> float:
    """max |N(tau) - a tau| / sqrt(tau) just below and at every eigenvalue and at tau_max."""
    pos = tau > 0
    if not np.any(pos):
        return 0.0
    cum = np.cumsum(mult)
    below = cum - mult
    t = tau[pos]
    dev = np.maximum(np.abs(below[pos] - a_lead * t), np.abs(cum[pos] - a_lead * t)) / np.sqrt(t)
    end = abs(cum[-1] - a_lead * tau_max) / math.sqrt(tau_max)
    return float(max(dev.max(), end))


def certify(spec: Spectrum, b_ref: float, slack: float, scan_step: float) -> CompletenessCert:
    dev = weyl_band(spec.tau, spec.mult, spec.weyl_leading, spec.tau_max)
    limit = slack * abs(b_ref)
    res = float(spec.residual.max()) if len(spec.residual) else 0.0
    return CompletenessCert(bool(dev <= limit), dev, limit, scan_step, res)


# ---------------------------------------------------------------------------
# scalar baselines
# ---------------------------------------------------------------------------

def scalar_disk_spectrum(c2: float, bc: str, tau_max: float, components: int = 1,
                         max_order: int = 20000, band_slack: float = 3.0) -> Spectrum:
    """Spectrum of -c2 * Laplacian on the unit disk (``components`` copies).

    Dirichlet eigenvalues are c2 j_{m,k}^2, Neumann ones c2 j'_{m,k}^2 plus the
    constant mode; m >= 1 carries multiplicity 2 * components.
    """
    if tau_max <= 0 or c2 <= 0:
        raise ValueError("tau_max and c2 must be positive")
    if bc not in ("dir", "neu"):
        raise ValueError(f"scalar disk supports bc 'dir' or 'neu', not {bc!r}")
    K = math.sqrt(tau_max / c2)
    zeros_fn = special.jn_zeros if bc == "dir" else special.jnp_zeros
    rows = []
    if bc == "neu":
        rows.append((0.0, components, 0, 0, 0.0))
    m = 0
    while True:
        if m > max_order:
            raise BudgetError(f"angular order sweep exceeded {max_order}")
        nt = int(K / math.pi) + 3
        while True:
            z = zeros_fn(m, nt)
            if z[-1] > K:
                break
            nt *= 2
        z = z[z <= K]
        if len(z) == 0:
            break
        mult = components * (1 if m == 0 else 2)
        vals = special.jv(m, z) if bc == "dir" else 0.5 * (special.jv(m - 1, z) - special.jv(m + 1, z))
        for kk, (zz, rv) in enumerate(zip(z, vals), start=1):
            rows.append((c2 * zz * zz, mult, m, kk, abs(float(rv))))
        m += 1
    spec = _finalize(rows, operator="scalar_laplace", bc=bc,
                     material={"c2": c2, "components": components}, domain=unit_disk(),
                     tau_max=float(tau_max),
                     meta={"method": "scipy.special Bessel zeros", "m_max": m - 1})
    b_ref = components * spec.domain.vol_bdry / (4 * math.pi * math.sqrt(c2))
    spec.completeness = certify(spec, b_ref, band_slack, 0.0)
    return spec


def rectangle_scalar_spectrum(a: float, b: float, c2: float, bc: str, tau_max: float,
                              band_slack: float = 3.0) -> Spectrum:
    """Exhaustive enumeration of c2 pi^2 (p^2/a^2 + q^2/b^2) below tau_max."""
    if a <= 0 or b <= 0 or c2 <= 0 or tau_max <= 0:
        raise ValueError("a, b, c2, tau_max must be positive")
    if bc not in ("dir", "neu"):
        raise ValueError(f"rectangle supports bc 'dir' or 'neu', not {bc!r}")
    p0 = 1 if bc == "dir" else 0
    pmax = int(math.floor(a * math.sqrt(tau_max / c2) / math.pi))
    p = np.arange(p0, pmax + 1)
    # lattice points on the cut circle count as inside; rounding must not drop them
    lim = tau_max * (1 + 1e-12)
    groups: dict[float, list] = {}
    for pp in p:
        rest = lim / (c2 * math.pi**2) - (pp / a) ** 2
        if rest < (p0 / b) ** 2:
            break
        qmax = int(math.floor(b * math.sqrt(max(rest, 0.0)) + 1e-9))
        q = np.arange(p0, qmax + 1)
        vals = c2 * ((pp * math.pi / a) ** 2 + (q * math.pi / b) ** 2)
        for qq, v in zip(q, vals):
            if v <= lim:
                key = float(f"{v:.12g}")
                g = groups.setdefault(key, [0, int(pp), int(qq)])
                g[0] += 1
    rows = [(v, g[0], g[1], g[2], 0.0) for v, g in groups.items()]
    spec = _finalize(rows, operator="scalar_laplace", bc=bc,
                     material={"c2": c2, "components": 1}, domain=rectangle(a, b),
                     tau_max=float(tau_max), meta={"method": "lattice enumeration"})
    b_ref = spec.domain.vol_bdry / (4 * math.pi * math.sqrt(c2))
    spec.completeness = certify(spec, b_ref, band_slack, 0.0)
    return spec


# ---------------------------------------------------------------------------
# elastic disk
# ---------------------------------------------------------------------------

def _scaled_rows(m: int, omega, material: ElasticMaterial, bc: str):
    """Boundary matrix with Bessel-envelope column scaling and fixed row scales.

    Columns are divided by E(k) = sqrt(J_m(k)^2 + J_m'(k)^2) (positive, so
    the zero set and sign structure are untouched).  Each row is then divided
    by an upper bound of its entries' magnitudes, which depends on omega and m
    only, so that |det| <= 1 and a near-zero determinant means rank loss.
    """
    omega = np.asarray(omega, dtype=float)
    ct2, cl2 = material.ct2, material.cl2
    kl = omega / math.sqrt(cl2)
    kt = omega / math.sqrt(ct2)
    Pl, Ql = bessel_pair_scaled(m, kl)
    Pt, Qt = bessel_pair_scaled(m, kt)
    if bc == "dir":
        # u_r = 0, u_theta = 0
        M11, M12 = Ql, m * Pt
        M21, M22 = m * Pl, Qt
        s1 = np.hypot(kl, m)
        s2 = np.hypot(m, kt)
    elif bc == "free":
        # sigma_rr = 0, sigma_rtheta / ct2 = 0 (Bessel ODE used to drop J'')
        w2 = omega * omega
        M11 = -w2 * Pl + 2 * ct2 * (m * m * Pl - Ql)
        M12 = 2 * ct2 * m * (Qt - Pt)
        M21 = 2 * m * (Pl - Ql)
        M22 = 2 * Qt + (kt * kt - 2 * m * m) * Pt
        s1 = np.hypot(w2 + 2 * ct2 * (m * m + kl), 2 * ct2 * m * (kt + 1))
        s2 = np.hypot(2 * m * (1 + kl), 2 * kt + kt * kt + 2 * m * m)
    else:
        raise ValueError(f"elastic disk supports bc 'dir' or 'free', not {bc!r}")
    return (M11 / s1, M12 / s1), (M21 / s2, M22 / s2)


def elastic_disk_determinant(m: int, omega, material: ElasticMaterial, bc: str):
    """Normalized 2x2 boundary determinant at angular order m (vectorized in omega)."""
    (a, b), (c, d) = _scaled_rows(m, omega, material, bc)
    out = a * d - b * c
    return float(out) if np.ndim(out) == 0 else out


def _m0_factors(material: ElasticMaterial, bc: str) -> list[tuple[str, Callable]]:
    """At m = 0 the system is diagonal: radial (phi) and torsional (psi) modes."""
    def radial(w):
        (a, _), _ = _scaled_rows(0, w, material, bc)
        return a

    def torsional(w):
        _, (_, d) = _scaled_rows(0, w, material, bc)
        return d

    return [("radial", radial), ("torsional", torsional)]


def _scalarize(fun: Callable) -> Callable[[float], float]:
    return lambda x: float(np.asarray(fun(np.array([x])))[0])


def _grid_roots(fun: Callable, grid: np.ndarray, xtol_rel: float,
                double_tol: float = 1e-13) -> list[float]:
    """Roots of ``fun`` on the span of ``grid``.

    Sign changes between neighbouring nodes are refined by Brent's method.
    Interior local minima of |fun| without a sign change are examined with a
    bounded minimisation: a dip through zero yields a close root pair, a dip
    to round-off level is recorded as a double root.
    """
    v = np.asarray(fun(grid), dtype=float)
    f = _scalarize(fun)
    out: list[float] = []
    eps4 = 4 * np.finfo(float).eps

    def refine(lo, hi):
        return brentq(f, lo, hi, xtol=xtol_rel * max(1.0, hi), rtol=eps4, maxiter=200)

    exact = np.nonzero(v == 0.0)[0]
    out.extend(grid[exact].tolist())
    sc = np.nonzero(v[:-1] * v[1:] < 0)[0]
    for i in sc:
        out.append(refine(grid[i], grid[i + 1]))
    av = np.abs(v)
    cand = np.nonzero((av[1:-1] <= av[:-2]) & (av[1:-1] <= av[2:])
                      & (v[:-2] * v[1:-1] > 0) & (v[1:-1] * v[2:] > 0))[0] + 1
    for i in cand:
        s = math.copysign(1.0, v[i])
        lo, hi = grid[i - 1], grid[i + 1]
        res = minimize_scalar(lambda x: s * f(x), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-13 * max(1.0, hi)})
        x, fx = float(res.x), float(res.fun)
        if fx < 0:
            out.append(refine(lo, x))
            out.append(refine(x, hi))
        elif fx <= double_tol:
            out.extend([x, x])
    out.sort()
    return out


@dataclass(frozen=True)
class ScanSettings:
    subdivisions: int = 16
    refine_tol: float = 1e-13
    order_patience: int = 2
    max_order: int = 20000
    band_slack: float = 2.0

    def step(self, material: ElasticMaterial) -> float:
        return math.pi * min(material.ct, material.cl) / 2 / self.subdivisions


def elastic_roots_for_order(m: int, material: ElasticMaterial, bc: str, omega_max: float,
                            step: float, refine_tol: float = 1e-13) -> list[tuple[float, int]]:
    """(omega, multiplicity) pairs for one angular order, omega <= omega_max."""
    n = int(math.ceil(omega_max / step)) + 1
    grid = step * np.arange(1, n + 1)
    if m == 0:
        roots = []
        for _, fac in _m0_factors(material, bc):
            roots += [(w, 1) for w in _grid_roots(fac, grid, refine_tol)]
        roots.sort()
    else:
        roots = [(w, 2) for w in _grid_roots(
            lambda w: elastic_disk_determinant(m, w, material, bc), grid, refine_tol)]
    return [(w, mu) for w, mu in roots if w <= omega_max]


def elastic_disk_spectrum(material: ElasticMaterial, bc: str, tau_max: float,
                          settings: ScanSettings = ScanSettings(), verify: bool = True,
                          b_ref: Optional[float] = None, check_band: bool = True) -> Spectrum:
    """Lame eigenvalues tau = omega^2 <= tau_max on the unit disk.

    Orders m are swept upward until ``order_patience`` consecutive orders have
    no root below sqrt(tau_max).  Free boundary spectra get the three rigid
    motions inserted at tau = 0.
    """
    if tau_max <= 0:
        raise ValueError("tau_max must be positive")
    if bc not in ("dir", "free"):
        raise ValueError(f"elastic disk supports bc 'dir' or 'free', not {bc!r}")
    W = math.sqrt(tau_max)
    h = settings.step(material)
    rows = []
    empty = 0
    m = 0
    while empty < settings.order_patience:
        if m > settings.max_order:
            raise BudgetError(f"angular order sweep exceeded {settings.max_order}")
        roots = elastic_roots_for_order(m, material, bc, W, h, settings.refine_tol)
        empty = 0 if roots else empty + 1
        ws = np.array([w for w, _ in roots])
        res = verify_eigenpairs(material, bc, m, ws) if verify else np.zeros(len(ws))
        for kk, ((w, mu), rv) in enumerate(zip(roots, res), start=1):
            rows.append((w * w, mu, m, kk, float(rv)))
        m += 1
    meta = {"method": "Helmholtz ansatz determinant scan", "m_max": m - 1 - settings.order_patience,
            "scan_step": h, "refine_tol": settings.refine_tol,
            "subdivisions": settings.subdivisions, "verified": verify}
    if bc == "free":
        rows.append((0.0, 3, 0, 0, 0.0))
        if material.alpha == 1.0:
            meta["kernel_note"] = ("at alpha = 1 every conformal field (v1 - i v2 holomorphic) "
                                   "has zero energy; only the three rigid motions are listed "
                                   "at tau = 0")
    spec = _finalize(rows, operator="lame", bc=bc,
                     material={"ct2": material.ct2, "cl2": material.cl2, "n": material.n},
                     domain=unit_disk(), tau_max=float(tau_max), meta=meta)
    if b_ref is None:
        b_ref = _default_band_reference(material, bc, spec.domain)
    spec.completeness = certify(spec, b_ref, settings.band_slack, h)
    if check_band and not spec.completeness.weyl_band_ok:
        raise CompletenessError(
            f"Weyl band deviation {spec.completeness.max_band_deviation:.3g} exceeds "
            f"{spec.completeness.band_limit:.3g}; rerun with a smaller scan step")
    return spec


def _default_band_reference(material: ElasticMaterial, bc: str, domain: DomainDescriptor) -> float:
    """Largest |b| among the available second-term predictions (at least L / 4 pi c_min)."""
    from .predictions import assemble_predictions, NoUnitRootError

    L = domain.vol_bdry
    cands = [L / (4 * math.pi * min(material.ct, material.cl))]
    try:
        ps = assemble_predictions(material, domain, bc, "unit")
        for w in ps.available().values():
            if w.b is not None and math.isfinite(w.b):
                cands.append(abs(w.b))
            elif w.d is not None and math.isfinite(w.d):
                cands.append(abs(w.d) / math.gamma(1.5))
    except (NoUnitRootError, ValueError):
        pass
    return max(cands)


def scan_stability(material: ElasticMaterial, bc: str, omega_max: float, orders,
                   step: float) -> dict[int, tuple[int, int]]:
    """Root counts per order at ``step`` and ``step / 2``."""
    out = {}
    for m in orders:
        a = sum(mu for _, mu in elastic_roots_for_order(m, material, bc, omega_max, step))
        b = sum(mu for _, mu in elastic_roots_for_order(m, material, bc, omega_max, step / 2))
        out[m] = (a, b)
    return out


# ---------------------------------------------------------------------------
# eigenpair verification
# ---------------------------------------------------------------------------

def boundary_nullvectors(material: ElasticMaterial, bc: str, m: int, omegas) -> np.ndarray:
    """Potential amplitudes (A, B) spanning the (near) null space, one row per omega."""
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    (a, b), (c, d) = _scaled_rows(m, w, material, bc)
    M = np.stack([np.stack([a, b], -1), np.stack([c, d], -1)], -2)
    _, _, vh = np.linalg.svd(M)
    y = vh[:, -1, :]
    env = []
    for k in (w / material.cl, w / material.ct):
        J = special.jv(m, k)
        Jp = 0.5 * (special.jv(m - 1, k) - special.jv(m + 1, k))
        env.append(np.hypot(J, Jp))
    return np.stack([y[:, 0] / env[0], y[:, 1] / env[1]], -1)


def boundary_nullvector(material: ElasticMaterial, bc: str, m: int, omega: float) -> np.ndarray:
    return boundary_nullvectors(material, bc, m, [omega])[0]


def _radial_parts(m: int, k, r):
    J0, J1, J2, J3 = bessel_derivs(m, k * r, 3)
    return J0, k * J1, k * k * J2, k**3 * J3


def _field_and_residuals(material: ElasticMaterial, m: int, omega, amp, r, theta):
    """Polar displacement, PDE residual and boundary traction of the eigenfield.

    ``omega`` and ``amp`` broadcast against the sample points ``r``/``theta``.
    The traction entries are only meaningful where r = 1.
    """
    A, B = amp
    ct2, cl2 = material.ct2, material.cl2
    w2 = omega * omega
    P, Pr, Prr, Prrr = _radial_parts(m, omega / math.sqrt(cl2), r)
    Q, Qr, Qrr, Qrrr = _radial_parts(m, omega / math.sqrt(ct2), r)
    e = np.exp(1j * m * theta)
    mm = m * m
    ur = (A * Pr + m * B * Q / r) * e
    ut = 1j * (m * A * P / r + B * Qr) * e
    # residual = -grad(cl2 lap phi + w2 phi) - curl(ct2 lap psi + w2 psi)
    lapP = Prr + Pr / r - mm * P / r**2
    lapQ = Qrr + Qr / r - mm * Q / r**2
    G = cl2 * lapP + w2 * P
    Gr = cl2 * (Prrr + Prr / r - Pr / r**2 - mm * Pr / r**2 + 2 * mm * P / r**3) + w2 * Pr
    H = ct2 * lapQ + w2 * Q
    Hr = ct2 * (Qrrr + Qrr / r - Qr / r**2 - mm * Qr / r**2 + 2 * mm * Q / r**3) + w2 * Qr
    Rr = -(A * Gr + m * B * H / r) * e
    Rt = -1j * (m * A * G / r + B * Hr) * e
    div = A * lapP * e
    dr_ur = (A * Prr + m * B * (Qr / r - Q / r**2)) * e
    dr_ut = 1j * (m * A * (Pr / r - P / r**2) + B * Qrr) * e
    t_rr = ((cl2 - 2 * ct2) * div, 2 * ct2 * dr_ur)
    t_rt = (ct2 * 1j * m * ur / r, ct2 * dr_ut, -ct2 * ut / r)
    srr = t_rr[0] + t_rr[1]
    srt = t_rt[0] + t_rt[1] + t_rt[2]
    # magnitude of the individual contributions, the scale against which cancellation is judged
    tscale = np.maximum(sum(np.abs(x) for x in t_rr), sum(np.abs(x) for x in t_rt))
    return ur, ut, Rr, Rt, srr, srt, tscale


def verify_eigenpairs(material: ElasticMaterial, bc: str, m: int, omegas,
                      nullvectors=None, n_interior: int = 64, n_boundary: int = 32) -> np.ndarray:
    """Residuals of the eigenpairs (m, omega) for every omega in ``omegas``.

    Each residual is the max of the relative PDE residual and the scaled
    boundary residual.  The field is rebuilt from the null vector with Bessel
    recurrences for all radial derivatives.  PDE residuals are relative to
    tau * max|u|.  Traction residuals are relative to the largest sum of
    magnitudes of the strain terms that make up sigma_rr or sigma_rtheta over
    all sample points, so they measure cancellation independently of units.
    Dirichlet residuals are relative to max|u|.
    """
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    if len(w) == 0:
        return np.zeros(0)
    amp = boundary_nullvectors(material, bc, m, w) if nullvectors is None else np.atleast_2d(nullvectors)
    nr = 8
    nth = max(1, -(-n_interior // nr))
    rr, th = np.meshgrid(np.linspace(0.1, 0.95, nr), np.linspace(0, 2 * np.pi, nth, endpoint=False))
    thb = np.linspace(0, 2 * np.pi, n_boundary, endpoint=False)
    r = np.concatenate([rr.ravel(), np.ones(n_boundary)])[None, :]
    theta = np.concatenate([th.ravel(), thb])[None, :]
    ni = rr.size
    W = w[:, None]
    ur, ut, Rr, Rt, srr, srt, tscale = _field_and_residuals(
        material, m, W, (amp[:, 0:1], amp[:, 1:2]), r, theta)
    U = np.maximum(np.abs(ur).max(1), np.abs(ut).max(1))
    pde = np.maximum(np.abs(Rr[:, :ni]).max(1), np.abs(Rt[:, :ni]).max(1)) / (w * w * U)
    if bc == "dir":
        bcr = np.maximum(np.abs(ur[:, ni:]).max(1), np.abs(ut[:, ni:]).max(1)) / U
    else:
        # scale over the whole sample: a single-term traction (cl2 = 2 ct2, m = 0)
        # vanishes pointwise on the boundary together with its own scale
        bcr = (np.maximum(np.abs(srr[:, ni:]).max(1), np.abs(srt[:, ni:]).max(1))
               / tscale.max(1))
    out = np.maximum(pde, bcr)
    return np.where(U > 0, out, np.inf)


def verify_eigenpair(material: ElasticMaterial, bc: str, m: int, omega: float,
                     nullvector=None, n_interior: int = 64, n_boundary: int = 32) -> float:
    """Residual of a single eigenpair; see ``verify_eigenpairs``."""
    nv = None if nullvector is None else np.asarray(nullvector)[None, :]
    return float(verify_eigenpairs(material, bc, m, [omega], nv, n_interior, n_boundary)[0])


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

CODE_VERSION = "elastweyl-spectrum-1"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def cache_key(params: dict) -> str:
    """sha256 of the canonical serialization of ``params`` plus the code version tag."""
    payload = dict(params, code_version=CODE_VERSION)
    return hashlib.sha256(canonical_json(payload).encode()).hexdigest()


def spectrum_to_text(spec: Spectrum) -> str:
    lines = [canonical_json(spec.header())]
    for t, mu, m, k, r in zip(spec.tau, spec.mult, spec.m, spec.k, spec.residual):
        lines.append(f"{t:.17g}\t{int(mu)}\t{int(m)}\t{int(k)}\t{r:.17g}")
    return "\n".join(lines) + "\n"


def write_spectrum(path, spec: Spectrum) -> bool:
    """Write ``spec`` atomically; an existing file is never overwritten.

    Returns True if a new file was written.
    """
    path = Path(path)
    if path.exists():
        return False
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(spectrum_to_text(spec))
        if path.exists():
            os.unlink(tmp)
            return False
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return True


def read_spectrum(path) -> Spectrum:
    with open(path) as fh:
        head = json.loads(fh.readline())
        rows = [ln.rstrip("\n").split("\t") for ln in fh if ln.strip()]
    cols = list(zip(*rows)) if rows else [(), (), (), (), ()]
    cert = head.get("certificate")
    return Spectrum(
        tau=np.array([float(x) for x in cols[0]], dtype=float),
        mult=np.array([int(x) for x in cols[1]], dtype=np.int64),
        m=np.array([int(x) for x in cols[2]], dtype=np.int64),
        k=np.array([int(x) for x in cols[3]], dtype=np.int64),
        residual=np.array([float(x) for x in cols[4]], dtype=float),
        operator=head["operator"], bc=head["bc"], material=head["material"],
        domain=DomainDescriptor.from_dict(head["domain"]), tau_max=head["tau_max"],
        completeness=CompletenessCert(**cert) if cert else None, meta=head.get("meta", {}),
    )


def spectrum_params(operator: str, bc: str, material: dict, domain: DomainDescriptor,
                    tau_max: float, **tolerances) -> dict:
    return {"operator": operator, "bc": bc, "material": material, "domain": domain.to_dict(),
            "tau_max": float(tau_max), "tolerances": tolerances}


def cached_spectrum(params: dict, compute: Callable[[], Spectrum], cache_dir=None
                    ) -> tuple[Spectrum, Optional[Path], bool]:
    """Load the spectrum for ``params`` from ``cache_dir`` or compute and store it.

    Returns (spectrum, path, hit).  Without a cache directory nothing is stored.
    """
    if cache_dir is None:
        return compute(), None, False
    path = Path(cache_dir) / f"spectrum-{cache_key(params)}.tsv"
    if path.exists():
        return read_spectrum(path), path, True
    spec = compute()
    write_spectrum(path, spec)
    return spec, path, False


def elastic_spectrum_cached(material: ElasticMaterial, bc: str, tau_max: float,
                            settings: ScanSettings = ScanSettings(), cache_dir=None,
                            check_band: bool = True):
    params = spectrum_params("lame", bc, {"ct2": material.ct2, "cl2": material.cl2},
                             unit_disk(), tau_max, scan_step=settings.step(material),
                             refine_tol=settings.refine_tol, band_slack=settings.band_slack,
                             order_patience=settings.order_patience)
    return cached_spectrum(params, lambda: elastic_disk_spectrum(
        material, bc, tau_max, settings, check_band=check_band), cache_dir)
