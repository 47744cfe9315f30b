"""Closed-form two-term coefficient predictions for the elastic operator.

Conventions (n = 2 unless stated):

* counting function  N(tau) ~ a tau^{n/2} + b tau^{(n-1)/2}
* heat trace          Z(t)  ~ c t^{-n/2} + d t^{-(n-1)/2}

All coefficients are absolute, i.e. they already include the area S and the
boundary length L.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Optional, Union

import numpy as np

from .material import ElasticMaterial, rayleigh_roots
from .numerics import DomainError, integrate_adaptive, gamma_fn

BETA_ABS_TOL = 1e-9

SOURCES = ("SV", "SV_A26_as_printed", "Thm3_1", "MS_limit")


class NoUnitRootError(ValueError):
    """Free-boundary SV coefficient requested but the sextic has no root in (0, 1)."""


# ---------------------------------------------------------------------------
# beta integrals
# ---------------------------------------------------------------------------

def _check_alpha(alpha: float) -> float:
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"beta integrals need 0 < alpha <= 1, got {alpha}")
    return float(alpha)


def _radicand(xi, alpha):
    inv2 = 1.0 / (xi * xi)
    return np.clip((1.0 - alpha * inv2) * (inv2 - 1.0), 0.0, None)


def beta_dirichlet_integral(alpha: float, abs_tol: float = BETA_ABS_TOL):
    alpha = _check_alpha(alpha)
    sa = math.sqrt(alpha)
    return integrate_adaptive(lambda x: np.arctan(np.sqrt(_radicand(x, alpha))),
                              sa, 1.0, abs_tol)


def beta_free_integral(alpha: float, abs_tol: float = BETA_ABS_TOL):
    alpha = _check_alpha(alpha)
    sa = math.sqrt(alpha)

    def f(x):
        num = (2.0 - 1.0 / (x * x)) ** 2
        den = 4.0 * np.sqrt(_radicand(x, alpha))
        with np.errstate(divide="ignore", invalid="ignore"):
            # arctan(+inf) = pi/2 at the endpoints
            return np.where(den > 0, np.arctan(num / np.where(den > 0, den, 1.0)), np.pi / 2)

    # numerator vanishes at xi = 1/sqrt(2)
    return integrate_adaptive(f, sa, 1.0, abs_tol, breakpoints=[1.0 / math.sqrt(2.0)])


def beta_dirichlet(alpha: float, abs_tol: float = BETA_ABS_TOL) -> float:
    """beta = -1 - sqrt(alpha) - (4/pi) int_{sqrt(alpha)}^1 atan sqrt((1-alpha/xi^2)(1/xi^2-1)) dxi."""
    q = beta_dirichlet_integral(alpha, abs_tol)
    return -1.0 - math.sqrt(alpha) - 4.0 / math.pi * q.value


def beta_free(alpha: float, gamma: float, abs_tol: float = BETA_ABS_TOL) -> float:
    """Free-boundary beta for a root ``gamma`` of the Rayleigh sextic.

    Returns ``math.inf`` for the degenerate root gamma = 0.
    """
    alpha = _check_alpha(alpha)
    if gamma == 0.0:
        return math.inf
    q = beta_free_integral(alpha, abs_tol)
    return 4.0 / gamma - 3.0 + math.sqrt(alpha) + 4.0 / math.pi * q.value


# ---------------------------------------------------------------------------
# coefficient containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeylCoefficients:
    n: int
    a: Optional[float] = None
    b: Optional[float] = None
    c: Optional[float] = None
    d: Optional[float] = None
    note: str = ""

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None and v != ""}


@dataclass(frozen=True)
class Absent:
    reason: str

    def to_dict(self) -> dict:
        return {"absent": True, "reason": self.reason}


Entry = Union[WeylCoefficients, Absent]


def tauberian(a: float, b: float, n: int) -> tuple[float, float]:
    """Map counting coefficients (a, b) to heat coefficients (c, d)."""
    if n < 1:
        raise DomainError("dimension must be >= 1")
    return gamma_fn(1 + n / 2) * a, gamma_fn(1 + (n - 1) / 2) * b


def sv_counting_coeffs(material: ElasticMaterial, S: float, L: float, bc: str,
                       gamma: Optional[float] = None) -> WeylCoefficients:
    """SV two-term counting coefficients for a planar domain.

    a = (cl^-2 + ct^-2) S / 4 pi,   b = beta L / (4 pi ct).

    For ``bc='free'`` the Rayleigh root defaults to the one in (0, 1).
    """
    if S <= 0 or L <= 0:
        raise DomainError("S and L must be positive")
    a = (1.0 / material.cl2 + 1.0 / material.ct2) * S / (4 * math.pi)
    if bc == "dir":
        beta = beta_dirichlet(material.alpha)
        note = ""
    elif bc == "free":
        if gamma is None:
            gamma = rayleigh_roots(material.alpha).unit_interval_root
            if gamma is None:
                raise NoUnitRootError(
                    f"Rayleigh sextic has no root in (0,1) at alpha={material.alpha}")
        beta = beta_free(material.alpha, gamma)
        note = f"gamma={gamma!r}"
    else:
        raise ValueError(f"unknown boundary condition {bc!r}")
    b = beta * L / (4 * math.pi * material.ct)
    return WeylCoefficients(n=2, a=a, b=b, note=note)


def with_heat(w: WeylCoefficients) -> WeylCoefficients:
    c, d = tauberian(w.a, w.b, w.n)
    return WeylCoefficients(w.n, w.a, w.b, c, d, w.note)


def thm31_heat_coeffs(material: ElasticMaterial, vol_n: float, vol_bdry: float,
                      n: int, bc: str) -> WeylCoefficients:
    """Two-term elastic heat coefficients with a d of opposite sign for dir/free."""
    if vol_n <= 0 or vol_bdry <= 0:
        raise DomainError("volumes must be positive")
    ct2, cl2 = material.ct2, material.cl2
    c = ((n - 1) / (4 * math.pi * ct2) ** (n / 2) + 1 / (4 * math.pi * cl2) ** (n / 2)) * vol_n
    dm = 0.25 * ((n - 1) / (4 * math.pi * ct2) ** ((n - 1) / 2)
                 + 1 / (4 * math.pi * cl2) ** ((n - 1) / 2)) * vol_bdry
    return WeylCoefficients(n=n, c=c, d=_signed(dm, bc))


def ms_limit_heat_coeffs(ct2: float, vol_n: float, vol_bdry: float, n: int,
                         bc: str) -> WeylCoefficients:
    """Heat coefficients of the cl2 = ct2 limit problems (n copies of ct2 * Laplacian)."""
    if vol_n <= 0 or vol_bdry <= 0:
        raise DomainError("volumes must be positive")
    c = n * vol_n / (4 * math.pi * ct2) ** (n / 2)
    dm = n / 4 * vol_bdry / (4 * math.pi * ct2) ** ((n - 1) / 2)
    return WeylCoefficients(n=n, c=c, d=_signed(dm, bc))


def a26_as_printed(material: ElasticMaterial, S: float, L: float,
                   gamma: float) -> WeylCoefficients:
    """The displayed free-boundary heat expansion, taken verbatim.

    c = 2 S / (4 pi ct^2),  d = L / (4 sqrt(pi) ct) * [1 + (4/gamma - 3)].
    """
    c = 2 * S / (4 * math.pi * material.ct2)
    d = L / (4 * math.sqrt(math.pi) * material.ct) * (1 + (4 / gamma - 3))
    return WeylCoefficients(n=2, c=c, d=d, note=f"gamma={gamma!r}")


def _signed(mag: float, bc: str) -> float:
    if bc == "dir":
        return -mag
    if bc == "free":
        return mag
    raise ValueError(f"unknown boundary condition {bc!r}")


# ---------------------------------------------------------------------------
# prediction sets
# ---------------------------------------------------------------------------

@dataclass
class PredictionSet:
    material: ElasticMaterial
    domain: dict
    bc: str
    gamma_policy: str
    entries: dict[str, Entry] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def available(self) -> dict[str, WeylCoefficients]:
        return {k: v for k, v in self.entries.items() if isinstance(v, WeylCoefficients)}

    def d_values(self) -> dict[str, float]:
        return {k: v.d for k, v in self.available().items() if v.d is not None}

    def to_dict(self) -> dict:
        return {
            "config": {"material": self.material.to_dict(), "domain": self.domain,
                       "bc": self.bc, "gamma_policy": self.gamma_policy},
            "entries": {k: v.to_dict() for k, v in self.entries.items()},
            "notes": list(self.notes),
        }


def assemble_predictions(material: ElasticMaterial, domain, bc: str,
                         gamma_policy: Union[str, float] = "unit") -> PredictionSet:
    """Evaluate every source's prediction for one configuration.

    ``gamma_policy`` is ``"unit"`` (root in (0,1)), ``"family"`` (one SV entry
    per real sextic root, tagged ``SV[gamma=...]``) or an explicit float.
    Undefined entries are kept as :class:`Absent` with a reason.
    """
    S, L = domain.vol_n, domain.vol_bdry
    ps = PredictionSet(material, domain.to_dict(), bc, str(gamma_policy))
    n = material.n

    if material.alpha > 1.0:
        ps.entries["SV"] = Absent("beta integrals undefined for alpha > 1")
        ps.entries["SV_A26_as_printed"] = Absent("beta integrals undefined for alpha > 1")
    elif bc == "dir":
        ps.entries["SV"] = with_heat(sv_counting_coeffs(material, S, L, "dir"))
        ps.entries["SV_A26_as_printed"] = Absent("printed expansion concerns the free boundary only")
    else:
        gammas: list[tuple[str, float]] = []
        roots = rayleigh_roots(material.alpha)
        if gamma_policy == "unit":
            if roots.unit_interval_root is None:
                reason = (f"no Rayleigh root in (0,1) at alpha={material.alpha:g}; "
                          "pass an explicit gamma or use the root family")
                ps.entries["SV"] = Absent(reason)
                ps.entries["SV_A26_as_printed"] = Absent(reason)
            else:
                gammas.append(("", roots.unit_interval_root))
        elif gamma_policy == "family":
            ps.entries["SV"] = Absent("root-family enumeration: see SV[gamma=...] entries")
            ps.entries["SV_A26_as_printed"] = Absent("root-family enumeration: see per-root entries")
            for g, _ in roots.roots:
                suffix = f"[gamma={g:+.6f}]"
                if g == 0.0:
                    ps.entries["SV" + suffix] = Absent("gamma=0 gives beta=+inf")
                else:
                    gammas.append((suffix, g))
        else:
            gammas.append(("", float(gamma_policy)))
        for suffix, g in gammas:
            ps.entries["SV" + suffix] = with_heat(sv_counting_coeffs(material, S, L, "free", gamma=g))
            ps.entries["SV_A26_as_printed" + suffix] = a26_as_printed(material, S, L, g)
        ps.notes.append("SV_A26_as_printed evaluates the printed bracket "
                        "L/(4 sqrt(pi) ct) [1 + (4/gamma - 3)]; the Tauberian image of the free "
                        "beta is L beta / (8 sqrt(pi) ct), half of the printed value at alpha = 1")
    ps.entries["Thm3_1"] = thm31_heat_coeffs(material, S, L, n, bc)
    ps.entries["MS_limit"] = ms_limit_heat_coeffs(material.ct2, S, L, n, bc)
    return ps
