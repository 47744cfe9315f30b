"""Counting functions, heat traces and two-term coefficient extraction.

For a planar spectrum the heat trace behaves like

    Z(t) = c / t + d / sqrt(t) + O(1),   t -> 0+,

and the counting function like N(tau) = a tau + b sqrt(tau) + o(sqrt(tau)),
with c = a and d = Gamma(3/2) b.  This module measures c, d and b from
finite spectra and compares d against competing predictions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Optional, Sequence

import numpy as np

from .predictions import PredictionSet
from .spectrum import Spectrum

TAIL_REL_LIMIT = 1e-6
# fits also need the tail's effect on the scaled residual y(t) to be negligible
FIT_TAIL_ABS = 1e-9
# the truncated tail can exceed the smooth Weyl estimate by the staircase excess
TAIL_SAFETY = 3.0
GAMMA_3_2 = math.gamma(1.5)


class InsufficientSpectrumError(ValueError):
    """No admissible fitting window exists for the given spectrum."""


class OutOfRangeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# elementary spectral functions
# ---------------------------------------------------------------------------

def counting_function(spectrum: Spectrum, tau: float) -> int:
    """Number of eigenvalues strictly below ``tau``, with multiplicity."""
    if tau > spectrum.tau_max:
        raise OutOfRangeError(f"tau={tau} exceeds the spectrum cutoff {spectrum.tau_max}")
    i = np.searchsorted(spectrum.tau, tau, side="left")
    return int(spectrum.mult[:i].sum())


def heat_trace(spectrum: Spectrum, t, a_lead: Optional[float] = None):
    """Truncated heat trace and a bound on the omitted tail.

    Returns ``(value, tail_bound)`` with tail_bound = (a / t) exp(-t tau_max),
    the Weyl-law estimate of the contribution of eigenvalues above the cutoff.
    Both are arrays when ``t`` is an array.
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts <= 0):
        raise ValueError("heat_trace requires t > 0")
    a = spectrum.weyl_leading if a_lead is None else a_lead
    vals = np.empty_like(ts)
    # chunked to keep the (t, tau) matrix small
    for s in range(0, len(ts), 64):
        tt = ts[s:s + 64, None]
        vals[s:s + 64] = (spectrum.mult[None, :] * np.exp(-tt * spectrum.tau[None, :])).sum(1)
    tail = a / ts * np.exp(-ts * spectrum.tau_max)
    if np.ndim(t) == 0:
        return float(vals[0]), float(tail[0])
    return vals, tail


def tail_usable(value, tail_bound) -> np.ndarray:
    return np.asarray(tail_bound) <= TAIL_REL_LIMIT * np.asarray(value)


def geometric_t_grid(spectrum: Spectrum, per_decade: int = 40, t_hi_scale: float = 0.02,
                     t_lo: Optional[float] = None, t_hi: Optional[float] = None) -> np.ndarray:
    """Geometric grid from the tail-safety limit up to t_hi.

    The default upper end t_hi_scale / c_max^2 keeps the heat kernel length
    sqrt(c^2 t) small against the unit domain scale; the lower end is where
    the tail bound reaches 1e-6 of the value (solved on a fine pre-grid).
    """
    c2max = max(v for k, v in spectrum.material.items() if k in ("ct2", "cl2", "c2"))
    if t_hi is None:
        t_hi = t_hi_scale / c2max
    if t_lo is None:
        pre = np.geomspace(1.0 / spectrum.tau_max, t_hi, 400)
        v, tb = heat_trace(spectrum, pre)
        ok = np.nonzero(tail_usable(v, tb))[0]
        if len(ok) == 0:
            raise InsufficientSpectrumError("tail bound never drops below 1e-6 of the trace")
        t_lo = pre[ok[0]]
    if not t_lo < t_hi:
        raise InsufficientSpectrumError(f"empty t range [{t_lo:.3g}, {t_hi:.3g}]")
    n = max(2, int(round(per_decade * math.log10(t_hi / t_lo))) + 1)
    return np.geomspace(t_lo, t_hi, n)


# ---------------------------------------------------------------------------
# fits
# ---------------------------------------------------------------------------

@dataclass
class FitResult:
    target: str
    estimate: float
    stderr: float
    window: tuple[float, float]
    method: str
    samples: int
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def _ols(X: np.ndarray, y: np.ndarray):
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    dof = max(1, len(y) - X.shape[1])
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.pinv(X.T @ X)
    return coef, np.sqrt(np.maximum(np.diag(cov), 0.0))


def _poly_sqrt(x: np.ndarray, deg: int) -> np.ndarray:
    return np.vstack([x**p for p in range(deg + 1)]).T


def _windowed_intercept(x: np.ndarray, y: np.ndarray, extra: np.ndarray, deg: int,
                        min_points: int, short_penalty: float):
    """Best intercept of y ~ poly_deg(x) over contiguous windows.

    stderr = sqrt(se_ols^2 + (b0_deg - b0_{deg+1})^2 + max(extra)^2); the
    second term estimates the truncation bias of the model, the third carries
    a known per-point error bound.  Windows are ranked by
    stderr * (1 + short_penalty * min_points / n).
    """
    n = len(x)
    best = None
    for i in range(0, n - min_points + 1):
        for j in range(i + min_points, n + 1):
            xs, ys = x[i:j], y[i:j]
            c1, se1 = _ols(_poly_sqrt(xs, deg), ys)
            c2, _ = _ols(_poly_sqrt(xs, deg + 1), ys)
            sys_err = abs(c1[0] - c2[0])
            err = math.sqrt(se1[0] ** 2 + sys_err**2 + float(extra[i:j].max()) ** 2)
            score = err * (1 + short_penalty * min_points / (j - i))
            if best is None or score < best[0]:
                best = (score, i, j, float(c1[0]), err, float(se1[0]), sys_err,
                        [float(v) for v in c1])
    if best is None:
        raise InsufficientSpectrumError(f"need at least {min_points} usable grid points, have {n}")
    return best


def _heat_samples(spectrum: Spectrum, t_grid):
    t = np.asarray(t_grid, dtype=float)
    Z, tb = heat_trace(spectrum, t)
    ok = tail_usable(Z, tb) & (TAIL_SAFETY * tb * np.sqrt(t) <= FIT_TAIL_ABS)
    if not np.all(ok):
        t, Z, tb = t[ok], Z[ok], tb[ok]
    return t, Z, tb


def fit_heat_second_coeff(spectrum: Spectrum, c_known: float, t_grid=None,
                          min_points: int = 8, short_penalty: float = 1.0) -> FitResult:
    """Intercept d of y(t) = (Z(t) - c/t) sqrt(t) = d + e sqrt(t) + ...

    Grid points are dropped before fitting unless the tail bound is below
    1e-6 of the trace and its effect on y is below 1e-9.
    """
    if t_grid is None:
        t_grid = geometric_t_grid(spectrum)
    t, Z, tb = _heat_samples(spectrum, t_grid)
    s = np.sqrt(t)
    y = (Z - c_known / t) * s
    score, i, j, est, err, se, sys_err, coef = _windowed_intercept(
        s, y, TAIL_SAFETY * tb * s, 1, min_points, short_penalty)
    return FitResult("heat_d", est, err, (float(t[i]), float(t[j - 1])), "linear_in_sqrt_t",
                     j - i, meta={"c_known": c_known, "slope_e": coef[1], "stderr_ols": se,
                                  "stderr_model": sys_err, "grid_points": int(len(t))})


def fit_heat_leading_coeff(spectrum: Spectrum, t_grid=None, min_points: int = 8,
                           short_penalty: float = 1.0) -> FitResult:
    """Intercept c of t Z(t) = c + d sqrt(t) + e t (quadratic in sqrt t)."""
    if t_grid is None:
        t_grid = geometric_t_grid(spectrum)
    t, Z, tb = _heat_samples(spectrum, t_grid)
    s = np.sqrt(t)
    score, i, j, est, err, se, sys_err, coef = _windowed_intercept(
        s, t * Z, TAIL_SAFETY * t * tb, 2, min_points, short_penalty)
    return FitResult("heat_c", est, err, (float(t[i]), float(t[j - 1])), "quadratic_in_sqrt_t",
                     j - i, meta={"d_estimate": coef[1], "stderr_ols": se, "stderr_model": sys_err})


def _counting_integral(spectrum: Spectrum, a: float, lo: float, hi: float) -> float:
    """Exact integral of (N(tau) - a tau) / sqrt(tau) over [lo, hi]."""
    tau = spectrum.tau
    cum = np.concatenate([[0], np.cumsum(spectrum.mult)])
    inside = (tau > lo) & (tau < hi)
    knots = np.concatenate([[lo], tau[inside], [hi]])
    # N is constant on each open piece; value = multiplicity below the piece start
    start_counts = cum[np.searchsorted(tau, knots[:-1], side="right")]
    sq = np.sqrt(knots)
    integral_N = float(np.sum(start_counts * 2 * np.diff(sq)))
    return integral_N - a * (2.0 / 3.0) * (hi**1.5 - lo**1.5)


def fit_counting_second_coeff(spectrum: Spectrum, a_known: float,
                              tau_window: Optional[Sequence[float]] = None,
                              pieces: int = 16) -> FitResult:
    """Cesaro (integral) mean of (N(tau) - a tau) / sqrt(tau) over the window.

    The stderr is the standard error of the mean over ``pieces`` equal
    sub-window means.
    """
    if tau_window is None:
        tau_window = (0.25 * spectrum.tau_max, spectrum.tau_max)
    lo, hi = float(tau_window[0]), float(tau_window[1])
    if not 0 < lo < hi <= spectrum.tau_max:
        raise OutOfRangeError(f"window ({lo}, {hi}) must lie inside (0, {spectrum.tau_max}]")
    mean = _counting_integral(spectrum, a_known, lo, hi) / (hi - lo)
    edges = np.linspace(lo, hi, pieces + 1)
    subs = np.array([_counting_integral(spectrum, a_known, u, v) / (v - u)
                     for u, v in zip(edges[:-1], edges[1:])])
    err = float(subs.std(ddof=1) / math.sqrt(pieces))
    return FitResult("counting_b", float(mean), err, (lo, hi), "cesaro_counting", pieces,
                     meta={"a_known": a_known, "piece_means": subs.tolist()})


def heat_plot_rows(spectrum: Spectrum, c_known: float, t_grid) -> list[tuple]:
    """Rows (t, Z, Z_minus_lead_times_sqrt_t, tail_bound) for plotting."""
    t = np.asarray(t_grid, dtype=float)
    Z, tb = heat_trace(spectrum, t)
    y = (Z - c_known / t) * np.sqrt(t)
    return [(float(a), float(b), float(c), float(d)) for a, b, c, d in zip(t, Z, y, tb)]


PLOT_COLUMNS = ("t", "Z", "Z_minus_lead_times_sqrt_t", "tail_bound")


def synthetic_two_term_spectrum(a: float, b: float, tau_max: float, offset: float = 0.5,
                                bc: str = "dir") -> Spectrum:
    """Simple eigenvalues tau_k solving a tau + b sqrt(tau) = k - offset.

    With offset = 0 the counting law holds exactly at every knot (N jumps to
    k there); offset = 1/2 centres the staircase on the smooth law.
    """
    from .spectrum import unit_disk

    if a <= 0 or tau_max <= 0:
        raise ValueError("a and tau_max must be positive")
    kmax = int(math.floor(a * tau_max + b * math.sqrt(tau_max) + offset))
    k = np.arange(1, kmax + 1, dtype=float) - offset
    disc = b * b + 4 * a * k
    root = (-b + np.sqrt(disc)) / (2 * a)
    tau = root**2
    keep = (root > 0) & (tau <= tau_max)
    tau = tau[keep]
    # wave speed chosen so that the unit disk's Weyl coefficient equals a
    c2 = unit_disk().vol_n / (4 * math.pi * a)
    return Spectrum(tau=tau, mult=np.ones(len(tau), dtype=np.int64),
                    m=np.zeros(len(tau), dtype=np.int64), k=np.arange(1, len(tau) + 1),
                    residual=np.zeros(len(tau)), operator="scalar_laplace", bc=bc,
                    material={"c2": c2, "components": 1, "synthetic_a": a, "synthetic_b": b},
                    domain=unit_disk(), tau_max=float(tau_max),
                    meta={"method": "synthetic two-term law", "offset": offset})


# ---------------------------------------------------------------------------
# adjudication
# ---------------------------------------------------------------------------

@dataclass
class AdjudicationReport:
    config: dict
    measured: dict
    distances: dict
    decisive: bool
    winner: Optional[str]
    matching: list
    min_gap: Optional[float]
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _distinct(values: Sequence[float], rel: float = 1e-9) -> list[float]:
    out: list[float] = []
    for v in sorted(values):
        if not out or abs(v - out[-1]) > rel * max(1.0, abs(v)):
            out.append(v)
    return out


def decide(d_meas: float, stderr: float, predicted: dict[str, float]):
    """Distances, decisiveness, matching sources and the winner label."""
    finite = {k: v for k, v in predicted.items() if math.isfinite(v)}
    distances = {k: {"predicted": v, "abs": abs(d_meas - v),
                     "in_stderr": abs(d_meas - v) / stderr if stderr > 0 else math.inf}
                 for k, v in finite.items()}
    vals = _distinct(list(finite.values()))
    min_gap = float(np.min(np.diff(vals))) if len(vals) >= 2 else None
    decisive = min_gap is not None and stderr < 0.5 * min_gap
    matching = sorted(k for k, dd in distances.items() if dd["abs"] <= 2 * stderr)
    winner = None
    if decisive and matching and len(_distinct([finite[k] for k in matching])) == 1:
        winner = "+".join(matching)
    return distances, decisive, matching, winner, min_gap


def adjudicate(spectrum: Spectrum, predictions: PredictionSet, t_grid=None,
               config: Optional[dict] = None) -> AdjudicationReport:
    """Measure d (heat route, with counting route as confirmation) and rank sources."""
    c_known = spectrum.weyl_leading
    heat = fit_heat_second_coeff(spectrum, c_known, t_grid)
    count = fit_counting_second_coeff(spectrum, c_known)
    d_pred = predictions.d_values()
    distances, decisive, matching, winner, min_gap = decide(heat.estimate, heat.stderr, d_pred)
    notes = list(predictions.notes)
    d_from_b = GAMMA_3_2 * count.estimate
    if math.copysign(1, d_from_b) != math.copysign(1, heat.estimate):
        notes.append("counting-route sign disagrees with heat route")
    if decisive and not matching:
        notes.append("decisive, but no predicted value lies within 2 stderr of the measurement")
    if spectrum.meta.get("kernel_note"):
        notes.append(spectrum.meta["kernel_note"])
    cfg = dict(config or {})
    cfg.setdefault("spectrum", spectrum.header())
    cfg.setdefault("predictions", predictions.to_dict())
    measured = {"heat_d": heat.to_dict(), "counting_b": count.to_dict(),
                "counting_d_equivalent": d_from_b}
    return AdjudicationReport(cfg, measured, distances, decisive, winner, matching, min_gap, notes)


@dataclass
class SumRuleResult:
    measured_sum: float
    stderr: float
    within_2_stderr: bool
    d_dir: float
    d_free: float
    predicted_sums: dict

    def to_dict(self) -> dict:
        return asdict(self)


def _pair_predictions(pred_dir: PredictionSet, pred_free: PredictionSet) -> dict[str, float]:
    """d^Dir + d^free per source; family entries 'X[...]' pair with Dirichlet 'X'."""
    dd = pred_dir.d_values()
    out = {}
    for name, v in pred_free.d_values().items():
        base = name.split("[", 1)[0]
        if base in dd and math.isfinite(v) and math.isfinite(dd[base]):
            out[name] = dd[base] + v
    return out


def check_sum_rule(spec_dir: Spectrum, spec_free: Spectrum, predictions=None,
                   t_grid_dir=None, t_grid_free=None) -> SumRuleResult:
    """Measured d^Dir + d^free (heat route) with the combined stderr.

    ``predictions`` is an optional (Dirichlet, free) pair of PredictionSets.
    """
    if spec_dir.material != spec_free.material or spec_dir.domain != spec_free.domain:
        raise ValueError("both spectra must share material and domain")
    fd = fit_heat_second_coeff(spec_dir, spec_dir.weyl_leading, t_grid_dir)
    ff = fit_heat_second_coeff(spec_free, spec_free.weyl_leading, t_grid_free)
    total = fd.estimate + ff.estimate
    err = math.hypot(fd.stderr, ff.stderr)
    pred = _pair_predictions(*predictions) if predictions is not None else {}
    return SumRuleResult(total, err, abs(total) <= 2 * err, fd.estimate, ff.estimate, pred)
