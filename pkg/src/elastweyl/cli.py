"""Command-line entry point: ``elastweyl <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 indecisive adjudication under ``--require-decisive``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import jsonschema
import numpy as np

from . import asymptotics as asy
from .config import (ConfigError, build_config, cache_dir_of, config_hash, domain_of,
                     material_of, scan_settings_of)
from .material import InvalidMaterialError, make_material, rayleigh_roots
from .numerics import ConvergenceError, DomainError
from .predictions import assemble_predictions, beta_dirichlet, beta_free
from .spectrum import (SpectrumError, Spectrum, cached_spectrum, elastic_spectrum_cached,
                       rectangle_scalar_spectrum, scalar_disk_spectrum, spectrum_params)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INDECISIVE = 0, 2, 3, 4


class GateError(RuntimeError):
    """A control experiment failed, so elastic results would not be trusted."""


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def jsonable(obj: Any) -> Any:
    """Plain JSON types; non-finite floats become the strings 'inf', '-inf', 'nan'."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def load_schema(name: str) -> dict:
    text = resources.files("elastweyl").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validated(name: str, payload: dict) -> dict:
    data = jsonable(payload)
    jsonschema.validate(data, load_schema(name))
    return data


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def emit(args, schema: str, payload: dict, text: str, stem: Optional[str] = None) -> dict:
    data = validated(schema, payload)
    out_dir = getattr(args, "out_dir", None)
    if out_dir:
        p = Path(out_dir)
        p.mkdir(parents=True, exist_ok=True)
        (p / f"{stem or schema}.json").write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    print(json.dumps(data, indent=2, sort_keys=True) if args.json else text)
    return data


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


# ---------------------------------------------------------------------------
# pipeline pieces
# ---------------------------------------------------------------------------

def effective_config(args) -> dict:
    over: dict[str, Any] = {}
    mat: dict[str, float] = {}
    if getattr(args, "alpha", None) is not None:
        if args.alpha <= 0:
            raise ConfigError(f"alpha must be positive, got {args.alpha}")
        ct2 = args.ct2 if args.ct2 is not None else 1.0
        mat = {"ct2": ct2, "cl2": ct2 / args.alpha}
    else:
        if getattr(args, "ct2", None) is not None:
            mat["ct2"] = args.ct2
        if getattr(args, "cl2", None) is not None:
            mat["cl2"] = args.cl2
    if mat:
        over["material"] = mat
    for key in ("bc", "tau_max", "operator", "components"):
        if getattr(args, key, None) is not None:
            over[key] = getattr(args, key)
    gp = getattr(args, "gamma_policy", None)
    if gp is not None:
        try:
            over["gamma_policy"] = float(gp)
        except ValueError:
            over["gamma_policy"] = gp
    if getattr(args, "rectangle", None):
        a, b = args.rectangle
        over["domain"] = {"kind": "rectangle", "a": a, "b": b}
    if args.cache_dir is not None:
        over["cache_dir"] = args.cache_dir
    if args.out_dir is not None:
        over["out_dir"] = args.out_dir
    cfg = build_config(args.config, over)
    if args.out_dir is None:
        args.out_dir = cfg["out_dir"]
    return cfg


def get_spectrum(cfg: dict) -> tuple[Spectrum, Optional[Path], bool]:
    cache = cache_dir_of(cfg)
    tau_max = float(cfg["tau_max"])
    if cfg["operator"] == "lame":
        spec, path, hit = elastic_spectrum_cached(material_of(cfg), cfg["bc"], tau_max,
                                                  scan_settings_of(cfg), cache)
    else:
        dom = domain_of(cfg)
        c2 = float(cfg["material"]["ct2"])
        comps = int(cfg["components"])
        params = spectrum_params("scalar_laplace", cfg["bc"], {"c2": c2, "components": comps},
                                 dom, tau_max)
        if dom.kind == "unit_disk":
            compute = lambda: scalar_disk_spectrum(c2, cfg["bc"], tau_max, comps)
        else:
            compute = lambda: rectangle_scalar_spectrum(dom.a, dom.b, c2, cfg["bc"], tau_max)
        spec, path, hit = cached_spectrum(params, compute, cache)
    gate = cfg["tolerances"]["residual_gate"]
    if spec.completeness and spec.completeness.residual_max > gate:
        raise SpectrumError(f"max eigenpair residual {spec.completeness.residual_max:.3g} "
                            f"exceeds the gate {gate:g}")
    if spec.completeness and not spec.completeness.weyl_band_ok:
        raise SpectrumError("Weyl band check failed for the loaded spectrum")
    return spec, path, hit


def t_grid_of(cfg: dict, spec: Spectrum) -> np.ndarray:
    tg = cfg["t_grid"]
    return asy.geometric_t_grid(spec, per_decade=int(tg["per_decade"]),
                                t_hi_scale=float(tg["t_hi_scale"]))


def scalar_control_gate(cfg: dict, rel_tol: float = 0.02) -> dict:
    """Scalar disk Dirichlet control: d must match -sqrt(pi)/4 before elastic runs count."""
    ctrl = dict(cfg, operator="scalar_laplace", bc="dir", components=1,
                material={"ct2": 1.0, "cl2": 1.0}, domain={"kind": "unit_disk"})
    spec, _, _ = get_spectrum(ctrl)
    fit = asy.fit_heat_second_coeff(spec, spec.weyl_leading, t_grid_of(ctrl, spec))
    ref = -math.sqrt(math.pi) / 4
    ok = abs(fit.estimate - ref) <= rel_tol * abs(ref)
    out = {"passed": ok, "measured_d": fit.estimate, "stderr": fit.stderr, "expected_d": ref,
           "rel_tol": rel_tol}
    if not ok:
        raise GateError(f"scalar control failed: d={fit.estimate:.6g}, expected {ref:.6g}")
    return out


def predictions_for(cfg: dict, bc: Optional[str] = None, policy=None):
    return assemble_predictions(material_of(cfg), domain_of(cfg), bc or cfg["bc"],
                                cfg["gamma_policy"] if policy is None else policy)


def _with_config(payload: dict, cfg: dict) -> dict:
    return dict(payload, effective_config=cfg, config_hash=config_hash(cfg))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_rayleigh(args) -> int:
    rr = rayleigh_roots(args.alpha)
    rows = [{"gamma": g, "multiplicity": m, "residual": r}
            for (g, m), r in zip(rr.roots, rr.residuals())]
    payload = {"alpha": args.alpha, "roots": rows, "unit_interval_root": rr.unit_interval_root}
    lines = [f"Rayleigh sextic roots at alpha = {args.alpha:g}",
             f"{'gamma':>22} {'mult':>5} {'residual':>12}"]
    lines += [f"{r['gamma']:>22.16g} {r['multiplicity']:>5d} {r['residual']:>12.3e}" for r in rows]
    lines.append(f"root in (0,1): {_fmt(rr.unit_interval_root)}")
    emit(args, "rayleigh", payload, "\n".join(lines))
    return EXIT_OK


def cmd_beta(args) -> int:
    alpha = args.alpha
    if not 0 < alpha <= 1:
        raise DomainError(f"beta integrals need 0 < alpha <= 1, got {alpha}")
    tol = args.quad_tol
    rr = rayleigh_roots(alpha)
    gammas = [args.gamma] if args.gamma is not None else [g for g, _ in rr.roots]
    free = [{"gamma": g, "beta": beta_free(alpha, g, tol)} for g in gammas]
    payload = {"alpha": alpha, "beta_dir": beta_dirichlet(alpha, tol),
               "unit_interval_root": rr.unit_interval_root, "beta_free": free}
    lines = [f"alpha = {alpha:g}", f"beta_dir = {payload['beta_dir']:.15g}"]
    lines += [f"beta_free(gamma={e['gamma']:+.12g}) = {e['beta']:.15g}" for e in free]
    emit(args, "beta", payload, "\n".join(lines))
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg = effective_config(args)
    ps = predictions_for(cfg)
    payload = _with_config(ps.to_dict(), cfg)
    lines = [f"{'source':<42} {'a':>12} {'b':>12} {'c':>12} {'d':>12}"]
    for name, e in ps.entries.items():
        d = e.to_dict()
        if d.get("absent"):
            lines.append(f"{name:<42} absent: {d['reason']}")
        else:
            lines.append(f"{name:<42} " + " ".join(f"{_fmt(d.get(k)):>12}" for k in "abcd"))
    lines += [f"note: {n}" for n in ps.notes]
    emit(args, "prediction_set", payload, "\n".join(lines), stem="predictions")
    return EXIT_OK


def _spectrum_summary(spec: Spectrum, path, hit) -> dict:
    cert = spec.completeness
    pos = spec.tau[spec.tau > 0]
    return {"operator": spec.operator, "bc": spec.bc, "tau_max": spec.tau_max,
            "distinct": len(spec), "total": spec.total,
            "zero_multiplicity": int(spec.mult[spec.tau == 0].sum()),
            "smallest_positive": float(pos[0]) if len(pos) else None,
            "max_residual": float(spec.residual.max()) if len(spec) else 0.0,
            "certificate": None if cert is None else {
                "weyl_band_ok": cert.weyl_band_ok, "max_band_deviation": cert.max_band_deviation,
                "band_limit": cert.band_limit, "scan_step": cert.scan_step,
                "residual_max": cert.residual_max},
            "cache_path": str(path) if path else None, "cache_hit": hit, "meta": spec.meta}


def cmd_spectrum(args) -> int:
    cfg = effective_config(args)
    spec, path, hit = get_spectrum(cfg)
    summ = _spectrum_summary(spec, path, hit)
    if args.out_dir:
        write_csv(Path(args.out_dir) / "spectrum.csv", ("tau", "multiplicity", "m", "k", "residual"),
                  [(repr(float(t)), int(mu), int(m), int(k), repr(float(r)))
                   for t, mu, m, k, r in zip(spec.tau, spec.mult, spec.m, spec.k, spec.residual)])
    text = "\n".join(f"{k}: {_fmt(v)}" for k, v in summ.items() if k != "meta")
    emit(args, "spectrum_summary", _with_config(summ, cfg), text)
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = effective_config(args)
    spec, path, hit = get_spectrum(cfg)
    grid = t_grid_of(cfg, spec)
    c_lead = spec.weyl_leading
    heat_d = asy.fit_heat_second_coeff(spec, c_lead, grid)
    heat_c = asy.fit_heat_leading_coeff(spec, grid)
    count_b = asy.fit_counting_second_coeff(spec, c_lead)
    if args.out_dir:
        write_csv(Path(args.out_dir) / "heat_plot.csv", asy.PLOT_COLUMNS,
                  asy.heat_plot_rows(spec, c_lead, grid))
    payload = {"heat_d": heat_d.to_dict(), "heat_c": heat_c.to_dict(),
               "counting_b": count_b.to_dict(), "leading_known": c_lead}
    text = "\n".join(f"{r.target:<11} {r.estimate:.10g} +- {r.stderr:.3g}  window "
                     f"[{r.window[0]:.4g}, {r.window[1]:.4g}] ({r.samples} samples, {r.method})"
                     for r in (heat_c, heat_d, count_b))
    emit(args, "fit", _with_config(payload, cfg), text)
    return EXIT_OK


def cmd_adjudicate(args) -> int:
    cfg = effective_config(args)
    if cfg["operator"] != "lame":
        raise ConfigError("adjudicate needs operator 'lame'")
    gate = scalar_control_gate(cfg)
    spec, path, hit = get_spectrum(cfg)
    grid = t_grid_of(cfg, spec)
    report = asy.adjudicate(spec, predictions_for(cfg), grid, config=cfg)
    if args.out_dir:
        write_csv(Path(args.out_dir) / "heat_plot.csv", asy.PLOT_COLUMNS,
                  asy.heat_plot_rows(spec, spec.weyl_leading, grid))
    payload = _with_config(report.to_dict(), cfg)
    payload["scalar_control"] = gate
    h = report.measured["heat_d"]
    lines = [f"measured d = {h['estimate']:.10g} +- {h['stderr']:.3g} (heat route)",
             f"counting route d = {report.measured['counting_d_equivalent']:.10g}"]
    for k, v in report.distances.items():
        lines.append(f"  {k:<42} predicted {v['predicted']:>12.8g}  "
                     f"|diff| = {v['in_stderr']:.3g} stderr")
    lines.append(f"decisive: {report.decisive}   winner: {report.winner or '-'}")
    lines += [f"note: {n}" for n in report.notes]
    emit(args, "adjudication_report", payload, "\n".join(lines))
    if args.require_decisive and not report.decisive:
        print("adjudication is not decisive", file=sys.stderr)
        return EXIT_INDECISIVE
    return EXIT_OK


def cmd_sum_rule(args) -> int:
    cfg = effective_config(args)
    if cfg["operator"] != "lame":
        raise ConfigError("sum-rule needs operator 'lame'")
    cfg_d, cfg_f = dict(cfg, bc="dir"), dict(cfg, bc="free")
    sd, _, _ = get_spectrum(cfg_d)
    sf, _, _ = get_spectrum(cfg_f)
    policy = cfg["gamma_policy"]
    if policy == "unit" and material_of(cfg).alpha >= 1.0:
        policy = "family"
    res = asy.check_sum_rule(sd, sf, (predictions_for(cfg, "dir", "unit"),
                                      predictions_for(cfg, "free", policy)),
                             t_grid_of(cfg_d, sd), t_grid_of(cfg_f, sf))
    payload = _with_config(res.to_dict(), cfg)
    lines = [f"d_dir + d_free = {res.measured_sum:.10g} +- {res.stderr:.3g}"
             f"   (within 2 stderr of 0: {res.within_2_stderr})"]
    lines += [f"  predicted by {k:<30} {v:.10g}" for k, v in res.predicted_sums.items()]
    emit(args, "sum_rule", payload, "\n".join(lines))
    return EXIT_OK


SWEEP_TARGETS = ("beta", "SV", "SV_A26_as_printed", "Thm3_1", "MS_limit", "measured")


def cmd_sweep(args) -> int:
    cfg = effective_config(args)
    targets = args.targets
    for t in targets:
        if t not in SWEEP_TARGETS:
            raise ConfigError(f"unknown sweep target {t!r}; choose from {SWEEP_TARGETS}")
    rows = []
    ct2 = float(cfg["material"]["ct2"])
    for alpha in args.alphas:
        if alpha <= 0:
            raise ConfigError(f"alpha must be positive, got {alpha}")
        acfg = dict(cfg, material={"ct2": ct2, "cl2": ct2 / alpha})
        ps = predictions_for(acfg, policy="unit")
        dvals = ps.d_values()
        for t in targets:
            note = ""
            if t == "beta":
                try:
                    if cfg["bc"] == "dir":
                        val = beta_dirichlet(alpha)
                    else:
                        g = rayleigh_roots(alpha).unit_interval_root
                        val = beta_free(alpha, g) if g is not None else math.nan
                        note = f"gamma={g!r}" if g is not None else "no root in (0,1)"
                except DomainError as exc:
                    val, note = math.nan, str(exc)
            elif t == "measured":
                spec, _, _ = get_spectrum(acfg)
                fit = asy.fit_heat_second_coeff(spec, spec.weyl_leading, t_grid_of(acfg, spec))
                val, note = fit.estimate, f"stderr={fit.stderr:.3g}"
            else:
                val = dvals.get(t, math.nan)
                e = ps.entries.get(t)
                if hasattr(e, "reason"):
                    note = e.reason
            rows.append((repr(alpha), cfg["bc"], t, repr(float(val)), note))
    header = ("alpha", "bc", "target", "value", "note")
    if args.out_dir:
        write_csv(Path(args.out_dir) / "sweep.csv", header, rows)
    if args.json:
        data = validated("sweep", {"rows": [dict(zip(header, r)) for r in rows],
                                   "effective_config": cfg, "config_hash": config_hash(cfg)})
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        sys.stdout.write(csv_text(header, rows))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="JSON config file")
    p.add_argument("--cache-dir", default=d, help="spectrum cache directory (env WEYL_CACHE_DIR)")
    p.add_argument("--out-dir", default=d, help="directory for JSON/CSV outputs")
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS if suppress else False,
                   help="print JSON instead of tables")
    p.add_argument("--require-decisive", action="store_true",
                   default=argparse.SUPPRESS if suppress else False,
                   help="exit with code 4 when adjudication is not decisive")


def _experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, help="ct2/cl2 (with --ct2, default 1)")
    p.add_argument("--ct2", type=float)
    p.add_argument("--cl2", type=float)
    p.add_argument("--bc", choices=("dir", "free", "neu"))
    p.add_argument("--tau-max", type=float)
    p.add_argument("--operator", choices=("lame", "scalar_laplace"))
    p.add_argument("--components", type=int)
    p.add_argument("--rectangle", type=float, nargs=2, metavar=("A", "B"))
    p.add_argument("--gamma-policy", help="'unit', 'family' or a number")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elastweyl",
                                     description="Two-term Weyl asymptotics for the planar Lame operator")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rayleigh", help="real roots of the Rayleigh sextic")
    p.add_argument("--alpha", type=float, required=True)
    p.set_defaults(func=cmd_rayleigh)

    p = sub.add_parser("beta", help="Dirichlet and free beta coefficients")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, help="Rayleigh root (default: every real root)")
    p.add_argument("--quad-tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_beta)

    simple = {"predict": (cmd_predict, "prediction table for one configuration"),
              "spectrum": (cmd_spectrum, "compute or load a certified spectrum"),
              "fit": (cmd_fit, "heat and counting coefficient fits"),
              "adjudicate": (cmd_adjudicate, "compare measured d against all sources"),
              "sum-rule": (cmd_sum_rule, "measured d_dir + d_free")}
    for name, (fn, help_) in simple.items():
        p = sub.add_parser(name, help=help_)
        _experiment_flags(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("sweep", help="CSV of beta and predictions across alpha")
    _experiment_flags(p)
    p.add_argument("--alphas", type=lambda s: [float(x) for x in s.split(",")], required=True)
    p.add_argument("--targets", type=lambda s: s.split(","), default=["beta", "SV", "Thm3_1"])
    p.set_defaults(func=cmd_sweep)

    for sp in sub.choices.values():
        _global_flags(sp, suppress=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidMaterialError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SpectrumError, ConvergenceError, asy.InsufficientSpectrumError, GateError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
