"""
Batch driver: ``python -m kahlerquant <suite> [flags]``.

Every check in a report is tagged ``exact`` (decided symbolically) or
``numeric`` (decided against a tolerance).  Exit status: 0 all pass,
1 an exact identity failed, 2 a numeric check failed, 3 bad configuration or
parameters outside the chart's domain.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .fock import QuadratureError
from .params import ModelParams, as_fraction
from .symcore import DomainError, GaussRat, format_gaussrat

SCHEMA = "kahlerquant-report/1"
SUITES = ("geometry", "algebra", "operators", "spectrum", "gram", "adjoint", "hproj")
MEASURES = {"paper": "paper_literal", "corrected": "adjoint_corrected"}
HPROJ_ACTIONS = ("flatness", "classify", "curve")

EXIT_OK, EXIT_EXACT, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    params: ModelParams
    cutoff: int = 6
    measure: str = "paper_literal"
    tol: float = 1e-6
    suites: List[str] = field(default_factory=list)
    seed: int = 0
    out: Optional[str] = None
    fmt: str = "json"
    hproj_action: str = "flatness"
    point: Optional[List[complex]] = None
    curve_csv: Optional[str] = None
    timing: bool = False

    def __post_init__(self):
        if self.cutoff < 0:
            raise ConfigError("cutoff must be non-negative")
        if self.measure not in MEASURES.values():
            raise ConfigError(f"unknown measure {self.measure!r}")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        bad = [s for s in self.suites if s not in SUITES]
        if bad:
            raise ConfigError(f"unknown suite(s) {bad}")
        if self.fmt not in ("json", "csv", "text"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        if self.hproj_action not in HPROJ_ACTIONS:
            raise ConfigError(f"unknown hproj action {self.hproj_action!r}")
        if "hproj" in self.suites and self.hproj_action == "curve" and not self.curve_csv:
            raise ConfigError("hproj curve needs --input")
        if self.point is not None and len(self.point) != self.params.n:
            raise ConfigError(f"--point needs {self.params.n} coordinates")

    def to_dict(self):
        P = self.params
        return {"n": P.n, "k": str(P.k), "hbar": str(P.hbar), "cutoff": self.cutoff, "measure": self.measure,
                "tol": self.tol, "seed": self.seed, "suites": list(self.suites)}


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------


class Report:
    def __init__(self, config: RunConfig):
        self.config = config
        self.suites: Dict[str, Any] = {}
        self.checks: List[dict] = []
        self.timing: Dict[str, float] = {}
        self.errors: List[str] = []

    def check(self, suite: str, name: str, kind: str, passed: bool, value=None):
        entry = {"suite": suite, "check": name, "kind": kind, "passed": bool(passed)}
        if value is not None:
            entry["value"] = value
        self.checks.append(entry)

    @property
    def exit_code(self) -> int:
        if self.errors:
            return EXIT_CONFIG
        if any(not c["passed"] and c["kind"] == "exact" for c in self.checks):
            return EXIT_EXACT
        if any(not c["passed"] for c in self.checks):
            return EXIT_NUMERIC
        return EXIT_OK

    def to_dict(self) -> dict:
        d = {"schema": SCHEMA, "version": __version__, "config": self.config.to_dict(), "suites": self.suites,
             "checks": self.checks, "errors": self.errors, "exit_code": self.exit_code}
        if self.config.timing:
            d["timing"] = self.timing
        return normalize(d)


def _sig12(x: float):
    if math.isnan(x) or math.isinf(x):
        return str(x)
    return float(f"{x:.12g}")


def normalize(obj):
    """JSON-ready copy: exact numbers as strings, floats to 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, GaussRat):
        return format_gaussrat(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _sig12(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _sig12(obj.real), "im": _sig12(obj.imag)}
    return str(obj)


def emit(report, fmt: str = "json") -> str:
    data = report.to_dict() if isinstance(report, Report) else normalize(report)
    if fmt == "json":
        return json.dumps(data, indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        suites = data.get("suites", {})
        if list(suites) == ["spectrum"]:
            w.writerow(["degree", "value_exact", "value", "multiplicity"])
            for e in suites["spectrum"]["eigenvalues"]:
                w.writerow([e["degree"], e.get("value_exact", ""), e["value"], e["multiplicity"]])
        else:
            w.writerow(["suite", "check", "kind", "passed", "value"])
            for c in data.get("checks", []):
                v = c.get("value", "")
                w.writerow([c["suite"], c["check"], c["kind"], c["passed"],
                            json.dumps(v) if isinstance(v, (dict, list)) else v])
        return buf.getvalue()
    if fmt == "text":
        return _text_summary(data)
    raise ConfigError(f"unknown format {fmt!r}")


def _text_summary(data: dict) -> str:
    cfg = data["config"]
    lines = [f"kahlerquant {data.get('version', '')}  n={cfg['n']} k={cfg['k']} hbar={cfg['hbar']}"]
    alg = data.get("suites", {}).get("algebra")
    if alg:
        lines.append(f"algebra dimension: computed {alg['dimension_computed']} (real) "
                     f"vs claimed {alg['dimension_paper_claim']}")
    spectrum_data = data.get("suites", {}).get("spectrum")
    if spectrum_data:
        vals = ", ".join(f"{e['value_exact']} (x{e['multiplicity']})" for e in spectrum_data["eigenvalues"])
        lines.append(f"spectrum of QH: {vals}")
    for c in data.get("checks", []):
        mark = "PASS" if c["passed"] else "FAIL"
        val = f"  [{c['value']}]" if "value" in c else ""
        lines.append(f"{mark}  {c['suite']:<9} {c['kind']:<7} {c['check']}{val}")
    for e in data.get("errors", []):
        lines.append(f"ERROR {e}")
    lines.append(f"exit code {data.get('exit_code')}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def _suite_geometry(cfg: RunConfig, rep: Report):
    from .geometry import (build_connection_form, build_metric, build_symplectic_form, check_curvature_equals_form,
                           closed_form_inverse, is_closed, is_kahler, metric_report)
    from .symcore import AFrac, I

    P = cfg.params
    out = metric_report(P, samples=3, seed=cfg.seed)
    m = build_metric(P)
    form = build_symplectic_form(m)
    conn = build_connection_form(P)
    corrupted = conn.replace_component(0, conn.alpha_components[0] + AFrac.z(P, 0) * AFrac.zbar(P, 0) * I)
    out["orientation"] = form.orientation
    rep.suites["geometry"] = out
    curv = out["curvature"]
    rep.check("geometry", "g_lower g_upper = I", "exact", out["inverse_is_exact"])
    rep.check("geometry", "inverse matches closed form", "exact", m.g_upper == closed_form_inverse(P))
    rep.check("geometry", "metric is Kähler", "exact", is_kahler(m.g_lower))
    rep.check("geometry", "omega closed", "exact", is_closed(form))
    rep.check("geometry", "d alpha = omega", "exact", out["curvature_equals_form"])
    rep.check("geometry", "corrupted connection detected", "exact",
              not check_curvature_equals_form(corrupted, form))
    rep.check("geometry", "constant holomorphic curvature", "exact", curv["verified"], curv["convention_c"])


def _suite_algebra(cfg: RunConfig, rep: Report):
    from .observables import verify_algebra

    r = verify_algebra(cfg.params)
    rep.suites["algebra"] = r.to_dict()
    for rel in r.relations:
        rep.check("algebra", f"{rel.family}: {rel.name}", "exact", rel.holds)


def _suite_operators(cfg: RunConfig, rep: Report):
    from .quantize import HolomorphicClosureError, operator_table

    try:
        rows = operator_table(cfg.params)
        closure = True
    except HolomorphicClosureError as exc:
        rows, closure = [], False
        rep.suites["operators"] = {"error": str(exc)}
    rep.check("operators", "holomorphic closure", "exact", closure)
    if closure:
        rep.suites["operators"] = {"operators": rows}
        for row in rows:
            rep.check("operators", f"Q{row['observable']} matches closed form", "exact", row["match"])


def _suite_spectrum(cfg: RunConfig, rep: Report):
    from .observables import hamiltonian
    from .quantize import quantize_observable, spectrum

    P = cfg.params
    entries = spectrum(quantize_observable(hamiltonian(P)), cfg.cutoff)
    rep.suites["spectrum"] = {"operator": "H", "eigenvalues": [e.to_dict() for e in entries]}
    ok = len(entries) == cfg.cutoff + 1 and all(
        e.exact and e.value == P.hbar * (e.degree + Fraction(P.n, 2))
        and e.multiplicity == comb(e.degree + P.n - 1, P.n - 1) for e in entries)
    rep.check("spectrum", "E_l = hbar (l + n/2), multiplicity C(l+n-1, n-1)", "exact", ok)


def _suite_gram(cfg: RunConfig, rep: Report):
    from .fock import FockBasis, FockMeasure, monomial_norms

    P = cfg.params
    meas = FockMeasure(P, cfg.measure)
    g = monomial_norms(FockBasis(P.n, cfg.cutoff), meas)
    rep.suites["gram"] = {"measure": meas.describe(), **g.to_dict()}
    rep.check("gram", "quadrature matches closed-form norms", "numeric", g.oracle_rel_error < cfg.tol,
              g.oracle_rel_error)
    rep.check("gram", "monomials orthogonal", "numeric", g.off_diagonal_max < cfg.tol, g.off_diagonal_max)


def _suite_adjoint(cfg: RunConfig, rep: Report):
    from .fock import FockBasis, FockMeasure, adjointness_check, hermitian_invariance_check
    from .geometry import build_connection_form

    P = cfg.params
    basis = FockBasis(P.n, cfg.cutoff)
    out = {}
    for mode in ("paper_literal", "adjoint_corrected"):
        r = adjointness_check(basis, FockMeasure(P, mode))
        out[mode] = r.to_dict()
        rep.check("adjoint", f"{mode}: raising gap equals oracle prediction", "numeric",
                  abs(r.raising_gap - r.predicted_gap) < cfg.tol, r.raising_gap)
    corr = out["adjoint_corrected"]
    rep.check("adjoint", "adjoint_corrected: (Q N^1bar)^dagger = Q N^1", "numeric",
              corr["max_abs_deviation"] < cfg.tol, corr["max_abs_deviation"])
    conn = build_connection_form(P)
    inv = hermitian_invariance_check(conn, FockMeasure(P, cfg.measure), samples=10, seed=cfg.seed)
    ctrl = hermitian_invariance_check(conn, FockMeasure(P, cfg.measure, offset=1), samples=10, seed=cfg.seed)
    out["hermitian_invariance"] = {"residual": inv, "corrupted_control": ctrl}
    rep.suites["adjoint"] = out
    rep.check("adjoint", "connection preserves Hermitian structure", "numeric", inv < 1e-7, inv)
    if P.k != 0:
        rep.check("adjoint", "corrupted density detected", "numeric", ctrl > 1e-3, ctrl)


def _suite_hproj(cfg: RunConfig, rep: Report):
    from .geometry import build_metric
    from .hproj import (PhiField, SampledCurve, classify_4d, flat_metric, flatness_certificate,
                        hplanarity_residual, make_pair, perturbed_metric, b_equation_report)

    P = cfg.params
    g = build_metric(P)
    out = {}
    action = cfg.hproj_action
    if action == "flatness":
        cert = flatness_certificate(g)
        out["flatness"] = {"flat": cert.flat, "phi": [str(x) for x in cert.phi] if cert.phi else None}
        rep.check("hproj", "metric is H-projectively flat", "exact", cert.flat)
        if P.n >= 2:
            ctrl = flatness_certificate(perturbed_metric(P))
            rep.check("hproj", "perturbed metric rejected", "exact", not ctrl.flat)
        beq = {}
        for phi in (PhiField.zero(P), PhiField.log_a(P, Fraction(1, 2))):
            beq[phi.label] = b_equation_report(make_pair(g, flat_metric(P), phi))
        out["b_equation_flat_pair"] = beq
        if P.n == 1:
            rep.check("hproj", "b-equation residual vanishes identically (n=1, printed form)", "exact",
                      all(v["printed"]["exact_zero"] for v in beq.values()))
    elif action == "classify":
        if P.n != 2:
            raise ConfigError("classify needs --n 2")
        point = cfg.point or [0.5, 0.0]
        cls = classify_4d(make_pair(g, flat_metric(P)), point)
        out["classify"] = {"point": [complex(x) for x in point], **cls.to_dict()}
    else:
        with open(cfg.curve_csv, encoding="utf-8") as fh:
            curve = SampledCurve.from_csv(fh.read())
        fit = hplanarity_residual(curve, g)
        out["curve"] = fit.to_dict()
        rep.check("hproj", "curve is H-planar", "numeric", fit.planar, fit.max_residual)
    rep.suites["hproj"] = out


RUNNERS = {
    "geometry": _suite_geometry,
    "algebra": _suite_algebra,
    "operators": _suite_operators,
    "spectrum": _suite_spectrum,
    "gram": _suite_gram,
    "adjoint": _suite_adjoint,
    "hproj": _suite_hproj,
}


def run(config: RunConfig) -> Report:
    rep = Report(config)
    for name in SUITES:
        if name not in config.suites:
            continue
        t0 = time.perf_counter()
        try:
            RUNNERS[name](config, rep)
        except (ConfigError, DomainError) as exc:
            rep.errors.append(f"{name}: {exc}")
        except QuadratureError as exc:
            rep.check(name, "quadrature converged", "numeric", False, str(exc))
        rep.timing[name] = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

DEFAULTS = {"n": "1", "k": "0", "hbar": "1", "cutoff": "6", "measure": "paper", "tol": "1e-6", "seed": "0",
            "format": "json", "out": None}


def parse_config_file(text: str) -> Dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        out[key] = val
    return out


def parse_point(text: str) -> List[complex]:
    try:
        return [complex(s.strip().replace(" ", "")) for s in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --point {text!r}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", help="complex dimension")
    common.add_argument("--k", help="holomorphic curvature as p/q (use --k=-1/2 for negative fractions)")
    common.add_argument("--hbar", help="Planck constant as p/q")
    common.add_argument("--cutoff", help="maximal monomial degree L")
    common.add_argument("--measure", choices=sorted(MEASURES), help="Fock measure exponent")
    common.add_argument("--tol", help="numeric tolerance")
    common.add_argument("--seed", help="seed for sampled checks")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=["json", "csv", "text"])
    common.add_argument("--config", help="key=value file mirroring the flags")
    common.add_argument("--timing", action="store_true", help="include wall-clock timings (breaks determinism)")

    parser = argparse.ArgumentParser(prog="kahlerquant", description="Verification suites for the deformed oscillator.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="suite", required=True)
    for name in SUITES + ("all",):
        sp = sub.add_parser(name, parents=[common])
        if name == "hproj":
            sp.add_argument("action", nargs="?", default="flatness", choices=HPROJ_ACTIONS)
            sp.add_argument("--point", help="comma separated complex coordinates, e.g. 0.5,0.1j")
            sp.add_argument("--input", help="curve CSV: t, Re z1, Im z1, ...")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                values.update(parse_config_file(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    try:
        n = int(values["n"])
        params = ModelParams(n, as_fraction(values["k"]), as_fraction(values["hbar"]))
        cutoff = int(values["cutoff"])
        tol = float(values["tol"])
        seed = int(values["seed"])
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    if values["measure"] not in MEASURES:
        raise ConfigError(f"unknown measure {values['measure']!r}")
    suites = list(SUITES) if args.suite == "all" else [args.suite]
    point = parse_point(args.point) if getattr(args, "point", None) else None
    return RunConfig(params, cutoff, MEASURES[values["measure"]], tol, suites, seed, values["out"],
                     values["format"], getattr(args, "action", "flatness") or "flatness", point,
                     getattr(args, "input", None), args.timing)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"kahlerquant: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rep = run(cfg)
    text = emit(rep, cfg.fmt)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
