"""Command-line interface: single-knot queries, family tables, density sweeps and Floer fixtures."""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from gamma4 import __version__, bounds, classical, floer, linkform, topobstruct
from gamma4.arith import DEFAULT_MAX_FACTOR_DIGITS, Factorization, factorize
from gamma4.cache import NullCache, ResultCache, default_cache_dir
from gamma4.errors import ComplexFormatError, Gamma4Error, StructureViolation, ValidationError
from gamma4.torusknot import LaurentPoly, TorusKnot, alexander, genus, new_torus_knot, pinch_number, pinch_sequence, stretch

FORMATS = ("table", "json", "csv")

RECORD_CSV_FIELDS = (
    "p",
    "q",
    "error",
    "signature",
    "arf",
    "determinant",
    "genus",
    "stretch",
    "pinch_number",
    "upsilon",
    "upsilon_bar",
    "upsilon_underbar",
    "smooth_lo",
    "smooth_hi",
    "topological_lo",
    "topological_hi",
    "certificates",
)
PINCH_CSV_FIELDS = ("step", "source_p", "source_q", "target_p", "target_q", "t", "h", "sign")
SELFTEST_CSV_FIELDS = ("check", "passed", "detail")


# ---------------------------------------------------------------------------
# settings: flags > GAMMA4_* environment variables > config file > defaults


@dataclass(frozen=True)
class Settings:
    format: str = "json"
    jobs: int = 1
    cache_dir: str = ""
    use_cache: bool = True
    skip_floer: bool = False
    skip_linkform: bool = False
    max_factor_digits: int = DEFAULT_MAX_FACTOR_DIGITS
    max_matrix: int = linkform.DEFAULT_MAX_MATRIX
    timings: bool = False

    def bound_options(self) -> bounds.BoundOptions:
        return bounds.BoundOptions(
            use_floer=not self.skip_floer,
            use_linkform=not self.skip_linkform,
            max_factor_digits=self.max_factor_digits,
        )


# setting name -> (config/env key, parser)
_KEYS = {
    "format": ("format", str),
    "jobs": ("jobs", int),
    "cache_dir": ("cache_dir", str),
    "use_cache": ("no_cache", lambda s: not _truthy(s)),
    "skip_floer": ("skip_floer", lambda s: _truthy(s)),
    "skip_linkform": ("skip_linkform", lambda s: _truthy(s)),
    "max_factor_digits": ("max_factor_digits", int),
    "max_matrix": ("max_matrix", int),
    "timings": ("timings", lambda s: _truthy(s)),
}


def _truthy(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off", ""):
        return False
    raise ValidationError(f"expected a boolean, got {s!r}")


def config_path(env: dict) -> Path:
    if env.get("GAMMA4_CONFIG"):
        return Path(env["GAMMA4_CONFIG"])
    base = env.get("XDG_CONFIG_HOME") or os.path.join(os.path.expanduser("~"), ".config")
    return Path(base) / "gamma4" / "config.ini"


def resolve_settings(args: argparse.Namespace, env: Optional[dict] = None, stdout_isatty: bool = False) -> Settings:
    env = dict(os.environ) if env is None else env
    values: dict[str, Any] = {}
    path = config_path(env)
    if path.is_file():
        parser = configparser.ConfigParser()
        try:
            parser.read(path)
        except configparser.Error as exc:
            raise ValidationError(f"cannot read config file {path}: {exc}") from None
        if parser.has_section("gamma4"):
            section = parser["gamma4"]
            unknown = set(section) - {key for key, _ in _KEYS.values()}
            if unknown:
                raise ValidationError(f"unknown keys in {path}: {', '.join(sorted(unknown))}")
            for name, (key, conv) in _KEYS.items():
                if key in section:
                    values[name] = _convert(conv, section[key], f"{path} [{key}]")
    for name, (key, conv) in _KEYS.items():
        env_name = "GAMMA4_" + key.upper()
        if env_name in env:
            values[name] = _convert(conv, env[env_name], env_name)
    flag_values = {
        "format": args.format,
        "jobs": args.jobs,
        "cache_dir": None,
        "use_cache": False if args.no_cache else None,
        "skip_floer": True if args.skip_floer else None,
        "skip_linkform": True if args.skip_linkform else None,
        "max_factor_digits": args.max_factor_digits,
        "max_matrix": args.max_matrix,
        "timings": True if args.timings else None,
    }
    for name, v in flag_values.items():
        if v is not None:
            values[name] = v
    if "format" not in values:
        values["format"] = "table" if stdout_isatty else "json"
    if "cache_dir" not in values or not values["cache_dir"]:
        values["cache_dir"] = str(default_cache_dir())
    s = Settings(**values)
    if s.format not in FORMATS:
        raise ValidationError(f"format must be one of {', '.join(FORMATS)}, got {s.format!r}")
    if s.jobs < 1:
        raise ValidationError("jobs must be at least 1")
    if s.max_factor_digits < 1 or s.max_matrix < 1:
        raise ValidationError("ceilings must be positive")
    return s


def _convert(conv, raw: str, where: str):
    try:
        return conv(raw)
    except ValueError:
        raise ValidationError(f"bad value {raw!r} for {where}") from None


def open_cache(settings: Settings):
    if not settings.use_cache:
        return NullCache()
    return ResultCache(Path(settings.cache_dir))


# ---------------------------------------------------------------------------
# serialization helpers


def frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def knot_json(K: TorusKnot) -> dict:
    return {"p": K.p, "q": K.q}


def error_json(exc: Gamma4Error) -> dict:
    return {"type": type(exc).__name__, "category": exc.kind, "message": str(exc)}


def interval_json(iv: bounds.Interval) -> dict:
    return {"lo": iv.lo, "hi": iv.hi, "exact": iv.exact}


def certificate_json(c: bounds.BoundCertificate) -> dict:
    return {
        "name": c.name,
        "direction": c.direction,
        "value": c.value,
        "scope": c.scope,
        "citation": c.citation,
        "detail": c.detail,
    }


# ---------------------------------------------------------------------------
# per-knot records


class KnotComputation:
    """Objects shared by the invariants and bounds blocks, reusing cached values when given."""

    def __init__(self, K: TorusKnot, settings: Settings, cached: Optional[dict] = None):
        self.K = K
        self.settings = settings
        self.cached = cached or {}
        self.fresh: dict[str, Any] = {}

    def summary(self) -> floer.HfkiSummary:
        raw = self.fresh.get("hfki") or self.cached.get("hfki")
        if raw is None:
            C, iota = floer.staircase(self.K)
            s = floer.involutive_upsilons(C, iota, with_towers=False)
            raw = [s.upsilon, s.upsilon_bar, s.upsilon_underbar]
            self.fresh["hfki"] = raw
        return floer.HfkiSummary(*raw)

    def factorization(self) -> Optional[Factorization]:
        E = self.K.even_first()
        if self.K.is_unknot or E.p % 2:
            return None
        n = E.q
        raw = self.fresh.get("factorization") or self.cached.get("factorization")
        if raw is not None and len(str(n)) <= self.settings.max_factor_digits:
            return Factorization(n, tuple((s, e) for s, e in raw))
        f = factorize(n, self.settings.max_factor_digits)
        self.fresh["factorization"] = [list(pair) for pair in f.factors]
        return f


def invariants_block(comp: KnotComputation) -> dict:
    K, settings = comp.K, comp.settings
    rec = classical.yasuhara_obstruction(K)
    delta = alexander(K)
    ups = comp.summary() if not settings.skip_floer else None
    lf = None
    if not settings.skip_linkform and not K.is_unknot and K.even_first().p % 2 == 0:
        value = linkform.linking_form(K, max_size=settings.max_matrix)
        lf = {"group_order": value.group_order, "value": frac(value.value), "verified": value.verified}
    return {
        "signature": rec.signature,
        "arf": rec.arf,
        "determinant": rec.determinant,
        "genus": genus(K),
        "yasuhara_class": rec.yasuhara_class,
        "alexander": {str(e): c for e, c in delta.terms},
        "stretch": stretch(K),
        "pinch_number": pinch_number(K),
        "upsilon": ups.upsilon if ups else None,
        "upsilon_bar": ups.upsilon_bar if ups else None,
        "upsilon_underbar": ups.upsilon_underbar if ups else None,
        "linking_form": lf,
    }


def bounds_block(comp: KnotComputation) -> tuple[dict, Optional[bool]]:
    settings = comp.settings
    options = settings.bound_options()
    calibrated = None
    summary = None
    if options.use_floer and not comp.K.is_unknot:
        calibrated = bounds.floer_calibration().ok
        if calibrated:
            summary = comp.summary()
    factorization = comp.factorization() if options.use_linkform else None
    r = bounds.bound_report(comp.K, options, summary=summary, factorization=factorization)
    block = {
        "smooth": interval_json(r.smooth),
        "topological": interval_json(r.topological),
        "certificates": [certificate_json(c) for c in r.certificates],
        "unavailable": list(r.unavailable),
    }
    return block, r.calibration_ok


def knot_record(
    p: int,
    q: int,
    settings: Settings,
    want_invariants: bool = True,
    want_bounds: bool = True,
    cached: Optional[dict] = None,
) -> tuple[dict, dict]:
    """The output record for T(p, q) and the freshly computed cacheable objects."""
    K = new_torus_knot(p, q)
    comp = KnotComputation(K, settings, cached)
    timings: dict[str, float] = {}
    inv = bnd = None
    calibration_ok = None
    if want_invariants:
        t0 = time.perf_counter()
        inv = invariants_block(comp)
        timings["invariants_s"] = round(time.perf_counter() - t0, 3)
    if want_bounds:
        t0 = time.perf_counter()
        bnd, calibration_ok = bounds_block(comp)
        timings["bounds_s"] = round(time.perf_counter() - t0, 3)
    record = {
        "kind": "record",
        "knot": knot_json(K),
        "invariants": inv,
        "bounds": bnd,
        "diagnostics": {
            "version": __version__,
            "calibration_ok": calibration_ok,
            "timings": timings if settings.timings else None,
        },
        "error": None,
    }
    return record, comp.fresh


def error_record(p: int, q: int, exc: Gamma4Error) -> dict:
    return {
        "kind": "record",
        "knot": {"p": p, "q": q},
        "invariants": None,
        "bounds": None,
        "diagnostics": {"version": __version__, "calibration_ok": None, "timings": None},
        "error": error_json(exc),
    }


def _cached_objects(cache, K: TorusKnot) -> dict:
    out = {}
    hfki = cache.get("hfki", list(K.key))
    if hfki is not None:
        out["hfki"] = hfki
    E = K.even_first()
    if not K.is_unknot and E.p % 2 == 0:
        f = cache.get("factorization", E.q)
        if f is not None:
            out["factorization"] = f
    return out


def _store_objects(cache, K: TorusKnot, fresh: dict):
    if "hfki" in fresh:
        cache.put("hfki", list(K.key), fresh["hfki"])
    if "factorization" in fresh:
        cache.put("factorization", K.even_first().q, fresh["factorization"])


def record_csv_row(record: dict) -> list:
    inv = record["invariants"] or {}
    bnd = record["bounds"] or {}
    smooth = bnd.get("smooth") or {}
    top = bnd.get("topological") or {}
    certs = ";".join(f"{c['name']}:{c['direction']}:{c['value']}" for c in bnd.get("certificates", []))
    err = record["error"]
    return [
        record["knot"]["p"],
        record["knot"]["q"],
        f"{err['type']}: {err['message']}" if err else None,
        inv.get("signature"),
        inv.get("arf"),
        inv.get("determinant"),
        inv.get("genus"),
        inv.get("stretch"),
        inv.get("pinch_number"),
        inv.get("upsilon"),
        inv.get("upsilon_bar"),
        inv.get("upsilon_underbar"),
        smooth.get("lo"),
        smooth.get("hi"),
        top.get("lo"),
        top.get("hi"),
        certs or None,
    ]


# ---------------------------------------------------------------------------
# family table specifications


_RANGE = re.compile(r"^(p|q)=(\d+)(?:\.\.(\d+))?$")


def parse_table_spec(tokens: list[str]) -> list[tuple[int, int]]:
    """Pairs from a spec such as ``p=4 q=5..99 odd``; the filter applies to q."""
    ranges: dict[str, range] = {}
    parity = "all"
    for tok in " ".join(tokens).split():
        m = _RANGE.match(tok)
        if m:
            name, lo, hi = m.group(1), int(m.group(2)), int(m.group(3) or m.group(2))
            if hi < lo:
                raise ValidationError(f"empty range in {tok!r}")
            if name in ranges:
                raise ValidationError(f"{name} given twice")
            ranges[name] = range(lo, hi + 1)
        elif tok in ("odd", "even", "all"):
            parity = tok
        else:
            raise ValidationError(f"cannot parse table spec token {tok!r}")
    if set(ranges) != {"p", "q"}:
        raise ValidationError("table spec needs both p=... and q=...")
    pairs = []
    for p in ranges["p"]:
        for q in ranges["q"]:
            if parity == "odd" and q % 2 == 0 or parity == "even" and q % 2:
                continue
            pairs.append((p, q))
    return pairs


def _table_worker(args) -> tuple[dict, dict]:
    p, q, settings, cached = args
    try:
        return knot_record(p, q, settings, cached=cached)
    except Gamma4Error as exc:
        return error_record(p, q, exc), {}


# ---------------------------------------------------------------------------
# commands; each returns (rows, csv_fields, exit_code)


def cmd_invariants(args, settings: Settings):
    return _single_record(args, settings, want_invariants=True, want_bounds=False)


def cmd_bounds(args, settings: Settings):
    return _single_record(args, settings, want_invariants=False, want_bounds=True)


def _single_record(args, settings, want_invariants, want_bounds):
    K = new_torus_knot(args.p, args.q)
    cache = open_cache(settings)
    try:
        record, fresh = knot_record(args.p, args.q, settings, want_invariants, want_bounds, _cached_objects(cache, K))
        _store_objects(cache, K, fresh)
    finally:
        cache.close()
    return [record], RECORD_CSV_FIELDS, 0


def cmd_pinch(args, settings: Settings):
    K = new_torus_knot(args.p, args.q)
    steps = pinch_sequence(K)
    row = {
        "kind": "pinch",
        "knot": knot_json(K),
        "pinch_number": len(steps),
        "steps": [
            {
                "source": knot_json(s.source),
                "target": knot_json(s.target),
                "t": s.t,
                "h": s.h,
                "sign": s.sign,
            }
            for s in steps
        ],
    }
    return [row], PINCH_CSV_FIELDS, 0


def cmd_linking_form(args, settings: Settings):
    K = new_torus_knot(args.p, args.q)
    if args.matrix_only:
        value = linkform.linking_form_from_matrix(K, settings.max_matrix)
    else:
        value = linkform.linking_form(K, max_size=settings.max_matrix)
    p, q = K.even_first().p, K.even_first().q
    row = {
        "kind": "linking_form",
        "knot": knot_json(K),
        "group_order": value.group_order,
        "value": frac(value.value),
        "closed_form": frac(linkform.linking_form_closed(K).value),
        "generator": value.generator,
        "verified": value.verified or args.matrix_only,
        "matrix_size": linkform.goeritz_size(p, q),
    }
    return [row], ("p", "q", "group_order", "value", "closed_form", "verified", "matrix_size"), 0


def cmd_obstruct_top(args, settings: Settings):
    K = new_torus_knot(args.p, args.q)
    res = topobstruct.lf_mobius_obstructed(K, settings.max_factor_digits)
    modulus = classes = None
    if res.verdict != topobstruct.Verdict.INAPPLICABLE and not K.is_unknot:
        residues = topobstruct.obstructing_residues(K.even_first().p)
        modulus, classes = residues.modulus, list(residues.classes)
    row = {
        "kind": "obstruction",
        "knot": knot_json(K),
        "verdict": res.verdict.value,
        "witness_prime": res.witness_prime,
        "reason": res.reason,
        "modulus": modulus,
        "classes": classes,
    }
    return [row], ("p", "q", "verdict", "witness_prime", "modulus", "classes", "reason"), 0


def cmd_density(args, settings: Settings):
    rows = []
    for N in sorted(set(args.N)):
        rep = topobstruct.density_experiment(args.p, N, jobs=settings.jobs)
        rows.append(
            {
                "kind": "density",
                "p": rep.p,
                "N": rep.N,
                "eligible": rep.eligible,
                "obstructed": rep.obstructed,
                "ratio": frac(rep.ratio),
                "ratio_decimal": topobstruct.decimal_string(rep.ratio),
                "mertens_decimal": topobstruct.decimal_string(rep.mertens_estimate),
                "monotone": rep.monotone,
                "compared_with": list(rep.compared_with),
            }
        )
    return rows, topobstruct.DensityReport.CSV_FIELDS, 0


def cmd_floer(args, settings: Settings):
    try:
        C, iota = floer.load_complex(args.path)
        s = floer.involutive_upsilons(C, iota)
    except StructureViolation as exc:
        # a user-supplied complex that is not a knot complex is bad input, not an internal fault
        raise ComplexFormatError(f"{args.path}: {exc}") from exc
    row = {
        "kind": "floer",
        "source": str(args.path),
        "generators": C.size,
        "upsilon": s.upsilon,
        "upsilon_bar": s.upsilon_bar,
        "upsilon_underbar": s.upsilon_underbar,
        "cone_towers": list(s.cone_towers),
        "complex_towers": list(s.complex_towers),
        "certificates": [certificate_json(c) for c in bounds.involutive_certificates(s)],
    }
    return [row], ("source", "generators", "upsilon", "upsilon_bar", "upsilon_underbar"), 0


def cmd_table(args, settings: Settings):
    pairs = parse_table_spec(args.spec)
    cache = open_cache(settings)
    try:
        tasks = []
        for p, q in pairs:
            cached = _cached_objects(cache, TorusKnot(p, q)) if p >= 0 and q >= 0 and math.gcd(p, q) == 1 else {}
            tasks.append((p, q, settings, cached))
        if settings.jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=settings.jobs) as pool:
                results = list(pool.map(_table_worker, tasks, chunksize=max(1, len(tasks) // (4 * settings.jobs))))
        else:
            results = [_table_worker(t) for t in tasks]
        # only this process writes to the cache
        for (p, q, _, _), (record, fresh) in zip(tasks, results):
            if fresh:
                _store_objects(cache, TorusKnot(p, q), fresh)
    finally:
        cache.close()
    return [r for r, _ in results], RECORD_CSV_FIELDS, 0


def run_selftest() -> list[dict]:
    checks = []

    def check(name: str, fn):
        try:
            ok, detail = fn()
        except Gamma4Error as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        checks.append({"kind": "selftest", "check": name, "passed": bool(ok), "detail": detail})

    def four_strand_upsilon():
        bad = [q for q in range(3, 100, 2) if floer.upsilon(TorusKnot(4, q)) != -(q - 1)]
        return not bad, "upsilon(T(4,q)) = -(q-1) for odd q <= 99" if not bad else f"fails for q in {bad}"

    def figure_eight():
        text = _packaged_fixture()
        C, iota = floer.parse_complex(text)
        s = floer.involutive_upsilons(C, iota)
        got = (s.upsilon, s.upsilon_bar, s.upsilon_underbar)
        return got == (0, 1, -1), f"(upsilon, upsilon_bar, upsilon_underbar) = {got}"

    def vector_identity():
        count = 0
        for p in range(2, 11, 2):
            for q in range(3, 14, 2):
                if math.gcd(p, q) != 1:
                    continue
                data = linkform.goeritz_matrix(TorusKnot(p, q))
                v = linkform.corner_row_vector(TorusKnot(p, q))
                expected = [q] + [0] * (data.size - 1)
                if linkform.vector_times_matrix(v, data.matrix) != expected or abs(data.determinant) != q:
                    return False, f"fails for T({p},{q})"
                count += 1
        return True, f"vG = (q, 0, ..., 0) and |det G| = q for {count} knots"

    def calibration():
        cal = bounds.floer_calibration()
        return cal.ok, "grading convention calibrated" if cal.ok else "; ".join(cal.failures)

    def alexander_t35():
        d = alexander(TorusKnot(3, 5)).as_dict()
        expected = {-4: 1, -3: -1, -1: 1, 0: -1, 1: 1, 3: -1, 4: 1}
        return d == expected, f"Delta_T(3,5) = {alexander(TorusKnot(3, 5))}"

    def residues_four():
        r = topobstruct.obstructing_residues(4)
        return r.classes == (5,), f"obstructing classes mod {r.modulus}: {list(r.classes)}"

    def literature():
        t = bounds.load_literature()
        return bool(t.facts) and bool(t.families), f"version {t.version}: {len(t.facts)} facts, {len(t.families)} families"

    check("floer-four-strand-upsilon", four_strand_upsilon)
    check("floer-figure-eight-fixture", figure_eight)
    check("floer-calibration", calibration)
    check("goeritz-vector-identity", vector_identity)
    check("alexander-t35", alexander_t35)
    check("obstructing-residues-p4", residues_four)
    check("literature-table", literature)
    return checks


def _packaged_fixture() -> str:
    from importlib import resources

    return resources.files("gamma4").joinpath("fixtures/figure8.cfk").read_text()


def cmd_selftest(args, settings: Settings):
    rows = run_selftest()
    return rows, SELFTEST_CSV_FIELDS, 0 if all(r["passed"] for r in rows) else 1


# ---------------------------------------------------------------------------
# rendering


def _csv_value(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, list):
        return " ".join(str(x) for x in v)
    return v


def _csv_rows(rows: list[dict], fields) -> list[list]:
    out = []
    for row in rows:
        kind = row["kind"]
        if kind == "record":
            out.append(record_csv_row(row))
        elif kind == "pinch":
            for i, s in enumerate(row["steps"], 1):
                out.append(
                    [i, s["source"]["p"], s["source"]["q"], s["target"]["p"], s["target"]["q"], s["t"], s["h"], s["sign"]]
                )
        elif kind == "density":
            ratio = Fraction(row["ratio"])
            out.append(
                [row["p"], row["N"], row["eligible"], row["obstructed"], ratio.numerator, ratio.denominator]
                + [row["ratio_decimal"], row["mertens_decimal"], row["monotone"]]
            )
        else:
            flat = dict(row)
            flat.update(row.get("knot", {}))
            out.append([flat.get(f) for f in fields])
    return out


def render(rows: list[dict], fields, fmt: str) -> str:
    if fmt == "json":
        return "".join(json.dumps(r) + "\n" for r in rows)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        for r in _csv_rows(rows, fields):
            w.writerow([_csv_value(v) for v in r])
        return buf.getvalue()
    if len(rows) > 1 and all(r["kind"] == "record" for r in rows):
        return _aligned(fields, [[_csv_value(v) for v in r] for r in _csv_rows(rows, fields)])
    if rows and all(r["kind"] == "selftest" for r in rows):
        width = max(len(r["check"]) for r in rows)
        return "".join(f"{'PASS' if r['passed'] else 'FAIL'}  {r['check']:<{width}}  {r['detail']}\n" for r in rows)
    return "\n\n".join(_human(r) for r in rows) + "\n"


def _aligned(fields, rows) -> str:
    # the certificate column is long; keep it last
    cells = [[str(f) for f in fields]] + [[str(v) for v in r] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(fields))]
    return "".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() + "\n" for row in cells)


def _human(obj, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    for key, value in obj.items():
        if key == "kind":
            continue
        if isinstance(value, dict) and key == "knot":
            lines.append(f"{pad}knot: T({value['p']},{value['q']})")
        elif isinstance(value, dict) and key in ("smooth", "topological"):
            tag = " exact" if value["exact"] else ""
            lines.append(f"{pad}{key}: [{value['lo']}, {value['hi']}]{tag}")
        elif isinstance(value, dict) and key == "alexander":
            poly = LaurentPoly.from_dict({int(e): c for e, c in value.items()})
            lines.append(f"{pad}alexander: {poly}")
        elif isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.append(_human(value, indent + 1))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{pad}{key}:")
            for item in value:
                if "direction" in item:
                    extra = f" ({item['detail']})" if item.get("detail") else ""
                    lines.append(
                        f"{pad}  {item['direction']:<5} {item['value']:>3}  {item['name']} [{item['scope']}]"
                        f"  {item['citation']}{extra}"
                    )
                else:
                    lines.append(_human(item, indent + 1))
        else:
            shown = "-" if value is None else value
            lines.append(f"{pad}{key}: {shown}")
    return "\n".join(line for line in lines if line)


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default=None, help="output format (default: table on a terminal, json otherwise)")
    common.add_argument("--jobs", type=int, default=None, help="worker processes for table and density")
    common.add_argument("--no-cache", action="store_true", default=None, help="do not read or write the result cache")
    common.add_argument("--skip-floer", action="store_true", default=None, help="skip Floer computations")
    common.add_argument("--skip-linkform", action="store_true", default=None, help="skip linking form computations")
    common.add_argument("--max-factor-digits", type=int, default=None, help="refuse to factor integers longer than this")
    common.add_argument("--max-matrix", type=int, default=None, help="largest Goeritz matrix to build")
    common.add_argument("--timings", action="store_true", default=None, help="record wall-clock timings in diagnostics")

    parser = argparse.ArgumentParser(prog="gamma4", description="Invariants and nonorientable 4-ball genus bounds of torus knots.")
    parser.add_argument("--version", action="version", version=f"gamma4 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def knot_command(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("p", type=int)
        p.add_argument("q", type=int)
        p.set_defaults(func=func)
        return p

    knot_command("invariants", cmd_invariants, "classical, Alexander, pinch and Floer invariants of T(p,q)")
    knot_command("bounds", cmd_bounds, "certified smooth and topological intervals for T(p,q)")
    knot_command("pinch", cmd_pinch, "pinch move sequence of T(p,q) down to the unknot")
    lf = knot_command("linking-form", cmd_linking_form, "linking form of the double branched cover of T(p,q)")
    lf.add_argument("--matrix-only", action="store_true", help="compute through the Goeritz matrix only")
    knot_command("obstruct-top", cmd_obstruct_top, "quadratic residue obstruction to a locally flat Mobius band")

    d = sub.add_parser("density", parents=[common], help="share of q <= N not obstructed by the residue test")
    d.add_argument("p", type=int)
    d.add_argument("N", type=int, nargs="+")
    d.set_defaults(func=cmd_density)

    t = sub.add_parser("table", parents=[common], help="records for a family, e.g. 'p=4 q=5..99 odd'")
    t.add_argument("spec", nargs="+")
    t.set_defaults(func=cmd_table)

    f = sub.add_parser("floer", parents=[common], help="involutive upsilons of a complex description file")
    f.add_argument("path", type=Path)
    f.set_defaults(func=cmd_floer)

    s = sub.add_parser("selftest", parents=[common], help="run the calibration checks")
    s.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[list[str]] = None, env: Optional[dict] = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = args.format or "json"
    try:
        settings = resolve_settings(args, env, stdout_isatty=stdout.isatty())
        fmt = settings.format
        rows, fields, code = args.func(args, settings)
    except Gamma4Error as exc:
        if fmt == "json":
            stdout.write(json.dumps({"kind": "error", "error": error_json(exc), "exit_code": exc.exit_code}) + "\n")
        else:
            sys.stderr.write(f"gamma4: {exc}\n")
        return exc.exit_code
    except OSError as exc:
        err = ValidationError(f"{exc.strerror}: {exc.filename}")
        if fmt == "json":
            stdout.write(json.dumps({"kind": "error", "error": error_json(err), "exit_code": 2}) + "\n")
        else:
            sys.stderr.write(f"gamma4: {err}\n")
        return 2
    stdout.write(render(rows, fields, fmt))
    return code


if __name__ == "__main__":
    sys.exit(main())
