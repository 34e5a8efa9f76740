"""Reading, validating and writing problem documents (canonical JSON)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Any

import jsonschema

from .base_chart import BaseGeometry, Chart, ChartError, HilbertPoly
from .exact import fmt, frac
from .monoid_lattice import KummerExtension, MonoidError, MonoidPresentation
from .parabolic_core import FormalScalar, Mat, ParabolicSheaf, SheafError, validate_sheaf
from .stability import GeneratingChart, StabilityError


class DocumentError(ValueError):
    pass


@lru_cache(maxsize=None)
def schema(name: str = "problem") -> dict:
    text = resources.files("parsheaf.data").joinpath(f"{name}.schema.json").read_text()
    return json.loads(text)


def schema_errors(doc: Any, name: str = "problem") -> list[str]:
    validator = jsonschema.Draft202012Validator(schema(name))
    errs = sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    return [f"{'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}" for e in errs]


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------- to JSON

def ratvec(v) -> list[str]:
    return [fmt(x) for x in v]


def extension_to_json(k: KummerExtension) -> dict:
    if k.level is not None:
        return {"rank": k.r, "level": k.level}
    return {"p": [ratvec(g) for g in k.p_gens], "q": [ratvec(g) for g in k.q_gens]}


def base_to_json(b: BaseGeometry) -> dict:
    out = {"kind": b.kind}
    if b.kind == "curve":
        out["genus"] = b.genus
        out["polarization_degree"] = b.polarization_degree
    return out


def chart_to_json(c: Chart) -> dict:
    return {"pic_map": [list(r) for r in c.pic_map], "zero_flags": sorted(c.zero_flags)}


def _term(chart: Chart, x, c: Fraction) -> dict:
    if any(x):
        mono = list(chart.p_exponents(x))
    else:
        mono = [0] * len(chart.kummer.p_gens)
    return {"coef": fmt(c), "monomial": mono}


def scalar_to_json(chart: Chart, e: FormalScalar):
    if not e.terms:
        return {"coef": "0", "monomial": [0] * len(chart.kummer.p_gens)}
    if len(e.terms) == 1:
        return _term(chart, *e.terms[0])
    return [_term(chart, x, c) for x, c in e.terms]


def sheaf_to_json(f: ParabolicSheaf) -> dict:
    classes = [{"rep": ratvec(v), "summands": [list(s) for s in ss]} for v, ss in zip(f.reps, f.summands)]
    trans = []
    for (c, i) in sorted(f.transitions):
        m = f.transitions[(c, i)]
        if m.is_zero():
            continue
        trans.append({"class": c, "gen": i,
                      "matrix": [[scalar_to_json(f.chart, e) for e in row] for row in m.rows]})
    return {"classes": classes, "transitions": trans}


def generating_chart_to_json(g: GeneratingChart) -> dict:
    out = {"name": g.name, "extension": extension_to_json(g.source)}
    if g.transfer is not None:
        out["transfer"] = [ratvec(r) for r in g.transfer]
    return out


def poly_to_json(p: HilbertPoly) -> dict:
    return p.to_json()


def document(f: ParabolicSheaf | None = None, chart: Chart | None = None,
             generating: list[GeneratingChart] | None = None, **extra) -> dict:
    chart = chart or f.chart
    doc = {"version": "1", "extension": extension_to_json(chart.kummer),
           "base": base_to_json(chart.base), "chart": chart_to_json(chart)}
    if f is not None:
        doc["sheaf"] = sheaf_to_json(f)
    if generating:
        doc["generating_charts"] = [generating_chart_to_json(g) for g in generating]
    doc.update({k: v for k, v in extra.items() if v is not None})
    return doc


# ---------------------------------------------------------------- from JSON

def extension_from_json(d: dict) -> KummerExtension:
    if "level" in d:
        return KummerExtension.free(d["rank"], d["level"])
    p = [[frac(x) for x in g] for g in d["p"]]
    q = [[frac(x) for x in g] for g in d["q"]]
    r = len((p or q or [[]])[0])
    return KummerExtension(MonoidPresentation(r, tuple(map(tuple, p))), MonoidPresentation(r, tuple(map(tuple, q))))


def base_from_json(d: dict) -> BaseGeometry:
    return BaseGeometry(d["kind"], d.get("genus", 0), d.get("polarization_degree", 1))


def _scalar(chart: Chart, entry) -> FormalScalar:
    terms = entry if isinstance(entry, list) else [entry]
    gens = chart.kummer.p_gens
    out = []
    for t in terms:
        mono = t["monomial"]
        if len(mono) != len(gens):
            raise DocumentError(f"monomial {mono} needs {len(gens)} exponents")
        x = tuple(int(sum(e * g[k] for e, g in zip(mono, gens))) for k in range(chart.r))
        out.append((x, frac(t["coef"])))
    return FormalScalar(tuple(out))


def sheaf_from_json(chart: Chart, d: dict) -> ParabolicSheaf:
    reps = [tuple(frac(x) for x in c["rep"]) for c in d["classes"]]
    summands = [[tuple(s) for s in c["summands"]] for c in d["classes"]]
    f = ParabolicSheaf(chart, reps, summands)
    trans: dict[tuple[int, int], Mat] = {}
    for t in d.get("transitions", []):
        key = (t["class"], t["gen"])
        if key in trans:
            raise DocumentError(f"transition for class {key[0]}, generator {key[1]} given twice")
        rows = [[_scalar(chart, e) for e in row] for row in t["matrix"]]
        width = len(rows[0]) if rows else (f.rank_of(key[0]) if key[0] < len(reps) else 0)
        if any(len(r) != width for r in rows):
            raise DocumentError(f"transition for class {key[0]}, generator {key[1]} has ragged rows")
        trans[key] = Mat(len(rows), width, tuple(map(tuple, rows)))
    f.transitions = trans
    return f


@dataclass
class Problem:
    chart: Chart
    sheaf: ParabolicSheaf | None
    generating: dict[str, GeneratingChart] = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def generating_chart(self, name: str | None) -> GeneratingChart | None:
        if name is None or name == "standard":
            return None
        if name not in self.generating:
            raise DocumentError(f"no generating chart named {name!r}; have {sorted(self.generating) or 'none'}")
        return self.generating[name]


def parse_document(doc: dict) -> Problem:
    errs = schema_errors(doc)
    if errs:
        raise DocumentError(errs[0])
    try:
        k = extension_from_json(doc["extension"])
        bad = k.diagnostics()
        if bad:
            raise DocumentError(bad[0])
        base = base_from_json(doc["base"])
        chart = Chart(k, base, doc["chart"]["pic_map"], doc["chart"].get("zero_flags", []))
        f = sheaf_from_json(chart, doc["sheaf"]) if "sheaf" in doc else None
        gens = {}
        for g in doc.get("generating_charts", []):
            gc = GeneratingChart(extension_from_json(g["extension"]), g.get("transfer"), g["name"])
            gc.check(k)
            gens[g["name"]] = gc
    except (MonoidError, ChartError, SheafError, StabilityError, ValueError) as e:
        if isinstance(e, DocumentError):
            raise
        raise DocumentError(str(e)) from e
    return Problem(chart, f, gens, doc.get("params", {}), doc)


def validate_document(doc: Any) -> list[str]:
    """Schema, cross-reference, monoid and sheaf diagnostics in a fixed order."""
    errs = schema_errors(doc)
    if errs:
        return errs
    try:
        k = extension_from_json(doc["extension"])
    except (MonoidError, ValueError) as e:
        return [f"extension: {e}"]
    bad = k.diagnostics()
    if bad:
        return [f"extension: {m}" for m in bad]
    try:
        base = base_from_json(doc["base"])
        chart = Chart(k, base, doc["chart"]["pic_map"], doc["chart"].get("zero_flags", []))
    except (ChartError, ValueError) as e:
        return [f"chart: {e}"]
    out = []
    for g in doc.get("generating_charts", []):
        try:
            GeneratingChart(extension_from_json(g["extension"]), g.get("transfer"), g["name"]).check(k)
        except (MonoidError, StabilityError, ValueError) as e:
            out.append(f"generating chart {g['name']}: {e}")
    if "sheaf" not in doc:
        return out
    sd = doc["sheaf"]
    ncls, ngen = len(sd["classes"]), len(k.q_gens)
    for t in sd.get("transitions", []):
        if t["class"] >= ncls:
            out.append(f"transition refers to class {t['class']} but only {ncls} classes exist")
        if t["gen"] >= ngen:
            out.append(f"transition refers to generator {t['gen']} but Q has {ngen}")
    if out:
        return out
    try:
        f = sheaf_from_json(chart, sd)
    except (DocumentError, SheafError, ChartError, ValueError) as e:
        return [f"sheaf: {e}"]
    return [f"sheaf: {m}" for m in validate_sheaf(f)]


def emit(p: Problem) -> str:
    """Canonical text of a parsed document; parse then emit is the identity on canonical input."""
    extra = {k: p.raw[k] for k in ("description", "origin") if k in p.raw}
    if p.params:
        extra["params"] = p.params
    return dumps(document(p.sheaf, p.chart, list(p.generating.values()), **extra))


def load(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as e:
        raise DocumentError(f"cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise DocumentError(f"{path} is not valid JSON: {e.msg} at line {e.lineno}") from e
