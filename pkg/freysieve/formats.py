"""
File formats

- newform records: one JSON object per line (`.jsonl`), exact coordinates
- curve tables: CSV with `# key: value` header lines; a-invariants are the
  source of truth, c4/c6/disc are always recomputed
- sieve reports: deterministic body plus a detachable envelope holding
  timestamps and the stage history
"""
import csv
import hashlib
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from freysieve.arith import NumberFieldElem
from freysieve.discard import parse_local_type
from freysieve.ecurve import WeierstrassModel, invariants
from freysieve.errors import InvalidInput, InvariantViolation, ParseError, SchemaMismatch
from freysieve.sieve import NewformData

REQUIRED_NEWFORM_FIELDS = ("label", "level", "char_order", "field_poly", "a")
CURVE_COLUMNS = ("label", "conductor", "a1", "a2", "a3", "a4", "a6")
DERIVED_COLUMNS = ("c4", "c6", "disc")


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def digest(obj: Any) -> str:
    """SHA-256 of the canonical JSON encoding"""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def write_atomic(path: str, text: str) -> None:
    """Write to a temporary file next to `path`, then rename over it"""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(target.parent), prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


# ---------------------------------------------------------------------------
# Newforms
# ---------------------------------------------------------------------------

def _coord_to_json(c: Fraction):
    return c.numerator if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _coords_from_json(value, line: int, name: str) -> Tuple[Fraction, ...]:
    if isinstance(value, (int, str)):
        value = [value]
    if not isinstance(value, list) or not value:
        raise ParseError("expected a non-empty list of rational coordinates", line, name)
    try:
        return tuple(Fraction(str(c)) for c in value)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad rational coordinate in {value!r}", line, name)


def _prime_map(raw, poly: Tuple[int, ...], line: int, name: str) -> Dict[int, NumberFieldElem]:
    if not isinstance(raw, dict):
        raise ParseError("expected an object keyed by primes", line, name)
    out = {}
    for key, value in raw.items():
        try:
            ell = int(key)
        except ValueError:
            raise ParseError(f"key {key!r} is not an integer", line, name)
        coords = _coords_from_json(value, line, f"{name}.{key}")
        try:
            out[ell] = NumberFieldElem(poly, coords)
        except ValueError as e:
            raise ParseError(str(e), line, f"{name}.{key}")
    return out


def newform_to_record(f: NewformData) -> dict:
    def encode(values: Dict[int, NumberFieldElem]) -> dict:
        return {str(ell): [_coord_to_json(c) for c in v.coords] for ell, v in sorted(values.items())}

    return {
        "label": f.label,
        "level": f.level,
        "char_order": f.char_order,
        "field_poly": list(f.field_poly),
        "a": encode(f.a_map),
        "eps": encode(f.eps_map),
        "cm": f.cm,
        "provenance": f.provenance,
        "local_types": {str(q): t for q, t in sorted(f.local_types.items())},
    }


def record_to_newform(rec: dict, line: int = 1) -> NewformData:
    """
    Decode one newform record and check its invariants.

    Raises:
        ParseError: a field is missing or malformed
        InvariantViolation: a character value or eigenvalue is impossible
    """
    if not isinstance(rec, dict):
        raise ParseError("record is not a JSON object", line)
    for name in REQUIRED_NEWFORM_FIELDS:
        if name not in rec:
            raise ParseError("missing required field", line, name)

    poly = rec["field_poly"]
    if not isinstance(poly, list) or not poly or not all(isinstance(c, int) for c in poly):
        raise ParseError("field_poly must be a list of integers", line, "field_poly")
    if poly[0] != 1:
        raise ParseError("field_poly must be monic (leading coefficient 1)", line, "field_poly")
    poly_t = tuple(poly)

    for name in ("level", "char_order"):
        if not isinstance(rec[name], int) or isinstance(rec[name], bool):
            raise ParseError("expected an integer", line, name)
    cm = rec.get("cm")
    if cm is not None and not isinstance(cm, int):
        raise ParseError("cm must be an integer discriminant or null", line, "cm")

    local_types = {}
    for key, value in (rec.get("local_types") or {}).items():
        try:
            parse_local_type(str(value))
            local_types[int(key)] = str(value)
        except (ValueError, InvalidInput) as e:
            raise ParseError(str(e), line, f"local_types.{key}")

    f = NewformData(
        label=str(rec["label"]),
        level=rec["level"],
        char_order=rec["char_order"],
        field_poly=poly_t,
        a_map=_prime_map(rec["a"], poly_t, line, "a"),
        eps_map=_prime_map(rec.get("eps") or {}, poly_t, line, "eps"),
        cm=cm,
        provenance=str(rec.get("provenance", "")),
        local_types=local_types,
    )
    try:
        return f.validate()
    except InvariantViolation as e:
        raise InvariantViolation(f"line {line}: {e}", hint=e.hint)


def parse_newforms(text: str) -> List[NewformData]:
    forms: List[NewformData] = []
    seen = set()
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            rec = json.loads(stripped)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", number)
        f = record_to_newform(rec, number)
        if f.label in seen:
            raise ParseError(f"duplicate label {f.label!r}", number, "label")
        seen.add(f.label)
        forms.append(f)
    return forms


def load_newforms(path: str) -> List[NewformData]:
    """
    Read a newform file.

    Raises:
        InvalidInput: the file does not exist
        ParseError / InvariantViolation: see record_to_newform
    """
    p = Path(path)
    if not p.is_file():
        raise InvalidInput(f"newform file not found: {path}")
    return parse_newforms(p.read_text(encoding="utf-8"))


def dump_newforms(forms: Iterable[NewformData]) -> str:
    return "".join(canonical_json(newform_to_record(f)) + "\n" for f in forms)


def newform_digest(f: NewformData) -> str:
    return digest(newform_to_record(f))


# ---------------------------------------------------------------------------
# Curve tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurveRow:
    label: str
    conductor: int
    ainvs: Tuple[int, int, int, int, int]
    c4: int
    c6: int
    disc: int

    @classmethod
    def from_ainvs(cls, label: str, conductor: int, ainvs: Sequence[int],
                   stored: Optional[Dict[str, int]] = None) -> "CurveRow":
        """
        Recompute c4, c6 and disc from the a-invariants.

        Raises:
            SchemaMismatch: stored derived columns disagree, the model is
                singular, or 1728*disc != c4^3 - c6^2
        """
        if len(ainvs) != 5:
            raise SchemaMismatch(f"{label}: expected 5 a-invariants, got {len(ainvs)}")
        ainvs = tuple(int(a) for a in ainvs)
        inv = invariants(WeierstrassModel.over_q(ainvs))
        c4, c6, disc = int(inv.c4), int(inv.c6), int(inv.disc)
        if disc == 0:
            raise SchemaMismatch(f"{label}: a-invariants {list(ainvs)} give a singular model")
        if 1728 * disc != c4 ** 3 - c6 ** 2:
            raise SchemaMismatch(f"{label}: 1728*disc != c4^3 - c6^2")
        for name, value in (stored or {}).items():
            expected = {"c4": c4, "c6": c6, "disc": disc}[name]
            if value != expected:
                raise SchemaMismatch(
                    f"{label}: stored {name} = {value} but the a-invariants give {expected}",
                    hint="a-invariants are the source of truth; fix or drop the derived column",
                )
        return cls(label, int(conductor), ainvs, c4, c6, disc)

    def to_dict(self) -> dict:
        return {
            "label": self.label, "conductor": self.conductor, "ainvs": list(self.ainvs),
            "c4": self.c4, "c6": self.c6, "disc": self.disc,
        }


@dataclass(frozen=True)
class CurveTable:
    """
    Rows plus the conductors the table is known to list completely:
    every N in `coverage`, and every N <= `coverage_max` when set.
    """
    rows: Tuple[CurveRow, ...]
    source: str
    coverage: frozenset = field(default_factory=frozenset)
    coverage_max: Optional[int] = None

    def covers(self, conductor: int) -> bool:
        if conductor in self.coverage:
            return True
        return self.coverage_max is not None and conductor <= self.coverage_max

    def filter(self, conductors: Iterable[int]) -> "CurveTable":
        wanted = set(conductors)
        rows = tuple(r for r in self.rows if r.conductor in wanted)
        covered = frozenset(N for N in wanted if self.covers(N))
        return CurveTable(rows, self.source, covered, None)

    def merge(self, other: "CurveTable") -> "CurveTable":
        by_label = {r.label: r for r in self.rows}
        for r in other.rows:
            by_label.setdefault(r.label, r)
        rows = tuple(sorted(by_label.values(), key=lambda r: (r.conductor, r.label)))
        caps = [c for c in (self.coverage_max, other.coverage_max) if c is not None]
        source = self.source if self.source == other.source else f"{self.source}+{other.source}"
        return CurveTable(rows, source, self.coverage | other.coverage, min(caps) if caps else None)

    @property
    def conductors(self) -> List[int]:
        return sorted({r.conductor for r in self.rows})

    def fingerprint(self) -> dict:
        return {
            "source": self.source,
            "coverage": sorted(self.coverage),
            "coverage_max": self.coverage_max,
            "rows": [r.to_dict() for r in sorted(self.rows, key=lambda r: r.label)],
        }


def _int_field(value: str, line: int, name: str) -> int:
    try:
        return int(value.strip())
    except (AttributeError, ValueError):
        raise ParseError(f"expected an integer, got {value!r}", line, name)


def parse_curve_table(text: str, source: Optional[str] = None) -> CurveTable:
    headers: Dict[str, str] = {}
    body: List[Tuple[int, str]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            key, sep, value = stripped[1:].partition(":")
            if sep:
                headers[key.strip().lower()] = value.strip()
            continue
        body.append((number, raw))

    if not body:
        raise ParseError("curve table has no header row")
    first_line = body[0][0]
    reader = csv.DictReader(io.StringIO("\n".join(line for _, line in body)))
    columns = [c.strip() for c in (reader.fieldnames or [])]
    missing = [c for c in CURVE_COLUMNS if c not in columns]
    if missing:
        raise ParseError(f"missing columns {missing}", first_line)

    rows = []
    for offset, record in enumerate(reader, start=1):
        line = body[offset][0] if offset < len(body) else first_line + offset
        record = {k.strip(): (v or "") for k, v in record.items() if k}
        ainvs = [_int_field(record[c], line, c) for c in ("a1", "a2", "a3", "a4", "a6")]
        stored = {c: _int_field(record[c], line, c) for c in DERIVED_COLUMNS if record.get(c, "").strip()}
        label = record["label"].strip()
        if not label:
            raise ParseError("empty label", line, "label")
        rows.append(CurveRow.from_ainvs(label, _int_field(record["conductor"], line, "conductor"), ainvs, stored))

    coverage = frozenset(
        _int_field(N, 0, "coverage") for N in headers.get("coverage", "").replace(";", ",").split(",") if N.strip()
    )
    cap = headers.get("coverage-max")
    return CurveTable(
        rows=tuple(rows),
        source=headers.get("source") or source or "local",
        coverage=coverage,
        coverage_max=_int_field(cap, 0, "coverage-max") if cap else None,
    )


def load_curve_table(path: str, conductors: Optional[Iterable[int]] = None) -> CurveTable:
    """
    Read a curve-table CSV, optionally keeping only some conductors.

    Raises:
        InvalidInput: the file does not exist
        ParseError, SchemaMismatch: malformed rows or derived columns
    """
    p = Path(path)
    if not p.is_file():
        raise InvalidInput(f"curve table not found: {path}")
    table = parse_curve_table(p.read_text(encoding="utf-8"), source=p.name)
    return table.filter(conductors) if conductors is not None else table


def dump_curve_table(table: CurveTable) -> str:
    out = io.StringIO()
    out.write(f"# source: {table.source}\n")
    if table.coverage:
        out.write(f"# coverage: {','.join(str(N) for N in sorted(table.coverage))}\n")
    if table.coverage_max is not None:
        out.write(f"# coverage-max: {table.coverage_max}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS + DERIVED_COLUMNS)
    for r in table.rows:
        writer.writerow([r.label, r.conductor, *r.ainvs, r.c4, r.c6, r.disc])
    return out.getvalue()


def rows_from_records(records: Iterable[dict]) -> List[CurveRow]:
    """Curve-database records with `lmfdb_label` (or `label`), `conductor` and `ainvs`"""
    rows = []
    for i, rec in enumerate(records, start=1):
        try:
            label = rec.get("lmfdb_label") or rec["label"]
            ainvs = rec["ainvs"]
            if isinstance(ainvs, str):
                ainvs = json.loads(ainvs)
            rows.append(CurveRow.from_ainvs(str(label), int(rec["conductor"]), ainvs))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaMismatch(f"curve record {i}: {e}", hint="records need a label, conductor and ainvs")
    return rows


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SieveReport:
    """
    Verdict for one newform orbit.

    surviving_primes: None when every prime survives Mazur's trick
    p_bound: the verdict holds for primes p > p_bound
    filters: one witness dict per applied filter, each with a "filter" key
    """
    label: str
    level: int
    verdict: str
    surviving_primes: Optional[List[int]]
    filters: Tuple[dict, ...]
    exclusion: Optional[dict] = None
    p_bound: Optional[int] = None
    input_digests: Dict[str, str] = field(default_factory=dict)
    errors: Tuple[dict, ...] = ()

    def __post_init__(self):
        if not self.filters and not self.errors:
            raise InvariantViolation(f"report for {self.label} cites no filter witness")

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "level": self.level,
            "verdict": self.verdict,
            "surviving_primes": "all" if self.surviving_primes is None else list(self.surviving_primes),
            "filters": [dict(f) for f in self.filters],
            "exclusion": self.exclusion,
            "p_bound": self.p_bound,
            "input_digests": dict(sorted(self.input_digests.items())),
            "errors": [dict(e) for e in self.errors],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SieveReport":
        try:
            survivors = data["surviving_primes"]
            return cls(
                label=data["label"],
                level=int(data["level"]),
                verdict=data["verdict"],
                surviving_primes=None if survivors == "all" else [int(p) for p in survivors],
                filters=tuple(data.get("filters", [])),
                exclusion=data.get("exclusion"),
                p_bound=data.get("p_bound"),
                input_digests=dict(data.get("input_digests", {})),
                errors=tuple(data.get("errors", [])),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaMismatch(f"malformed report: {e}")


def utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def envelope(body: dict, history: Sequence[dict] = (), started_at: Optional[str] = None) -> dict:
    """Wrap a deterministic report body with timestamps and the stage history"""
    return {
        "started_at": started_at or utc_now(),
        "finished_at": utc_now(),
        "history": list(history),
        "report": body,
    }


def detach(wrapped: dict) -> dict:
    """Report body of an envelope (or the body itself)"""
    return wrapped.get("report", wrapped)


def dumps_report(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
