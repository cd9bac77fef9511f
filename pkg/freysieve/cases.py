"""
Per-d case configurations

A case file fixes the spaces S_2(Gamma_0(N), eps) to sieve, the character
data, the auxiliary primes, and the candidate curves (building blocks over K)
of the forms that survive Mazur's trick, with the local data the symplectic
tests need.
"""
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from freysieve.arith import parse_quad
from freysieve.config import DATA_DIR
from freysieve.discard import (
    RamifiedCertificate, SymplecticCondition, defect_from_kodaira, parse_local_type,
    symplectic_multiplicative, symplectic_ramified,
)
from freysieve.ecurve import WeierstrassModel, has_3_torsion, is_order_three
from freysieve.errors import (
    HypothesisViolated, InvalidInput, InvariantViolation, ParseError, UnhandledCase,
)
from freysieve.logs import log_debug
from freysieve.sieve import SieveConfig

CASES_DIR = DATA_DIR / "cases"

FEASIBLE = "feasible"
SOLVED = "solved"
UNFEASIBLE = "unfeasible"
STATUSES = (FEASIBLE, SOLVED, UNFEASIBLE)

MULTIPLICATIVE = "multiplicative"
RAMIFIED = "ramified"


@dataclass(frozen=True)
class SpaceInfo:
    """Expected orbit counts of one space and the Mazur cut-off p_min"""
    orbits: Optional[int] = None
    cm_orbits: Optional[int] = None
    p_min: Optional[int] = None


@dataclass(frozen=True)
class LocalCondition:
    """
    Local data at one prime of K shared by the Frey curve and a candidate.

    frey: valuation of the Frey discriminant, possibly depending on p ("3p-9")
    curve: valuation of the candidate's minimal discriminant
    """
    kind: str
    prime: str
    ell: int
    frey: str
    curve: int
    kodaira: Optional[str] = None

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "prime": self.prime, "ell": self.ell, "frey": self.frey, "curve": self.curve}
        if self.kodaira:
            out["kodaira"] = self.kodaira
        return out


@dataclass(frozen=True)
class CandidateCurve:
    name: str
    ainvs: Tuple[str, ...]
    conditions: Tuple[LocalCondition, ...] = ()
    torsion_point: Optional[Tuple[str, str]] = None
    local_types: Dict[int, str] = field(default_factory=dict)
    notes: str = ""

    def model(self, d: int) -> WeierstrassModel:
        return WeierstrassModel.over_k(list(self.ainvs), d)

    def three_torsion_point(self, d: int):
        """The recorded 3-torsion point when it checks out, else a computed one"""
        E = self.model(d)
        if self.torsion_point is not None:
            point = (parse_quad(self.torsion_point[0], d), parse_quad(self.torsion_point[1], d))
            if is_order_three(E, point):
                return point
            log_debug("Symplectic", f"{self.name}: recorded point is not of order 3, searching")
        return has_3_torsion(E)

    def symplectic_conditions(self, d: int) -> List[SymplecticCondition]:
        """
        Raises:
            HypothesisViolated: a ramified condition without a 3-torsion point
                or a defect-3 reduction type
        """
        out = []
        point = None
        for c in self.conditions:
            source = f"{self.name}@{c.prime}"
            if c.kind == MULTIPLICATIVE:
                out.append(symplectic_multiplicative(c.frey, c.curve, c.ell, source))
                continue
            if point is None:
                point = self.three_torsion_point(d)
            defect = defect_from_kodaira(c.kodaira or "")
            certificate = None
            if defect is not None and point is not None:
                certificate = RamifiedCertificate(defect, point, c.kodaira)
            out.append(symplectic_ramified(c.ell, c.frey, c.curve, certificate, source))
        return out

    def to_dict(self) -> dict:
        return {
            "ainvs": list(self.ainvs),
            "conditions": [c.to_dict() for c in self.conditions],
            "torsion_point": list(self.torsion_point) if self.torsion_point else None,
            "local_types": {str(q): t for q, t in sorted(self.local_types.items())},
            "notes": self.notes,
        }


@dataclass(frozen=True)
class CaseConfig:
    d: int
    status: str
    levels: Tuple[int, ...]
    nebentypus: Tuple[int, int]
    chi_order: Optional[int]
    ell_list: Tuple[int, ...]
    p_min: int
    ellenberg_q: Optional[int] = None
    published_bound: Optional[int] = None
    spaces: Dict[int, SpaceInfo] = field(default_factory=dict)
    candidates: Dict[str, CandidateCurve] = field(default_factory=dict)
    form_candidates: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    frey_local_types: Dict[int, str] = field(default_factory=dict)
    known_conclusions: str = ""
    source: str = ""

    def check(self) -> "CaseConfig":
        """
        Raises:
            InvariantViolation: a level is not positive, the nebentypus
                conductor does not divide it, or a candidate name is unknown
        """
        order, conductor = self.nebentypus
        if order < 1 or conductor < 1:
            raise InvariantViolation(f"d={self.d}: nebentypus order and conductor must be positive")
        for N in self.levels:
            if N < 1:
                raise InvariantViolation(f"d={self.d}: level {N} is not positive")
            if N % conductor:
                raise InvariantViolation(f"d={self.d}: nebentypus conductor {conductor} does not divide level {N}")
        for label, names in self.form_candidates.items():
            unknown = [n for n in names if n not in self.candidates]
            if unknown:
                raise InvariantViolation(f"d={self.d}: form {label} names unknown candidates {unknown}")
        return self

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE

    def space(self, level: int) -> SpaceInfo:
        return self.spaces.get(level, SpaceInfo())

    def p_min_for(self, level: int) -> int:
        info = self.space(level)
        return info.p_min if info.p_min is not None else self.p_min

    def sieve_config(self, level: int) -> SieveConfig:
        """
        Raises:
            UnhandledCase: the case is not feasible
        """
        if not self.feasible:
            raise UnhandledCase(f"d={self.d} is marked {self.status}", hint=self.known_conclusions or None)
        return SieveConfig(self.d, self.chi_order or 1, self.ell_list, self.p_min_for(level))

    def candidates_for(self, label: str) -> List[CandidateCurve]:
        return [self.candidates[n] for n in self.form_candidates.get(label, ())]

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "status": self.status,
            "levels": list(self.levels),
            "nebentypus": {"order": self.nebentypus[0], "conductor": self.nebentypus[1]},
            "chi_order": self.chi_order,
            "ell_list": list(self.ell_list),
            "p_min": self.p_min,
            "ellenberg_q": self.ellenberg_q,
            "published_bound": self.published_bound,
            "spaces": {
                str(N): {"orbits": s.orbits, "cm_orbits": s.cm_orbits, "p_min": s.p_min}
                for N, s in sorted(self.spaces.items())
            },
            "candidates": {name: c.to_dict() for name, c in sorted(self.candidates.items())},
            "form_candidates": {k: list(v) for k, v in sorted(self.form_candidates.items())},
            "frey_local_types": {str(q): t for q, t in sorted(self.frey_local_types.items())},
            "known_conclusions": self.known_conclusions,
        }


def _int_list(raw, name: str) -> Tuple[int, ...]:
    if not isinstance(raw, list) or not all(isinstance(x, int) for x in raw):
        raise ParseError("expected a list of integers", field=name)
    return tuple(raw)


def _local_types(raw, name: str) -> Dict[int, str]:
    out = {}
    for key, value in (raw or {}).items():
        try:
            parse_local_type(value)
            out[int(key)] = value
        except (ValueError, InvalidInput) as e:
            raise ParseError(str(e), field=f"{name}.{key}")
    return out


def _condition(raw: dict, where: str) -> LocalCondition:
    try:
        kind = raw["kind"]
        if kind not in (MULTIPLICATIVE, RAMIFIED):
            raise ParseError(f"unknown condition kind {kind!r}", field=f"{where}.kind")
        return LocalCondition(
            kind=kind,
            prime=str(raw["prime"]),
            ell=int(raw["ell"]),
            frey=str(raw["frey"]),
            curve=int(raw["curve"]),
            kodaira=raw.get("kodaira"),
        )
    except KeyError as e:
        raise ParseError("missing key", field=f"{where}.{e.args[0]}")


def _candidate(name: str, raw: dict) -> CandidateCurve:
    ainvs = raw.get("ainvs")
    if not isinstance(ainvs, list) or len(ainvs) != 5:
        raise ParseError("expected 5 a-invariants", field=f"candidates.{name}.ainvs")
    point = raw.get("torsion_point")
    if point is not None and (not isinstance(point, list) or len(point) != 2):
        raise ParseError("expected [x, y]", field=f"candidates.{name}.torsion_point")
    return CandidateCurve(
        name=name,
        ainvs=tuple(str(a) for a in ainvs),
        conditions=tuple(_condition(c, f"candidates.{name}.conditions[{i}]")
                         for i, c in enumerate(raw.get("conditions", []))),
        torsion_point=tuple(str(c) for c in point) if point else None,
        local_types=_local_types(raw.get("local_types"), f"candidates.{name}.local_types"),
        notes=raw.get("notes", ""),
    )


def case_from_dict(raw: dict, source: str = "") -> CaseConfig:
    """
    Raises:
        ParseError: a field is missing or malformed
        InvariantViolation: see CaseConfig.check
    """
    try:
        d = int(raw["d"])
        status = raw.get("status", FEASIBLE)
        if status not in STATUSES:
            raise ParseError(f"status must be one of {STATUSES}", field="status")
        neb = raw["nebentypus"]
        spaces = {
            int(N): SpaceInfo(info.get("orbits"), info.get("cm_orbits"), info.get("p_min"))
            for N, info in (raw.get("spaces") or {}).items()
        }
        candidates = {name: _candidate(name, c) for name, c in (raw.get("candidates") or {}).items()}
        case = CaseConfig(
            d=d,
            status=status,
            levels=_int_list(raw.get("levels", []), "levels"),
            nebentypus=(int(neb["order"]), int(neb["conductor"])),
            chi_order=raw.get("chi_order"),
            ell_list=_int_list(raw.get("ell_list", []), "ell_list"),
            p_min=int(raw.get("p_min", 3)),
            ellenberg_q=raw.get("ellenberg_q"),
            published_bound=raw.get("published_bound"),
            spaces=spaces,
            candidates=candidates,
            form_candidates={k: tuple(v) for k, v in (raw.get("form_candidates") or {}).items()},
            frey_local_types=_local_types(raw.get("frey_local_types"), "frey_local_types"),
            known_conclusions=raw.get("known_conclusions", ""),
            source=source,
        )
    except KeyError as e:
        raise ParseError("missing required field", field=str(e.args[0]))
    except (TypeError, ValueError, AttributeError) as e:
        raise ParseError(f"malformed case file: {e}")
    return case.check()


def available_cases() -> List[str]:
    return sorted(p.stem for p in CASES_DIR.glob("d*.json"))


def load_case(name_or_path: str) -> CaseConfig:
    """
    Load a bundled case ("d7" or "7") or a case file by path.

    Raises:
        InvalidInput: nothing matches
    """
    path = Path(name_or_path)
    if not path.is_file():
        stem = name_or_path if name_or_path.startswith("d") else f"d{name_or_path}"
        path = CASES_DIR / f"{stem}.json"
        if not path.is_file():
            raise InvalidInput(
                f"no case file or bundled case named {name_or_path!r}",
                hint=f"bundled cases: {', '.join(available_cases())}",
            )
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", line=e.lineno)
    return case_from_dict(raw, source=str(path))


def candidate_groups(case: CaseConfig, names: Sequence[str]) -> List[List[SymplecticCondition]]:
    """Symplectic conditions of each named candidate, one group per curve"""
    groups = []
    for name in names:
        if name not in case.candidates:
            raise InvalidInput(f"d={case.d}: no candidate curve named {name!r}",
                               hint=f"known: {', '.join(sorted(case.candidates)) or 'none'}")
        try:
            groups.append(case.candidates[name].symplectic_conditions(case.d))
        except HypothesisViolated as e:
            raise HypothesisViolated(f"{name}: {e}", hint=e.hint)
    return groups
