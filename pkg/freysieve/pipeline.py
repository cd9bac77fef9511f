"""
Per-form sieve pipeline for one case d

Each newform orbit runs through a small LangGraph:

    cm -> mazur -> torsion3 -> symplectic -> local_type -> verdict

CM forms and forms settled by Mazur's trick jump straight to the verdict.
Failures are recorded in the state's `errors` list; one bad form never stops
the others. `run_pipeline` collects the per-form reports and the case-level
conclusion.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Annotated, Dict, List, Literal, Optional, Sequence, TypedDict

from langgraph.graph import END, StateGraph

from freysieve import config
from freysieve.cases import CaseConfig
from freysieve.discard import (
    INCONCLUSIVE, ExclusionResult, combine_alternatives, intersect_exclusions,
    local_type_compatible, torsion3_test,
)
from freysieve.ellenberg import BoundParams, find_bound, load_term_impls
from freysieve.errors import (
    BoundNotFound, FreySieveError, HypothesisViolated, IncompleteTable, InvalidInput,
    MissingTermImplementation, UnhandledCase,
)
from freysieve.formats import CurveTable, SieveReport, digest, newform_digest
from freysieve.frey import PUBLISHED_BOUNDS, multiplicative_prime_bound
from freysieve.logs import log_stage
from freysieve.sieve import CM_FLAGGED, ELIMINATED, UNRESOLVED, NewformData, sieve_survivors

RESTRICTED = "excluded-classes"
FAILED = "failed"

PROVED = "proved"
CONDITIONAL = "conditional"
INCOMPLETE = "incomplete"


class FormState(TypedDict):
    """State carried through the graph for one newform orbit"""
    form: Annotated[NewformData, "The newform orbit under test"]
    case: Annotated[CaseConfig, "Case configuration for d"]
    digests: Annotated[dict, "Input digests for the report"]
    cm: Annotated[Optional[int], "CM discriminant when the form has CM"]
    mazur: Annotated[Optional[dict], "Outcome of Mazur's trick"]
    killed: Annotated[dict, "Candidate name -> prime bound above which it is ruled out"]
    conditions: Annotated[dict, "Candidate name -> symplectic conditions"]
    form_mismatch: Annotated[bool, "The form's own local type differs from the Frey curve's"]
    filters: Annotated[list, "Witness record of every applied filter"]
    report: Annotated[Optional[SieveReport], "Final report"]
    errors: Annotated[list, "List of errors encountered"]
    history: Annotated[list, "Stage log of this form"]


def _error(state: FormState, stage: str, exc: Exception) -> list:
    log_stage(stage, f"❌ {state['form'].label}: {exc}", state["history"])
    return state.get("errors", []) + [{"stage": stage, "error": str(exc)}]


# ---------------------------------------------------------------------------
# Nodes
# ---------------------------------------------------------------------------

def cm_node(state: FormState) -> FormState:
    f = state["form"]
    if f.cm is None:
        return {**state, "cm": None}
    log_stage("CM", f"{f.label}: CM by discriminant {f.cm}, set aside", state["history"])
    return {
        **state,
        "cm": f.cm,
        "filters": state["filters"] + [{"filter": "cm", "discriminant": f.cm}],
    }


def mazur_node(state: FormState) -> FormState:
    f, case = state["form"], state["case"]
    try:
        if f.level not in case.levels:
            raise InvalidInput(f"{f.label}: level {f.level} is not one of the case levels {list(case.levels)}")
        outcome = sieve_survivors(f, case.sieve_config(f.level))
    except FreySieveError as e:
        return {**state, "errors": _error(state, "Mazur", e)}

    witness = {
        "filter": "mazur",
        "p_min": outcome.p_min,
        "surviving_primes": "all" if outcome.surviving_primes is None else outcome.surviving_primes,
        "constants": [c.to_dict() for c in outcome.constants],
    }
    if outcome.cofactor is not None:
        witness["cofactor"] = str(outcome.cofactor)
    log_stage("Mazur", f"{f.label}: {outcome.verdict}", state["history"])
    return {
        **state,
        "mazur": {
            "verdict": outcome.verdict,
            "p_min": outcome.p_min,
            "surviving_primes": outcome.surviving_primes,
        },
        "filters": state["filters"] + [witness],
    }


def torsion3_node(state: FormState) -> FormState:
    f, case = state["form"], state["case"]
    killed = dict(state["killed"])
    filters = list(state["filters"])
    errors = state["errors"]
    for candidate in case.candidates_for(f.label):
        try:
            result = torsion3_test(candidate.model(case.d))
        except FreySieveError as e:
            errors = _error({**state, "errors": errors}, "Torsion3", e)
            continue
        filters.append({"filter": "torsion3", "candidate": candidate.name, **result.to_dict()})
        if result.conclusive:
            killed[candidate.name] = math.floor(result.bound)
            log_stage("Torsion3", f"{f.label}: {candidate.name} ruled out for p > {result.bound:.2f}",
                      state["history"])
    return {**state, "killed": killed, "filters": filters, "errors": errors}


def symplectic_node(state: FormState) -> FormState:
    f, case = state["form"], state["case"]
    conditions = dict(state["conditions"])
    filters = list(state["filters"])
    errors = state["errors"]
    for candidate in case.candidates_for(f.label):
        if candidate.name in state["killed"] or not candidate.conditions:
            continue
        try:
            found = candidate.symplectic_conditions(case.d)
        except HypothesisViolated as e:
            errors = _error({**state, "errors": errors}, "Symplectic", e)
            continue
        conditions[candidate.name] = found
        filters.append({
            "filter": "symplectic",
            "candidate": candidate.name,
            "conditions": [c.to_dict() for c in found],
        })
        log_stage("Symplectic", f"{f.label}: {candidate.name}: {'; '.join(str(c) for c in found)}",
                  state["history"])
    return {**state, "conditions": conditions, "filters": filters, "errors": errors}


def local_type_node(state: FormState) -> FormState:
    f, case = state["form"], state["case"]
    frey_types = case.frey_local_types
    if not frey_types:
        return state
    p = case.p_min_for(f.level)
    filters = list(state["filters"])
    killed = dict(state["killed"])
    form_mismatch = False

    for q, frey_type in sorted(frey_types.items()):
        if q in f.local_types:
            ok = local_type_compatible(f.local_types[q], frey_type, p)
            filters.append({"filter": "local-type", "form": f.label, "prime": q,
                            "type": f.local_types[q], "frey": frey_type, "compatible": ok})
            form_mismatch = form_mismatch or not ok

    for candidate in case.candidates_for(f.label):
        for q, frey_type in sorted(frey_types.items()):
            if q not in candidate.local_types:
                continue
            ok = local_type_compatible(candidate.local_types[q], frey_type, p)
            filters.append({"filter": "local-type", "candidate": candidate.name, "prime": q,
                            "type": candidate.local_types[q], "frey": frey_type, "compatible": ok})
            if not ok:
                killed[candidate.name] = max(killed.get(candidate.name, 3), 3)
                log_stage("LocalType", f"{f.label}: {candidate.name} has type {candidate.local_types[q]} "
                          f"at {q}, Frey curve has {frey_type}", state["history"])

    return {**state, "filters": filters, "killed": killed, "form_mismatch": form_mismatch}


def _settle(state: FormState) -> dict:
    """Verdict, surviving primes, exclusion and p_bound from the collected evidence"""
    f, case = state["form"], state["case"]
    if state["cm"] is not None:
        return {"verdict": CM_FLAGGED, "surviving_primes": None}

    mazur = state["mazur"]
    if mazur is None:
        return {"verdict": FAILED, "surviving_primes": None}
    survivors = mazur["surviving_primes"]
    if mazur["verdict"] == UNRESOLVED:
        return {"verdict": UNRESOLVED, "surviving_primes": survivors}
    if survivors is not None:
        return {"verdict": ELIMINATED, "surviving_primes": survivors,
                "p_bound": max([mazur["p_min"]] + survivors)}
    if state["form_mismatch"]:
        return {"verdict": ELIMINATED, "surviving_primes": None, "p_bound": 3}

    candidates = case.candidates_for(f.label)
    alive = [c for c in candidates if c.name not in state["killed"]]
    kill_bound = max(state["killed"].values(), default=None)
    if candidates and not alive:
        return {"verdict": ELIMINATED, "surviving_primes": None, "p_bound": kill_bound}
    if alive and all(c.name in state["conditions"] for c in alive):
        exclusion = combine_alternatives([state["conditions"][c.name] for c in alive]).reduced()
        if exclusion.excluded_classes:
            return {"verdict": RESTRICTED, "surviving_primes": None,
                    "exclusion": exclusion.to_dict(), "p_bound": kill_bound}
    return {"verdict": INCONCLUSIVE, "surviving_primes": None}


def verdict_node(state: FormState) -> FormState:
    f = state["form"]
    settled = _settle(state)
    report = SieveReport(
        label=f.label,
        level=f.level,
        verdict=settled["verdict"],
        surviving_primes=settled["surviving_primes"],
        filters=tuple(state["filters"]),
        exclusion=settled.get("exclusion"),
        p_bound=settled.get("p_bound"),
        input_digests=state["digests"],
        errors=tuple(state["errors"]),
    )
    detail = f" for p > {report.p_bound}" if report.p_bound is not None else ""
    if report.exclusion:
        detail += f", excluded classes {report.exclusion['excluded_classes']} mod {report.exclusion['modulus']}"
    log_stage("Verdict", f"{f.label}: {report.verdict}{detail}", state["history"])
    return {**state, "report": report}


# ---------------------------------------------------------------------------
# Graph
# ---------------------------------------------------------------------------

def after_cm(state: FormState) -> Literal["mazur", "verdict"]:
    return "verdict" if state["cm"] is not None else "mazur"


def after_mazur(state: FormState) -> Literal["torsion3", "verdict"]:
    mazur = state["mazur"]
    if mazur is None or mazur["verdict"] == UNRESOLVED or mazur["surviving_primes"] is not None:
        return "verdict"
    return "torsion3"


def create_form_graph():
    """
    Create the LangGraph state graph run once per newform orbit
    """
    workflow = StateGraph(FormState)

    workflow.add_node("cm", cm_node)
    workflow.add_node("mazur", mazur_node)
    workflow.add_node("torsion3", torsion3_node)
    workflow.add_node("symplectic", symplectic_node)
    workflow.add_node("local_type", local_type_node)
    workflow.add_node("verdict", verdict_node)

    workflow.set_entry_point("cm")
    workflow.add_conditional_edges("cm", after_cm, {"mazur": "mazur", "verdict": "verdict"})
    workflow.add_conditional_edges("mazur", after_mazur, {"torsion3": "torsion3", "verdict": "verdict"})
    workflow.add_edge("torsion3", "symplectic")
    workflow.add_edge("symplectic", "local_type")
    workflow.add_edge("local_type", "verdict")
    workflow.add_edge("verdict", END)

    return workflow.compile()


def initial_state(form: NewformData, case: CaseConfig, digests: dict) -> FormState:
    return {
        "form": form,
        "case": case,
        "digests": digests,
        "cm": None,
        "mazur": None,
        "killed": {},
        "conditions": {},
        "form_mismatch": False,
        "filters": [],
        "report": None,
        "errors": [],
        "history": [],
    }


# ---------------------------------------------------------------------------
# Case conclusion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CaseConclusion:
    d: int
    status: str
    threshold: int
    exclusion: Optional[ExclusionResult]
    statement: str
    bounds: Dict[str, dict]
    level_counts: Dict[int, dict]
    residual: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "status": self.status,
            "threshold": self.threshold,
            "exclusion": self.exclusion.to_dict() if self.exclusion else None,
            "statement": self.statement,
            "bounds": self.bounds,
            "level_counts": {str(N): c for N, c in sorted(self.level_counts.items())},
            "residual": self.residual,
            "notes": self.notes,
        }


def ellenberg_bound(case: CaseConfig, notes: List[str]) -> dict:
    """N_d from the installed reference terms, else the configured value"""
    published = {"bound": case.published_bound, "provenance": "published"}
    if case.ellenberg_q is None:
        return published
    try:
        impls = load_term_impls()
        if not impls:
            return published
        params = BoundParams(case.ellenberg_q, config.settings.precision, impls)
        report = find_bound(case.ellenberg_q, params)
        return {"bound": report.first_positive_prime, "provenance": "computed"}
    except (MissingTermImplementation, BoundNotFound) as e:
        notes.append(f"Ellenberg bound not computed ({e}); using the published value")
        return published


def multifrey_bound(case: CaseConfig, curves: Optional[CurveTable], notes: List[str]) -> dict:
    """Bound on p when C is supported on {2, 3}"""
    try:
        found = multiplicative_prime_bound(case.d, curves)
        return {"bound": found.bound, "provenance": found.path}
    except IncompleteTable as e:
        published = PUBLISHED_BOUNDS.get(case.d)
        notes.append(f"multi-Frey search skipped ({e}); using the published bound")
        return {"bound": published, "provenance": "published"}


def conclude(case: CaseConfig, reports: Sequence[SieveReport],
             curves: Optional[CurveTable] = None) -> CaseConclusion:
    notes: List[str] = []
    bounds = {
        "ellenberg": ellenberg_bound(case, notes),
        "multifrey": multifrey_bound(case, curves, notes),
    }

    threshold = bounds["ellenberg"]["bound"] or 2
    if bounds["multifrey"]["bound"] is not None:
        threshold = max(threshold, bounds["multifrey"]["bound"] + 1)
    for r in reports:
        if r.p_bound is not None:
            threshold = max(threshold, r.p_bound + 1)

    level_counts: Dict[int, dict] = {}
    for N in case.levels:
        expected = case.space(N).orbits
        found = sum(1 for r in reports if r.level == N)
        level_counts[N] = {"expected": expected, "found": found}
    incomplete = [N for N, c in level_counts.items() if c["expected"] is not None and c["expected"] != c["found"]]

    residual = [r.label for r in reports if r.verdict in (INCONCLUSIVE, UNRESOLVED, FAILED)]
    restricted = [r for r in reports if r.verdict == RESTRICTED]
    exclusion = None
    if restricted:
        exclusion = intersect_exclusions([
            ExclusionResult(r.exclusion["modulus"], frozenset(r.exclusion["excluded_classes"]),
                            Fraction(r.exclusion["density"]))
            for r in restricted
        ])
        if not exclusion.excluded_classes:
            residual.extend(r.label for r in restricted)

    if incomplete:
        status = INCOMPLETE
        statement = f"incomplete: orbit counts differ from the case file at levels {incomplete}"
    elif residual:
        status = INCONCLUSIVE
        statement = f"inconclusive: no argument discards {', '.join(residual)}"
    elif exclusion is not None:
        status = CONDITIONAL
        statement = f"no non-trivial solutions for p ≥ {threshold}, {exclusion.statement()}"
    else:
        status = PROVED
        statement = f"no non-trivial solutions for p ≥ {threshold}"

    return CaseConclusion(case.d, status, threshold, exclusion, statement, bounds, level_counts, residual, notes)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PipelineResult:
    d: int
    reports: List[SieveReport]
    conclusion: Optional[CaseConclusion]
    history: List[dict]

    def to_dict(self) -> dict:
        """Deterministic body; the history belongs in the envelope"""
        return {
            "d": self.d,
            "reports": [r.to_dict() for r in self.reports],
            "conclusion": self.conclusion.to_dict() if self.conclusion else None,
        }


def run_pipeline(case: CaseConfig, newforms: Sequence[NewformData],
                 curves: Optional[CurveTable] = None, workers: Optional[int] = None) -> PipelineResult:
    """
    Sieve every newform orbit of the case and draw the case conclusion.

    Reports come back in input order whatever the number of workers.

    Raises:
        UnhandledCase: the case is marked solved or unfeasible
    """
    if not case.feasible:
        raise UnhandledCase(f"d={case.d} is marked {case.status}", hint=case.known_conclusions or None)
    history: List[dict] = []
    if not newforms:
        log_stage("Pipeline", f"d={case.d}: no newforms given", history)
        return PipelineResult(case.d, [], None, history)

    workers = workers or config.settings.workers
    shared = {"case": digest(case.to_dict())}
    if curves is not None:
        shared["curves"] = digest(curves.fingerprint())
    log_stage("Pipeline", f"d={case.d}: {len(newforms)} newform orbits over levels {list(case.levels)}, "
              f"{workers} worker(s)", history)

    app = create_form_graph()

    def run_one(form: NewformData) -> FormState:
        state = initial_state(form, case, {**shared, "form": newform_digest(form)})
        return app.invoke(state)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            finals = list(pool.map(run_one, newforms))
    else:
        finals = [run_one(f) for f in newforms]

    reports = [s["report"] for s in finals]
    for s in finals:
        history.extend(s["history"])

    conclusion = conclude(case, reports, curves)
    mark = "✅" if conclusion.status in (PROVED, CONDITIONAL) else "⚠️"
    log_stage("Pipeline", f"{mark} d={case.d}: {conclusion.statement}", history)
    return PipelineResult(case.d, reports, conclusion, history)
