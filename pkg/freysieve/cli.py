"""
Command-line surface

    python -m freysieve [--config FILE] [--offline] [--cache-dir DIR]
                        [--precision N] [--output json|text] [--seed N] <command> ...

Exit codes: 0 success, 2 invalid input, 3 unresolved, 4 missing external data.
"""
import sys
from math import gcd
from typing import List, Optional, Sequence

import click
import mpmath

from freysieve import config
from freysieve.arith import parse_quad
from freysieve.cases import candidate_groups, load_case
from freysieve.discard import (
    RamifiedCertificate, SymplecticCondition, combine_alternatives, defect_from_kodaira,
    symplectic_multiplicative, symplectic_ramified, torsion3_test,
)
from freysieve.ecurve import WeierstrassModel, has_3_torsion, invariants
from freysieve.ellenberg import BoundParams, eval_E4, find_bound, load_term_impls
from freysieve.errors import FreySieveError, InvalidInput, MissingTermImplementation, ScanExhausted
from freysieve.formats import (
    dumps_report, envelope, load_curve_table, load_newforms, utc_now, write_atomic,
)
from freysieve.frey import (
    admissible_conductors, cm_check, frey_curve, frey_discriminant, granville_family,
    multifrey_curve, multiplicative_prime_bound, verify_solution,
)
from freysieve.lmfdb import fetch_curves
from freysieve.logs import log_stage
from freysieve.pipeline import run_pipeline
from freysieve.sieve import UNRESOLVED, sieve_survivors

SIGNED = {"ignore_unknown_options": True}


class FreySieveGroup(click.Group):
    """Maps library errors to `Error:` / `Hint:` lines and the family's exit code"""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except FreySieveError as e:
            click.echo(f"Error: {e}", err=True)
            if e.hint:
                click.echo(f"Hint: {e.hint}", err=True)
            ctx.exit(e.exit_code)


def emit(body: dict, text: Sequence[str]) -> None:
    """Write the JSON body or the text lines, depending on --output"""
    ctx = click.get_current_context()
    if ctx.find_root().obj["output"] == "json":
        click.echo(dumps_report(body), nl=False)
    else:
        for line in text:
            click.echo(line)


def _model_over_k(d: int, ainvs: str) -> WeierstrassModel:
    parts = [a.strip() for a in ainvs.split(",")]
    if len(parts) != 5:
        raise InvalidInput(f"expected 5 comma-separated a-invariants, got {len(parts)}")
    try:
        return WeierstrassModel.over_k([parse_quad(a, d) for a in parts], d)
    except ValueError as e:
        raise InvalidInput(str(e), hint="write elements of K in s = sqrt(-d), e.g. (1+s)/2")


@click.group(cls=FreySieveGroup)
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
              help="dotenv file overriding the environment")
@click.option("--offline", is_flag=True, help="Never touch the network")
@click.option("--cache-dir", type=click.Path(file_okay=False), help="Curve cache directory")
@click.option("--precision", type=click.IntRange(38), help="Ellenberg working digits")
@click.option("--output", type=click.Choice(["json", "text"]), default="text", show_default=True)
@click.option("--seed", type=int, help="Seed for randomized factoring")
@click.pass_context
def cli(ctx, config_file, offline, cache_dir, precision, output, seed) -> None:
    """Modular-method sieve for x^2 + d*y^6 = z^p."""
    config.set_settings(config.load_settings(config_file).with_overrides(
        offline=True if offline else None, cache_dir=cache_dir, precision=precision, seed=seed,
    ))
    ctx.ensure_object(dict)
    ctx.obj["output"] = output


# ---------------------------------------------------------------------------
# Solutions and Frey curves
# ---------------------------------------------------------------------------

@cli.command("verify", context_settings=SIGNED)
@click.argument("a", type=int)
@click.argument("b", type=int)
@click.argument("c", type=int)
@click.argument("d", type=int)
@click.argument("n", type=int)
def verify_command(a, b, c, d, n):
    """Check A^2 + D*B^6 = C^N and classify the solution."""
    sol = verify_solution(a, b, c, d, n)
    emit(sol.to_dict(), [
        f"✅ {a}^2 + {d}*{b}^6 = {c}^{n}",
        f"   primitive:   {sol.primitive}",
        f"   non-trivial: {sol.nontrivial}",
    ])


@cli.command("frey", context_settings=SIGNED)
@click.argument("a", type=int)
@click.argument("b", type=int)
@click.argument("d", type=int)
def frey_command(a, b, d):
    """Frey curve E_{A,B} over Q(sqrt(-D))."""
    E = frey_curve(a, b, d)
    inv = invariants(E)
    closed = frey_discriminant(a, b, d)
    body = {
        "model": E.to_dict(),
        "disc_closed_form": str(closed),
        "disc": str(inv.disc),
        "disc_agrees": inv.disc == closed,
        "j": None if inv.j is None else str(inv.j),
    }
    emit(body, [
        f"E: {E}",
        f"Delta (closed form): {closed}",
        f"Delta (recomputed):  {inv.disc} {'✅' if body['disc_agrees'] else '❌'}",
        f"j: {body['j']}",
    ])


@cli.command("multifrey", context_settings=SIGNED)
@click.argument("a", type=int)
@click.argument("b", type=int)
@click.argument("d", type=int)
def multifrey_command(a, b, d):
    """Rational multi-Frey curve Y^2 = X^3 + 3DB^2 X + 2DA."""
    E = multifrey_curve(a, b, d)
    inv = invariants(E)
    body = {
        "model": E.to_dict(),
        "c4": str(inv.c4), "c6": str(inv.c6), "disc": str(inv.disc),
        "j": None if inv.j is None else str(inv.j),
    }
    emit(body, [f"E: {E}", f"c4 = {inv.c4}", f"c6 = {inv.c6}", f"Delta = {inv.disc}", f"j = {body['j']}"])


@cli.command("cm-check", context_settings=SIGNED)
@click.argument("a", type=int)
@click.argument("b", type=int)
@click.argument("d", type=int)
def cm_check_command(a, b, d):
    """Where the sqrt(-D) part of j(E_{A,B}) vanishes."""
    verdict = cm_check(a, b, d)
    emit({"A": a, "B": b, "d": d, "verdict": verdict}, [verdict])


@cli.command("granville", context_settings=SIGNED)
@click.argument("u", type=int)
@click.argument("v", type=int)
@click.argument("d", type=int)
@click.argument("p", type=int)
def granville_command(u, v, d, p):
    """Non-primitive solution from r = U^2 + D*V^6."""
    sol = granville_family(u, v, d, p)
    g = gcd(gcd(sol.A, sol.B), sol.C)
    emit({**sol.to_dict(), "gcd": str(g)}, [
        f"A = {sol.A}", f"B = {sol.B}", f"C = {sol.C}",
        f"gcd(A, B, C) = {g}",
    ])


# ---------------------------------------------------------------------------
# Sieve
# ---------------------------------------------------------------------------

@cli.command("mazur")
@click.option("--newforms", "newforms_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--case", "case_name", required=True, help="Bundled case (d7) or case file")
@click.option("--label", default=None, help="Only this orbit")
def mazur_command(newforms_path, case_name, label):
    """Mazur's trick over the case's auxiliary primes."""
    case = load_case(case_name)
    forms = load_newforms(newforms_path)
    if label is not None:
        forms = [f for f in forms if f.label == label]
        if not forms:
            raise InvalidInput(f"no orbit labelled {label!r} in {newforms_path}")

    results: List[dict] = []
    for f in forms:
        try:
            results.append(sieve_survivors(f, case.sieve_config(f.level)).to_dict())
        except FreySieveError as e:
            results.append({"label": f.label, "verdict": "failed", "error": str(e)})

    lines = []
    for r in results:
        if "error" in r:
            lines.append(f"❌ {r['label']}: {r['error']}")
        else:
            shown = r["surviving_primes"] if r["surviving_primes"] != "all" else "all p"
            lines.append(f"{r['label']}: {r['verdict']} (surviving primes {shown})")
    emit({"d": case.d, "results": results}, lines)
    if any(r.get("verdict") == UNRESOLVED for r in results):
        sys.exit(3)


def parse_condition(text: str, model: Optional[WeierstrassModel] = None) -> SymplecticCondition:
    """
    mult:VE:VE2:ELL, ram:ELL:V1:V2[:KODAIRA], tied:M or fixed:M:S

    Raises:
        InvalidInput: malformed condition
        HypothesisViolated: a ramified condition without a curve carrying a 3-torsion point
    """
    kind, *args = text.strip().split(":")
    try:
        if kind == "tied" and len(args) == 1:
            return SymplecticCondition(int(args[0]), None, text)
        if kind == "fixed" and len(args) == 2:
            return SymplecticCondition(int(args[0]), int(args[1]), text)
        if kind == "mult" and len(args) == 3:
            return symplectic_multiplicative(args[0], args[1], int(args[2]), text)
        if kind == "ram" and len(args) in (3, 4):
            kodaira = args[3] if len(args) == 4 else "IV"
            point = has_3_torsion(model) if model is not None else None
            certificate = None
            if point is not None and defect_from_kodaira(kodaira) is not None:
                certificate = RamifiedCertificate(defect_from_kodaira(kodaira), point, kodaira)
            return symplectic_ramified(int(args[0]), args[1], args[2], certificate, text)
    except ValueError as e:
        raise InvalidInput(f"bad condition {text!r}: {e}")
    raise InvalidInput(
        f"bad condition {text!r}",
        hint="use mult:VE:VE2:ELL, ram:ELL:V1:V2[:KODAIRA], tied:M or fixed:M:S",
    )


@cli.command("symplectic")
@click.option("--condition", "conditions", multiple=True, help="One condition of a single candidate")
@click.option("--alternative", "alternatives", multiple=True,
              help="Comma-separated conditions of one more candidate curve")
@click.option("--case", "case_name", default=None, help="Take candidates from this case")
@click.option("--candidate", "candidates", multiple=True, help="Candidate curve name in --case")
@click.option("--d", "d", type=int, default=None, help="d of the curve for ram: conditions")
@click.option("--ainvs", default=None, help="a1,...,a6 in s = sqrt(-d) for ram: conditions")
def symplectic_command(conditions, alternatives, case_name, candidates, d, ainvs):
    """Congruence classes of p excluded by the symplectic conditions."""
    model = _model_over_k(d, ainvs) if d is not None and ainvs else None
    groups = []
    if conditions:
        groups.append([parse_condition(c, model) for c in conditions])
    for alt in alternatives:
        groups.append([parse_condition(c, model) for c in alt.split(",") if c.strip()])
    if case_name:
        groups.extend(candidate_groups(load_case(case_name), candidates))
    if not groups:
        raise InvalidInput("no conditions given", hint="pass --condition, --alternative or --case with --candidate")

    result = combine_alternatives(groups)
    reduced = result.reduced()
    body = {
        "groups": [[c.to_dict() for c in g] for g in groups],
        "exclusion": reduced.to_dict(),
        "statement": reduced.statement(),
    }
    lines = [f"candidate {i + 1}: " + "; ".join(str(c) for c in g) for i, g in enumerate(groups)]
    lines.append(f"excluded: {reduced.statement()} (density {reduced.density})")
    emit(body, lines)


@cli.command("torsion3")
@click.option("--case", "case_name", default=None)
@click.option("--curve", "curve_name", default=None, help="Candidate curve name in --case")
@click.option("--d", "d", type=int, default=None)
@click.option("--ainvs", default=None, help="a1,...,a6 in s = sqrt(-d)")
@click.option("--scan-limit", type=int, default=None, help="Largest norm scanned")
def torsion3_command(case_name, curve_name, d, ainvs, scan_limit):
    """Look for a prime ideal showing the curve has no 3-torsion mod p."""
    if case_name and curve_name:
        case = load_case(case_name)
        if curve_name not in case.candidates:
            raise InvalidInput(f"d={case.d}: no candidate curve named {curve_name!r}",
                               hint=f"known: {', '.join(sorted(case.candidates)) or 'none'}")
        E = case.candidates[curve_name].model(case.d)
    elif d is not None and ainvs:
        E = _model_over_k(d, ainvs)
    else:
        raise InvalidInput("give --case with --curve, or --d with --ainvs")

    limit = scan_limit or config.settings.torsion3_scan_limit
    result = torsion3_test(E, limit)
    if result.conclusive:
        text = [f"✅ witness {result.ideal} (norm {result.norm}): a = {result.trace}, "
                f"no congruence for p > {result.bound:.2f}"]
    else:
        text = [f"⚠️ inconclusive ({result.reason})"]
    emit({"curve": E.to_dict(), **result.to_dict()}, text)
    if result.exhausted:
        raise ScanExhausted(f"no witness prime ideal up to norm {limit} ({result.reason})",
                            hint="raise --scan-limit or FREYSIEVE_TORSION3_SCAN_LIMIT")


# ---------------------------------------------------------------------------
# Bounds on p
# ---------------------------------------------------------------------------

@cli.command("multifrey-search", context_settings=SIGNED)
@click.argument("d", type=int)
@click.option("--table", "table_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Curve table CSV")
@click.option("--fetch", is_flag=True, help="Fetch the admissible conductors from the curve endpoint")
@click.option("--refresh", is_flag=True, help="With --fetch, ask the endpoint before the cache")
def multifrey_search_command(d, table_path, fetch, refresh):
    """Bound p when C is supported on {2, 3}."""
    table = None
    if table_path:
        table = load_curve_table(table_path)
    if fetch:
        fetched = fetch_curves(admissible_conductors(d), refresh=refresh)
        table = fetched if table is None else table.merge(fetched)

    found = multiplicative_prime_bound(d, table)
    body = found.to_dict()
    if found.bound is None:
        body["conclusion"] = "impossible"
        text = [f"d={d}: impossible (C cannot be supported on {{2, 3}}; via {found.path})"]
    else:
        body["conclusion"] = f"p <= {found.bound}"
        text = [f"{h.label}: (x, y) = ({h.x}, {h.y}), m = {h.m}, p in {h.primes}" for h in found.hits]
        text.append(f"d={d}: p <= {found.bound}")
    emit(body, text)


@cli.command("ellenberg")
@click.argument("q", type=int, required=False)
@click.option("--max-prime", type=int, default=None, help="Give up after this prime")
@click.option("--e4", nargs=2, type=int, default=None, metavar="P Q", help="Only evaluate the E4 term")
def ellenberg_command(q, max_prime, e4):
    """First prime p with a positive Ellenberg lower bound for conductor Q."""
    precision = config.settings.precision
    if e4:
        p, q4 = e4
        value = eval_E4(p, q4, precision)
        shown = mpmath.nstr(value, precision)
        emit({"p": p, "q": q4, "precision": precision, "E4": shown}, [f"E4({p}, {q4}) = {shown}"])
        return
    if q is None:
        raise InvalidInput("give Q, or --e4 P Q")

    impls = load_term_impls()
    if not impls:
        raise MissingTermImplementation(
            "no Ellenberg reference terms installed",
            hint="set FREYSIEVE_ELLENBERG_TERMS=package.module:attribute",
        )
    report = find_bound(q, BoundParams(q, precision, impls), max_prime)
    emit(report.to_dict(), [f"q={q}: first positive prime {report.first_positive_prime}"])


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

@cli.command("pipeline")
@click.option("--case", "case_name", required=True, help="Bundled case (d7) or case file")
@click.option("--newforms", "newforms_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--curves", "curves_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Curve table for the multi-Frey search")
@click.option("--report-out", default=None, type=click.Path(dir_okay=False),
              help="Write the report with its envelope to this file")
@click.option("--workers", type=click.IntRange(1), default=None, help="Worker threads")
def pipeline_command(case_name, newforms_path, curves_path, report_out, workers):
    """Sieve every newform orbit of a case and state what is proved."""
    started = utc_now()
    case = load_case(case_name)
    forms = load_newforms(newforms_path)
    curves = load_curve_table(curves_path) if curves_path else None

    result = run_pipeline(case, forms, curves, workers)
    body = result.to_dict()
    if report_out:
        write_atomic(report_out, dumps_report(envelope(body, result.history, started)))
        log_stage("Pipeline", f"report written to {report_out}")

    lines = [f"{r.label}: {r.verdict}" + (f" for p > {r.p_bound}" if r.p_bound is not None else "")
             for r in result.reports]
    if result.conclusion:
        lines.append(f"d={case.d}: {result.conclusion.statement}")
    emit(body, lines)
    if any(r.verdict == UNRESOLVED for r in result.reports):
        sys.exit(3)


def main() -> None:
    cli(obj={})


if __name__ == "__main__":
    main()
