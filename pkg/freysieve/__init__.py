"""
freysieve: modular-method sieve for x^2 + d*y^6 = z^p
"""
from freysieve.cases import CaseConfig, load_case
from freysieve.discard import ExclusionResult, SymplecticCondition, combine_alternatives, torsion3_test
from freysieve.ecurve import WeierstrassModel, count_points, has_3_torsion, invariants
from freysieve.frey import frey_curve, multifrey_curve, multifrey_search, verify_solution
from freysieve.formats import CurveTable, SieveReport, load_curve_table, load_newforms
from freysieve.pipeline import CaseConclusion, run_pipeline
from freysieve.sieve import NewformData, SieveConfig, sieve_survivors

__all__ = [
    "CaseConfig", "load_case",
    "ExclusionResult", "SymplecticCondition", "combine_alternatives", "torsion3_test",
    "WeierstrassModel", "count_points", "has_3_torsion", "invariants",
    "frey_curve", "multifrey_curve", "multifrey_search", "verify_solution",
    "CurveTable", "SieveReport", "load_curve_table", "load_newforms",
    "CaseConclusion", "run_pipeline",
    "NewformData", "SieveConfig", "sieve_survivors",
]
