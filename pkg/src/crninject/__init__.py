"""Exact injectivity and degeneracy analysis for mass-action reaction networks."""

from importlib import resources

from .criteria import (
    AnalysisReport,
    BudgetExceeded,
    Method,
    SubsetWitness,
    Verdict,
    VerdictKind,
    analyze,
    coefficient_closed,
    degeneracy_check,
    det_extended_jacobian,
    det_fully_open_relation,
    injectivity_verdict,
    open_closed_relation,
    sigma,
    wsd_check,
)
from .linalg import ExactMatrix, ReducedBasis, reduced_conservation_basis
from .network import (
    Network,
    NetworkError,
    NetworkParseError,
    classify_openness,
    fully_open_closure,
    parse_network,
    project_network,
    reactant_matrix,
    stoichiometric_matrix,
)
from .poly import Polynomial, Ring, Variable, sign_report

__version__ = "0.1.0"


def bundled_network(name: str) -> Network:
    """Load one of the example networks shipped with the package (e.g. ``"futile_cycle"``)."""
    text = resources.files(__package__).joinpath("networks", f"{name}.crn").read_text(encoding="utf-8")
    return parse_network(text)


def bundled_names() -> list[str]:
    folder = resources.files(__package__).joinpath("networks")
    return sorted(p.name[:-4] for p in folder.iterdir() if p.name.endswith(".crn"))
