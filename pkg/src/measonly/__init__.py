"""Measurement-only entanglement dynamics of qubit rings.

Stabilizer simulation under random multi-site Pauli measurements, the
ensemble non-commutativity index, frustration-graph analysis, and
finite-size scaling tools.
"""

from .pauli import PauliString, anticommutes, from_letters, multiply
from .stabilizer import StabilizerState, Outcome, product_state
from .ensembles import (
    FactorizableSpec,
    RangeDist,
    SingleStringSpec,
    SiteProbs,
    WeightedOperator,
    XYZSpec,
    cycle_model,
    delta_q,
    enumerate_ensemble,
    sample,
)
from .index import (
    IndexResult,
    critical_index_curve,
    index_closed_form,
    index_exact,
    index_monte_carlo,
    k_eff,
    naive_average_qc,
)
from .scaling import (
    CollapseFit,
    LinearFit,
    PhaseBoundary,
    ProbPath,
    collapse,
    fit_linear,
    qc_from_eq6,
    qc_from_eq12,
)
from .graph import FrustrationGraph, GraphReport, build_graph, classify
from .dynamics import RunConfig, run_ensemble_average, run_trajectory, sweep, entropy_profile

__version__ = "0.1.0"
