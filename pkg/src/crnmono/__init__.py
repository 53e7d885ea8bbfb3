"""Structural input/output monotonicity analysis of chemical reaction networks."""

from .core import (
    Network,
    NetworkError,
    Reaction,
    SignStructure,
    Species,
    build_sign_structure,
    conservation_laws,
    rate_vector,
    species_derivatives,
)
from .graphs import (
    Case,
    Labeling,
    OddCycle,
    RGraph,
    SRGraph,
    Verdict,
    VerdictKind,
    augment,
    brute_force_labeling,
    build_r_graph,
    build_sr_graph,
    check_io_monotonicity,
    find_consistent_labeling,
    flip_orientation,
    rule_of_two,
    to_dot,
    verify_labeling,
)
from .parser import NetworkDocument, ParseError, parse, parse_file, serialize
from .sim import (
    EmpiricalKind,
    SimConfig,
    SimulationError,
    SweepError,
    Trajectory,
    check_empirical_monotonicity,
    detect_steady_state,
    simulate,
    sweep,
    sweep_csv,
    trajectory_csv,
)

__version__ = "0.1.0"
