"""2D Poisson Boolean percolation laboratory.

Finite-window sampling of the marked Poisson process, exact disc
connectivity (crossings, arm events), circuit/necklace topology, and
Monte Carlo estimators with dual threshold bisection.
"""

from .geometry import Rect
from .laws import (
    Dirac,
    DivergentMomentError,
    LawSpecError,
    ParetoTail,
    SlicedLaw,
    TailSum,
    Uniform,
    big_disc_rate,
    circuit_weight,
    circuit_weight_tail,
    moment_is_finite,
    parse_law,
    partial_moment,
    sample_radius,
    tail_mass,
    two_disc_bound,
)
from .sampler import (
    Configuration,
    Disc,
    Window,
    missed_disc_bound,
    padding_radius,
    replicate_rng,
    sample_configuration,
    thin,
    truncate,
    vacant_fraction,
)
from .connectivity import (
    Box,
    DiscGraph,
    WindowInsufficientError,
    arm_event,
    build_graph,
    e_event,
    grid_oracle,
    occupied_crossing,
    renorm_field,
    vacant_crossing,
)
from .topology import (
    Necklace,
    NecklaceReport,
    SurroundResult,
    big_disc_count,
    extract_necklace,
    grid_ball_blocked,
    necklace_band_event,
    second_radius,
    surrounding_component,
    two_big_discs_event,
    validate_necklace,
)
from .stats import Estimate, wilson_interval
from .estimators import (
    ArmEventSpec,
    BigDiscsEvent,
    CrossingEvent,
    EscapeEventSpec,
    GridCrossingEvent,
    ThresholdError,
    ThresholdResult,
    blocking_bound,
    blocking_profile,
    decay_profile,
    dependence_test,
    derive_seed,
    mc_estimate,
    necklace_band_profile,
    poisson_gof,
    threshold_bisect,
)

__version__ = "0.1.0"
