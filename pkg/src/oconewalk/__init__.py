"""oconewalk: reflection transforms, exact path laws and Monte Carlo checks
for skip-free Ocone martingales."""

from .paths import (
    INFINITY,
    EmbeddedWalk,
    LatticePath,
    LatticeWalk,
    SkipFreePath,
    WalkPath,
    embedded_walk,
    exit_reflect,
    first_passage,
    lattice_embedded_walk,
    parse_path,
    parse_walk,
    paste_walk,
    quadratic_variation,
    reflect,
    to_text,
)
from .solver import (
    OrbitGraph,
    alternating_path,
    apply_word,
    orbit_graph,
    solve,
    solve_to_alternating,
)
from .laws import (
    PathLaw,
    ProcessSpec,
    bernoulli_walk_spec,
    conditional_embedded_law,
    enumerate_law,
    laws_equal,
    ocone_check,
    ocone_time_change_spec,
    pushforward_reflect,
)
from .counterexamples import (
    ce1_invariance_report,
    ce1_law,
    ce2_invariance_report,
    ce2_law,
    ce2_path,
)
from .bridge import (
    QVRecord,
    SampledContinuousPath,
    StepFunction,
    cf_ocone_test,
    cos_product,
    discretize,
    limit_exponential,
    stochastic_step_integral,
    sup_gap,
)
from .montecarlo import (
    SamplerSpec,
    TestReport,
    ocone_independence_test,
    reflect_two_sample_test,
    sample,
)

__version__ = "0.1.0"
