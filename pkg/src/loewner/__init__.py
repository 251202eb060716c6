"""Chordal Loewner hull simulation from oscillating driving functions.

Grow multi-component hulls by composing exact constant-driver slit maps over
a driver that oscillates (round-robin or randomly) between several driving
functions, and verify the results against the exact two-sided benchmark
curve, direct integration of the weighted downward ODE, and the analytic
identities of the slit maps.
"""

__version__ = "0.1.0"

from .conformal import (
    SlitStep,
    compose_down,
    compose_up,
    hcap_estimate,
    probe_radius_bound,
    slit_map_down,
    slit_map_up,
    sqrt_h,
)
from .driving import (
    TEST_FUNCTIONS,
    DriverSpec,
    OscillationPlan,
    TestFunction,
    WeightVector,
    build_controlled_plan,
    build_random_plan,
    oscillating_driver_value,
    weak_convergence_gap,
    weight_indicator,
)
from .errors import (
    LoewnerError,
    NotKnkInstance,
    ProbeTooClose,
    SwallowedPoint,
    ThetaOutOfRange,
)
from .hull import (
    HullTrace,
    SimulationConfig,
    cara_distance_proxy,
    config_from_json_dict,
    config_to_json_dict,
    default_probe_grid,
    driver_samples,
    integrate_multi_le_down,
    schedule_steps,
    simulate_hull,
)
from .knk import (
    CurveDistance,
    ErrorReport,
    KnkCurveParam,
    distance_to_knk_curve,
    distance_to_knk_curve_many,
    error_report,
    error_sweep,
    knk_config,
    knk_point,
    knk_radius,
    reports_to_json,
    side_consistency,
    write_reports_csv,
    write_reports_json,
)

__all__ = [
    "__version__",
    "SlitStep",
    "sqrt_h",
    "slit_map_up",
    "slit_map_down",
    "compose_up",
    "compose_down",
    "hcap_estimate",
    "probe_radius_bound",
    "DriverSpec",
    "WeightVector",
    "OscillationPlan",
    "TestFunction",
    "TEST_FUNCTIONS",
    "build_controlled_plan",
    "build_random_plan",
    "oscillating_driver_value",
    "weight_indicator",
    "weak_convergence_gap",
    "SimulationConfig",
    "HullTrace",
    "simulate_hull",
    "driver_samples",
    "schedule_steps",
    "integrate_multi_le_down",
    "cara_distance_proxy",
    "default_probe_grid",
    "config_to_json_dict",
    "config_from_json_dict",
    "KnkCurveParam",
    "CurveDistance",
    "ErrorReport",
    "knk_radius",
    "knk_point",
    "distance_to_knk_curve",
    "distance_to_knk_curve_many",
    "knk_config",
    "error_report",
    "side_consistency",
    "error_sweep",
    "reports_to_json",
    "write_reports_csv",
    "write_reports_json",
    "LoewnerError",
    "SwallowedPoint",
    "ProbeTooClose",
    "ThetaOutOfRange",
    "NotKnkInstance",
]
