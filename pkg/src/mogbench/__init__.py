"""Multi-object grasping benchmark harness with a seeded desk-scale simulator."""

from __future__ import annotations

from .catalog import CATALOG, ObjectSpec, Origin, Shape, SizeClass, catalog_labels, catalog_lookup
from .config import RunConfig, parse_config
from .errors import (
    CalibrationError,
    CatalogError,
    ConfigError,
    DensityError,
    EmptyInputError,
    EmptySceneError,
    IdError,
    IncapableHandError,
    IngestError,
    InsufficientObjectsError,
    MogBenchError,
    PlanningError,
)
from .hands import (
    CaptureRegion,
    DiscFootprint,
    GraspPose,
    HandKind,
    HandModel,
    RectFootprint,
    builtin_hand,
    capacity,
    capture_region,
)
from .kernels import BACKEND
from .logio import emit_log, ingest_external, parse_log, report
from .metrics import (
    MetricsReport,
    TrialSet,
    availability_rate,
    cgpu,
    cgpu_adjusted,
    cgpu_simplified,
    cgpu_with_overhead,
    overall_success_rate,
    picking_accuracy,
    summarize,
)
from .planners import (
    Cluster,
    CountPolicy,
    GraspPlan,
    PlannerConfig,
    constrained_kmeans,
    feasibility_check,
    plan_grasp,
    plan_grouping_moves,
    plan_pile_grasp,
    plan_surface_grasp,
)
from .protocols import (
    BenchmarkEnv,
    ProtocolRunResult,
    RunLog,
    SceneFactory,
    TrialRecord,
    run_apt,
    run_availability,
    run_opo,
    run_pta,
    run_sop_calibration,
    sop_calibration,
)
from .scene import BinRect, ObjectInstance, Scenario, Scene, generate_scene, remove_objects
from .sim import GraspOutcome, PhaseTimes, TimeModel, simulate_grasp

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_") and name != "annotations"]
