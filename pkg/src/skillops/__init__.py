"""skillops: deterministic maintenance and planning for agent skill libraries."""

from skillops.cgpd import CgpdConfig, propagate, trigger_set
from skillops.contract import (
    AdapterShim,
    ArtifactDirs,
    Library,
    SkillContract,
    body_hash,
    library_fingerprint,
    make_contract,
    normalize_body,
    parse_skill_file,
    serialize_skill_file,
)
from skillops.debtgen import build_library
from skillops.harness import (
    SimulatedExecutor,
    exercise_library,
    load_library,
    load_trace,
    main,
    precision_at_k,
    run_pipeline,
    save_library,
    save_trace,
    wilson_ci,
)
from skillops.health import HealthVector, HealthWeights, library_health
from skillops.hseg import build_hseg
from skillops.maint import MaintenanceConfig, run_maintenance
from skillops.planner import (
    ExecutionTrace,
    PlannerConfig,
    TaskSpec,
    TraceEntry,
    build_plan,
    execute_with_repair,
    grade_plan,
)

__version__ = "0.1.0"

__all__ = [
    "AdapterShim",
    "ArtifactDirs",
    "CgpdConfig",
    "ExecutionTrace",
    "HealthVector",
    "HealthWeights",
    "Library",
    "MaintenanceConfig",
    "PlannerConfig",
    "SimulatedExecutor",
    "SkillContract",
    "TaskSpec",
    "TraceEntry",
    "body_hash",
    "build_hseg",
    "build_library",
    "build_plan",
    "execute_with_repair",
    "exercise_library",
    "grade_plan",
    "library_fingerprint",
    "library_health",
    "load_library",
    "load_trace",
    "main",
    "make_contract",
    "normalize_body",
    "parse_skill_file",
    "precision_at_k",
    "propagate",
    "run_maintenance",
    "run_pipeline",
    "save_library",
    "save_trace",
    "serialize_skill_file",
    "trigger_set",
    "wilson_ci",
    "__version__",
]
