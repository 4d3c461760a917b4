"""Best-arm bandit experiments with always-valid p-values under online FDR control."""

from .bestarm import BanditConfig, BanditOutcome, check_termination, run_lucb, run_uniform
from .confidence import ArmStats, lcb, phi, ucb
from .errors import ConfigError, DataError
from .harness import ScenarioConfig, build_plan, run_many, run_meta, run_one
from .metrics import (ExperimentRecord, GapDiagnostics, bdr, fdp, gap_diagnostics,
                      mfdr_estimate, target_set)
from .online_fdr import FdrState, gamma, make_state, next_alpha, record
from .pvalue import PValueState, pvalue_single
from .rewards import ArmModel, SeededStream, draw

__version__ = "0.1.0"

__all__ = [
    "ArmModel", "ArmStats", "BanditConfig", "BanditOutcome", "ConfigError",
    "DataError", "ExperimentRecord", "FdrState", "GapDiagnostics",
    "PValueState", "ScenarioConfig", "SeededStream", "bdr", "build_plan",
    "check_termination", "draw", "fdp", "gamma", "gap_diagnostics", "lcb",
    "make_state", "mfdr_estimate", "next_alpha", "phi", "pvalue_single",
    "record", "run_lucb", "run_many", "run_meta", "run_one", "run_uniform",
    "target_set", "ucb", "__version__",
]
