"""Shared fixtures: the null-scenario Monte Carlo and the golden-CSV directory."""

import math
from pathlib import Path

import numpy as np
import pytest

from mabfdr import ArmModel, BanditConfig, SeededStream, run_lucb, run_uniform

RESULTS_DIR = Path(__file__).resolve().parent.parent / "results" / "acceptance"

NULL_MC_RUNS = 2000
NULL_MC_HORIZON = 5000
NULL_MC_ARMS = 6  # control + 5 alternatives, all means equal


@pytest.fixture(scope="session")
def null_horizon_pvalues():
    """Per-run final p-values for an all-equal-means Gaussian null.

    The final p-value of a truncated run is the minimum of the p-value
    process over the whole horizon, since the process is non-increasing.
    Computed once per session for both samplers; the validity property
    and the acceptance gate both read from here.
    """
    models = [ArmModel("gaussian", 0.0) for _ in range(NULL_MC_ARMS)]
    config = BanditConfig(delta=0.05, K=NULL_MC_ARMS - 1, truncation=NULL_MC_HORIZON)
    out = {}
    for name, sampler, seed in (("lucb", run_lucb, 101), ("uniform", run_uniform, 202)):
        finals = np.empty(NULL_MC_RUNS)
        for run in range(NULL_MC_RUNS):
            streams = [SeededStream(seed, (0, run, 0, arm)) for arm in range(NULL_MC_ARMS)]
            finals[run] = sampler(models, config, streams).final_pvalue
        out[name] = finals
    return out


@pytest.fixture(scope="session")
def golden_dir():
    RESULTS_DIR.mkdir(parents=True, exist_ok=True)
    return RESULTS_DIR


def binomial_slack(p: float, n: int) -> float:
    return 3.0 * math.sqrt(p * (1.0 - p) / n)
