"""Python access to the hproj numerical laboratory."""

import json

from ._core import (
    BeltramiPair,
    ConfigError,
    HprojError,
    RigidityParams,
    block_curvature,
    block_curvature_ad,
    fit_quadratic_law,
    fit_tanh_profile,
    fs_metric,
    hermitian_defect,
    length_finiteness,
    list_experiments,
    metric_to_sigma,
    mu_B_solve,
    rho_closed_form,
    sigma_to_metric,
    standard_J,
    transform_sigma,
)
from ._core import _run_suite


def run_suite(config=None, only="", write=False):
    """Run experiments from a config dict; returns (summary dict, {name: csv text})."""
    summary, csv = _run_suite(json.dumps(config or {}), only, write)
    return json.loads(summary), dict(csv)


__all__ = [
    "BeltramiPair",
    "ConfigError",
    "HprojError",
    "RigidityParams",
    "block_curvature",
    "block_curvature_ad",
    "fit_quadratic_law",
    "fit_tanh_profile",
    "fs_metric",
    "hermitian_defect",
    "length_finiteness",
    "list_experiments",
    "metric_to_sigma",
    "mu_B_solve",
    "rho_closed_form",
    "run_suite",
    "sigma_to_metric",
    "standard_J",
    "transform_sigma",
]
