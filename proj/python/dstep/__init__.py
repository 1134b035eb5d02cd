# SPDX-License-Identifier: MIT
"""Adaptive d-step-ahead tracking control testbench.

Thin Python surface over the native core: predictor-form algebra, the
gated-projection estimator step, closed-loop simulation from JSON configs,
and trace verification.
"""

from ._core import (
    __version__,
    box_norm,
    demo_config_json,
    estimator_step,
    predictor_form,
    run_demo_summary,
    simulate,
    simulate_to_csv,
    verify,
    zeros_in_z,
)

__all__ = [
    "__version__",
    "box_norm",
    "demo_config_json",
    "estimator_step",
    "predictor_form",
    "run_demo_summary",
    "simulate",
    "simulate_to_csv",
    "verify",
    "zeros_in_z",
]
