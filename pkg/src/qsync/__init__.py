"""Composite two-qudit self-sustained oscillators: models, metrics and solvers."""

__version__ = "0.1.0"

from . import cqed_calibration, errors, lindblad, metrics, models, operators, perturbative  # noqa: E402
from .errors import *  # noqa: E402,F401,F403
from .lindblad import (  # noqa: E402
    DensityMatrix,
    LindbladModel,
    evolve,
    expectation,
    liouvillian,
    partial_trace,
    propagate,
    steady_state,
)
from .metrics import (  # noqa: E402
    delta_p,
    husimi_q,
    husimi_q_expansion,
    phase_locking,
    ratio_r,
    sync_measure,
    sync_measure_partial,
    tensor_expectations,
)
from .models import CqedParams, OscillatorParams, build_cqed, build_two_qudit, cqed_preset  # noqa: E402
from .perturbative import existence_map, r_max, restore_detuning, solve_first, zero_crossing  # noqa: E402
