"""Pinning of Lugiato-Lefever solitons by a spatially varying advection potential.

Set ``LLE_PINNING_THREADS`` before import to cap the BLAS/OpenMP thread
count; by default the libraries use all cores.
"""

import os as _os

_threads = _os.environ.get("LLE_PINNING_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .continuation import Branch, BranchPoint, continue_branch, continue_both_ways  # noqa: E402
from .evolution import DecayFit, EvolutionConfig, evolve, evolve_and_fit  # noqa: E402
from .field import Field, PotentialSpec, TorusGrid  # noqa: E402
from .operators import KernelPair, SpectrumReport, assemble, full_spectrum, gauge_rotate, kernel_pair  # noqa: E402
from .pinning import ZeroRecord, critical_slope, find_zeros, predict_stability, v_eff  # noqa: E402
from .stationary import Params, SolveError, initial_guess, newton_solve, residual, solve_constant_states  # noqa: E402

__all__ = [
    "Branch", "BranchPoint", "DecayFit", "EvolutionConfig", "Field", "KernelPair", "Params",
    "PotentialSpec", "SolveError", "SpectrumReport", "TorusGrid", "ZeroRecord", "assemble",
    "continue_branch", "continue_both_ways", "critical_slope", "evolve", "evolve_and_fit",
    "find_zeros", "full_spectrum", "gauge_rotate", "initial_guess", "kernel_pair", "newton_solve",
    "predict_stability", "residual", "solve_constant_states", "v_eff",
]
__version__ = "0.1.0"
