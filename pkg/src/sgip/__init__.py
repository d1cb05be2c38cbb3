"""Stochastic genetic interacting particle (SGIP) solver for
reaction-diffusion-advection equations.

The pipeline per time step: Euler-Maruyama particle transport, histogram
density estimation, per-bin reaction integration, and multinomial genetic
resampling.  A finite-difference reference solver and a refinement-study
harness ship alongside for validation.
"""

from .core import (
    DensityField,
    GridSpec,
    ParticleEnsemble,
    SgipError,
    bin_center,
    bin_index,
    field_total_mass,
)
from .driver import (
    CustomDensity,
    IndicatorBall,
    IndicatorBox,
    IndicatorInterval,
    RunResult,
    SimConfig,
    init_particles,
    sgip_run,
    sgip_step,
)
from .fdm import FdmConfig, fdm_run, fdm_step, restrict_field
from .transport import RngStream

__version__ = "0.1.0"

__all__ = [
    "CustomDensity",
    "DensityField",
    "FdmConfig",
    "GridSpec",
    "IndicatorBall",
    "IndicatorBox",
    "IndicatorInterval",
    "ParticleEnsemble",
    "RngStream",
    "RunResult",
    "SgipError",
    "SimConfig",
    "bin_center",
    "bin_index",
    "fdm_run",
    "fdm_step",
    "field_total_mass",
    "init_particles",
    "restrict_field",
    "sgip_run",
    "sgip_step",
]
