"""Frequency-response analysis of bounded one-dimensional molecular-communication channels."""

from .boundary import (
    BoundaryLayer,
    PassiveMembrane,
    RationalTf,
    eval_channel,
    eval_GB,
    eval_GB_passive,
    eval_GFF,
    eval_rational,
    passive_g1,
    passive_g2,
)
from .errors import *  # noqa: F401,F403
from .pde import (
    Impulse,
    SimConfig,
    SimResult,
    Sine,
    SteadyStateFit,
    Step,
    simulate,
    sinusoid_response,
    validate_against_analytic,
)
from .response import (
    BodePoint,
    Classification,
    CutoffResult,
    Limiting,
    bode_sweep,
    classify_limiting_subsystem,
    diffusion_cutoff,
    dimensionless_cutoff,
    dimensionless_gain,
    gain_db,
    general_cutoff,
    max_distance,
    prop1_F,
)
from .xfer import (
    DiffusionChannel,
    eval_GD,
    eval_GD_blockdiagram,
    eval_GD_receiver,
    eval_GF,
    eval_GF_sender,
    exp_element,
)

__version__ = "0.1.0"
