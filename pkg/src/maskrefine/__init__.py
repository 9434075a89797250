"""Segmentation mask refinement with a discrete, unidirectional diffusion process.

Pixels live in one of two states. Fine pixels copy a fine (or predicted)
mask, coarse pixels copy the coarse input. The forward process only moves
pixels fine -> coarse; refinement runs it backwards, letting a denoiser's
confidence decide which pixels move coarse -> fine at each step.
"""

__version__ = "0.1.0"

from .core import (
    COARSE,
    DEFAULT_SCHEDULE,
    FINE,
    NoiseSchedule,
    RngStream,
    ShapeMismatchError,
    make_linear_schedule,
    step_retention,
)
from .degradation import DegradationError, DegradeConfig, perturb_boundary, synthesize_coarse
from .denoiser import DenoiserOutput, IdentityDenoiser, OracleDenoiser, denoise
from .forward import compose_mask, forward_matrix, forward_trajectory, sample_marginal, sample_step
from .hires import (
    HiresOptions,
    PatchBox,
    crop_resize,
    instance_box,
    nms,
    refine_hires,
    refine_instance,
    select_patch_centers,
)
from .losses import LossConfig, bce_loss, texture_loss, total_loss
from .metrics import boundary_accuracy, boundary_iou, iou, mba
from .morphology import dilate, erode
from .reverse import (
    RefinementResult,
    posterior,
    refine,
    refine_no_diffusion,
    reverse_matrix,
    reverse_step,
)
from .tiny import TinyDenoiser, load_model, save_model
from .training import TrainConfig, gradient_check, train, train_step
