"""Automatic-stepsize training for neural networks with weights on Frobenius spheres."""

from .data import (RawDataset, ScaledDataset, Split, apply_scaling, load_csv, normalise_data,
                   spectral_initialise)
from .errors import ContractError, ConvergenceWarning, DataError, DimensionError, NumericError
from .jets import Jet2, curve_eval, jet_add, jet_mul, jet_relu
from .matrix_core import frob_inner, frob_norm, op_norm
from .network import (Identity, LatentTrace, NetworkParams, ReLU, forward, grad_layerwise, lipschitz_bound,
                      loss, loss_and_grad)
from .optimizers import (MajorantConstants, StepResult, UpdateDirection, ad_stepsize, apply_update,
                         majorant_constants, majorant_value, mm_stepsize, p1, riemannian_direction)
from .sphere import SpherePoint, TangentVector, exp_map, geodesic_distance, project_tangent
from .trainer import MetricsRow, TrainConfig, grid_experiment, rms_error, train

__version__ = "0.1.0"
