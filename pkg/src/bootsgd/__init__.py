"""Bootstrap SGD with averaged and median aggregation, order-statistic intervals
and algorithmic-stability experiments."""

from .bootstrap import (BootstrapConfig, BootstrapEnsemble, Constant, InverseSqrt, aggregate_type1,
                        aggregate_type2, aggregate_type3, draw_bootstrap_indices,
                        one_step_w_estimate, pointwise_order_interval, run_bootstrap_sgd, run_sgd)
from .datagen import Dataset, generate_dataset, true_function
from .losses import LossConstants, LossKind, loss_constants, loss_derivative, loss_value
from .models import (Linear, ModelState, RbfKernel, average_models, kernel_matrix, predict,
                     predict_batch, sgd_step)
from .orderstats import (IntervalDesign, design_median_ci, design_tolerance, median_ci_level,
                         tolerance_level)

__version__ = "0.1.0"
