"""Feature-attribution methods for dense networks."""

from .base import AttributionMatrix, Baseline, MethodConfig, make_attribution
from .deeplift import deeplift, deepshap
from .export import export_attribution
from .gradients import grad, grad_x_input, saliency, smoothgrad, smoothgrad_x_input
from .lrp import lrp
from .pathwise import expected_gradients, integrated_gradients
from .registry import ALL_METHODS, STOCHASTIC_METHODS, method_seed, run_method
from .shapley import sampling_shap

__all__ = [
    "AttributionMatrix", "Baseline", "MethodConfig", "make_attribution",
    "grad", "saliency", "smoothgrad", "grad_x_input", "smoothgrad_x_input",
    "lrp", "deeplift", "deepshap", "integrated_gradients", "expected_gradients",
    "sampling_shap", "run_method", "method_seed", "export_attribution",
    "ALL_METHODS", "STOCHASTIC_METHODS",
]
