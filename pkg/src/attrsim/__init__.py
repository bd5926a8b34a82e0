"""attrsim: feature attribution for dense networks, evaluated on synthetic
data with known ground-truth effects."""

__version__ = "0.1.0"

from . import attribution, dgp, metrics, model_io, network, preprocess, training

__all__ = ["attribution", "dgp", "metrics", "model_io", "network",
           "preprocess", "training", "__version__"]
