"""Declarative study configuration with JSON round-tripping.

A config file is a flat JSON object; unknown keys are rejected so typos
fail loudly.  Parsing materializes study-specific defaults, so the echo
embedded in every report parses back to an identical config.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

STUDIES = ("demo_sec3", "prep_study", "faithfulness_study",
           "importance_study", "disagreement_matrix")

CONTINUOUS_EFFECT_CELLS = ("linear", "piecewise_linear", "non_continuous")


class ConfigError(ValueError):
    """Malformed experiment configuration."""


@dataclass
class ExperimentConfig:
    study: str
    repetitions: int = 20
    base_seed: int = 0
    workers: int = 1
    out_dir: str | None = None
    methods: list[str] = field(default_factory=list)

    # attribution hyperparameters
    sg_samples: int = 50
    sg_noise: float = 0.2
    intgrad_steps: int = 50
    mc_samples: int = 50
    lrp_epsilon: float = 0.01
    lrp_alpha: float = 2.0

    # data-generating process
    p: int = 12
    n_train: int | None = None          # None: 4000 continuous / 2000 categorical
    n_test: int = 1000
    noise_sd: float = 1.0
    coefficients: list[float] | None = None
    effects: list[str] = field(default_factory=list)
    levels: int = 4                     # level count for "categorical" cells
    level_counts: list[int] = field(default_factory=list)   # prep-study grid

    # preprocessing
    scalings: list[str] = field(default_factory=list)       # prep-study grid
    encodings: list[str] = field(default_factory=list)      # prep-study grid
    scaling: str = "z_score"
    binary_encoding: str = "label"
    categorical_encoding: str = "one_hot"

    # importance study
    n_sweep: list[int] = field(default_factory=list)
    top_k: int = 10

    # disagreement study
    rank_k: int = 2
    effect: str = "linear"
    data_csv: str | None = None
    data_schema: str | None = None

    # architecture
    hidden_continuous: list[int] = field(default_factory=lambda: [256, 128, 64])
    hidden_categorical: list[int] = field(default_factory=lambda: [128, 64, 32])
    dropout: float = 0.4

    # training
    max_epochs: int = 300
    initial_lr: float = 0.01
    lr_decay_factor: float = 0.2
    lr_decay_every: int = 50
    early_stop_patience: int = 50
    batch_size: int = 128

    # reporting
    r2_floor: float = 0.2

    def __post_init__(self):
        if self.study not in STUDIES:
            raise ConfigError(f"unknown study {self.study!r}; pick one of {STUDIES}")
        if self.repetitions < 1 or self.workers < 1:
            raise ConfigError("repetitions and workers must be positive")
        if self.coefficients is not None and len(self.coefficients) != self.p:
            raise ConfigError("coefficients length must equal p")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "study" not in d:
            raise ConfigError("config needs a 'study' key")
        cfg = cls(**d)
        _apply_study_defaults(cfg, provided=set(d))
        return cfg

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(data)


_STUDY_METHOD_DEFAULTS = {
    "demo_sec3": ["grad", "smoothgrad", "grad_x_input", "lrp_alphabeta",
                  "intgrad_zeros", "intgrad_means", "expgrad", "deepshap_rescale"],
    "prep_study": ["grad", "smoothgrad", "saliency", "grad_x_input",
                   "smoothgrad_x_input", "lrp_zero", "lrp_epsilon", "lrp_alphabeta",
                   "deeplift_rescale_zeros", "deeplift_revealcancel_zeros",
                   "intgrad_zeros", "intgrad_means", "expgrad",
                   "deepshap_rescale", "deepshap_revealcancel"],
    "faithfulness_study": ["grad", "smoothgrad", "saliency", "grad_x_input",
                           "smoothgrad_x_input", "lrp_zero", "lrp_epsilon",
                           "lrp_alphabeta", "deeplift_rescale_means",
                           "deeplift_revealcancel_means", "intgrad_means",
                           "expgrad", "deepshap_rescale", "deepshap_revealcancel",
                           "sampling_shap"],
    "importance_study": ["grad", "smoothgrad", "grad_x_input", "lrp_alphabeta",
                         "intgrad_means", "expgrad", "deepshap_rescale",
                         "deepshap_revealcancel", "sampling_shap"],
    "disagreement_matrix": ["grad", "smoothgrad", "saliency", "grad_x_input",
                            "smoothgrad_x_input", "lrp_zero", "lrp_epsilon",
                            "lrp_alphabeta", "deeplift_rescale_zeros",
                            "deeplift_rescale_means", "intgrad_zeros",
                            "intgrad_means", "expgrad", "deepshap_rescale"],
}


def make_config(**kwargs) -> ExperimentConfig:
    """Build a config the same way the file parser does (study defaults applied)."""
    return ExperimentConfig.from_dict(kwargs)


def _apply_study_defaults(cfg: ExperimentConfig, provided: set) -> None:
    if not cfg.methods:
        cfg.methods = list(_STUDY_METHOD_DEFAULTS[cfg.study])
    if cfg.study == "prep_study":
        if "effects" not in provided and "level_counts" not in provided:
            cfg.effects = list(CONTINUOUS_EFFECT_CELLS)
            cfg.level_counts = [4, 12]
        if not cfg.scalings:
            cfg.scalings = ["none", "z_score", "max_abs"]
        if not cfg.encodings:
            cfg.encodings = ["label", "one_hot", "dummy", "binary"]
    elif cfg.study == "faithfulness_study":
        if not cfg.effects:
            cfg.effects = list(CONTINUOUS_EFFECT_CELLS) + ["binary", "categorical"]
        if cfg.n_train is None:
            cfg.n_train = 2000
        if cfg.coefficients is None:
            cfg.coefficients = [0.1] * 4 + [0.4] * 4 + [1.0] * 4
    elif cfg.study == "importance_study":
        if not cfg.effects:
            cfg.effects = list(CONTINUOUS_EFFECT_CELLS) + ["categorical"]
        if not cfg.n_sweep:
            cfg.n_sweep = [500, 1000, 2000, 4000, 8000]
        if "p" not in provided:
            cfg.p = 20
        if cfg.coefficients is None:
            # only features with an even 1-based index carry an effect
            cfg.coefficients = [1.0 if (j + 1) % 2 == 0 else 0.0 for j in range(cfg.p)]
    elif cfg.study == "demo_sec3":
        if "scaling" not in provided:
            cfg.scaling = "none"
        if "p" not in provided:
            cfg.p = 4
        if cfg.n_train is None:
            cfg.n_train = 2000
    if cfg.coefficients is not None and len(cfg.coefficients) != cfg.p:
        raise ConfigError("coefficients length must equal p")
