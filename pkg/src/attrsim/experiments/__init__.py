"""Config-driven reproduction of the simulation studies."""

from .config import ConfigError, ExperimentConfig, make_config
from .ingest import IngestError, ingest_csv, load_schema
from .runner import (ExperimentReport, execute, run_demo_sec3,
                     run_disagreement_matrix, run_faithfulness_study,
                     run_importance_study, run_prep_study)
from .studies import study_cells

__all__ = [
    "ConfigError", "ExperimentConfig", "make_config", "IngestError",
    "ingest_csv", "load_schema", "ExperimentReport", "execute",
    "run_demo_sec3", "run_disagreement_matrix", "run_faithfulness_study",
    "run_importance_study", "run_prep_study", "study_cells",
]
