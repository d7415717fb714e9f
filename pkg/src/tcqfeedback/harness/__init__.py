"""Monte Carlo link-level harness: scenario configs, runners, CSV output and CLI."""

from .config import ExperimentConfig, from_mapping, load_config, preset_names, preset_path
from .csvio import COLUMNS, emit_csv, read_csv
from .runner import (
    ExperimentResult,
    ResultRecord,
    run_rvq_report,
    run_spatial_experiment,
    run_sweep,
    run_temporal_experiment,
    trial_generators,
)
