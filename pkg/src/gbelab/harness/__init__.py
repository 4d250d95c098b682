"""Configuration, experiment registry, report emission and the CLI."""
from .config import ConfigError, ExperimentConfig, parse_config, parse_sweep, serialize_config
from .experiments import REGISTRY, SCHEMAS, run_experiment
from .results import Check, ResultTable, emit_report

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "parse_sweep", "serialize_config",
           "REGISTRY", "SCHEMAS", "run_experiment", "Check", "ResultTable", "emit_report"]
