from .config import RunConfig
from .named import EXPERIMENTS, run_experiment
from .runner import classify, emit, scan

__all__ = ["RunConfig", "EXPERIMENTS", "run_experiment", "classify", "emit", "scan"]
