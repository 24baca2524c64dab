"""Hierarchical fuzzy assessment of driver drowsiness and collision risk."""
from .fuzzy import ConfigError, Decision, Label
from .eeg import InputError, UndefinedFeature
from .pipeline import SessionConfig, run_session

__all__ = ["ConfigError", "Decision", "InputError", "Label", "SessionConfig", "UndefinedFeature",
           "run_session"]
__version__ = "0.1.0"
