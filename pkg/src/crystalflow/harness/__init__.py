"""Run orchestration: configuration, scenario dispatch, artifact emission."""

from .compare import CompareReport, compare_scales
from .config import SCENARIOS, RunConfig
from .runner import run

__all__ = ["CompareReport", "RunConfig", "SCENARIOS", "compare_scales", "run"]
