"""Mine static-analysis alert removals from git history and relate them to corrective-commit rates."""

from alertminer.detectors import AlertInstance, AlertKind, DetectorConfig, detect_all
from alertminer.metrics import file_metrics, mccabe
from alertminer.source import parse_source

__all__ = ["AlertInstance", "AlertKind", "DetectorConfig", "detect_all", "file_metrics", "mccabe", "parse_source"]
__version__ = "0.1.0"
