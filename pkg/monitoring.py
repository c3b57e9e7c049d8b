"""
Monitoring Module

This module records timing and outcome of every evaluation a run performs.
"""

import logging
import time
import threading
import json
import os
from contextlib import contextmanager
from dataclasses import dataclass, asdict
from typing import Dict, List, Any, Optional
from datetime import datetime

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


@dataclass
class EvaluationLog:
    """Journal entry for one evaluation."""

    operation: str
    timestamp: str
    duration: float
    success: bool
    error: Optional[str] = None
    metadata: Dict[str, Any] = None

    def __post_init__(self):
        if self.metadata is None:
            self.metadata = {}


class RunMonitor:
    """Collects evaluation statistics and an optional JSON journal."""

    def __init__(self, log_dir: Optional[str] = None):
        """
        Initialize the monitor.

        Args:
            log_dir (str, optional): Directory for the journal; no journal when None
        """
        self.log_dir = log_dir
        self.evaluations: List[EvaluationLog] = []
        self.start_time = time.time()
        self.evaluation_count = 0
        self.error_count = 0
        self.total_duration = 0.0
        self._lock = threading.Lock()
        self._open_session()

    def _open_session(self):
        self.session_id = datetime.now().strftime("%Y%m%d_%H%M%S")
        self.log_file = None
        if self.log_dir:
            os.makedirs(self.log_dir, exist_ok=True)
            self.log_file = os.path.join(self.log_dir, f"run_log_{self.session_id}.json")
        logger.debug(f"Monitoring session started: {self.session_id}")

    def log_evaluation(self, operation: str, duration: float, success: bool,
                       error: Optional[str] = None, metadata: Optional[Dict[str, Any]] = None):
        """
        Record one evaluation.

        Args:
            operation (str): Name of the operation
            duration (float): Wall time in seconds
            success (bool): Whether it completed
            error (str, optional): Error message if unsuccessful
            metadata (Dict[str, Any], optional): Additional metadata
        """
        entry = EvaluationLog(
            operation=operation,
            timestamp=datetime.now().isoformat(),
            duration=duration,
            success=success,
            error=error,
            metadata=metadata or {},
        )
        with self._lock:
            self.evaluations.append(entry)
            self.evaluation_count += 1
            self.total_duration += duration
            if not success:
                self.error_count += 1
            if self.log_file:
                self._write_journal()

    def _write_journal(self):
        try:
            with open(self.log_file, "w") as f:
                json.dump([asdict(e) for e in self.evaluations], f, indent=2)
        except OSError as e:
            logger.error(f"Error writing journal: {str(e)}")

    @contextmanager
    def track(self, operation: str, **metadata):
        """Time a block and record it; exceptions are recorded and re-raised."""
        start = time.perf_counter()
        try:
            yield
        except Exception as e:
            self.log_evaluation(operation, time.perf_counter() - start, False, str(e), metadata)
            raise
        self.log_evaluation(operation, time.perf_counter() - start, True, None, metadata)

    def get_stats(self) -> Dict[str, Any]:
        """
        Get current statistics.

        Returns:
            Dict[str, Any]: counts, error rate and average duration
        """
        with self._lock:
            return {
                "session_id": self.session_id,
                "uptime_seconds": time.time() - self.start_time,
                "evaluation_count": self.evaluation_count,
                "error_count": self.error_count,
                "error_rate": self.error_count / max(1, self.evaluation_count),
                "avg_duration": self.total_duration / max(1, self.evaluation_count),
            }

    def get_recent(self, count: int = 10) -> List[Dict[str, Any]]:
        with self._lock:
            return [asdict(e) for e in self.evaluations[-count:]]

    def reset_stats(self):
        """Reset statistics and start a new journal."""
        with self._lock:
            self.evaluations = []
            self.start_time = time.time()
            self.evaluation_count = 0
            self.error_count = 0
            self.total_duration = 0.0
            self._open_session()
            logger.info(f"Monitoring stats reset, new session: {self.session_id}")
