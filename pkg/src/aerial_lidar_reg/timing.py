"""
Per-stage wall-clock accounting.
"""

import threading
import time
from contextlib import contextmanager
from typing import Dict, Iterator


class StageTimer:
    """Accumulates elapsed seconds per stage name; safe to share between threads."""

    def __init__(self):
        self._totals: Dict[str, float] = {}
        self._lock = threading.Lock()

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.add(name, time.perf_counter() - start)

    def add(self, name: str, seconds: float) -> None:
        with self._lock:
            self._totals[name] = self._totals.get(name, 0.0) + seconds

    def totals(self) -> Dict[str, float]:
        with self._lock:
            return dict(self._totals)

    def total(self) -> float:
        with self._lock:
            return sum(self._totals.values())
