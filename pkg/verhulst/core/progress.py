"""Progress reporting for scenario runs.

Runners publish one :class:`ProgressEvent` per scenario milestone. The bus
hands each event to its subscribers and keeps a per-event tally that the CLI
turns into an end-of-run summary.
"""

from __future__ import annotations

import logging
import threading
from collections import Counter, defaultdict
from contextlib import contextmanager
from enum import Enum
from typing import Any, Callable, DefaultDict, Dict, Iterator, List, Union

logger = logging.getLogger(__name__)

ProgressHandler = Callable[[Any], None]


class ProgressEvent(str, Enum):
    SCENARIO_STARTED = "scenario.started"
    SCENARIO_FINISHED = "scenario.finished"
    SCENARIO_DIVERGED = "scenario.diverged"
    ARTIFACT_WRITTEN = "artifact.written"


SCENARIO_STARTED = ProgressEvent.SCENARIO_STARTED
SCENARIO_FINISHED = ProgressEvent.SCENARIO_FINISHED
SCENARIO_DIVERGED = ProgressEvent.SCENARIO_DIVERGED
ARTIFACT_WRITTEN = ProgressEvent.ARTIFACT_WRITTEN

EventLike = Union[ProgressEvent, str]


def _event(value: EventLike) -> ProgressEvent:
    try:
        return ProgressEvent(value)
    except ValueError:
        raise ValueError(f"unknown progress event '{value}'") from None


class ProgressBus:
    """Thread-safe dispatcher between experiment runners and the console."""

    def __init__(self) -> None:
        self._handlers: DefaultDict[ProgressEvent, List[ProgressHandler]] = defaultdict(list)
        self._tally: Counter = Counter()
        self._lock = threading.RLock()

    # ------------------------------------------------------------------ subscription
    def subscribe(self, event: EventLike, handler: ProgressHandler) -> ProgressHandler:
        """Register *handler* for *event*; unknown event names raise ``ValueError``."""

        key = _event(event)
        if not callable(handler):
            raise TypeError("progress handler must be callable")
        with self._lock:
            self._handlers[key].append(handler)
        return handler

    def unsubscribe(self, event: EventLike, handler: ProgressHandler) -> None:
        key = _event(event)
        with self._lock:
            listeners = self._handlers.get(key)
            if not listeners or handler not in listeners:
                return
            listeners.remove(handler)
            if not listeners:
                self._handlers.pop(key, None)

    @contextmanager
    def listening(self, event: EventLike, handler: ProgressHandler) -> Iterator[ProgressHandler]:
        """Keep *handler* subscribed for the duration of a ``with`` block."""

        self.subscribe(event, handler)
        try:
            yield handler
        finally:
            self.unsubscribe(event, handler)

    # ------------------------------------------------------------------ publishing
    def publish(self, event: EventLike, payload: Any = None) -> None:
        """Count *event* and invoke its handlers with *payload*.

        Handlers run while the bus lock is held so console output from
        concurrent publishers never interleaves. A failing handler is logged
        and the remaining handlers still run.
        """

        key = _event(event)
        with self._lock:
            self._tally[key] += 1
            for handler in list(self._handlers.get(key, ())):
                try:
                    handler(payload)
                except Exception:  # pragma: no cover
                    logger.exception("Error in progress handler for '%s'", key.value)

    # ------------------------------------------------------------------ tally
    def tally(self) -> Dict[str, int]:
        """Published count per event name, zeros included."""

        with self._lock:
            return {event.value: self._tally[event] for event in ProgressEvent}

    def summary(self) -> str:
        counts = self.tally()
        return "{} finished, {} diverged, {} artifacts written".format(
            counts[SCENARIO_FINISHED.value], counts[SCENARIO_DIVERGED.value], counts[ARTIFACT_WRITTEN.value]
        )


class _SilentBus(ProgressBus):
    """Shared default bus: events are checked and dropped, and nothing may subscribe."""

    def subscribe(self, event: EventLike, handler: ProgressHandler) -> ProgressHandler:
        raise RuntimeError("the shared silent bus takes no subscribers; pass a ProgressBus instead")

    def publish(self, event: EventLike, payload: Any = None) -> None:
        _event(event)


NULL_BUS: ProgressBus = _SilentBus()


__all__ = [
    "ARTIFACT_WRITTEN",
    "NULL_BUS",
    "ProgressBus",
    "ProgressEvent",
    "ProgressHandler",
    "SCENARIO_DIVERGED",
    "SCENARIO_FINISHED",
    "SCENARIO_STARTED",
]
