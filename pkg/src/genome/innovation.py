"""Run-wide innovation registry."""

import threading
from typing import Dict, Tuple


class InnovationRegistry:
    """Hands out innovation numbers and hidden-node ids.

    Within one generation the same structural change (a new ``source -> target``
    connection, or the split of a given connection) always receives the same number.
    Assignments are serialized with a lock so concurrent reproduction stays consistent.
    """

    def __init__(self, next_innovation: int = 0, next_node_id: int = 0):
        self._next_innovation = next_innovation
        self._next_node_id = next_node_id
        self._connections: Dict[Tuple[int, int], int] = {}
        self._splits: Dict[int, int] = {}
        self._lock = threading.Lock()

    def connection(self, source: int, target: int) -> int:
        """Innovation number of the ``source -> target`` connection in this generation."""
        with self._lock:
            key = (source, target)
            if key not in self._connections:
                self._connections[key] = self._next_innovation
                self._next_innovation += 1
            return self._connections[key]

    def split(self, innovation: int) -> int:
        """Hidden-node id created by splitting connection ``innovation``."""
        with self._lock:
            if innovation not in self._splits:
                self._splits[innovation] = self._next_node_id
                self._next_node_id += 1
            return self._splits[innovation]

    def fresh_node_id(self) -> int:
        with self._lock:
            node_id = self._next_node_id
            self._next_node_id += 1
            return node_id

    def reserve_node_ids(self, count: int) -> None:
        """Make sure ids below ``count`` are never handed out (input/output nodes)."""
        with self._lock:
            self._next_node_id = max(self._next_node_id, count)

    def new_generation(self) -> None:
        with self._lock:
            self._connections.clear()
            self._splits.clear()

    def state(self) -> dict:
        with self._lock:
            return {"next_innovation": self._next_innovation, "next_node_id": self._next_node_id}

    @classmethod
    def from_state(cls, state: dict) -> "InnovationRegistry":
        return cls(state["next_innovation"], state["next_node_id"])
