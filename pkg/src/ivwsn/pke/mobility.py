"""
Scripted key mobility and user actions.
"""
import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np

from ..errors import ConfigurationError
from ..phy.channel import friis_path_loss_db
from ..sim.engine import US_PER_S


class UserAction(Enum):
    PULL = "pull"
    RELEASE = "release"


@dataclass
class MobilityTrace:
    """
    Distance of one key to the vehicle over time, plus the user's actions.

    Distance is linearly interpolated between waypoints and held constant
    before the first and after the last one.
    """

    key_id: str
    waypoints: List[Tuple[int, float]]
    actions: List[Tuple[int, UserAction]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.waypoints:
            raise ConfigurationError(f"trace of {self.key_id} has no waypoints")
        times = [t for t, _ in self.waypoints]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigurationError(f"trace of {self.key_id}: waypoint times must be strictly increasing")
        if any(d < 0 for _, d in self.waypoints):
            raise ConfigurationError(f"trace of {self.key_id}: distances must be >= 0")
        self.actions = sorted(self.actions, key=lambda a: a[0])
        self._times = np.array(times, dtype=float)
        self._distances = np.array([d for _, d in self.waypoints], dtype=float)

    def distance_at(self, t: int) -> float:
        return float(np.interp(t, self._times, self._distances))

    def loss_db(self, t: int, excess_loss_db: float = 0.0) -> float:
        return friis_path_loss_db(self.distance_at(t)) + excess_loss_db

    def loss_function(self, excess_loss_db: float) -> Callable[[int], float]:
        return lambda t: self.loss_db(t, excess_loss_db)

    @classmethod
    def from_seconds(
        cls,
        key_id: str,
        waypoints: Sequence[Sequence[float]],
        actions: Sequence[Tuple[float, str]] = (),
    ) -> "MobilityTrace":
        try:
            points = [(int(round(float(t) * US_PER_S)), float(d)) for t, d in waypoints]
            acts = [(int(round(float(t) * US_PER_S)), UserAction(str(a))) for t, a in actions]
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"trace of {key_id}: {e}") from None
        return cls(key_id, points, acts)

    @classmethod
    def from_csv(cls, key_id: str, path: Union[str, Path]) -> "MobilityTrace":
        """Read ``time_s,distance_m,action`` rows; action may be empty."""
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"trace file not found: {path}")
        waypoints: List[Tuple[float, float]] = []
        actions: List[Tuple[float, str]] = []
        with path.open(newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            for row in reader:
                try:
                    if row.get("distance_m"):
                        waypoints.append((float(row["time_s"]), float(row["distance_m"])))
                    if row.get("action"):
                        actions.append((float(row["time_s"]), row["action"].strip()))
                except (KeyError, TypeError, ValueError) as e:
                    raise ConfigurationError(f"{path}:{reader.line_num}: trace of {key_id}: {e}") from None
        return cls.from_seconds(key_id, waypoints, actions)
