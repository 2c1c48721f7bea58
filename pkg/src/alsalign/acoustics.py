"""Venue geometry and acoustic propagation delay from loudspeakers to seats.

Geometry is 2-D; the acoustic delay of a seat is the first arrival, i.e.
the propagation delay from the nearest loudspeaker.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

__all__ = [
    "SPEED_OF_SOUND_M_PER_S",
    "Position",
    "Seat",
    "Venue",
    "SeatDelay",
    "propagation_delay_ms",
    "seat_acoustic_delay_ms",
    "delay_map",
    "venue_from_dict",
    "load_venue",
]

SPEED_OF_SOUND_M_PER_S = 343.0  # dry air at 20 C


@dataclass(frozen=True)
class Position:
    x_m: float
    y_m: float

    def __post_init__(self):
        if not (math.isfinite(self.x_m) and math.isfinite(self.y_m)):
            raise ValueError(f"coordinates must be finite, got ({self.x_m}, {self.y_m})")

    def distance_to(self, other: "Position") -> float:
        return math.hypot(self.x_m - other.x_m, self.y_m - other.y_m)


@dataclass(frozen=True)
class Seat:
    id: str
    position: Position


@dataclass(frozen=True)
class Venue:
    loudspeakers: tuple[Position, ...]
    seats: tuple[Seat, ...] = ()
    speed_of_sound_m_per_s: float = SPEED_OF_SOUND_M_PER_S

    def __post_init__(self):
        object.__setattr__(self, "loudspeakers", tuple(self.loudspeakers))
        object.__setattr__(self, "seats", tuple(self.seats))
        if not self.loudspeakers:
            raise ValueError("venue needs at least one loudspeaker")
        if self.speed_of_sound_m_per_s <= 0:
            raise ValueError(f"speed of sound must be > 0, got {self.speed_of_sound_m_per_s}")
        ids = [s.id for s in self.seats]
        if len(ids) != len(set(ids)):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate seat ids: {dup}")

    def seat(self, seat_id: str) -> Seat:
        for s in self.seats:
            if s.id == seat_id:
                return s
        raise KeyError(f"no seat {seat_id!r} in venue")

    def nearest_loudspeaker_distance_m(self, position: Position) -> float:
        return min(position.distance_to(ls) for ls in self.loudspeakers)


@dataclass(frozen=True)
class SeatDelay:
    """One row of a venue delay map."""

    seat_id: str
    distance_m: float
    acoustic_delay_ms: float


def propagation_delay_ms(distance_m: float, speed_m_per_s: float = SPEED_OF_SOUND_M_PER_S) -> float:
    """Time for sound to travel distance_m, in milliseconds."""
    if distance_m < 0:
        raise ValueError(f"distance_m must be >= 0, got {distance_m}")
    if speed_m_per_s <= 0:
        raise ValueError(f"speed must be > 0, got {speed_m_per_s}")
    return 1000.0 * distance_m / speed_m_per_s


def seat_acoustic_delay_ms(venue: Venue, seat_id: str) -> float:
    """First-arrival delay: propagation delay from the nearest loudspeaker."""
    seat = venue.seat(seat_id)
    distance = venue.nearest_loudspeaker_distance_m(seat.position)
    return propagation_delay_ms(distance, venue.speed_of_sound_m_per_s)


def delay_map(venue: Venue) -> list[SeatDelay]:
    """Per-seat nearest distance and acoustic delay, sorted by seat id."""
    rows = []
    for seat in sorted(venue.seats, key=lambda s: s.id):
        distance = venue.nearest_loudspeaker_distance_m(seat.position)
        delay = propagation_delay_ms(distance, venue.speed_of_sound_m_per_s)
        rows.append(SeatDelay(seat.id, distance, delay))
    return rows


def _require_keys(entry: dict, allowed: set[str], required: set[str], what: str) -> None:
    for key in entry:
        if key not in allowed:
            raise ValueError(f"unknown key {key!r} in {what}")
    for key in required:
        if key not in entry:
            raise ValueError(f"missing key {key!r} in {what}")


def venue_from_dict(data: dict) -> Venue:
    """Build a Venue from the JSON config schema; unknown keys are rejected."""
    if not isinstance(data, dict):
        raise ValueError("venue config must be a JSON object")
    _require_keys(
        data,
        {"speed_of_sound_m_per_s", "loudspeakers", "seats"},
        {"loudspeakers"},
        "venue config",
    )
    loudspeakers = []
    for i, entry in enumerate(data["loudspeakers"]):
        _require_keys(entry, {"x_m", "y_m"}, {"x_m", "y_m"}, f"loudspeakers[{i}]")
        loudspeakers.append(Position(float(entry["x_m"]), float(entry["y_m"])))
    seats = []
    for i, entry in enumerate(data.get("seats", [])):
        _require_keys(entry, {"id", "x_m", "y_m"}, {"id", "x_m", "y_m"}, f"seats[{i}]")
        seats.append(Seat(str(entry["id"]), Position(float(entry["x_m"]), float(entry["y_m"]))))
    speed = float(data.get("speed_of_sound_m_per_s", SPEED_OF_SOUND_M_PER_S))
    return Venue(tuple(loudspeakers), tuple(seats), speed)


def load_venue(path) -> Venue:
    with open(path, encoding="utf-8") as f:
        return venue_from_dict(json.load(f))
