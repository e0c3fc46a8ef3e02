"""Pulse-program intermediate representation.

A program is a tuple of elements. :class:`Block` nodes carry a repetition
count and, for the named sequences (XY16-N, PolY, PolX), the macro text that
the formatter writes back out. Microwave pulses and laser operations have
zero duration; only delays and rf pulses take time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

AXES = ("X", "Y", "-X", "-Y")
PI = math.pi
HALF_PI = math.pi / 2


class ParameterError(ValueError):
    """Invalid builder or element parameter."""


class TimingError(ParameterError):
    """Sequence timing constraint violated."""


@dataclass(frozen=True)
class MwPulse:
    axis: str
    angle: float = PI

    def __post_init__(self):
        if self.axis not in AXES:
            raise ParameterError(f"unknown pulse axis {self.axis!r}")
        if self.angle not in (PI, HALF_PI):
            raise ParameterError(f"pulse angle must be pi or pi/2, got {self.angle!r}")

    @property
    def duration(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Delay:
    duration: float
    dephase: bool = False
    """If set, sensor coherence is lost during the delay (storage interval)."""

    def __post_init__(self):
        if not self.duration >= 0:
            raise ParameterError(f"delay must be non-negative, got {self.duration!r}")


@dataclass(frozen=True)
class RfPulse:
    frequency: float  # MHz
    phase: float      # rad
    duration: float   # us
    rabi: float       # kHz

    def __post_init__(self):
        if not self.duration >= 0:
            raise ParameterError(f"rf duration must be non-negative, got {self.duration!r}")
        if not self.rabi > 0:
            raise ParameterError(f"rf Rabi frequency must be positive, got {self.rabi!r}")


@dataclass(frozen=True)
class LaserInit:
    @property
    def duration(self) -> float:
        return 0.0


@dataclass(frozen=True)
class LaserRead:
    """Photon counting; reports P0 and re-initialises the sensor."""

    @property
    def duration(self) -> float:
        return 0.0


Element = Union[MwPulse, Delay, RfPulse, LaserInit, LaserRead, "Block"]


@dataclass(frozen=True)
class Block:
    body: tuple
    count: int = 1
    macro: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        if not isinstance(self.count, int) or self.count < 1:
            raise ParameterError(f"repetition count must be a positive integer, got {self.count!r}")

    @property
    def duration(self) -> float:
        return self.count * sum(e.duration for e in self.body)


def flatten(elements) -> Iterator:
    """Yield primitive elements with all repetition blocks expanded."""
    for e in elements:
        if isinstance(e, Block):
            for _ in range(e.count):
                yield from flatten(e.body)
        else:
            yield e


@dataclass(frozen=True)
class PulseProgram:
    """Ordered, possibly nested, list of control elements.

    ``name``, ``params`` and ``readout_axis`` are descriptive metadata and are
    excluded from equality, so a program compares equal to its parsed
    canonical text.
    """

    elements: tuple
    name: str = field(default="", compare=False)
    params: tuple = field(default=(), compare=False)
    readout_axis: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        seen_init = False
        for e in self.flat():
            if isinstance(e, LaserInit):
                seen_init = True
            elif isinstance(e, LaserRead):
                if not seen_init:
                    raise ParameterError("LaserRead before any LaserInit")
                seen_init = True

    def flat(self) -> Iterator:
        return flatten(self.elements)

    @property
    def duration(self) -> float:
        return sum(e.duration for e in self.elements)

    def count(self, kind, angle: Optional[float] = None) -> int:
        n = 0
        for e in self.flat():
            if isinstance(e, kind) and (angle is None or getattr(e, "angle", None) == angle):
                n += 1
        return n

    @property
    def n_pi(self) -> int:
        return self.count(MwPulse, PI)

    @property
    def n_half_pi(self) -> int:
        return self.count(MwPulse, HALF_PI)

    @property
    def n_readouts(self) -> int:
        return self.count(LaserRead)

    def param(self, key, default=None):
        return dict(self.params).get(key, default)

    def pulse_times(self, kind=MwPulse, angle: Optional[float] = None) -> list:
        """Start times (us) of matching pulses in the flattened program."""
        t, out = 0.0, []
        for e in self.flat():
            if isinstance(e, kind) and (angle is None or getattr(e, "angle", None) == angle):
                out.append(t)
            t += e.duration
        return out
