"""Sense-path resistance and readout magnetoresistance for the two bank layouts.

Serial: the heavy-metal lines are chained and one end (T2 or T3) is grounded;
the sense current of device ``i`` crosses its own line from mid-point plus
every full segment between it and ground. Parallel: each device has its own
line and sees only half of it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .device import DeviceState, MtjDevice, junction_resistance
from .errors import DomainError, RangeError


class Layout(enum.Enum):
    SERIAL = "serial"
    PARALLEL = "parallel"


class Terminal(enum.Enum):
    T2 = "T2"
    T3 = "T3"


@dataclass(frozen=True)
class Topology:
    layout: Layout
    devices: tuple[MtjDevice, ...]
    ground_terminal: Terminal = Terminal.T2

    def __post_init__(self):
        object.__setattr__(self, "devices", tuple(self.devices))
        if not self.devices:
            raise DomainError("topology needs at least one device")
        ids = [d.id for d in self.devices]
        if ids != list(range(ids[0], ids[0] + len(ids))):
            raise DomainError(f"device ids must be unique and consecutive, got {ids}")

    @classmethod
    def serial(cls, devices, ground_terminal=Terminal.T2):
        return cls(Layout.SERIAL, tuple(devices), ground_terminal)

    @classmethod
    def parallel(cls, devices):
        return cls(Layout.PARALLEL, tuple(devices))

    def position(self, index: int) -> int:
        """Zero-based list position for a device id."""
        pos = index - self.devices[0].id
        if not 0 <= pos < len(self.devices):
            raise RangeError(f"no device with id {index}")
        return pos

    def path_resistance(self, index: int) -> float:
        """Heavy-metal resistance in series with junction ``index``."""
        pos = self.position(index)
        r_hm = [d.r_hm for d in self.devices]
        own = r_hm[pos] / 2.0
        if self.layout is Layout.PARALLEL:
            return own
        if self.ground_terminal is Terminal.T2:
            return own + sum(r_hm[:pos])
        return own + sum(r_hm[pos + 1:])


@dataclass(frozen=True)
class SenseSpec:
    i_sens: float = 100e-6

    def __post_init__(self):
        if not self.i_sens > 0:
            raise DomainError("sense current must be positive")

    def check(self, devices: Sequence[MtjDevice]) -> None:
        """Raise if the sense current would switch any device."""
        limit = min(d.i_crit_p for d in devices)
        if not self.i_sens < limit:
            raise DomainError(f"sense current {self.i_sens} A would switch a device (min threshold {limit} A)")


def sensed_resistance(topology: Topology, index: int, states: Sequence[DeviceState]) -> float:
    if len(states) != len(topology.devices):
        raise DomainError(f"expected {len(topology.devices)} states, got {len(states)}")
    pos = topology.position(index)
    # junctions of other devices are not on the T1 -> ground path
    return junction_resistance(topology.devices[pos], states[pos]) + topology.path_resistance(index)


def readout_mr(topology: Topology, index: int) -> float:
    """Resistance change over the all-P sensed resistance."""
    device = topology.devices[topology.position(index)]
    r_min = sensed_resistance(topology, index, [DeviceState.P] * len(topology.devices))
    return device.delta_r / r_min


@dataclass(frozen=True)
class ComparisonRow:
    index: int
    mr_serial: float
    mr_parallel: float
    min_resistance_serial: float
    min_resistance_parallel: float


@dataclass(frozen=True)
class TopologyComparison:
    rows: tuple[ComparisonRow, ...]
    serial_spread: float
    parallel_spread: float


def _spread(values):
    hi = max(values)
    return (hi - min(values)) / hi


def compare_topologies(devices: Sequence[MtjDevice], ground_terminal=Terminal.T2) -> TopologyComparison:
    """Per-index MR and minimum sensed resistance for both layouts.

    Spreads are ``(max - min) / max`` over the MR column.
    """
    serial = Topology.serial(devices, ground_terminal)
    parallel = Topology.parallel(devices)
    all_p = [DeviceState.P] * len(serial.devices)
    rows = []
    for d in serial.devices:
        rows.append(
            ComparisonRow(
                index=d.id,
                mr_serial=readout_mr(serial, d.id),
                mr_parallel=readout_mr(parallel, d.id),
                min_resistance_serial=sensed_resistance(serial, d.id, all_p),
                min_resistance_parallel=sensed_resistance(parallel, d.id, all_p),
            )
        )
    return TopologyComparison(
        rows=tuple(rows),
        serial_spread=_spread([r.mr_serial for r in rows]),
        parallel_spread=_spread([r.mr_parallel for r in rows]),
    )
