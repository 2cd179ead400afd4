"""Flash converter built from a bank of ``2**n - 1`` threshold devices.

Each device receives a mirrored copy of the input current on its heavy-metal
line and switches P -> AP when that copy exceeds its critical current. The
resulting thermometer pattern is encoded by counting ones, which tolerates
bubbles from threshold disorder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import _kernels
from .device import DeviceState, MtjDevice, apply_current, ideal_devices
from .errors import DomainError, StateError
from .readout import Topology


@dataclass(frozen=True)
class ThermometerCode:
    bits: tuple[bool, ...]

    @classmethod
    def from_string(cls, text: str) -> "ThermometerCode":
        return cls(tuple(ch == "1" for ch in text))

    def __str__(self):
        return "".join("1" if b else "0" for b in self.bits)

    @property
    def is_proper(self) -> bool:
        ones = sum(self.bits)
        return all(self.bits[:ones]) and not any(self.bits[ones:])


def encode_t2b(code: ThermometerCode) -> tuple[int, bool]:
    """Ones-count encoding. Returns ``(value, bubble_flag)``."""
    return sum(code.bits), not code.is_proper


@dataclass(frozen=True)
class ConversionResult:
    input: float
    thermometer: ThermometerCode
    binary: int
    bubble_flag: bool


class AdcBank:
    """Devices, readout wiring and per-branch mirror gains of one converter.

    The bank carries the magnetic state of every device; ``convert`` is
    destructive and must be preceded by ``reset``.
    """

    def __init__(
        self,
        devices: Sequence[MtjDevice],
        topology: Topology | None = None,
        mirror_gains: Sequence[float] | None = None,
        check_order: bool = True,
    ):
        self.devices = tuple(devices)
        count = len(self.devices)
        n_bits = round(math.log2(count + 1)) if count else 0
        if count == 0 or 2**n_bits - 1 != count:
            raise DomainError(f"a bank needs 2**n - 1 devices, got {count}")
        self.n_bits = n_bits
        self.topology = topology if topology is not None else Topology.parallel(self.devices)
        if mirror_gains is None:
            mirror_gains = [1.0] * count
        self.mirror_gains = tuple(float(g) for g in mirror_gains)
        if len(self.mirror_gains) != count:
            raise DomainError("one mirror gain per device required")
        if not all(g > 0 and math.isfinite(g) for g in self.mirror_gains):
            raise DomainError("mirror gains must be positive and finite")
        if check_order:
            thresholds = self.thresholds
            if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
                raise DomainError("nominal thresholds must be strictly ascending")
        self.states = [DeviceState.AP] * count
        self._armed = False

    @classmethod
    def ideal(cls, n_bits: int = 3, **kwargs) -> "AdcBank":
        return cls(ideal_devices(2**n_bits - 1, **kwargs))

    @property
    def thresholds(self) -> np.ndarray:
        return np.array([d.i_crit_p for d in self.devices])

    @property
    def gains(self) -> np.ndarray:
        return np.array(self.mirror_gains)

    @property
    def effective_thresholds(self) -> np.ndarray:
        """Input current at which each device switches (threshold / gain)."""
        return self.thresholds / self.gains

    @property
    def is_reset(self) -> bool:
        return self._armed

    def reset(self) -> "AdcBank":
        # drive each line below its AP->P threshold; equivalent to field init
        self.states = [
            apply_current(d, s, d.i_crit_ap * 1.5) for d, s in zip(self.devices, self.states)
        ]
        self._armed = True
        return self

    def convert(self, i_in: float) -> ConversionResult:
        if not math.isfinite(i_in) or i_in < 0:
            raise DomainError(f"conversion input must be finite and >= 0, got {i_in!r}")
        if not self._armed:
            raise StateError("bank must be reset before each conversion")
        self._armed = False
        self.states = [
            apply_current(d, s, i_in * g) for d, s, g in zip(self.devices, self.states, self.mirror_gains)
        ]
        code = ThermometerCode(tuple(s == DeviceState.AP for s in self.states))
        binary, bubble = encode_t2b(code)
        return ConversionResult(float(i_in), code, binary, bubble)

    def __repr__(self):
        return f"AdcBank(n_bits={self.n_bits}, thresholds={self.thresholds.tolist()})"


def reset(bank: AdcBank) -> AdcBank:
    return bank.reset()


def convert(bank: AdcBank, i_in: float) -> ConversionResult:
    return bank.convert(i_in)


@dataclass(frozen=True)
class TransferSweep:
    inputs: np.ndarray
    codes: np.ndarray
    bubbles: np.ndarray
    n_bits: int = 3

    def __len__(self):
        return len(self.inputs)

    def __iter__(self) -> Iterator[tuple[float, int]]:
        return iter(zip(self.inputs.tolist(), self.codes.tolist()))


def transfer_sweep(bank: AdcBank, i_start: float, i_stop: float, steps: int) -> TransferSweep:
    """Reset and convert at each of ``steps`` evenly spaced inputs.

    Equivalent to calling ``reset``/``convert`` per point; the loop runs in the
    kernel since nothing carries over between samples.
    """
    if not i_start < i_stop:
        raise DomainError("sweep needs i_start < i_stop")
    if steps < 2:
        raise DomainError("sweep needs at least two steps")
    if i_start < 0:
        raise DomainError("conversion inputs are non-negative")
    inputs = np.linspace(i_start, i_stop, int(steps))
    codes, bubbles = _kernels.sweep_codes(inputs, bank.thresholds, bank.gains)
    bank.states = [DeviceState.AP if inputs[-1] * g > t else DeviceState.P
                   for t, g in zip(bank.thresholds, bank.mirror_gains)]
    bank._armed = False
    return TransferSweep(inputs, np.asarray(codes), np.asarray(bubbles, dtype=bool), bank.n_bits)
