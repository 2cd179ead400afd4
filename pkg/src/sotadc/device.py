"""Behavioral model of a three-terminal SOT magnetic tunnel junction.

The device is treated as a quasi-static threshold automaton: a heavy-metal
current above the P->AP critical current sets the free layer antiparallel, a
current below the (negative) AP->P critical current sets it back to parallel.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DomainError, SingularityError

REL_TOL = 1e-6


@dataclass(frozen=True)
class PhysicalConstants:
    electron_charge: float = 1.602176634e-19  # C
    reduced_planck: float = 1.054571817e-34  # J s


CONSTANTS = PhysicalConstants()


class DeviceState(enum.IntEnum):
    """Free-layer alignment; the integer value is the stored logic bit."""

    P = 0
    AP = 1


def _check_nonnegative(name, value):
    if not math.isfinite(value) or value < 0:
        raise DomainError(f"{name} must be finite and >= 0, got {value!r}")


def critical_current(j_sot_crit: float, t_hm: float, w_hm: float) -> float:
    """Switching current ``J * t * w`` in amperes (all SI)."""
    _check_nonnegative("j_sot_crit", j_sot_crit)
    _check_nonnegative("t_hm", t_hm)
    _check_nonnegative("w_hm", w_hm)
    return j_sot_crit * t_hm * w_hm


def j_from_spin_params(theta: float, j_s_crit: float, constants: PhysicalConstants = CONSTANTS) -> float:
    """Charge current density needed for a critical spin current density.

    ``2 e j_s / (hbar theta)``; ``theta`` is the spin Hall angle.
    """
    if not (math.isfinite(theta) and math.isfinite(j_s_crit)):
        raise DomainError("theta and j_s_crit must be finite")
    if theta == 0:
        raise SingularityError("spin Hall angle of zero gives an infinite critical density")
    return 2.0 * constants.electron_charge * j_s_crit / (constants.reduced_planck * theta)


@dataclass(frozen=True)
class MtjDevice:
    """One SOT-MTJ comparator. SI units throughout.

    ``r_hm`` is the full heavy-metal line resistance between T2 and T3.
    ``i_crit_ap`` defaults to ``-i_crit_p`` (symmetric loop).
    """

    id: int
    w_hm: float
    t_hm: float
    r_hm: float
    r_p: float
    r_ap: float
    i_crit_p: float
    i_crit_ap: float | None = None
    j_sot_crit: float | None = None
    theta: float | None = None
    j_s_crit: float | None = None

    def __post_init__(self):
        if self.i_crit_ap is None:
            object.__setattr__(self, "i_crit_ap", -self.i_crit_p)
        for name in ("w_hm", "t_hm", "r_hm", "r_p", "r_ap", "i_crit_p", "i_crit_ap"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"device {self.id}: {name} is not finite")
        if not (self.w_hm > 0 and self.t_hm > 0):
            raise DomainError(f"device {self.id}: heavy-metal width and thickness must be positive")
        if not self.r_hm > 0:
            raise DomainError(f"device {self.id}: r_hm must be positive")
        if not (self.r_ap > self.r_p > 0):
            raise DomainError(f"device {self.id}: need r_ap > r_p > 0 (got r_p={self.r_p}, r_ap={self.r_ap})")
        if not self.i_crit_p > 0:
            raise DomainError(f"device {self.id}: i_crit_p must be positive")
        if not self.i_crit_ap < 0:
            raise DomainError(f"device {self.id}: i_crit_ap must be negative")
        if (self.theta is None) != (self.j_s_crit is None):
            raise DomainError(f"device {self.id}: theta and j_s_crit must be given together")
        if self.theta is not None:
            j = j_from_spin_params(self.theta, self.j_s_crit)
            if self.j_sot_crit is None:
                object.__setattr__(self, "j_sot_crit", j)
            elif not math.isclose(self.j_sot_crit, j, rel_tol=REL_TOL):
                raise DomainError(f"device {self.id}: j_sot_crit inconsistent with theta and j_s_crit")
        if self.j_sot_crit is not None:
            expected = critical_current(self.j_sot_crit, self.t_hm, self.w_hm)
            if not math.isclose(self.i_crit_p, expected, rel_tol=REL_TOL):
                raise DomainError(
                    f"device {self.id}: i_crit_p={self.i_crit_p} differs from J*t*w={expected}"
                )

    @property
    def delta_r(self) -> float:
        return self.r_ap - self.r_p

    @property
    def tmr(self) -> float:
        return (self.r_ap - self.r_p) / self.r_p

    @property
    def loop_width(self) -> float:
        return self.i_crit_p - self.i_crit_ap

    def with_threshold(self, i_crit_p: float) -> "MtjDevice":
        """Copy with a new P->AP threshold; a symmetric AP->P threshold follows it."""
        ap = -i_crit_p if self.i_crit_ap == -self.i_crit_p else self.i_crit_ap
        return replace(self, i_crit_p=i_crit_p, i_crit_ap=ap, j_sot_crit=None, theta=None, j_s_crit=None)

    @classmethod
    def from_law(cls, id, j_sot_crit, t_hm, w_hm, r_hm, r_p, r_ap, i_crit_ap=None):
        """Build a device whose P->AP threshold follows the critical-current law."""
        return cls(
            id=id,
            w_hm=w_hm,
            t_hm=t_hm,
            r_hm=r_hm,
            r_p=r_p,
            r_ap=r_ap,
            i_crit_p=critical_current(j_sot_crit, t_hm, w_hm),
            i_crit_ap=i_crit_ap,
            j_sot_crit=j_sot_crit,
        )


def apply_current(device: MtjDevice, state: DeviceState, i_sot: float) -> DeviceState:
    # strict comparisons: a current exactly at threshold does not switch
    if state == DeviceState.P and i_sot > device.i_crit_p:
        return DeviceState.AP
    if state == DeviceState.AP and i_sot < device.i_crit_ap:
        return DeviceState.P
    return DeviceState(state)


def junction_resistance(device: MtjDevice, state: DeviceState) -> float:
    return device.r_ap if state == DeviceState.AP else device.r_p


def sweep_ri_loop(
    device: MtjDevice,
    currents: Sequence[float],
    initial: DeviceState = DeviceState.AP,
) -> list[tuple[float, float]]:
    """Resistance seen from T1 (``r_mtj + r_hm/2``) along a current sweep.

    The default initial state is AP, as after field initialization.
    """
    currents = np.asarray(currents, dtype=np.float64)
    if currents.size == 0:
        return []
    if not np.all(np.isfinite(currents)):
        raise DomainError("sweep currents must be finite")
    half = device.r_hm / 2.0
    trace = _kernels.hysteresis_trace(
        currents,
        device.i_crit_p,
        device.i_crit_ap,
        device.r_p + half,
        device.r_ap + half,
        initial == DeviceState.AP,
    )
    return list(zip(currents.tolist(), trace.tolist()))


def triangle_currents(i_max: float, points_per_leg: int = 50, cycles: int = 1) -> np.ndarray:
    """0 -> +i_max -> -i_max -> 0, repeated ``cycles`` times."""
    up = np.linspace(0.0, i_max, points_per_leg, endpoint=False)
    down = np.linspace(i_max, -i_max, 2 * points_per_leg, endpoint=False)
    back = np.linspace(-i_max, 0.0, points_per_leg, endpoint=False)
    one = np.concatenate([up, down, back])
    return np.concatenate([np.tile(one, cycles), [0.0]])


# Reference geometry of the fabricated bank: 15 nm W line, 0.6 um width steps.
REF_J_SOT_CRIT = 0.6e12
REF_T_HM = 15e-9
REF_WIDTHS = tuple(0.6e-6 * k for k in range(1, 8))


def ideal_devices(
    n: int = 7,
    j_sot_crit: float = REF_J_SOT_CRIT,
    t_hm: float = REF_T_HM,
    w_step: float = 0.6e-6,
    r_p: float = 455.0,
    r_ap: float = 620.0,
    hm_sheet: float = 256.0 * 0.6e-6,
) -> list[MtjDevice]:
    """Devices with widths ``k * w_step`` and thresholds exactly on the critical-current law.

    ``hm_sheet`` is ``R_hm * w`` (ohm metre), so line resistance scales as ``1/w``.
    """
    devices = []
    for k in range(1, n + 1):
        w = w_step * k
        devices.append(MtjDevice.from_law(k, j_sot_crit, t_hm, w, hm_sheet / w, r_p, r_ap))
    return devices
