"""Parameter extraction and static nonlinearity metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .adc import AdcBank, TransferSweep, transfer_sweep
from .errors import DomainError, MissingCodeError, OrderingError, SingularFitError

THROUGH_ORIGIN = "through-origin"
AFFINE = "affine"


@dataclass(frozen=True)
class FitResult:
    j_sot_crit: float
    slope: float
    intercept: float
    r_squared: float
    r_squared_uncentered: float
    mode: str
    t_hm: float

    def to_dict(self):
        return {
            "j_sot_crit": self.j_sot_crit,
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "r_squared_uncentered": self.r_squared_uncentered,
            "mode": self.mode,
            "t_hm": self.t_hm,
        }


def fit_critical_density(widths, currents, t_hm: float, mode: str = THROUGH_ORIGIN) -> FitResult:
    """Least-squares line of critical current against heavy-metal width.

    ``r_squared`` is measured against the mean model for both modes; the
    uncentered value (against zero) is reported alongside.
    """
    w = np.asarray(widths, dtype=np.float64)
    i = np.asarray(currents, dtype=np.float64)
    if w.shape != i.shape or w.ndim != 1:
        raise DomainError("widths and currents must be 1-D and the same length")
    if len(w) < 2:
        raise DomainError("need at least two points")
    if not t_hm > 0:
        raise DomainError("t_hm must be positive")
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(i))):
        raise DomainError("fit data must be finite")
    if np.all(w == w[0]):
        raise SingularFitError("all widths are identical")

    if mode == THROUGH_ORIGIN:
        slope = float(w @ i / (w @ w))
        intercept = 0.0
    elif mode == AFFINE:
        wc = w - w.mean()
        slope = float(wc @ (i - i.mean()) / (wc @ wc))
        intercept = float(i.mean() - slope * w.mean())
    else:
        raise DomainError(f"unknown fit mode {mode!r}")

    resid = i - (slope * w + intercept)
    ss_res = float(resid @ resid)
    centered = i - i.mean()
    ss_tot = float(centered @ centered)
    ss_raw = float(i @ i)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else -math.inf)
    r2_unc = 1.0 - ss_res / ss_raw if ss_raw > 0 else 1.0
    return FitResult(slope / t_hm, slope, intercept, r2, r2_unc, mode, t_hm)


def _as_arrays(sweep):
    if isinstance(sweep, TransferSweep):
        return sweep.inputs, sweep.codes
    pairs = list(sweep)
    x = np.array([p[0] for p in pairs], dtype=np.float64)
    c = np.array([p[1] for p in pairs], dtype=np.int64)
    return x, c


def extract_transitions(sweep, n_codes: int = 7, allow_missing: bool = False) -> np.ndarray:
    """Transition level per code from a monotone input sweep.

    ``T(k)`` is the midpoint between the last sample below code ``k`` and the
    first sample at or above it. If the very first sample is already at or
    above ``k`` that sample's input is used. With ``allow_missing`` unset, a
    code that never appears in the output raises ``MissingCodeError``.
    """
    x, codes = _as_arrays(sweep)
    if len(x) == 0:
        raise DomainError("empty sweep")
    if np.any(np.diff(x) <= 0):
        raise DomainError("sweep inputs must be strictly increasing")
    first = _kernels.first_reach(x, np.ascontiguousarray(codes, dtype=np.int64), n_codes)
    for k in range(1, n_codes + 1):
        if first[k - 1] < 0:
            raise MissingCodeError(k)
    if not allow_missing:
        present = set(np.unique(codes).tolist())
        for k in range(0, n_codes + 1):
            if k not in present:
                raise MissingCodeError(k)
    out = np.empty(n_codes)
    for k in range(n_codes):
        j = int(first[k])
        out[k] = x[j] if j == 0 else 0.5 * (x[j - 1] + x[j])
    return out


@dataclass(frozen=True)
class NonlinearityReport:
    lsb: float
    transition_levels: np.ndarray
    dnl: np.ndarray
    inl: np.ndarray
    max_abs_dnl: float
    max_abs_inl: float
    method: str = "endpoint"

    @property
    def max_abs_dnl_current(self) -> float:
        """Worst DNL expressed as a current rather than in LSB."""
        return self.max_abs_dnl * self.lsb

    def to_dict(self):
        return {
            "method": self.method,
            "lsb": self.lsb,
            "transition_levels": self.transition_levels.tolist(),
            "dnl_lsb": self.dnl.tolist(),
            "inl_lsb": self.inl.tolist(),
            "max_abs_dnl_lsb": self.max_abs_dnl,
            "max_abs_inl_lsb": self.max_abs_inl,
            "max_abs_dnl_current": self.max_abs_dnl_current,
        }


def compute_dnl_inl(transitions, full_scale: float | None = None, method: str = "endpoint") -> NonlinearityReport:
    """DNL and INL in LSB from ``2**n - 1`` ascending transition levels.

    ``endpoint``: LSB spans first to last transition and the ideal line passes
    through both, so INL is zero at the ends. ``best-fit``: ideal line is the
    least-squares fit of level against code. Passing ``full_scale`` instead
    fixes LSB to ``full_scale / 2**n`` with ideal levels ``k * LSB``.
    DNL of the last code is 0 by convention.
    """
    t = np.asarray(transitions, dtype=np.float64)
    m = len(t)
    if m < 2:
        raise DomainError("need at least two transition levels")
    if np.any(np.diff(t) <= 0):
        raise OrderingError("transition levels must be strictly ascending")
    k = np.arange(1, m + 1, dtype=np.float64)

    if full_scale is not None:
        if not full_scale > 0:
            raise DomainError("full_scale must be positive")
        lsb = full_scale / (m + 1)
        ideal = k * lsb
        method = "full-scale"
    elif method == "endpoint":
        lsb = (t[-1] - t[0]) / (m - 1)
        ideal = t[0] + (k - 1) * lsb
    elif method == "best-fit":
        lsb, offset = np.polyfit(k, t, 1)
        ideal = offset + lsb * k
    else:
        raise DomainError(f"unknown nonlinearity method {method!r}")

    dnl = np.zeros(m)
    dnl[:-1] = np.diff(t) / lsb - 1.0
    inl = (t - ideal) / lsb
    return NonlinearityReport(
        lsb=float(lsb),
        transition_levels=t,
        dnl=dnl,
        inl=inl,
        max_abs_dnl=float(np.max(np.abs(dnl))),
        max_abs_inl=float(np.max(np.abs(inl))),
        method=method,
    )


def nonlinearity_of_bank(
    bank: AdcBank,
    i_start: float = 0.0,
    i_stop: float | None = None,
    steps: int | None = None,
    step: float = 1e-6,
    method: str = "endpoint",
    allow_missing: bool = False,
) -> NonlinearityReport:
    """Sweep the bank, extract transitions and compute DNL/INL.

    Defaults sweep from 0 to 110 % of the largest effective threshold in
    ``step`` increments.
    """
    if i_stop is None:
        i_stop = 1.1 * float(np.max(bank.effective_thresholds))
    if steps is None:
        steps = int(round((i_stop - i_start) / step)) + 1
    sweep = transfer_sweep(bank, i_start, i_stop, steps)
    levels = extract_transitions(sweep, 2**bank.n_bits - 1, allow_missing=allow_missing)
    return compute_dnl_inl(levels, method=method)
