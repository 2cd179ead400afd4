"""Monte-Carlo threshold variation and effective-resolution analysis.

Every random draw is a pure function of ``(seed, trial, device, variable,
redraw)``: the Philox key carries ``(seed, device, variable)`` and the counter
carries ``(trial, redraw)``. Results therefore do not depend on how trials are
split across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .adc import AdcBank
from .device import MtjDevice, ideal_devices
from .errors import DomainError

_THRESHOLD = 1
_GAIN = 2
_U53 = 2.0**-53
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class VariationSpec:
    """Gaussian threshold and mirror-gain variation for one bank.

    ``means`` and ``sigmas`` are in amperes, one per device (device ``k`` is
    position ``k - 1``). Sampled thresholds at or below ``threshold_floor`` are
    redrawn (``negative_policy="redraw"``, at most ``max_redraws`` times) or
    clamped to the floor (``"clamp"``).
    """

    means: tuple[float, ...]
    sigmas: tuple[float, ...]
    mirror_gain_sigma: float = 0.01
    trials: int = 300
    seed: int = 0
    k_sigma: float = 2.0
    overlap: str = "all"
    negative_policy: str = "redraw"
    threshold_floor: float = 0.0
    max_redraws: int = 100
    bin_width: float | None = None
    devices: tuple[MtjDevice, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        object.__setattr__(self, "sigmas", tuple(float(s) for s in self.sigmas))
        if len(self.means) != len(self.sigmas) or not self.means:
            raise DomainError("means and sigmas must be non-empty and the same length")
        if not all(math.isfinite(m) and m > 0 for m in self.means):
            raise DomainError("threshold means must be positive and finite")
        if not all(math.isfinite(s) and s >= 0 for s in self.sigmas):
            raise DomainError("sigmas must be finite and >= 0")
        if not (math.isfinite(self.mirror_gain_sigma) and self.mirror_gain_sigma >= 0):
            raise DomainError("mirror_gain_sigma must be >= 0")
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError("trials must be a positive integer")
        if not 0 <= int(self.seed) <= _MASK64:
            raise DomainError("seed must fit in an unsigned 64-bit integer")
        if not self.k_sigma > 0:
            raise DomainError("k_sigma must be positive")
        if self.overlap not in ("all", "adjacent"):
            raise DomainError("overlap must be 'all' or 'adjacent'")
        if self.negative_policy not in ("redraw", "clamp"):
            raise DomainError("negative_policy must be 'redraw' or 'clamp'")
        if self.bin_width is not None and not self.bin_width > 0:
            raise DomainError("bin_width must be positive")
        if self.devices is not None:
            object.__setattr__(self, "devices", tuple(self.devices))
            if len(self.devices) != len(self.means):
                raise DomainError("one template device per mean required")

    @property
    def n_devices(self) -> int:
        return len(self.means)

    @property
    def is_ascending(self) -> bool:
        return all(b > a for a, b in zip(self.means, self.means[1:]))

    def template(self) -> tuple[MtjDevice, ...]:
        if self.devices is not None:
            return self.devices
        return tuple(ideal_devices(self.n_devices))


def _standard_normals(seed, device, tag, trials, redraw=0):
    """One N(0, 1) value per trial index in ``trials`` (a contiguous range)."""
    start, stop = trials.start, trials.stop
    bitgen = np.random.Philox(key=[seed, (device << 8) | tag], counter=[start, redraw, 0, 0])
    raw = bitgen.random_raw(4 * (stop - start)).reshape(-1, 4)
    u1 = ((raw[:, 0] >> np.uint64(11)).astype(np.float64) + 1.0) * _U53
    u2 = (raw[:, 1] >> np.uint64(11)).astype(np.float64) * _U53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def _draw(seed, device, tag, trials, mean, sigma, floor, policy, max_redraws):
    values = mean + sigma * _standard_normals(seed, device, tag, trials)
    bad = values <= floor
    if not bad.any():
        return values
    if policy == "clamp":
        values[bad] = floor
        return values
    for redraw in range(1, max_redraws + 1):
        for i in np.flatnonzero(bad):
            t = trials.start + int(i)
            values[i] = mean + sigma * _standard_normals(seed, device, tag, range(t, t + 1), redraw)[0]
        bad = values <= floor
        if not bad.any():
            return values
    raise DomainError(
        f"device {device}: sample still <= {floor} after {max_redraws} redraws; sigma too large for mean"
    )


def sample_trials(spec: VariationSpec, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
    """Raw thresholds and mirror gains for trials ``start..stop-1``, shape ``(trials, devices)``."""
    trials = range(start, stop)
    seed = int(spec.seed)
    thresholds = np.empty((stop - start, spec.n_devices))
    gains = np.empty_like(thresholds)
    for k in range(spec.n_devices):
        thresholds[:, k] = _draw(
            seed, k + 1, _THRESHOLD, trials, spec.means[k], spec.sigmas[k],
            spec.threshold_floor, spec.negative_policy, spec.max_redraws,
        )
        gains[:, k] = _draw(seed, k + 1, _GAIN, trials, 1.0, spec.mirror_gain_sigma, 0.0, "redraw", spec.max_redraws)
    return thresholds, gains


def sample_bank(spec: VariationSpec, trial: int) -> AdcBank:
    if not 0 <= trial < spec.trials:
        raise DomainError(f"trial {trial} outside 0..{spec.trials - 1}")
    thresholds, gains = sample_trials(spec, trial, trial + 1)
    devices = [d.with_threshold(float(t)) for d, t in zip(spec.template(), thresholds[0])]
    return AdcBank(devices, mirror_gains=gains[0].tolist(), check_order=False)


def interval_overlaps(means, sigmas, k: float) -> np.ndarray:
    """Boolean matrix: ``[i, j]`` true when the closed ``mean +- k*sigma`` intervals intersect."""
    m = np.asarray(means, dtype=np.float64)
    s = np.asarray(sigmas, dtype=np.float64)
    lo, hi = m - k * s, m + k * s
    ov = (lo[:, None] <= hi[None, :]) & (lo[None, :] <= hi[:, None])
    np.fill_diagonal(ov, False)
    return ov


def effective_resolution(means, sigmas, k: float = 2.0, overlap: str = "all", n_bits: int | None = None):
    """Bits supportable when only non-overlapping thresholds are used.

    A device is clean when its ``+-k*sigma`` interval touches no other
    device's interval (``overlap="all"``) or neither neighbour on the
    threshold ladder (``"adjacent"``). ``m`` bits need ``2**m - 1`` clean
    thresholds. Returns ``(bits, clean_ids)`` with 1-based ids.
    """
    if not k > 0:
        raise DomainError("k must be positive")
    means = np.asarray(means, dtype=np.float64)
    n = len(means)
    ov = interval_overlaps(means, sigmas, k)
    if overlap == "adjacent":
        order = np.argsort(means, kind="stable")
        mask = np.zeros_like(ov)
        for a, b in zip(order[:-1], order[1:]):
            mask[a, b] = mask[b, a] = True
        ov = ov & mask
    elif overlap != "all":
        raise DomainError("overlap must be 'all' or 'adjacent'")
    clean = [i + 1 for i in range(n) if not ov[i].any()]
    if n_bits is None:
        n_bits = int(math.floor(math.log2(n + 1)))
    bits = 0
    while bits < n_bits and 2 ** (bits + 1) - 1 <= len(clean):
        bits += 1
    return bits, clean


@dataclass(frozen=True)
class DeviceHistogram:
    counts: np.ndarray
    edges: np.ndarray


@dataclass(frozen=True)
class McReport:
    spec: VariationSpec
    samples: np.ndarray = field(repr=False)  # effective thresholds, (trials, devices)
    means: np.ndarray
    sigmas: np.ndarray
    histograms: tuple[DeviceHistogram, ...] = field(repr=False)
    overlap: np.ndarray
    clean_devices: tuple[int, ...]
    effective_bits: int
    trials_run: int

    def to_dict(self):
        s = self.spec
        return {
            "trials_run": self.trials_run,
            "seed": int(s.seed),
            "k_sigma": s.k_sigma,
            "overlap_rule": s.overlap,
            "mirror_gain_sigma": s.mirror_gain_sigma,
            "devices": [
                {
                    "device_id": k + 1,
                    "spec_mean": s.means[k],
                    "spec_sigma": s.sigmas[k],
                    "sample_mean": float(self.means[k]),
                    "sample_sigma": float(self.sigmas[k]),
                }
                for k in range(s.n_devices)
            ],
            "overlap_matrix": self.overlap.astype(int).tolist(),
            "clean_devices": list(self.clean_devices),
            "effective_bits": self.effective_bits,
        }


def _histogram(values, bin_width):
    if bin_width is None:
        edges = np.histogram_bin_edges(values, bins="fd")
    else:
        lo = math.floor(values.min() / bin_width) * bin_width
        n = max(1, int(math.ceil((values.max() - lo) / bin_width)))
        if lo + n * bin_width <= values.max():
            n += 1
        edges = lo + bin_width * np.arange(n + 1)
    counts, edges = np.histogram(values, bins=edges)
    return DeviceHistogram(counts, edges)


def run_mc(spec: VariationSpec, workers: int = 1, chunk: int = 1024) -> McReport:
    """Sample ``spec.trials`` banks and summarize effective thresholds.

    Effective threshold is ``threshold / gain``: the input current at which
    the device switches. Trials are split into chunks that may run on
    ``workers`` threads; chunks are reassembled in trial order.
    """
    bounds = [(a, min(a + chunk, spec.trials)) for a in range(0, spec.trials, chunk)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: sample_trials(spec, *b), bounds))
    else:
        parts = [sample_trials(spec, *b) for b in bounds]
    thresholds = np.concatenate([p[0] for p in parts])
    gains = np.concatenate([p[1] for p in parts])
    samples = thresholds / gains

    means = samples.mean(axis=0)
    sigmas = samples.std(axis=0, ddof=1) if spec.trials > 1 else np.zeros(spec.n_devices)
    histograms = tuple(_histogram(samples[:, k], spec.bin_width) for k in range(spec.n_devices))
    overlap = interval_overlaps(means, sigmas, spec.k_sigma)
    bits, clean = effective_resolution(means, sigmas, spec.k_sigma, spec.overlap)
    return McReport(
        spec=spec,
        samples=samples,
        means=means,
        sigmas=sigmas,
        histograms=histograms,
        overlap=overlap,
        clean_devices=tuple(clean),
        effective_bits=bits,
        trials_run=len(samples),
    )
