"""One pass/fail line per acceptance criterion.

Each test records its outcome through ``record_acceptance`` (printed in the
terminal summary) and then asserts it, so a failing criterion is visible both
in the summary and as a failed test.
"""

import json
import time

import numpy as np
import pytest

from oracles import nodal_resistance, parallel_edges, serial_chain_edges
from sotadc.adc import AdcBank, transfer_sweep
from sotadc.analysis import compute_dnl_inl, fit_critical_density, nonlinearity_of_bank
from sotadc.device import (
    REF_J_SOT_CRIT, REF_T_HM, REF_WIDTHS, DeviceState, MtjDevice, critical_current, ideal_devices,
    sweep_ri_loop, triangle_currents,
)
from sotadc.io import data_path, read_devices, read_fit_points, read_variation
from sotadc.readout import Terminal, Topology, compare_topologies, readout_mr, sensed_resistance
from sotadc.variation import VariationSpec, effective_resolution, run_mc

MA = 1e-3
MEASURED_SIGMAS_MA = (1.6, 1.7, 3.45, 1.36, 4.16, 3.77, 3.94)
P, AP = DeviceState.P, DeviceState.AP


def _calibration_bank():
    means, _ = read_variation(data_path("calibration_means.csv"))
    devices = [d.with_threshold(m) for d, m in zip(ideal_devices(), means)]
    return AdcBank(devices, check_order=False)


def test_c1_critical_current_law(record_acceptance):
    expected = [5.4, 10.8, 16.2, 21.6, 27.0, 32.4, 37.8]
    got = [critical_current(REF_J_SOT_CRIT, REF_T_HM, w) / MA for w in REF_WIDTHS]
    err = max(abs(g - e) / e for g, e in zip(got, expected))
    ok = err <= 4 * np.finfo(float).eps
    record_acceptance("C1 critical-current law", ok, f"max rel err {err:.2e} for {', '.join(f'{g:.6g}' for g in got)} mA")
    assert ok


def test_c2_fit_round_trip(record_acceptance):
    start = time.perf_counter()
    exact = fit_critical_density(
        REF_WIDTHS, [critical_current(REF_J_SOT_CRIT, REF_T_HM, w) for w in REF_WIDTHS], REF_T_HM
    )
    j_err = abs(exact.j_sot_crit / REF_J_SOT_CRIT - 1)
    exact_ok = j_err <= 1e-12 and abs(exact.r_squared - 1) <= 1e-12
    widths, currents = read_fit_points(data_path("calibration_fit.csv"))
    cal = fit_critical_density(widths, currents, REF_T_HM)
    cal_ok = abs(cal.j_sot_crit / REF_J_SOT_CRIT - 1) < 0.05 and abs(cal.r_squared - 0.8243) < 0.05
    elapsed = time.perf_counter() - start
    ok = exact_ok and cal_ok and elapsed < 1
    record_acceptance(
        "C2 fit round-trip", ok,
        f"noiseless J rel err {j_err:.1e}, R2 {exact.r_squared:.15f}; calibration J {cal.j_sot_crit:.4e} A/m2, "
        f"R2 {cal.r_squared:.4f} (target 0.8243); {elapsed:.3f} s",
    )
    assert ok


def _random_devices(rng, n, grid=None, shared_stack=False):
    size = 1 if shared_stack else n
    r_p = np.resize(rng.uniform(50, 2000, size), n)
    r_ap = r_p + np.resize(rng.uniform(1, 2000, size), n)
    r_hm = rng.uniform(1, 1000, n)
    if grid:
        r_p, r_ap, r_hm = (np.round(a * grid) / grid for a in (r_p, r_ap, r_hm))
    return [
        MtjDevice(k + 1, 0.6e-6 * (k + 1), 15e-9, float(r_hm[k]), float(r_p[k]), float(r_ap[k]), 5.4e-3 * (k + 1))
        for k in range(n)
    ]


def test_c3_topology_comparison(record_acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    failures = []
    worst_ulps = 0.0
    for trial in range(1000):
        n = int(rng.integers(1, 10))
        # on a 1/64 ohm grid every sum is exact, so the sensed swing must equal r_ap - r_p bit for bit
        on_grid = trial % 2 == 0
        # half the sets share one junction stack, as in a fabricated bank; serial MR
        # ordering is only a property of such banks
        shared = trial % 4 < 2
        devs = _random_devices(rng, n, grid=64 if on_grid else None, shared_stack=shared)
        for terminal in (Terminal.T2, Terminal.T3):
            serial, parallel = Topology.serial(devs, terminal), Topology.parallel(devs)
            serial_mr = [readout_mr(serial, d.id) for d in devs]
            ordered = serial_mr if terminal is Terminal.T2 else serial_mr[::-1]
            if shared and any(b > a for a, b in zip(ordered, ordered[1:])):
                failures.append(f"trial {trial}: serial MR increases")
            for d, s_mr in zip(devs, serial_mr):
                if readout_mr(parallel, d.id) < s_mr:
                    failures.append(f"trial {trial}: parallel < serial at {d.id}")
                for topo in (serial, parallel):
                    low = sensed_resistance(topo, d.id, [P] * n)
                    high = sensed_resistance(topo, d.id, [AP if e.id == d.id else P for e in devs])
                    diff = high - low
                    if on_grid and diff != d.r_ap - d.r_p:
                        failures.append(f"trial {trial}: swing {diff} != {d.r_ap - d.r_p}")
                    ulps = abs(diff - (d.r_ap - d.r_p)) / np.spacing(high)
                    worst_ulps = max(worst_ulps, ulps)
    if worst_ulps > 2:
        failures.append(f"off-grid swing error {worst_ulps} ulp")

    worst_rel = 0.0
    for trial in range(300):
        n = int(rng.integers(1, 4))
        devs = _random_devices(rng, n)
        states = [AP if s else P for s in rng.integers(0, 2, n)]
        r_mtj = [d.r_ap if s == AP else d.r_p for d, s in zip(devs, states)]
        r_hm = [d.r_hm for d in devs]
        for d in devs:
            k = d.id
            pairs = (
                (Topology.serial(devs), serial_chain_edges(r_mtj, r_hm), "b0"),
                (Topology.serial(devs, Terminal.T3), serial_chain_edges(r_mtj, r_hm), f"b{n}"),
                (Topology.parallel(devs), parallel_edges(r_mtj, r_hm), f"t3_{k}"),
            )
            for topo, edges, ground in pairs:
                want = nodal_resistance(edges, f"top{k}", ground)
                worst_rel = max(worst_rel, abs(sensed_resistance(topo, k, states) / want - 1))
    if worst_rel > 1e-9:
        failures.append(f"nodal oracle rel err {worst_rel:.1e}")

    cmp = compare_topologies(read_devices(data_path("devices_example.csv")))
    if not cmp.serial_spread > 0.30:
        failures.append(f"bundled serial spread {cmp.serial_spread:.3f}")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 1.0
    record_acceptance(
        "C3 topology comparison", ok,
        f"1000 random sets, nodal max rel err {worst_rel:.1e}, off-grid swing {worst_ulps:.0f} ulp, "
        f"bundled serial spread {100 * cmp.serial_spread:.1f}% (parallel {100 * cmp.parallel_spread:.1f}%); "
        f"{elapsed:.3f} s" + (f"; {failures[:3]}" if failures else ""),
    )
    assert ok


def test_c4_ideal_converter(record_acceptance):
    start = time.perf_counter()
    bank = AdcBank(ideal_devices())
    step = 1e-6
    top = 1.1 * bank.thresholds.max()
    sweep = transfer_sweep(bank, 0.0, top, int(round(top / step)) + 1)
    codes_ok = set(sweep.codes.tolist()) == set(range(8))
    bubbles = int(np.count_nonzero(sweep.bubbles))
    monotone = bool(np.all(np.diff(sweep.codes) >= 0))
    report = nonlinearity_of_bank(bank, step=step)
    tol = step / report.lsb
    statics_ok = report.max_abs_dnl <= tol and report.max_abs_inl <= tol

    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(1000):
        t = np.cumsum(rng.uniform(0.01, 10.0, 7)) + rng.uniform(0, 5)
        r = compute_dnl_inl(t)
        # zero up to the rounding of seven quotients
        worst = max(worst, abs(r.dnl.sum()) / (7 * np.finfo(float).eps * (1 + np.abs(r.dnl).max())))
    telescoping_ok = worst <= 1.0
    elapsed = time.perf_counter() - start
    ok = codes_ok and bubbles == 0 and monotone and statics_ok and telescoping_ok and elapsed < 5
    record_acceptance(
        "C4 ideal converter statics", ok,
        f"codes 0..7 {codes_ok}, bubbles {bubbles}, monotone {monotone}, max|DNL| {report.max_abs_dnl:.2e}, "
        f"max|INL| {report.max_abs_inl:.2e} (tol {tol:.2e}); sum DNL within {worst:.2f} of rounding bound; {elapsed:.2f} s",
    )
    assert ok


def test_c5_calibration_nonlinearity(record_acceptance):
    report = nonlinearity_of_bank(_calibration_bank())
    dnl_ok = abs(report.max_abs_dnl - 0.739) <= 0.05
    inl_ok = abs(report.max_abs_inl - 0.7319) <= 0.05
    ok = dnl_ok and inl_ok
    record_acceptance(
        "C5 calibration nonlinearity", ok,
        f"max|DNL| {report.max_abs_dnl:.4f} LSB (target 0.739 +/- 0.05), max|INL| {report.max_abs_inl:.4f} LSB "
        f"(target 0.7319 +/- 0.05), LSB {report.lsb / MA:.3f} mA",
    )
    assert ok


def test_c6_monte_carlo(record_acceptance):
    start = time.perf_counter()
    means, _ = read_variation(data_path("calibration_means.csv"))
    sigmas = [s * MA for s in MEASURED_SIGMAS_MA]
    base = dict(means=means, sigmas=sigmas, trials=300, seed=20220301)
    with_mirror = run_mc(VariationSpec(mirror_gain_sigma=0.01, **base))
    without = run_mc(VariationSpec(mirror_gain_sigma=0.0, **base))
    ratio = with_mirror.sigmas / np.array(sigmas)
    sigma_ok = bool(np.all(np.abs(ratio - 1) <= 0.20))
    mirror = np.abs(with_mirror.sigmas / without.sigmas - 1)
    mirror_ok = bool(np.all(mirror < 0.10))

    big = VariationSpec(mirror_gain_sigma=0.01, **dict(base, trials=20000))
    one = json.dumps(run_mc(big, workers=1, chunk=1000).to_dict(), sort_keys=True).encode()
    many = json.dumps(run_mc(big, workers=8, chunk=1000).to_dict(), sort_keys=True).encode()
    same = one == many
    elapsed = time.perf_counter() - start
    ok = sigma_ok and mirror_ok and same and elapsed < 10
    record_acceptance(
        "C6 Monte-Carlo statistics", ok,
        f"sigma/spec {np.array2string(ratio, precision=3)}, mirror effect max {100 * mirror.max():.1f}%, "
        f"1 vs 8 threads identical {same}; {elapsed:.2f} s",
    )
    assert ok


def test_c7_effective_resolution(record_acceptance):
    start = time.perf_counter()
    ideal = [critical_current(REF_J_SOT_CRIT, REF_T_HM, w) for w in REF_WIDTHS]
    zero_bits, _ = effective_resolution(ideal, [0.0] * 7, 2)
    means, sigmas = read_variation(data_path("calibration_means.csv"))
    bits, clean = effective_resolution(means, sigmas, 2)

    rng = np.random.default_rng(7)
    violations = 0
    for _ in range(1000):
        m = rng.uniform(1, 50, 7)
        s = rng.uniform(0, 5, 7)
        k = rng.uniform(0.5, 3)
        before = set(effective_resolution(m, s, k)[1])
        s2 = s.copy()
        s2[rng.integers(7)] += rng.uniform(0, 5)
        if not set(effective_resolution(m, s2, k)[1]) <= before:
            violations += 1
    elapsed = time.perf_counter() - start
    ok = zero_bits == 3 and clean == [1, 2, 4, 7] and bits == 2 and violations == 0 and elapsed < 5
    record_acceptance(
        "C7 effective resolution", ok,
        f"sigma=0 -> {zero_bits} bits; calibration clean set {clean}, {bits} bits; "
        f"{violations} monotonicity violations in 1000 specs; {elapsed:.2f} s",
    )
    assert ok


def test_c8_hysteresis(record_acceptance):
    start = time.perf_counter()
    devices = ideal_devices()
    failures = []
    for d in devices:
        i_max = 1.5 * d.i_crit_p
        for cycles in (1, 3):
            r = np.array([x for _, x in sweep_ri_loop(d, triangle_currents(i_max, 60, cycles), initial=P)])
            n = int(np.count_nonzero(np.diff(r)))
            if n != 2 * cycles:
                failures.append(f"device {d.id}: {n} transitions over {cycles} cycles")
        band = np.linspace(d.i_crit_ap, d.i_crit_p, 200)
        for start_state in (P, AP):
            if len({x for _, x in sweep_ri_loop(d, band, initial=start_state)}) != 1:
                failures.append(f"device {d.id}: resistance changes inside band")
    widths = [d.loop_width for d in devices]
    if not all(b > a for a, b in zip(widths, widths[1:])):
        failures.append("loop width not increasing with w")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 1
    record_acceptance(
        "C8 hysteresis properties", ok,
        f"loop widths {', '.join(f'{w / MA:.1f}' for w in widths)} mA; {elapsed:.3f} s" + (f"; {failures}" if failures else ""),
    )
    assert ok
