"""Command-line front end.

Every command writes its outputs plus ``manifest.json`` into ``--out``. Exit
status: 0 success, 2 input error, 3 numeric/model error; on failure a JSON
object describing the error is printed to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .adc import AdcBank, transfer_sweep
from .analysis import AFFINE, THROUGH_ORIGIN, compute_dnl_inl, extract_transitions, fit_critical_density
from .device import DeviceState, ideal_devices, sweep_ri_loop, triangle_currents
from .errors import InputError, SotAdcError
from .io import (
    MA, NM, UM, read_config, read_devices, read_fit_points, read_variation, sha256_file,
    staged_output, write_csv, write_json,
)
from .readout import Terminal, compare_topologies
from .variation import VariationSpec, run_mc

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_MODEL = 3

COMMANDS = ("fit", "sweep", "metrics", "mc", "compare-topology", "ri-loop")


def _choice(*options):
    def conv(value):
        if value not in options:
            raise ValueError(value)
        return value
    return conv


def _bool(value):
    lowered = value.lower()
    if lowered in ("1", "true", "yes"):
        return True
    if lowered in ("0", "false", "no"):
        return False
    raise ValueError(value)


def _positive_int(value):
    n = int(value)
    if n < 1:
        raise ValueError(value)
    return n


SWEEP_KEYS = {"n_bits": _positive_int, "i_start_ma": float, "i_stop_ma": float, "steps": _positive_int}

CONFIG_KEYS = {
    "fit": {"t_hm_nm": float, "mode": _choice(THROUGH_ORIGIN, AFFINE)},
    "sweep": dict(SWEEP_KEYS),
    "metrics": dict(SWEEP_KEYS, method=_choice("endpoint", "best-fit"), allow_missing=_bool),
    "mc": {
        "trials": _positive_int,
        "seed": int,
        "mirror_gain_sigma": float,
        "k_sigma": float,
        "overlap": _choice("all", "adjacent"),
        "bin_width_ma": float,
        "negative_policy": _choice("redraw", "clamp"),
        "workers": _positive_int,
    },
    "compare-topology": {"ground_terminal": _choice("T2", "T3")},
    "ri-loop": {"i_max_ma": float, "points_per_leg": _positive_int, "cycles": _positive_int,
                "initial": _choice("P", "AP")},
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sotadc", description="SOT-MTJ Flash ADC simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--devices", type=Path, help="device parameter CSV")
    common.add_argument("--config", type=Path, help="key=value configuration file")
    common.add_argument("--out", type=Path, required=True, help="output directory")
    common.add_argument("--seed", type=int, help="random seed (unsigned 64-bit)")
    common.add_argument("--timestamp", choices=("now", "none"), default="now",
                        help="'none' omits the manifest timestamp for reproducible output")
    common.add_argument("--paper-admission", action="store_true",
                        help="reject devices below 68 ohm resistance change or 20%% MR")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common], help="fit critical current against HM width")
    p.add_argument("--input", type=Path, help="CSV with w_hm_um,i_crit_ma (default: use --devices)")
    for name, text in (("sweep", "transfer sweep"), ("metrics", "DNL/INL from a transfer sweep")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--variation", type=Path, help="use mean_ma column as device thresholds")
    p = sub.add_parser("mc", parents=[common], help="Monte-Carlo threshold variation")
    p.add_argument("--variation", type=Path, required=True, help="CSV with device_id,mean_ma,sigma_ma")
    sub.add_parser("compare-topology", parents=[common], help="serial vs parallel readout MR")
    sub.add_parser("ri-loop", parents=[common], help="R-I hysteresis loops per device")
    return parser


def _devices(args, required=True):
    if args.devices is None:
        if required:
            raise InputError(f"{args.command} requires --devices")
        return None
    return read_devices(args.devices, strict_admission=args.paper_admission)


def _bank(args, cfg):
    devices = _devices(args, required=args.variation is None)
    if args.variation is not None:
        means, _ = read_variation(args.variation)
        template = devices or ideal_devices(len(means))
        if len(template) != len(means):
            raise InputError("device and variation files list different device counts")
        devices = [d.with_threshold(m) for d, m in zip(template, means)]
        bank = AdcBank(devices, check_order=False)
    else:
        bank = AdcBank(devices, check_order=False)
    if "n_bits" in cfg and cfg["n_bits"] != bank.n_bits:
        raise InputError(f"config n_bits={cfg['n_bits']} but {len(bank.devices)} devices given")
    return bank


def _sweep_range(bank, cfg):
    top = 1.1 * float(np.max(bank.effective_thresholds))
    i_start = cfg.get("i_start_ma", 0.0) * MA
    i_stop = cfg.get("i_stop_ma", top / MA) * MA
    steps = cfg.get("steps")
    if steps is None:
        steps = int(round((i_stop - i_start) / 1e-6)) + 1
    return i_start, i_stop, steps


def cmd_fit(args, cfg, out):
    if args.input is not None:
        widths, currents = read_fit_points(args.input)
    else:
        devices = _devices(args)
        widths = [d.w_hm for d in devices]
        currents = [d.i_crit_p for d in devices]
    result = fit_critical_density(widths, currents, cfg.get("t_hm_nm", 15.0) * NM, cfg.get("mode", THROUGH_ORIGIN))
    payload = result.to_dict()
    payload["slope_ma_per_um"] = result.slope / MA * UM
    payload["intercept_ma"] = result.intercept / MA
    write_json(out / "fit.json", payload)


def cmd_sweep(args, cfg, out):
    bank = _bank(args, cfg)
    sweep = transfer_sweep(bank, *_sweep_range(bank, cfg))
    rows = [(x / MA, int(c), int(b)) for x, c, b in zip(sweep.inputs, sweep.codes, sweep.bubbles)]
    write_csv(out / "sweep.csv", ("i_in_ma", "code", "bubble"), rows)


def cmd_metrics(args, cfg, out):
    bank = _bank(args, cfg)
    sweep = transfer_sweep(bank, *_sweep_range(bank, cfg))
    levels = extract_transitions(sweep, len(bank.devices), allow_missing=cfg.get("allow_missing", False))
    report = compute_dnl_inl(levels, method=cfg.get("method", "endpoint"))
    rows = [(k + 1, float(t / MA), float(d), float(i))
            for k, (t, d, i) in enumerate(zip(report.transition_levels, report.dnl, report.inl))]
    write_csv(out / "nonlinearity.csv", ("code", "transition_ma", "dnl_lsb", "inl_lsb"), rows)
    summary = report.to_dict()
    summary["lsb_ma"] = report.lsb / MA
    summary["max_abs_dnl_ma"] = report.max_abs_dnl_current / MA
    summary["bubble_samples"] = int(np.count_nonzero(sweep.bubbles))
    write_json(out / "nonlinearity.json", summary)


def cmd_mc(args, cfg, out):
    means, sigmas = read_variation(args.variation)
    devices = _devices(args, required=False)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    bin_width = cfg.get("bin_width_ma")
    spec = VariationSpec(
        means=means,
        sigmas=sigmas,
        mirror_gain_sigma=cfg.get("mirror_gain_sigma", 0.01),
        trials=cfg.get("trials", 300),
        seed=seed,
        k_sigma=cfg.get("k_sigma", 2.0),
        overlap=cfg.get("overlap", "all"),
        negative_policy=cfg.get("negative_policy", "redraw"),
        bin_width=None if bin_width is None else bin_width * MA,
        devices=devices,
    )
    report = run_mc(spec, workers=cfg.get("workers", 1))
    write_json(out / "mc_report.json", report.to_dict())
    for k, h in enumerate(report.histograms, start=1):
        rows = [(float(lo / MA), float(hi / MA), int(c)) for lo, hi, c in zip(h.edges[:-1], h.edges[1:], h.counts)]
        write_csv(out / f"histogram_device_{k}.csv", ("bin_lo_ma", "bin_hi_ma", "count"), rows)


def cmd_compare_topology(args, cfg, out):
    devices = _devices(args)
    cmp = compare_topologies(devices, Terminal(cfg.get("ground_terminal", "T2")))
    rows = []
    for r in cmp.rows:
        rows.append((r.index, "serial", r.min_resistance_serial, 100 * r.mr_serial))
        rows.append((r.index, "parallel", r.min_resistance_parallel, 100 * r.mr_parallel))
    write_csv(out / "topology.csv", ("index", "topology", "min_resistance_ohm", "mr_percent"), rows)
    write_json(out / "topology.json", {"serial_spread": cmp.serial_spread, "parallel_spread": cmp.parallel_spread})


def cmd_ri_loop(args, cfg, out):
    devices = _devices(args)
    i_max = cfg.get("i_max_ma")
    if i_max is None:
        i_max = 1.2 * max(max(d.i_crit_p, -d.i_crit_ap) for d in devices) / MA
    currents = triangle_currents(i_max * MA, cfg.get("points_per_leg", 100), cfg.get("cycles", 1))
    initial = DeviceState[cfg.get("initial", "AP")]
    rows = []
    for d in devices:
        for i, r in sweep_ri_loop(d, currents, initial):
            rows.append((d.id, i / MA, r))
    write_csv(out / "ri_loop.csv", ("device_id", "i_sot_ma", "resistance_ohm"), rows)


HANDLERS = {
    "fit": cmd_fit,
    "sweep": cmd_sweep,
    "metrics": cmd_metrics,
    "mc": cmd_mc,
    "compare-topology": cmd_compare_topology,
    "ri-loop": cmd_ri_loop,
}


def _manifest(args, argv, cfg):
    inputs = {}
    for attr in ("devices", "config", "variation", "input"):
        path = getattr(args, attr, None)
        if path is not None:
            inputs[attr] = {"path": str(path), "sha256": sha256_file(path)}
    seed = args.seed if args.seed is not None else cfg.get("seed")
    manifest = {
        "command": args.command,
        "argv": list(argv),
        "inputs": inputs,
        "seed": seed,
        "config": cfg,
        "version": __version__,
        "kernel_backend": _kernels.BACKEND,
    }
    if args.timestamp != "none":
        manifest["timestamp"] = datetime.now(timezone.utc).isoformat()
    return manifest


def _fail(exc, code):
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(payload), file=sys.stderr)
    return code


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise InputError("--seed must be an unsigned 64-bit integer")
        cfg = read_config(args.config, CONFIG_KEYS[args.command]) if args.config else {}
        with staged_output(args.out) as stage:
            HANDLERS[args.command](args, cfg, stage)
            write_json(stage / "manifest.json", _manifest(args, argv, cfg))
    except InputError as exc:
        return _fail(exc, EXIT_INPUT)
    except (SotAdcError, ArithmeticError) as exc:
        return _fail(exc, EXIT_MODEL)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
