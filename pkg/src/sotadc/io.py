"""File formats: device/variation/fit CSVs, key=value configs, atomic output.

Files use the lab units (mA, um, nm, ohm); conversion to SI happens here and
nowhere else.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import shutil
import tempfile
from contextlib import contextmanager
from importlib import resources
from pathlib import Path

from .device import MtjDevice
from .errors import DomainError, InputError

MA = 1e-3
UM = 1e-6
NM = 1e-9

DEVICE_COLUMNS = ("id", "w_hm_um", "t_hm_nm", "r_hm_ohm", "r_p_ohm", "r_ap_ohm", "i_crit_p_ma", "i_crit_ap_ma")
VARIATION_COLUMNS = ("device_id", "mean_ma", "sigma_ma")
FIT_COLUMNS = ("w_hm_um", "i_crit_ma")

# admission floor for measured junctions
MIN_DELTA_R = 68.0
MIN_MR = 0.20


def data_path(name: str) -> Path:
    """Path of a bundled data file."""
    return Path(str(resources.files("sotadc") / "data" / name))


def _number(text, column, path, line):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise InputError(f"column {column!r}: {text!r} is not a number", path, line) from None
    if not math.isfinite(value):
        raise InputError(f"column {column!r}: non-finite value {text!r}", path, line)
    return value


def _rows(path, columns, optional=()):
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot open: {exc.strerror}", path) from None
    with handle:
        reader = csv.reader(handle)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputError("empty file, header required", path, 1) from None
        if tuple(header) != tuple(columns):
            raise InputError(f"header must be {','.join(columns)}; got {','.join(header)}", path, 1)
        rows = []
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(columns):
                raise InputError(f"expected {len(columns)} fields, got {len(row)}", path, line)
            values = {}
            for col, cell in zip(columns, row):
                cell = cell.strip()
                if cell == "" and col in optional:
                    values[col] = None
                else:
                    values[col] = _number(cell, col, path, line)
            rows.append((line, values))
    if not rows:
        raise InputError("no data rows", path)
    return rows


def _integer(value, column, path, line):
    if value != int(value):
        raise InputError(f"column {column!r} must be an integer", path, line)
    return int(value)


def read_devices(path, strict_admission: bool = False) -> list[MtjDevice]:
    """Parse and validate a device CSV.

    With ``strict_admission`` rows with resistance change below 68 ohm or
    junction MR below 20 % are rejected.
    """
    devices = []
    for line, v in _rows(path, DEVICE_COLUMNS, optional=("i_crit_ap_ma",)):
        dev_id = _integer(v["id"], "id", path, line)
        ap = v["i_crit_ap_ma"]
        try:
            dev = MtjDevice(
                id=dev_id,
                w_hm=v["w_hm_um"] * UM,
                t_hm=v["t_hm_nm"] * NM,
                r_hm=v["r_hm_ohm"],
                r_p=v["r_p_ohm"],
                r_ap=v["r_ap_ohm"],
                i_crit_p=v["i_crit_p_ma"] * MA,
                i_crit_ap=None if ap is None else ap * MA,
            )
        except DomainError as exc:
            raise InputError(f"row rejected: {exc}", path, line) from None
        if strict_admission:
            if dev.delta_r < MIN_DELTA_R:
                raise InputError(
                    f"row rejected: resistance change {dev.delta_r:g} ohm below the {MIN_DELTA_R:g} ohm admission floor",
                    path, line,
                )
            if dev.tmr < MIN_MR:
                raise InputError(
                    f"row rejected: MR {100 * dev.tmr:.1f}% below the {100 * MIN_MR:.0f}% admission floor",
                    path, line,
                )
        devices.append(dev)
    ids = [d.id for d in devices]
    if ids != list(range(ids[0], ids[0] + len(ids))):
        raise InputError(f"device ids must be unique and consecutive, got {ids}", path)
    return devices


def write_devices(path, devices):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DEVICE_COLUMNS)
        for d in devices:
            w.writerow([d.id, _fmt(d.w_hm / UM), _fmt(d.t_hm / NM), _fmt(d.r_hm), _fmt(d.r_p),
                        _fmt(d.r_ap), _fmt(d.i_crit_p / MA), _fmt(d.i_crit_ap / MA)])


def read_variation(path) -> tuple[list[float], list[float]]:
    """Threshold means and sigmas in amperes, ordered by device id."""
    rows = _rows(path, VARIATION_COLUMNS)
    ids = [_integer(v["device_id"], "device_id", path, line) for line, v in rows]
    if ids != list(range(1, len(ids) + 1)):
        raise InputError(f"device_id must run 1..n in order, got {ids}", path)
    means, sigmas = [], []
    for line, v in rows:
        if v["mean_ma"] <= 0:
            raise InputError("mean_ma must be positive", path, line)
        if v["sigma_ma"] < 0:
            raise InputError("sigma_ma must be >= 0", path, line)
        means.append(v["mean_ma"] * MA)
        sigmas.append(v["sigma_ma"] * MA)
    return means, sigmas


def read_fit_points(path) -> tuple[list[float], list[float]]:
    """Widths (m) and critical currents (A)."""
    rows = _rows(path, FIT_COLUMNS)
    return [v["w_hm_um"] * UM for _, v in rows], [v["i_crit_ma"] * MA for _, v in rows]


def read_config(path, allowed: dict) -> dict:
    """Flat ``key=value`` file. ``allowed`` maps key -> converter; unknown keys are errors."""
    out = {}
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot open: {exc.strerror}", path) from None
    for n, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise InputError(f"expected key=value, got {raw!r}", path, n)
        key, value = (s.strip() for s in text.split("=", 1))
        if key not in allowed:
            raise InputError(f"unknown key {key!r} (allowed: {', '.join(sorted(allowed))})", path, n)
        if key in out:
            raise InputError(f"duplicate key {key!r}", path, n)
        try:
            out[key] = allowed[key](value)
        except (TypeError, ValueError):
            raise InputError(f"bad value for {key!r}: {value!r}", path, n) from None
    return out


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _fmt(x) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() and abs(x) < 1e15 else repr(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(c) if isinstance(c, float) else c for c in row])


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


@contextmanager
def staged_output(out_dir):
    """Yield a temporary directory; move its files into ``out_dir`` only on success."""
    out_dir = Path(out_dir)
    created = not out_dir.exists()
    out_dir.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".staging-", dir=out_dir))
    ok = False
    try:
        yield stage
        for item in sorted(stage.iterdir()):
            os.replace(item, out_dir / item.name)
        ok = True
    finally:
        shutil.rmtree(stage, ignore_errors=True)
        if created and not ok:
            shutil.rmtree(out_dir, ignore_errors=True)
