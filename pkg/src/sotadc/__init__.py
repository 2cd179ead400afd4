"""Behavioral simulator for Flash ADCs built from SOT magnetic tunnel junctions."""

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
from .adc import AdcBank, ConversionResult, ThermometerCode, convert, encode_t2b, reset, transfer_sweep
from .analysis import (
    FitResult,
    NonlinearityReport,
    compute_dnl_inl,
    extract_transitions,
    fit_critical_density,
    nonlinearity_of_bank,
)
from .device import (
    CONSTANTS,
    DeviceState,
    MtjDevice,
    PhysicalConstants,
    apply_current,
    critical_current,
    ideal_devices,
    j_from_spin_params,
    junction_resistance,
    sweep_ri_loop,
)
from .readout import Layout, SenseSpec, Terminal, Topology, compare_topologies, readout_mr, sensed_resistance
from .variation import McReport, VariationSpec, effective_resolution, run_mc, sample_bank
