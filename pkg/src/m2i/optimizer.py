"""Design-space sweeps: resonance root finding, gain curves, robust designs."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import bisect

from .errors import DomainError, M2IError, NoSignChange
from .fieldsolver import COIL_FILL_WARN, ShellDesign
from .inductance import det_exact, det_tilde, mutual_inductance, resonant_thickness, self_inductance
from .linkmodel import (
    ChannelState,
    bandwidth_3db,
    channel_capacity,
    frequency_response,
    pathloss_p2p,
)
from .media import LayerStack, Medium, angular
from .results import SweepResult

__all__ = [
    "DesignSweep",
    "FabricationWarning",
    "find_resonance_numeric",
    "gain_point",
    "sweep_gain",
    "recommend_design",
    "sweep",
    "VARIABLES",
    "METRICS",
    "DEFAULT_FREQ",
]

DEFAULT_FREQ = 10e6
VARIABLES = ("r1", "mu1", "d", "f")
METRICS = ("gain", "pathloss", "capacity", "det")
_UNITS = {"r1": "r1_m", "mu1": "mu1_rel", "d": "distance_m", "f": "frequency_hz"}
_METRIC_COLS = {"gain": "gain_db", "pathloss": "pathloss_db", "capacity": "capacity_bps",
                "det": "det_re"}


class FabricationWarning(UserWarning):
    """A design sits exactly on resonance and will not survive tolerances."""


@dataclass
class DesignSweep:
    variable: str
    grid: np.ndarray
    metric: str
    rows: SweepResult

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise DomainError(f"unknown sweep variable {self.variable!r}")
        if self.metric not in METRICS:
            raise DomainError(f"unknown metric {self.metric!r}")
        self.grid = np.asarray(self.grid, dtype=float)
        if self.grid.ndim != 1 or self.grid.size == 0 or np.any(np.diff(self.grid) <= 0):
            raise DomainError("sweep grid must be non-empty and strictly increasing")

    def values(self) -> np.ndarray:
        return np.asarray(self.rows.column(_METRIC_COLS[self.metric]), dtype=float)


def find_resonance_numeric(stack: LayerStack, r2: float, bracket: tuple[float, float],
                           omega: float = angular(DEFAULT_FREQ), xtol: float = 1e-10) -> float:
    """Root of ``Re det_tilde(r1)`` inside ``bracket`` by bisection."""
    lo, hi = bracket
    if not 0 < lo < hi < r2:
        raise DomainError("bracket must satisfy 0 < r_lo < r_hi < r2")

    def f(r1):
        return det_tilde(stack, r1, r2, omega).real

    if f(lo) * f(hi) > 0:
        raise NoSignChange(f"Re det_tilde keeps its sign on [{lo}, {hi}]")
    return bisect(f, lo, hi, xtol=xtol, maxiter=200)


def _bare_reference(stack: LayerStack, design: ShellDesign, d: float, omega: float) -> ChannelState:
    bare_stack, bare = stack.uniform(), design.bare()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        L = self_inductance(bare_stack, bare, omega)
        M = mutual_inductance(bare_stack, bare, bare, d, omega)
    return ChannelState(L=L, M=M, R_c=bare.coil_resistance, omega=omega)


def gain_point(stack: LayerStack, design: ShellDesign, d: float, omega: float,
               matching: str = "ideal", bare: ChannelState | None = None) -> tuple[float, float]:
    """Inductance gain (linear) and ``L_r`` for one design.

    With ``capacitor_only`` a negative ``L_r`` cannot be tuned out, so the
    loop impedance magnitude ``|R_c + w L_i + j w L_r|`` replaces the
    resistance in the gain's denominator.
    """
    if matching not in ("ideal", "capacitor_only"):
        raise ValueError(f"unknown matching {matching!r}")
    if bare is None:
        bare = _bare_reference(stack, design, d, omega)
    L = self_inductance(stack, design, omega)
    M = mutual_inductance(stack, design, design, d, omega)
    R = design.coil_resistance + omega * (-L.imag)
    z = abs(complex(R, omega * L.real)) if (matching == "capacitor_only" and L.real < 0) else R
    return bare.R_c * abs(M) / (z * abs(bare.M)), L.real


def sweep_gain(stack: LayerStack, design: ShellDesign, d: float, grid,
               matching: str = "ideal", freq: float = DEFAULT_FREQ) -> DesignSweep:
    """Inductance gain versus shell inner radius, other dimensions fixed."""
    grid = np.asarray(grid, dtype=float)
    omega = angular(freq)
    bare = _bare_reference(stack, design, d, omega)
    rows = SweepResult(["r1_m", "gain_db", "l_r_h", "flag"],
                       meta={"variable": "r1", "metric": "gain", "matching": matching,
                             "distance_m": d, "frequency_hz": freq})
    ds = DesignSweep("r1", grid, "gain", rows)
    for r1 in ds.grid:
        r1 = float(r1)
        if not design.coil_radius < r1 < design.outer_radius:
            raise DomainError(f"r1 = {r1} outside (a, r2)")
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                g, L_r = gain_point(stack, design.with_inner_radius(r1), d, omega, matching, bare)
            rows.append(r1, 20 * math.log10(g), L_r, 0)
        except (M2IError, ArithmeticError):
            rows.append(r1, math.nan, math.nan, 1)
    return ds


def recommend_design(stack: LayerStack, r2: float = 0.05, margin: float = 1e-3,
                     template: ShellDesign | None = None,
                     freq: float = DEFAULT_FREQ) -> ShellDesign:
    """Shell slightly thicker than resonance, coil at 60 % of ``r1``.

    Coil resistance scales with the coil circumference of ``template``.
    ``margin = 0`` returns the resonant shell with a
    :class:`FabricationWarning`.
    """
    if margin < 0:
        raise DomainError("safety margin must be non-negative")
    template = template or ShellDesign()
    r1 = resonant_thickness(*stack.mus(angular(freq)), r2) + margin
    if not r1 < r2:
        raise DomainError(f"r1 = {r1} does not fit inside r2 = {r2}")
    if margin == 0:
        warnings.warn("exactly resonant shell is fabrication-sensitive", FabricationWarning,
                      stacklevel=2)
    a = COIL_FILL_WARN * r1
    return replace(template, inner_radius=r1, outer_radius=r2, coil_radius=a,
                   coil_resistance=template.coil_resistance * a / template.coil_radius)


def _with_mu1(stack: LayerStack, mu1: float) -> LayerStack:
    l1 = stack.layer1
    return replace(stack, layer1=Medium(l1.rel_permittivity, mu1, l1.conductivity))


def _metric(metric: str, stack: LayerStack, design: ShellDesign, d: float, freq: float,
            ptb_dbm: float, nnb_dbm: float):
    omega = angular(freq)
    if metric == "det":
        return det_exact(stack, design, omega).real
    if metric == "gain":
        return 20 * math.log10(gain_point(stack, design, d, omega)[0])
    if metric == "pathloss":
        L = self_inductance(stack, design, omega)
        M = mutual_inductance(stack, design, design, d, omega)
        return pathloss_p2p(ChannelState(L=L, M=M, R_c=design.coil_resistance, omega=omega))
    resp = frequency_response(stack, design, d, freq, 0.05 * freq, points=401)
    band = bandwidth_3db(resp)
    resp = frequency_response(stack, design, d, band.f_peak, 6 * band.width, points=401)
    return channel_capacity(resp, ptb_dbm, nnb_dbm)


def sweep(stack: LayerStack, design: ShellDesign, variable: str, grid, metric: str,
          d: float = 5.0, freq: float = DEFAULT_FREQ, ptb_dbm: float = 10.0,
          nnb_dbm: float = -100.0) -> DesignSweep:
    """One metric against one design variable, everything else held."""
    grid = np.asarray(grid, dtype=float)
    col = _METRIC_COLS.get(metric, metric)
    rows = SweepResult([_UNITS.get(variable, variable), col, "flag"],
                       meta={"variable": variable, "metric": metric, "distance_m": d,
                             "frequency_hz": freq})
    ds = DesignSweep(variable, grid, metric, rows)
    for x in ds.grid:
        x = float(x)
        st, des, dist, f = stack, design, d, freq
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                if variable == "r1":
                    des = design.with_inner_radius(x)
                elif variable == "mu1":
                    st = _with_mu1(stack, x)
                elif variable == "d":
                    dist = x
                else:
                    f = x
                rows.append(x, float(_metric(metric, st, des, dist, f, ptb_dbm, nnb_dbm)), 0)
        except (M2IError, ArithmeticError):
            rows.append(x, math.nan, 1)
    return ds
