"""Circuit-level link metrics for point-to-point links and relay chains.

Each coil is a series loop ``R_c + j w L`` with ``L = L_r - j L_i``; the
imaginary part shows up as an extra series resistance ``w L_i``.  The loop is
tuned at ``w0`` with a capacitor (``L_r > 0``) or, in the negative-inductance
band, a series inductor.  Receiver loads are matched to ``R_c + w0 L_i``.
All powers are ratios, so drive voltage and current cancel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateTuning, DomainError, M2IError, NoCrossing
from .fieldsolver import ShellDesign
from .inductance import mutual_inductance, self_inductance
from .media import LayerStack
from .results import SweepResult

__all__ = [
    "ChannelState",
    "Tuning",
    "TuningKind",
    "LinkMetrics",
    "Bandwidth",
    "resonant_tuning",
    "pathloss_p2p",
    "pathloss_waveguide",
    "power_ratio_experimental",
    "p2p_ratio",
    "waveguide_ratio",
    "channel_state",
    "frequency_response",
    "bandwidth_3db",
    "channel_capacity",
    "dbm_to_w",
    "link_metrics",
]


class TuningKind(str, Enum):
    CAPACITOR = "capacitor"
    INDUCTOR = "inductor"
    NONE = "none"


@dataclass(frozen=True)
class Tuning:
    kind: TuningKind
    value: float  # F or H

    def reactance(self, omega: float) -> float:
        if self.kind is TuningKind.CAPACITOR:
            return -1 / (omega * self.value)
        if self.kind is TuningKind.INDUCTOR:
            return omega * self.value
        return 0.0


@dataclass(frozen=True)
class ChannelState:
    """Everything the circuit formulas need for one tuned link.

    ``R_l`` defaults to the matched load ``R_c + w0 L_i``.  ``V_g`` is kept
    for completeness; every metric here is a power ratio and ignores it.
    """

    L: complex
    M: complex
    R_c: float
    omega: float
    omega0: float | None = None
    R_l: float | None = None
    R_g: float = 0.0
    V_g: float = 1.0

    def __post_init__(self):
        if not self.R_c > 0:
            raise DomainError("R_c must be positive")
        if not self.omega > 0:
            raise DomainError("omega must be positive")
        if self.omega0 is None:
            object.__setattr__(self, "omega0", self.omega)
        if self.R_l is None:
            object.__setattr__(self, "R_l", self.R_c + self.omega0 * self.L_i)
        if self.R_l < 0:
            raise DomainError("R_l must be non-negative")

    @property
    def L_r(self) -> float:
        return complex(self.L).real

    @property
    def L_i(self) -> float:
        return -complex(self.L).imag

    @property
    def loop_resistance(self) -> float:
        return self.R_c + self.omega * self.L_i


@dataclass(frozen=True)
class LinkMetrics:
    pathloss_db: float
    bandwidth_hz: float
    capacity_bps: float
    f0: float


@dataclass(frozen=True)
class Bandwidth:
    width: float
    f_low: float
    f_high: float
    f_peak: float
    crossed: bool = True


def resonant_tuning(L: complex, omega0: float, R_c: float = 0.0) -> tuple[Tuning, float, float]:
    """Cancel ``w0 L_r`` and match the load.

    Returns ``(tuning, R_l, R_c + w0 L_i)``.
    """
    L_r, L_i = complex(L).real, -complex(L).imag
    if L_r == 0:
        raise DegenerateTuning("L_r = 0: nothing to tune")
    if L_r > 0:
        tuning = Tuning(TuningKind.CAPACITOR, 1 / (omega0**2 * L_r))
    else:
        tuning = Tuning(TuningKind.INDUCTOR, -L_r)
    r_eff = R_c + omega0 * L_i
    return tuning, r_eff, r_eff


def p2p_ratio(omega: float, M: complex, R: float, R_l: float, X_tx: float = 0.0,
              X_rx: float = 0.0) -> float:
    """``P_r / P_t`` of the coupled pair for transmitter power ``P_t`` delivered.

    ``R`` is the loop resistance ``R_c + w L_i``; ``X_*`` are residual loop
    reactances after tuning.  With both zero this is the tuned-link formula.
    """
    wm2 = (omega * abs(M)) ** 2
    z2 = complex(R + R_l, X_rx)
    p_in = R + wm2 * (R + R_l) / abs(z2) ** 2
    return wm2 * R_l / (abs(z2) ** 2 * p_in)


def pathloss_p2p(state: ChannelState, method: str = "exact") -> float:
    """Point-to-point path loss in dB (positive; ``inf`` when ``M = 0``)."""
    w = state.omega
    R = state.loop_resistance
    if state.M == 0:
        return math.inf
    if method == "exact":
        wm2 = (w * abs(state.M)) ** 2
        R_l = state.R_l
        ratio = wm2 * R_l / (R_l + R) / (R * (R + R_l) + wm2)
        return -10 * math.log10(ratio)
    if method == "approx":
        return -20 * math.log10(w * abs(state.M) / (2 * R))
    raise ValueError(f"unknown method {method!r}")


def waveguide_ratio(omega: float, M: complex, Z: complex, n: int) -> float:
    """Power ratio of an ``n``-coil chain with per-loop impedance ``Z``."""
    if n < 2:
        raise DomainError("a waveguide needs n >= 2 coils")
    return (omega * abs(M) / abs(Z)) ** (2 * (n - 1))


def pathloss_waveguide(state: ChannelState, n: int, d_interval: float | None = None) -> float:
    """``20 (1 - n) log10(w|M| / (R_c + w L_i))`` for ``n - 2`` relays.

    ``state.M`` must be the mutual inductance at the relay spacing
    ``d_interval`` (kept only for bookkeeping).
    """
    if n < 2:
        raise DomainError("a waveguide needs n >= 2 coils")
    if state.M == 0:
        return math.inf
    return 20 * (1 - n) * math.log10(state.omega * abs(state.M) / state.loop_resistance)


def power_ratio_experimental(state: ChannelState) -> float:
    """``T w^2 |M|^2`` with ``T = R_l / ((R_g + R_c)(R_l + R_c)^2)`` (fixed source and load)."""
    if not state.R_g > 0 or not state.R_l > 0:
        raise DomainError("the measurement circuit needs R_g > 0 and R_l > 0")
    T = state.R_l / ((state.R_g + state.R_c) * (state.R_l + state.R_c) ** 2)
    return T * (state.omega * abs(state.M)) ** 2


def channel_state(stack: LayerStack, design: ShellDesign, d: float, omega: float,
                  omega0: float | None = None) -> ChannelState:
    """Solve the field model for a link of two identical devices."""
    L = self_inductance(stack, design, omega)
    M = mutual_inductance(stack, design, design, d, omega)
    return ChannelState(L=L, M=M, R_c=design.coil_resistance, omega=omega, omega0=omega0)


def dbm_to_w(dbm: float) -> float:
    return 10 ** (dbm / 10) / 1000


def frequency_response(stack: LayerStack, design: ShellDesign, d: float, f_center: float,
                       span: float, points: int = 401, n: int | None = None,
                       matching: str = "ideal") -> SweepResult:
    """Received-power response with tuning and load frozen at ``f_center``.

    ``L(w)`` and ``M(w)`` are recomputed at every frequency (the shell may
    be Drude-dispersive).  ``n`` selects an ``n``-coil chain with spacing
    ``d`` instead of a point-to-point link.  Columns: ``frequency_hz``,
    ``gain_db`` (``10 log10 P_r/P_t``, negative), ``flag``.
    """
    if span < 0:
        raise DomainError("span must be non-negative")
    w0 = 2 * math.pi * f_center
    st0 = channel_state(stack, design, d, w0)
    tuning, R_l, _ = resonant_tuning(st0.L, w0, design.coil_resistance)
    if matching == "capacitor_only" and tuning.kind is TuningKind.INDUCTOR:
        tuning = Tuning(TuningKind.NONE, 0.0)
    if span == 0 or points < 2:
        freqs = np.array([f_center])
    else:
        freqs = np.linspace(f_center - span / 2, f_center + span / 2, points)

    out = SweepResult(["frequency_hz", "gain_db", "flag"],
                      meta={"kind": "n-coil chain" if n else "point-to-point",
                            "distance_m": d, "f0_hz": f_center, "tuning": tuning.kind.value,
                            "tuning_value": tuning.value, "load_ohm": R_l})
    for f in freqs:
        w = 2 * math.pi * float(f)
        try:
            st = st0 if f == f_center else channel_state(stack, design, d, w, omega0=w0)
            X = w * st.L_r + tuning.reactance(w)
            R = design.coil_resistance + w * st.L_i
            if n is None:
                ratio = p2p_ratio(w, st.M, R, R_l, X, X)
            else:
                ratio = waveguide_ratio(w, st.M, complex(R, X), n)
            out.append(float(f), 10 * math.log10(ratio), 0)
        except (M2IError, ArithmeticError, ValueError):
            out.append(float(f), math.nan, 1)
    return out


def bandwidth_3db(response: SweepResult, value: str = "gain_db",
                  strict: bool = False) -> Bandwidth:
    """Width between the two ``peak - 3 dB`` crossings around the maximum.

    Crossings are linearly interpolated.  If either side never drops 3 dB
    the whole span is returned with ``crossed=False`` (or
    :class:`NoCrossing` is raised when ``strict``).
    """
    f = np.asarray(response.column(response.columns[0]), dtype=float)
    g = np.asarray(response.column(value), dtype=float)
    ok = np.isfinite(g)
    f, g = f[ok], g[ok]
    if f.size == 0:
        raise NoCrossing("no finite samples")
    i = int(np.argmax(g))
    level = g[i] - 3.0

    def crossing(idx):
        for j0, j1 in zip(idx[:-1], idx[1:]):
            if g[j1] < level:
                t = (g[j0] - level) / (g[j0] - g[j1])
                return f[j0] + t * (f[j1] - f[j0])
        return None

    lo = crossing(list(range(i, -1, -1)))
    hi = crossing(list(range(i, f.size)))
    if lo is None or hi is None:
        if strict:
            raise NoCrossing("response does not fall 3 dB below its peak within the span")
        return Bandwidth(f[-1] - f[0], f[0], f[-1], f[i], crossed=False)
    return Bandwidth(hi - lo, lo, hi, f[i])


def channel_capacity(response: SweepResult, ptb_dbm: float = 10.0, nnb_dbm: float = -100.0,
                     points: int = 401, value: str = "gain_db",
                     band: Bandwidth | None = None) -> float:
    """Shannon capacity (bit/s) over the 3 dB band of ``response``.

    Transmit and noise power are given as totals over the band, so their
    densities have the same ratio.  ``log2(1 + SNR(f))`` is interpolated
    (in dB) onto ``points`` samples and integrated with the trapezoid rule.
    """
    if band is None:
        band = bandwidth_3db(response, value)
    if band.width <= 0:
        return 0.0
    f = np.asarray(response.column(response.columns[0]), dtype=float)
    g = np.asarray(response.column(value), dtype=float)
    ok = np.isfinite(g)
    fi = np.linspace(band.f_low, band.f_high, max(points, 200))
    gi = np.interp(fi, f[ok], g[ok])
    snr = 10 ** ((ptb_dbm - nnb_dbm + gi) / 10)
    return float(np.trapezoid(np.log2(1 + snr), fi))


def link_metrics(stack: LayerStack, design: ShellDesign, d: float, f0: float,
                 n: int | None = None, ptb_dbm: float = 10.0, nnb_dbm: float = -100.0,
                 points: int = 401, matching: str = "ideal", max_widen: int = 8) -> LinkMetrics:
    """Path loss at ``f0`` plus 3 dB bandwidth and capacity of the tuned link.

    The sweep starts at 1 % of ``f0`` and is widened fourfold until the
    response drops 3 dB on both sides, then re-run over six bandwidths
    centred on the peak so the band holds enough grid points.
    """
    span = 0.01 * f0
    for _ in range(max_widen):
        resp = frequency_response(stack, design, d, f0, span, points, n=n, matching=matching)
        band = bandwidth_3db(resp)
        if band.crossed:
            break
        span *= 4
    else:
        raise NoCrossing(f"no 3 dB crossing within {span / 4:.4g} Hz of {f0:.4g} Hz")
    width = max(6 * band.width, 1e-6 * f0)
    fine = frequency_response(stack, design, d, band.f_peak, width, points, n=n,
                              matching=matching)
    fine.meta["f0_hz"] = f0
    band = bandwidth_3db(fine)
    if not band.crossed:
        band = bandwidth_3db(resp)
        fine = resp
    if n is None:
        loss = pathloss_p2p(channel_state(stack, design, d, 2 * math.pi * f0))
    else:
        st = channel_state(stack, design, d, 2 * math.pi * f0)
        loss = pathloss_waveguide(st, n, d)
    return LinkMetrics(pathloss_db=float(loss), bandwidth_hz=float(band.width),
                       capacity_bps=channel_capacity(fine, ptb_dbm, nnb_dbm, points, band=band),
                       f0=float(band.f_peak))

