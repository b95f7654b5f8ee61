"""Self and mutual inductance of shell-enclosed coils.

The exact path integrates the first-order field solution over the coil
area; the closed forms follow from replacing every Bessel factor by its
small-argument limit.  The ``ell_n / ell_d`` split of the non-resonant
self-inductance is exposed because its sign structure explains the
negative-inductance band just below the resonant shell thickness.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, MethodMismatch, NoResonance, QuadratureFailure
from .fieldsolver import (
    FieldPoint,
    FieldSolution,
    ShellDesign,
    assemble_system,
    incident_field_at,
    magnetic_field,
    solve_receiver,
    solve_transmitter,
)
from .media import LayerStack

__all__ = [
    "Regime",
    "InductanceResult",
    "coil_self_inductance_L0",
    "flux_factor",
    "self_inductance",
    "mutual_inductance",
    "det_tilde",
    "det_exact",
    "ell_terms",
    "resonant_thickness",
    "regime_of",
    "analyze",
    "inductance_gain",
    "flux_oracle_L",
    "hbar_ratio",
    "RESONANT_BAND",
]

# |det_tilde| below this fraction of |det_tilde(0.8 r1_res)| counts as resonant
RESONANT_BAND = 1e-3


class Regime(str, Enum):
    RESONANT = "resonant"
    POSITIVE = "positive"
    NEGATIVE = "negative_real_L"


@dataclass(frozen=True)
class InductanceResult:
    L: complex
    L0: float
    M: complex | None
    det_exact: complex
    det_tilde: complex
    regime: Regime
    ell_n: float
    ell_d: float
    flagged: bool = False

    @property
    def L_r(self) -> float:
        return self.L.real

    @property
    def L_i(self) -> float:
        return -self.L.imag

    @property
    def passive(self) -> bool:
        return self.L_i >= 0


def coil_self_inductance_L0(a: float, r_w: float, mu1: complex) -> float:
    """Single-turn loop inductance ``mu1 a (ln(8a/r_w) - 2)``.

    ``mu1`` is the absolute permeability of the infill; only its real part
    is used.
    """
    if not 0 < r_w < a:
        raise DomainError("need 0 < r_w < a")
    value = complex(mu1).real * a * (math.log(8 * a / r_w) - 2)
    if value <= 0:
        raise DomainError(f"8a/r_w = {8 * a / r_w:.3g} <= e^2 gives non-positive L0")
    return value


def flux_factor(x: complex) -> complex:
    """``1 - sin(x)/x`` without cancellation for small ``|x|``."""
    x = complex(x)
    if abs(x) < 1e-2:
        x2 = x * x
        return x2 / 6 * (1 - x2 / 20 * (1 - x2 / 42))
    return 1 - cmath.sin(x) / x


def _coil_flux(coef: complex, k1: complex, omega: float, a: float, current: float) -> complex:
    return 4 * math.pi * coef / (1j * omega * k1 * current) * flux_factor(k1 * a)


def ell_terms(mus, r1: float, r2: float) -> tuple[float, float]:
    """Numerator and denominator of the non-resonant self-inductance term.

    Real parts of the permeabilities are used; the ratio is scale-free so
    relative or absolute values give the same sign structure.
    """
    m1, m2, m3 = (complex(m).real for m in mus)
    ell_n = r2**3 * (m1 - m2) * (m2 + 2 * m3) + r1**3 * (m2 - m3) * (2 * m1 + m2)
    ell_d = 2 * r1**3 * (m1 - m2) * (m3 - m2) - r2**3 * (2 * m2 + m1) * (2 * m3 + m2)
    return ell_n, ell_d


def _rhos(ks):
    k1, k2, k3 = ks
    return k1, -1j * k2, k3.real, -k3.imag


def det_tilde(stack: LayerStack, r1: float, r2: float, omega: float) -> complex:
    """Closed-form leading term of the boundary-matrix determinant."""
    ks, mus = stack.wavenumbers(omega), stack.mus(omega)
    return _det_tilde(ks, mus, r1, r2)


def _det_tilde(ks, mus, r1, r2) -> complex:
    rho1, rho2, rho3r, rho3i = _rhos(ks)
    m1, m2, m3 = mus
    num = rho1 * (2 * r1**3 * (m1 - m2) * (m3 - m2) - r2**3 * (2 * m2 + m1) * (2 * m3 + m2))
    den = 9 * rho2 * (rho3i + 1j * rho3r) ** 2 * r1 * r2**4 * m2 * m3
    return complex(num / den)


def det_exact(stack: LayerStack, design: ShellDesign, omega: float) -> complex:
    return assemble_system(stack, design, omega, "tx", "exact").det


def resonant_thickness(mu1: complex, mu2: complex, mu3: complex, r2: float) -> float:
    """Inner shell radius that zeroes the closed-form determinant.

    Only real parts are used.  Raises :class:`NoResonance` when the cube
    root argument is non-positive or the root is not inside ``(0, r2)``,
    which covers every positive shell permeability.
    """
    m1, m2, m3 = (complex(m).real for m in (mu1, mu2, mu3))
    den = 2 * (m2 - m3) * (m2 - m1)
    if den == 0:
        raise NoResonance("degenerate permeabilities")
    ratio = (2 * m3 + m2) * (2 * m2 + m1) / den
    if ratio <= 0:
        raise NoResonance(f"cube-root argument {ratio:.4g} is not positive")
    t = ratio ** (1 / 3)
    if t >= 1:
        raise NoResonance(f"r1/r2 = {t:.4g} >= 1")
    return r2 * t


def _reference_det(stack: LayerStack, r2: float, omega: float) -> float | None:
    try:
        r_res = resonant_thickness(*stack.mus(omega), r2)
    except NoResonance:
        return None
    return abs(det_tilde(stack, 0.8 * r_res, r2, omega))


def regime_of(L: complex, dt: complex, ref: float | None) -> Regime:
    if ref is not None and abs(dt) < RESONANT_BAND * ref:
        return Regime.RESONANT
    return Regime.POSITIVE if L.real >= 0 else Regime.NEGATIVE


def _l0(stack: LayerStack, design: ShellDesign, omega: float) -> float:
    return coil_self_inductance_L0(design.coil_radius, design.wire_radius, stack.mus(omega)[0])


def self_inductance(stack: LayerStack, design: ShellDesign, omega: float,
                    method: str = "exact", tx: FieldSolution | None = None) -> complex:
    """Coil self-inductance ``L = L_r - j L_i`` in henry.

    Methods
    -------
    exact
        ``L0`` plus the flux of the ``alpha_1`` standing wave.
    tilde
        Closed-form small-sphere expression, divided by the determinant of
        the small-argument boundary matrix (which keeps the residual that
        limits the resonance).
    nonresonant_form
        ``L0 + pi a^4 mu1 / (2 r1^3) * ell_n / ell_d``; real whenever the
        permeabilities are.
    resonant_form
        The tilde numerator over the residual ``det_exact - det_tilde``;
        only meaningful inside the resonant band.
    """
    L0 = _l0(stack, design, omega)
    a, r1, r2 = design.coil_radius, design.inner_radius, design.outer_radius
    ks, mus = stack.wavenumbers(omega), stack.mus(omega)
    mu1 = mus[0]

    if method == "exact":
        if tx is None:
            tx = solve_transmitter(stack, design, omega)
        return L0 + _coil_flux(tx.coefficients[0], ks[0], omega, a, design.drive_current)

    if method == "nonresonant_form":
        ell_n, ell_d = ell_terms(mus, r1, r2)
        if ell_d == 0:
            raise MethodMismatch("non-resonant form diverges exactly at resonance")
        return complex(L0 + math.pi * a**4 * complex(mu1).real / (2 * r1**3) * ell_n / ell_d)

    rho1, rho2, rho3r, rho3i = _rhos(ks)
    m1, m2, m3 = mus
    ell_n = r2**3 * (m1 - m2) * (m2 + 2 * m3) + r1**3 * (m2 - m3) * (2 * m1 + m2)
    pre = math.pi * rho1 * a**4 * m1 * ell_n / (
        18 * rho2 * (rho3i + 1j * rho3r) ** 2 * r1**4 * r2**4 * m2 * m3)

    if method == "tilde":
        det = assemble_system(stack, design, omega, "tx", "subwavelength").det
        return complex(L0 + pre / det)
    if method == "resonant_form":
        dt = _det_tilde(ks, mus, r1, r2)
        ref = _reference_det(stack, r2, omega)
        if ref is None or abs(dt) >= RESONANT_BAND * ref:
            raise MethodMismatch("resonant form requested away from the resonant band")
        residual = det_exact(stack, design, omega) - dt
        return complex(L0 + pre / residual)
    raise ValueError(f"unknown method {method!r}")


def _mutual_exact(stack, tx_design, rx_design, d, omega, tx=None):
    if tx is None:
        tx = solve_transmitter(stack, tx_design, omega)
    h = incident_field_at(tx, d)
    rx = solve_receiver(stack, rx_design, omega, h)
    k1 = rx.wavenumbers[0]
    M = _coil_flux(rx.coefficients[0], k1, omega, rx_design.coil_radius, tx_design.drive_current)
    return M, tx, rx


def _mutual_prefactor(stack, tx_design, rx_design, omega) -> complex:
    ks, mus = stack.wavenumbers(omega), stack.mus(omega)
    rho1, rho2, rho3r, rho3i = _rhos(ks)
    m1, _, m3 = mus
    r1, r2 = rx_design.inner_radius, rx_design.outer_radius
    a4 = tx_design.coil_radius**2 * rx_design.coil_radius**2
    return (-0.5j * math.pi * a4 * rho1**2 * m1**2 * (rho3i - 1j * rho3r) ** 2
            / (rho2**2 * r1**2 * r2**2 * m3 * (rho3i**2 + rho3r**2) ** 2))


def hbar_ratio(stack: LayerStack, tx_design: ShellDesign, rx_design: ShellDesign,
               d: float, omega: float) -> complex:
    """Distance factor that makes the closed-form mutual inductance exact.

    The closed form leaves this antenna-pattern factor unspecified; here it
    is recovered as ``M_exact * det_exact**2 / prefactor``.
    """
    M, _, _ = _mutual_exact(stack, tx_design, rx_design, d, omega)
    return M * det_exact(stack, rx_design, omega) ** 2 / _mutual_prefactor(
        stack, tx_design, rx_design, omega)


def mutual_inductance(stack: LayerStack, tx: ShellDesign, rx: ShellDesign, d: float,
                      omega: float, method: str = "exact") -> complex:
    """Mutual inductance of a coaxial pair ``d`` metres apart.

    ``exact`` drives the receiver shell with the transmitter's on-axis
    field.  ``tilde`` is a hybrid: the closed-form prefactor over the
    squared small-argument determinant, times the distance factor taken
    from the exact path.
    """
    if not d > tx.outer_radius + rx.outer_radius:
        raise DomainError(f"distance {d} m makes the shells overlap")
    if method == "exact":
        return _mutual_exact(stack, tx, rx, d, omega)[0]
    if method == "tilde":
        hbar = hbar_ratio(stack, tx, rx, d, omega)
        det = assemble_system(stack, rx, omega, "tx", "subwavelength").det
        return _mutual_prefactor(stack, tx, rx, omega) * hbar / det**2
    raise ValueError(f"unknown method {method!r}")


def analyze(stack: LayerStack, design: ShellDesign, omega: float,
            d: float | None = None) -> InductanceResult:
    """Exact L (and M when ``d`` is given) with determinant diagnostics."""
    tx = solve_transmitter(stack, design, omega)
    L = self_inductance(stack, design, omega, "exact", tx=tx)
    M, flagged = None, tx.flagged
    if d is not None:
        M, _, rx = _mutual_exact(stack, design, design, d, omega, tx=tx)
        flagged = flagged or rx.flagged
    r1, r2 = design.inner_radius, design.outer_radius
    dt = det_tilde(stack, r1, r2, omega)
    ell_n, ell_d = ell_terms(stack.mus(omega), r1, r2)
    return InductanceResult(
        L=L, L0=_l0(stack, design, omega), M=M,
        det_exact=assemble_system(stack, design, omega).det, det_tilde=dt,
        regime=regime_of(L, dt, _reference_det(stack, r2, omega)),
        ell_n=ell_n, ell_d=ell_d, flagged=flagged,
    )


def inductance_gain(meta, bare) -> float:
    """``R_c0 |M_meta| / ((R_c_meta + w L_i_meta) |M_0|)`` for two channel states."""
    m0 = abs(bare.M)
    if m0 == 0:
        raise ZeroDivisionError("bare mutual inductance is zero")
    return bare.R_c * abs(meta.M) / ((meta.R_c + meta.omega * meta.L_i) * m0)


def _disc_flux(sol: FieldSolution, n: int) -> complex:
    a = sol.design.coil_radius
    x, wx = np.polynomial.legendre.leggauss(n)
    rho = 0.5 * a * (x + 1)
    wr = 0.5 * a * wx
    phi = math.pi * (x + 1)
    wp = math.pi * wx
    mu1 = sol.mus[0]
    # the loop lies in the z = 0 plane (theta = pi/2), normal +z
    bz = np.empty(n, dtype=complex)
    for i, r in enumerate(rho):
        hr, ht = magnetic_field(sol, 1, FieldPoint(r, math.pi / 2), total=False)
        bz[i] = mu1 * (hr * math.cos(math.pi / 2) - ht * math.sin(math.pi / 2))
    # integrand independent of phi, but integrate over the full disc anyway
    grid = np.outer(bz * rho * wr, wp)
    return complex(grid.sum())


def flux_oracle_L(stack: LayerStack, design: ShellDesign, omega: float,
                  panels: int = 64, rtol: float = 1e-10, max_panels: int = 1024) -> complex:
    """Self-inductance by direct quadrature of ``B . z`` over the coil disc.

    Gauss-Legendre in radius and azimuth, doubled until two successive
    estimates agree to ``rtol``.  The coil's own (singular) flux is not
    integrated; ``L0`` stands in for it.
    """
    tx = solve_transmitter(stack, design, omega)
    prev = _disc_flux(tx, panels)
    n = panels
    while True:
        n *= 2
        if n > max_panels:
            raise QuadratureFailure(f"no convergence to rtol={rtol} within {max_panels} panels")
        cur = _disc_flux(tx, n)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            break
        prev = cur
    return _l0(stack, design, omega) + cur / design.drive_current
