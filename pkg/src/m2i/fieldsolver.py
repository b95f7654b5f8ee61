"""First-order (TE01) field solution of a coil inside a three-layer sphere.

Layer ``i`` carries the field

    h_r     = -2j cos(theta) / (w mu_i r) * sum_c  c * f(k_i r)
    h_theta =  j  sin(theta) / (w mu_i r) * sum_c  c * [f + k_i r f'](k_i r)

with ``f = j1`` in the infill, ``j1`` and ``y1`` in the shell and the
outgoing ``h1^(2)`` outside.  Enforcing continuity of ``B_r`` and
``h_theta`` at both interfaces gives a 4x4 linear system whose right hand
side is set either by the coil (transmitter) or by a uniform incident field
(receiver).

On the transmitter side the infill field is the coil dipole plus the
standing-wave correction carried by ``alpha_1``; the exterior field is the
``alpha_4`` term alone.  On the receiver side the exterior field is the
incident field plus the ``beta_4`` scattered term, where the incident field
is ``-h z_hat`` (``h_r = -h cos(theta)``, ``h_theta = h sin(theta)``).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import DomainError, LayerMismatch, SingularSystem
from .media import LayerStack
from .specfun import Kind, radial_bracket, sph1

__all__ = [
    "ShellDesign",
    "BoundarySystem",
    "FieldSolution",
    "FieldPoint",
    "Side",
    "Flavor",
    "assemble_system",
    "solve_system",
    "solve_transmitter",
    "solve_receiver",
    "incident_field_at",
    "magnetic_field",
    "dipole_field",
    "layer_of",
    "field_magnitude",
    "COIL_FILL_WARN",
    "COND_LIMIT",
    "RESIDUAL_LIMIT",
]

COND_LIMIT = 1e14
RESIDUAL_LIMIT = 1e-9
# a / r1 above which the coil starts to disturb the inner boundary
COIL_FILL_WARN = 0.6


class Side(str, Enum):
    TX = "tx"
    RX = "rx"


class Flavor(str, Enum):
    EXACT = "exact"
    SUBWAVELENGTH = "subwavelength"


@dataclass(frozen=True)
class ShellDesign:
    """Geometry and drive of one device.  Lengths in metres."""

    coil_radius: float = 0.015
    wire_radius: float = 0.5e-3
    inner_radius: float = 0.025
    outer_radius: float = 0.05
    coil_resistance: float = 0.047
    drive_current: float = 1.0

    def __post_init__(self):
        a, r1, r2 = self.coil_radius, self.inner_radius, self.outer_radius
        if not 0 < a < r1 < r2:
            raise DomainError(f"need 0 < a < r1 < r2, got a={a}, r1={r1}, r2={r2}")
        if not 0 < self.wire_radius < a:
            raise DomainError("wire radius must lie in (0, a)")
        if not self.coil_resistance > 0:
            raise DomainError("coil resistance must be positive")
        if not self.drive_current > 0:
            raise DomainError("drive current must be positive")
        if a / r1 > COIL_FILL_WARN + 1e-12:
            warnings.warn(f"a/r1 = {a / r1:.3f} exceeds {COIL_FILL_WARN}", stacklevel=3)

    def with_inner_radius(self, r1: float, keep_fill: bool = False) -> "ShellDesign":
        """Copy with a new shell inner radius; optionally keep ``a/r1``."""
        a = self.coil_radius * r1 / self.inner_radius if keep_fill else self.coil_radius
        return replace(self, inner_radius=r1, coil_radius=a)

    def bare(self) -> "ShellDesign":
        """Comparison coil of radius ``r2`` wound from the same wire.

        Resistance scales with circumference.  The shell radii are pushed
        outward; they carry no physics once the stack is uniform.
        """
        r2 = self.outer_radius
        return replace(
            self,
            coil_radius=r2,
            inner_radius=r2 / COIL_FILL_WARN,
            outer_radius=2 * r2 / COIL_FILL_WARN,
            coil_resistance=self.coil_resistance * r2 / self.coil_radius,
        )


@dataclass(frozen=True)
class FieldPoint:
    r: float
    theta: float = 0.0

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError("r must be positive")
        if not 0 <= self.theta <= math.pi:
            raise DomainError("theta must lie in [0, pi]")


@dataclass(frozen=True)
class BoundarySystem:
    """Rows: B_r at r1, h_theta at r1, B_r at r2, h_theta at r2."""

    matrix: np.ndarray
    excitation: np.ndarray
    flavor: Flavor
    side: Side

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.matrix))

    @property
    def condition(self) -> float:
        # column-equilibrated: y1 columns are O(1/(kr)^2) larger by construction
        scale = np.abs(self.matrix).max(axis=0)
        if not np.all(np.isfinite(self.matrix)) or np.any(scale == 0):
            return math.inf
        return float(np.linalg.cond(self.matrix / scale))

    @property
    def singular(self) -> bool:
        c = self.condition
        return not np.isfinite(c) or c > COND_LIMIT


@dataclass(frozen=True)
class FieldSolution:
    coefficients: np.ndarray
    side: Side
    stack: LayerStack
    design: ShellDesign
    omega: float
    flavor: Flavor = Flavor.EXACT
    incident: float = 0.0
    condition: float = 1.0
    residual: float = 0.0
    flagged: bool = False
    wavenumbers: tuple = field(default=(), repr=False)
    mus: tuple = field(default=(), repr=False)


def _zeta(rho3r, rho3i, r2, mu2, mu3):
    q = (rho3r**2 + rho3i**2) ** 2
    z1 = (2 * rho3r * rho3i / (r2**2 * q) - rho3r * r2 / 3
          + 1j * (rho3i * r2 / 3 - (rho3r**2 - rho3i**2) / (r2**2 * q)))
    z2 = (-2 * r2 * mu2 * rho3r / (3 * mu3) - 2 * mu2 * rho3r * rho3i / (r2**2 * mu3 * q)
          + 1j * (2 * r2 * mu2 * rho3i / (3 * mu3) + mu2 * (rho3r**2 - rho3i**2) / (r2**2 * mu3 * q)))
    return z1, z2


def subwavelength_matrix(ks, mus, r1: float, r2: float) -> np.ndarray:
    """Boundary matrix with every Bessel factor replaced by its small-argument form."""
    k1, k2, k3 = ks
    mu1, mu2, mu3 = mus
    rho1 = k1
    rho2 = -1j * k2
    rho3r, rho3i = k3.real, -k3.imag
    z1, z2 = _zeta(rho3r, rho3i, r2, mu2, mu3)
    return np.array([
        [rho1 * r1 / 3, -1j * rho2 * r1 / 3, -1 / (rho2**2 * r1**2), 0],
        [2 * rho1 * r1 / 3, -2j * rho2 * r1 * mu1 / (3 * mu2), mu1 / (r1**2 * rho2**2 * mu2), 0],
        [0, 1j * rho2 * r2 / 3, 1 / (rho2**2 * r2**2), z1],
        [0, 2j * rho2 * r2 / 3, -1 / (rho2**2 * r2**2), z2],
    ], dtype=complex)


def exact_matrix(ks, mus, r1: float, r2: float) -> np.ndarray:
    k1, k2, k3 = ks
    mu1, mu2, mu3 = mus
    return np.array([
        [sph1(Kind.J, k1 * r1)[0], -sph1(Kind.J, k2 * r1)[0], -sph1(Kind.Y, k2 * r1)[0], 0],
        [radial_bracket(Kind.J, k1 * r1),
         -mu1 / mu2 * radial_bracket(Kind.J, k2 * r1),
         -mu1 / mu2 * radial_bracket(Kind.Y, k2 * r1), 0],
        [0, sph1(Kind.J, k2 * r2)[0], sph1(Kind.Y, k2 * r2)[0], -sph1(Kind.H2, k3 * r2)[0]],
        [0, radial_bracket(Kind.J, k2 * r2), radial_bracket(Kind.Y, k2 * r2),
         -mu2 / mu3 * radial_bracket(Kind.H2, k3 * r2)],
    ], dtype=complex)


def dipole_coefficient(a: float, current: float, k: complex, mu: complex, omega: float) -> complex:
    """Coefficient that writes the bare loop field in the outgoing layer form."""
    return omega * mu * k**2 * a**2 * current / 4


def assemble_system(stack: LayerStack, design: ShellDesign, omega: float,
                    side: Side | str = Side.TX, flavor: Flavor | str = Flavor.EXACT,
                    h: complex | None = None) -> BoundarySystem:
    side, flavor = Side(side), Flavor(flavor)
    ks = stack.wavenumbers(omega)
    mus = stack.mus(omega)
    r1, r2 = design.inner_radius, design.outer_radius
    if flavor is Flavor.EXACT:
        s = exact_matrix(ks, mus, r1, r2)
    else:
        s = subwavelength_matrix(ks, mus, r1, r2)

    if side is Side.TX:
        k1, mu1 = ks[0], mus[0]
        a, i0 = design.coil_radius, design.drive_current
        if flavor is Flavor.EXACT:
            # the coil field moved to the right hand side of the r1 rows
            c = dipole_coefficient(a, i0, k1, mu1, omega)
            psi = [-c * sph1(Kind.H2, k1 * r1)[0], -c * radial_bracket(Kind.H2, k1 * r1), 0, 0]
        else:
            t = 1j * omega * mu1 * a**2 * i0 / (4 * r1**2)
            psi = [-t, t, 0, 0]
    else:
        if h is None:
            raise DomainError("receiver system needs the incident field magnitude h")
        mu2, mu3 = mus[1], mus[2]
        psi = [0, 0, omega * r2 * mu3 * h / 2j, -1j * omega * r2 * mu2 * h]
    return BoundarySystem(s, np.array(psi, dtype=complex), flavor, side)


def solve_system(system: BoundarySystem, stack: LayerStack, design: ShellDesign, omega: float,
                 incident: float = 0.0, strict: bool = False) -> FieldSolution:
    """LU solve with partial pivoting; near-singular systems are solved and flagged."""
    cond = system.condition
    flagged = not np.isfinite(cond) or cond > COND_LIMIT
    if flagged and strict:
        raise SingularSystem(f"boundary system condition number {cond:.3g}")
    try:
        x = np.linalg.solve(system.matrix, system.excitation)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    norm = np.linalg.norm(system.excitation)
    residual = float(np.linalg.norm(system.matrix @ x - system.excitation) / norm) if norm else 0.0
    if residual > RESIDUAL_LIMIT:
        flagged = True
    return FieldSolution(
        coefficients=x, side=system.side, stack=stack, design=design, omega=omega,
        flavor=system.flavor, incident=incident, condition=cond, residual=residual,
        flagged=flagged, wavenumbers=stack.wavenumbers(omega), mus=stack.mus(omega),
    )


def solve_transmitter(stack: LayerStack, design: ShellDesign, omega: float,
                      flavor: Flavor | str = Flavor.EXACT) -> FieldSolution:
    system = assemble_system(stack, design, omega, Side.TX, flavor)
    return solve_system(system, stack, design, omega)


def solve_receiver(stack: LayerStack, design: ShellDesign, omega: float, h: float,
                   flavor: Flavor | str = Flavor.EXACT) -> FieldSolution:
    if h < 0:
        raise DomainError("incident field magnitude must be non-negative")
    system = assemble_system(stack, design, omega, Side.RX, flavor, h=h)
    if h == 0:
        return FieldSolution(np.zeros(4, dtype=complex), Side.RX, stack, design, omega,
                             system.flavor, 0.0, system.condition, 0.0, system.singular,
                             stack.wavenumbers(omega), stack.mus(omega))
    return solve_system(system, stack, design, omega, incident=h)


def _layer_terms(sol: FieldSolution, layer: int, r: float):
    """Return (mu, sum c f, sum c [f + x f']) for one layer."""
    ks, mus = sol.wavenumbers, sol.mus
    c = sol.coefficients
    if layer == 1:
        parts = [(c[0], Kind.J)]
    elif layer == 2:
        parts = [(c[1], Kind.J), (c[2], Kind.Y)]
    else:
        parts = [(c[3], Kind.H2)]
    x = ks[layer - 1] * r
    value = sum(ci * sph1(kind, x)[0] for ci, kind in parts)
    bracket = sum(ci * radial_bracket(kind, x) for ci, kind in parts)
    return mus[layer - 1], value, bracket


def magnetic_field(sol: FieldSolution, layer: int, p: FieldPoint,
                   total: bool = True) -> tuple[complex, complex]:
    """``(h_r, h_theta)`` in layer 1, 2 or 3 at point ``p``.

    With ``total`` the source is included: the coil dipole in the infill of
    a transmitter, the uniform incident field outside a receiver.
    """
    r1, r2 = sol.design.inner_radius, sol.design.outer_radius
    tol = 1e-12 * r2
    bounds = {1: (0.0, r1), 2: (r1, r2), 3: (r2, math.inf)}
    if layer not in bounds:
        raise LayerMismatch(f"layer must be 1, 2 or 3, got {layer!r}")
    lo, hi = bounds[layer]
    if not lo - tol <= p.r <= hi + tol:
        raise LayerMismatch(f"r = {p.r} is outside layer {layer} ({lo}, {hi})")

    mu, value, bracket = _layer_terms(sol, layer, p.r)
    w = sol.omega
    hr = -2j * math.cos(p.theta) / (w * mu * p.r) * value
    ht = 1j * math.sin(p.theta) / (w * mu * p.r) * bracket
    if total and sol.side is Side.TX and layer == 1:
        d = sol.design
        dr, dt, _ = dipole_field(d.coil_radius, d.drive_current, sol.wavenumbers[0], p, eta=0.0)
        hr, ht = hr + dr, ht + dt
    elif total and sol.side is Side.RX and layer == 3:
        hr = hr - sol.incident * math.cos(p.theta)
        ht = ht + sol.incident * math.sin(p.theta)
    return complex(hr), complex(ht)


def layer_of(design: ShellDesign, r: float) -> int:
    """Layer index (1, 2, 3) holding radius ``r``; boundaries go inward."""
    if r <= design.inner_radius:
        return 1
    return 2 if r <= design.outer_radius else 3


def field_magnitude(sol: FieldSolution, p: FieldPoint) -> float:
    """``sqrt(|h_r|^2 + |h_theta|^2)`` of the total field at ``p``."""
    hr, ht = magnetic_field(sol, layer_of(sol.design, p.r), p)
    return math.hypot(abs(hr), abs(ht))


def incident_field_at(tx: FieldSolution, d: float) -> float:
    """On-axis field magnitude ``|h_r3(d, 0)|`` seen by a coaxial receiver at ``d``."""
    if tx.side is not Side.TX:
        raise DomainError("incident field needs a transmitter solution")
    if not d > 2 * tx.design.outer_radius:
        raise DomainError(f"distance {d} m overlaps the shells (need d > 2 r2)")
    hr, _ = magnetic_field(tx, 3, FieldPoint(d, 0.0))
    return abs(hr)


def dipole_field(a: float, current: float, k: complex, p: FieldPoint,
                 eta: complex = 0.0, mu: complex | None = None) -> tuple[complex, complex, complex]:
    """Small-loop fields ``(h_r, h_theta, e_phi)`` with ``exp(-jkr)`` retardation.

    ``eta`` is the wave impedance used for ``e_phi``; ``mu`` is accepted for
    symmetry with the layer formulas and does not enter the magnetic field.
    """
    r, th = p.r, p.theta
    kr = k * r
    ph = cmath.exp(-1j * kr)
    if k == 0:
        hr = a**2 * current * math.cos(th) / (2 * r**3)
        ht = a**2 * current * math.sin(th) / (4 * r**3)
        return complex(hr), complex(ht), 0j
    hr = 1j * k * a**2 * current * math.cos(th) / (2 * r**2) * (1 + 1 / (1j * kr)) * ph
    ht = -(k**2) * a**2 * current * math.sin(th) / (4 * r) * (1 + 1 / (1j * kr) - 1 / kr**2) * ph
    ep = eta * k**2 * a**2 * current * math.sin(th) / (4 * r) * (1 + 1 / (1j * kr)) * ph
    return complex(hr), complex(ht), complex(ep)
