"""Layer materials: complex permittivity, permeability and wavenumber."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .constants import EPS0, MU0
from .errors import DomainError, UnknownPreset
from .specfun import sqrt_lossy

__all__ = [
    "Medium",
    "DrudeParams",
    "LayerStack",
    "complex_permittivity",
    "wavenumber",
    "drude_mu",
    "preset_medium",
    "PRESETS",
    "SHELL_LOSS",
    "DRUDE_PLASMA_FREQ",
    "DRUDE_DAMPING",
    "table1_stack",
    "angular",
]


@dataclass(frozen=True)
class Medium:
    """Homogeneous, isotropic layer.

    ``rel_permeability`` may be complex (and negative for the shell);
    its imaginary part must be non-positive for a passive material.
    """

    rel_permittivity: float = 1.0
    rel_permeability: complex = 1.0
    conductivity: float = 0.0

    def __post_init__(self):
        if not self.rel_permittivity > 0:
            raise DomainError("relative permittivity must be positive")
        if not self.conductivity >= 0:
            raise DomainError("conductivity must be non-negative")
        if complex(self.rel_permeability).imag > 0:
            raise DomainError("Im(rel_permeability) > 0 is an active material")

    @property
    def mu(self) -> complex:
        return MU0 * complex(self.rel_permeability)

    def with_mu(self, rel_permeability: complex) -> "Medium":
        return replace(self, rel_permeability=rel_permeability)


@dataclass(frozen=True)
class DrudeParams:
    """Drude dispersion of the shell permeability."""

    plasma_freq: float
    damping: float = 0.0
    rel_permittivity: float = 1.0

    def __post_init__(self):
        if not self.plasma_freq > 0:
            raise DomainError("plasma frequency must be positive")
        if not self.damping >= 0:
            raise DomainError("damping must be non-negative")

    def at(self, omega: float) -> Medium:
        return Medium(self.rel_permittivity, drude_mu(self, omega), 0.0)


def _check_omega(omega: float) -> None:
    if not omega > 0:
        raise DomainError(f"angular frequency must be positive, got {omega!r}")


def complex_permittivity(m: Medium, omega: float) -> complex:
    """``eps0*eps_r - j*sigma/omega`` in F/m."""
    _check_omega(omega)
    return complex(EPS0 * m.rel_permittivity, -m.conductivity / omega)


def wavenumber(m: Medium, omega: float) -> complex:
    """``sqrt(omega**2 mu eps_c)`` on the decaying branch (Im k <= 0)."""
    return sqrt_lossy(omega**2 * m.mu * complex_permittivity(m, omega))


def drude_mu(p: DrudeParams, omega: float) -> complex:
    """Relative permeability ``1 - wp**2 / (w (w - j G))``."""
    _check_omega(omega)
    return 1 - p.plasma_freq**2 / (omega * complex(omega, -p.damping))


@dataclass(frozen=True)
class LayerStack:
    """Infill (layer 1), shell (layer 2) and surrounding medium (layer 3)."""

    layer1: Medium
    layer2: Medium | DrudeParams
    layer3: Medium

    def layers(self, omega: float) -> tuple[Medium, Medium, Medium]:
        shell = self.layer2.at(omega) if isinstance(self.layer2, DrudeParams) else self.layer2
        return self.layer1, shell, self.layer3

    def mus(self, omega: float) -> tuple[complex, complex, complex]:
        return tuple(m.mu for m in self.layers(omega))

    def wavenumbers(self, omega: float) -> tuple[complex, complex, complex]:
        return tuple(wavenumber(m, omega) for m in self.layers(omega))

    def shell_less(self) -> "LayerStack":
        """Same infill, with the shell replaced by the surrounding medium."""
        return replace(self, layer2=self.layer3)

    def uniform(self) -> "LayerStack":
        """Every layer equal to the surrounding medium (a bare coil)."""
        return LayerStack(self.layer3, self.layer3, self.layer3)


PRESETS = {
    "air": Medium(1.0, 1.0, 0.0),
    "soil": Medium(2.0, 1.0, 2e-3),
    "concrete": Medium(4.5, 1.0, 1e-4),
    "water": Medium(80.1, 1.0, 1e-2),
}

# static shell permeability for the three loss levels at 10 MHz
SHELL_LOSS = {
    "no": complex(-1.0, 0.0),
    "low": complex(-1.0, -0.005),
    "high": complex(-1.0, -0.05),
}

DRUDE_PLASMA_FREQ = 8.89e7  # rad/s
DRUDE_DAMPING = {"no": 0.0, "low": 1.57e5, "high": 1.57e6}  # rad/s


def preset_medium(name: str) -> Medium:
    try:
        return PRESETS[name]
    except KeyError:
        raise UnknownPreset(f"unknown medium preset {name!r}; choose from {sorted(PRESETS)}") from None


def table1_stack(loss: str = "no", medium: str = "soil", infill_mu: float = 5.0,
                 drude: bool = False) -> LayerStack:
    """The default three-layer stack: mu1 = 5, negative-mu shell, lossy soil."""
    if drude:
        shell = DrudeParams(DRUDE_PLASMA_FREQ, DRUDE_DAMPING[loss])
    else:
        shell = Medium(1.0, SHELL_LOSS[loss], 0.0)
    return LayerStack(Medium(1.0, infill_mu, 0.0), shell, preset_medium(medium))


def angular(freq_hz: float) -> float:
    return 2 * math.pi * freq_hz
