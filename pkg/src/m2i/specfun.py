"""Order-1 spherical Bessel, Neumann and Hankel functions for complex argument.

Only the first-order mode is needed by the three-layer field model, so the
functions are written out in closed form rather than through a general
recurrence.  Near the origin ``j1`` and its derivative switch to a power
series, since ``sin z / z**2 - cos z / z`` loses every digit as ``z -> 0``.
"""

from __future__ import annotations

import cmath
from enum import Enum

from .errors import DomainError

__all__ = [
    "Kind",
    "sqrt_lossy",
    "sph1",
    "radial_bracket",
    "SERIES_RADIUS",
]

# |z| below which j1 / j1' are evaluated from the Taylor series
SERIES_RADIUS = 1e-2


class Kind(str, Enum):
    J = "J"
    Y = "Y"
    H2 = "H2"

    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str):
            for member in cls:
                if member.value == value.upper():
                    return member
        return None


def sqrt_lossy(z: complex) -> complex:
    """Square root on the branch used for wavenumbers under ``exp(+j w t)``.

    The root with ``Im <= 0`` is chosen so that ``exp(-j k r)`` decays
    outward.  On the negative real axis this gives ``-j*sqrt(|z|)``, i.e.
    ``k = -j*rho``.  When the imaginary part of the root is zero, the root
    with ``Re >= 0`` is returned.
    """
    z = complex(z)
    if z == 0:
        return 0j
    w = cmath.sqrt(z)
    if w.imag > 0 or (w.imag == 0 and w.real < 0):
        w = -w
    return w


def _j1_series(z: complex) -> tuple[complex, complex]:
    # j1(z) = sum_n (-1)^n z^(2n+1) / (2^n n! (2n+3)!!)
    z2 = z * z
    value = z / 3 * (1 - z2 / 10 * (1 - z2 / 28 * (1 - z2 / 54 * (1 - z2 / 88))))
    deriv = 1 / 3 * (1 - 3 * z2 / 10 * (1 - 5 * z2 / 84 * (1 - 7 * z2 / 270 * (1 - 9 * z2 / 616))))
    return value, deriv


def _j0(z: complex) -> complex:
    if abs(z) < SERIES_RADIUS:
        z2 = z * z
        return 1 - z2 / 6 * (1 - z2 / 20 * (1 - z2 / 42))
    return cmath.sin(z) / z


def _j1(z: complex) -> tuple[complex, complex]:
    if abs(z) < SERIES_RADIUS:
        return _j1_series(z)
    s, c = cmath.sin(z), cmath.cos(z)
    value = s / (z * z) - c / z
    return value, _j0(z) - 2 * value / z


def _y1(z: complex) -> tuple[complex, complex]:
    s, c = cmath.sin(z), cmath.cos(z)
    value = -c / (z * z) - s / z
    y0 = -c / z
    return value, y0 - 2 * value / z


def _h2(z: complex) -> tuple[complex, complex]:
    # direct form; j1 - j*y1 cancels catastrophically once Im z << 0
    e = cmath.exp(-1j * z)
    value = -e * (z - 1j) / (z * z)
    h0 = 1j * e / z
    return value, h0 - 2 * value / z


def sph1(kind: Kind | str, z: complex) -> tuple[complex, complex]:
    """Return ``(f1(z), f1'(z))`` for ``f1`` in ``{j1, y1, h1^(2)}``.

    ``h1^(2) = j1 - j*y1`` is evaluated as ``-exp(-jz) (z - j) / z**2``.
    Derivatives come from the recurrence
    ``f1' = f0 - 2 f1 / z`` and are never finite-differenced.

    Raises
    ------
    DomainError
        For ``Y`` or ``H2`` at ``z == 0``.
    """
    kind = Kind(kind)
    z = complex(z)
    if kind is Kind.J:
        return _j1(z)
    if z == 0:
        raise DomainError(f"{kind.value}1 is singular at z = 0")
    if kind is Kind.Y:
        return _y1(z)
    return _h2(z)


def radial_bracket(kind: Kind | str, z: complex) -> complex:
    """``f1(z) + z f1'(z)``, i.e. ``d/dz [z f1(z)]``.

    This is the combination that multiplies the theta component of the
    layer fields.
    """
    value, deriv = sph1(kind, z)
    return value + complex(z) * deriv
