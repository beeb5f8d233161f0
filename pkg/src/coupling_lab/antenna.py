"""Uniform linear arrays of loaded Hertzian dipoles.

All lengths are in meters, impedances in ohms and angles in radians.
Intra-array impedance matrices are symmetric Toeplitz and are stored by
their first row; :meth:`IntraArrayMatrix.dense` materializes them.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from .errors import DegenerateGeometryError, DomainError

#: Free-space impedance in ohms.
ETA_0 = 376.730313668

#: Default ceiling on dense materialization (N x N complex matrices).
DENSE_CAP = 20_000

INTERARRAY_AMPLITUDES = ("unit_gain", "kernel_consistent")


@dataclass(frozen=True)
class PhysicalConstants:
    eta: float = ETA_0

    def __post_init__(self):
        if not self.eta > 0:
            raise DomainError(f"free-space impedance must be positive, got {self.eta}")


DEFAULT_CONSTANTS = PhysicalConstants()


class SpacingMode(enum.Enum):
    FIXED_SPACING = "fixed_spacing"
    FIXED_APERTURE = "fixed_aperture"

    @classmethod
    def parse(cls, text):
        key = str(text).strip().lower().replace("-", "_")
        aliases = {"fixedspacing": "fixed_spacing", "fixedaperture": "fixed_aperture"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown spacing mode {text!r}") from None


@dataclass(frozen=True)
class UlaSpec:
    """Uniform linear array.

    Build instances with :meth:`with_spacing` or :meth:`with_aperture`; the
    dependent length is derived so that ``aperture == (N - 1) * spacing``
    (fixed spacing) or ``spacing == aperture / (N - 1)`` (fixed aperture).
    """

    n_elements: int
    spacing: float
    aperture: float
    dipole_length: float
    wavelength: float
    spacing_mode: SpacingMode

    @classmethod
    def with_spacing(cls, n_elements, spacing, dipole_length, wavelength):
        return cls(n_elements, spacing, (n_elements - 1) * spacing,
                   dipole_length, wavelength, SpacingMode.FIXED_SPACING)

    @classmethod
    def with_aperture(cls, n_elements, aperture, dipole_length, wavelength):
        if n_elements < 2:
            raise DomainError("a fixed-aperture array needs at least 2 elements")
        return cls(n_elements, aperture / (n_elements - 1), aperture,
                   dipole_length, wavelength, SpacingMode.FIXED_APERTURE)

    def __post_init__(self):
        if int(self.n_elements) != self.n_elements or self.n_elements < 1:
            raise DomainError(f"element count must be a positive integer, got {self.n_elements}")
        if not (self.dipole_length > 0 and self.wavelength > 0):
            raise DomainError("dipole length and wavelength must be positive")
        if self.n_elements >= 2 and not self.spacing > 0:
            raise DomainError(f"spacing must be positive, got {self.spacing}")
        n = self.n_elements
        if self.spacing_mode is SpacingMode.FIXED_SPACING:
            if self.aperture != (n - 1) * self.spacing:
                raise DomainError("fixed-spacing array requires aperture == (N-1)*spacing")
        elif n < 2 or self.spacing != self.aperture / (n - 1):
            raise DomainError("fixed-aperture array requires spacing == aperture/(N-1)")

    @property
    def wavenumber(self):
        return 2 * math.pi / self.wavelength

    def resized(self, n_elements):
        """Same array template with a different element count."""
        if self.spacing_mode is SpacingMode.FIXED_SPACING:
            return UlaSpec.with_spacing(n_elements, self.spacing,
                                        self.dipole_length, self.wavelength)
        return UlaSpec.with_aperture(n_elements, self.aperture,
                                     self.dipole_length, self.wavelength)


@dataclass(frozen=True)
class LinkGeometry:
    """Placement of the single antenna relative to the first array element."""

    distance: float
    incidence_angle: float = math.pi / 2

    def __post_init__(self):
        if not self.distance > 0:
            raise DomainError(f"link distance must be positive, got {self.distance}")
        if not 0 < self.incidence_angle <= math.pi:
            raise DomainError(f"incidence angle must lie in (0, pi], got {self.incidence_angle}")

    @property
    def is_broadside(self):
        return self.incidence_angle == math.pi / 2


@dataclass(frozen=True, eq=False)
class IntraArrayMatrix:
    """Symmetric Toeplitz impedance matrix stored by its first row."""

    first_row: np.ndarray

    @property
    def n(self):
        return len(self.first_row)

    def shifted(self, z):
        """Return the matrix ``z*I + self`` (e.g. generator plus array)."""
        row = np.array(self.first_row, dtype=complex)
        row[0] += z
        return IntraArrayMatrix(row)

    def dense(self, cap=DENSE_CAP):
        if self.n > cap:
            raise DomainError(f"refusing to materialize a {self.n}x{self.n} matrix (cap {cap})")
        # toeplitz(c) alone would conjugate the first row; reciprocity wants a plain transpose
        return toeplitz(self.first_row, self.first_row)


@dataclass(frozen=True, eq=False)
class InterArrayVector:
    entries: np.ndarray

    @property
    def n(self):
        return len(self.entries)


def radiation_resistance(dipole_length, wavelength, constants=DEFAULT_CONSTANTS):
    """Radiation resistance (2/3)*pi*eta*(l/lambda)**2 of a Hertzian dipole, in ohms."""
    if not (dipole_length > 0 and wavelength > 0):
        raise DomainError("dipole length and wavelength must be positive")
    return 2.0 / 3.0 * math.pi * constants.eta * (dipole_length / wavelength) ** 2


def psi(x):
    """Normalized near-field kernel of a Hertzian dipole.

    ``psi(x) = 1.5j * exp(-1j*x) * (1/x - 1j/x**2 - 1/x**3)``; accepts
    scalars or arrays with every ``x > 0``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("psi is only defined for x > 0")
    inv = 1.0 / x
    val = 1.5j * np.exp(-1j * x) * (inv - 1j * inv**2 - inv**3)
    return val[()] if val.ndim == 0 else val


def intra_array_impedance(ula, constants=DEFAULT_CONSTANTS):
    r_r = radiation_resistance(ula.dipole_length, ula.wavelength, constants)
    row = np.empty(ula.n_elements, dtype=complex)
    row[0] = r_r
    if ula.n_elements > 1:
        m = np.arange(1, ula.n_elements, dtype=float)
        row[1:] = r_r * psi(ula.wavenumber * ula.spacing * m)
    return IntraArrayMatrix(row)


def element_distances(ula, link):
    """Distance from the single antenna to each array element (law of cosines)."""
    r = link.distance
    offsets = np.arange(ula.n_elements, dtype=float) * ula.spacing
    # cos(pi/2) is not exactly zero in binary floating point
    cos_t = 0.0 if link.is_broadside else math.cos(link.incidence_angle)
    radicand = r * r + offsets * offsets - 2.0 * r * offsets * cos_t
    dist = np.sqrt(np.maximum(radicand, 0.0))
    if np.any(dist <= 1e-12 * r):
        n_bad = int(np.argmin(dist))
        raise DegenerateGeometryError(f"array element {n_bad} coincides with the endpoint")
    return dist


def interarray_gain(amplitude):
    if amplitude == "unit_gain":
        return 1.0
    if amplitude == "kernel_consistent":
        return 1.5
    raise DomainError(f"interarray_amplitude must be one of {INTERARRAY_AMPLITUDES}, got {amplitude!r}")


def inter_array_coupling(ula, link, constants=DEFAULT_CONSTANTS, amplitude="unit_gain"):
    """Point-source coupling ``j*R_r*exp(-j*k*r_n)/(k*r_n)`` to every element.

    ``amplitude="kernel_consistent"`` multiplies the entries by the 3/2
    factor carried by the leading term of :func:`psi`.
    """
    r_r = radiation_resistance(ula.dipole_length, ula.wavelength, constants)
    kr = ula.wavenumber * element_distances(ula, link)
    return InterArrayVector(interarray_gain(amplitude) * 1j * r_r * np.exp(-1j * kr) / kr)
