"""Validity conditions for neglecting receiver-to-transmitter coupling.

The condition compares the squared norm of the inter-array vector, scaled
by the single-antenna impedance, with the Frobenius norm of the loaded
array matrix. Positive series are summed in chunks combined with the
exactly rounded ``math.fsum``; within a chunk, harmonic numbers also use
``fsum`` while the streamed link series uses ``numpy`` pairwise summation.
"""

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .antenna import (DEFAULT_CONSTANTS, DENSE_CAP, SpacingMode, inter_array_coupling,
                      interarray_gain, intra_array_impedance, radiation_resistance)
from .errors import DomainError
from .multiport import PartitionedImpedance, _LU

CHUNK = 1 << 20
#: Above this value of pi*r/d, coth(pi*r/d) is 1 to double precision.
COTH_SATURATION = 40.0


class Role(enum.Enum):
    MISO = "miso"
    SIMO = "simo"


class Side(enum.Enum):
    TRANSMIT = "transmit"
    RECEIVE = "receive"


@dataclass(frozen=True)
class ConditionSides:
    """Both sides of the coupling condition, in ohms.

    ``rhs_bound``/``margin_bound`` are absent for networks without the
    Toeplitz structure, ``rhs_exact``/``margin_exact`` when the array is
    larger than the exact-evaluation cap.
    """

    lhs: float
    rhs_exact: Optional[float] = None
    rhs_bound: Optional[float] = None

    @property
    def margin_bound(self):
        return _ratio(self.rhs_bound, self.lhs)

    @property
    def margin_exact(self):
        return _ratio(self.rhs_exact, self.lhs)


def _ratio(num, den):
    if num is None:
        return None
    return math.inf if den == 0 else num / den


@dataclass(frozen=True)
class AsymptoticFit:
    exponent: float
    fit_window: tuple
    residual: float
    prefactor: float


def general_condition(net, term, side=Side.TRANSMIT):
    """Frobenius-norm condition for an arbitrary two-sided network.

    ``Side.TRANSMIT`` compares ``||Z_TR (Z_L I + Z_R)^-1 Z_RT||_F`` with
    ``||Z_G I + Z_T||_F``; ``Side.RECEIVE`` is the dual comparison.
    """
    gt = term.z_generator * np.eye(net.n_t) + net.tt
    rl = term.z_load * np.eye(net.n_r) + net.rr
    if side is Side.TRANSMIT:
        lhs = net.tr @ _LU(rl, "Z_L I + Z_R").solve(net.rt)
        rhs = gt
    else:
        lhs = net.rt @ _LU(gt, "Z_G I + Z_T").solve(net.tr)
        rhs = rl
    return ConditionSides(lhs=float(np.linalg.norm(lhs)), rhs_exact=float(np.linalg.norm(rhs)))


def miso_lhs(z_vec, z_rl):
    """``||z||^2 / |Z_RL|``: the rank-one form of the condition's left side."""
    if z_rl == 0:
        raise DomainError("single-antenna impedance must be nonzero")
    z = np.asarray(getattr(z_vec, "entries", z_vec))
    return math.fsum(np.abs(z) ** 2) / abs(z_rl)


def toeplitz_frobenius(first_row, n=None):
    """Frobenius norm of the n x n symmetric Toeplitz matrix with this first row."""
    row = np.asarray(first_row)
    n = len(row) if n is None else n
    if len(row) != n or n < 1:
        raise DomainError(f"expected a first row of length {n}")
    mag2 = np.abs(row) ** 2
    weights = 2.0 * np.arange(n, 0, -1, dtype=float)
    weights[0] = n
    return math.sqrt(math.fsum(weights * mag2))


def _chunked_sum(term, start, stop, reverse=False):
    """Sum ``term(m)`` for integer m in [start, stop) in float64 chunks."""
    bounds = list(range(start, stop, CHUNK))
    if reverse:
        bounds.reverse()
    parts = []
    for lo in bounds:
        m = np.arange(lo, min(lo + CHUNK, stop), dtype=float)
        vals = term(m[::-1] if reverse else m)
        parts.append(math.fsum(vals) if reverse else float(np.sum(vals)))
    return math.fsum(parts)


def generalized_harmonic(n, q):
    """``H_n^(q) = sum_{m=1}^{n} m**-q``, accumulated smallest term first."""
    if n < 0 or int(n) != n:
        raise DomainError(f"n must be a nonnegative integer, got {n}")
    if q <= 0 or int(q) != q:
        raise DomainError(f"q must be a positive integer, got {q}")
    return _chunked_sum(lambda m: m ** -float(q), 1, int(n) + 1, reverse=True)


def frobenius_lower_bound(ula, term_impedance, constants=DEFAULT_CONSTANTS):
    """``sqrt(N) * ||first row of (Z*I + Z_array)||_2`` via harmonic numbers.

    ``term_impedance`` is the termination seen by the array (``Z_G`` for a
    transmitting array); a :class:`~coupling_lab.multiport.TerminationSpec`
    is accepted and read as a transmitting array.
    """
    z = getattr(term_impedance, "z_generator", term_impedance)
    r_r = radiation_resistance(ula.dipole_length, ula.wavelength, constants)
    n = ula.n_elements
    row_sq = abs(z + r_r) ** 2
    if n > 1:
        kd2 = (ula.wavenumber * ula.spacing) ** 2
        h2, h4, h6 = (generalized_harmonic(n - 1, q) for q in (2, 4, 6))
        row_sq += 2.25 * r_r**2 * (h2 / kd2 - h4 / kd2**2 + h6 / kd2**3)
    return math.sqrt(n * row_sq)


def _check_broadside(link):
    if not link.is_broadside:
        raise DomainError("closed-form partial sum needs incidence angle pi/2; "
                          "use miso_lhs over inter_array_coupling instead")


def lhs_closed_partial(ula, link, z_rl, constants=DEFAULT_CONSTANTS, amplitude="unit_gain"):
    """Streamed ``(R_r/k)^2 * sum_n 1/(r^2 + (n d)^2) / |Z_RL|`` at broadside."""
    _check_broadside(link)
    r_r = radiation_resistance(ula.dipole_length, ula.wavelength, constants)
    r2, d = link.distance**2, ula.spacing
    series = _chunked_sum(lambda m: 1.0 / (r2 + (m * d) ** 2), 0, ula.n_elements)
    scale = (interarray_gain(amplitude) * r_r / ula.wavenumber) ** 2
    return scale * series / abs(z_rl)


def poisson_limit(d, r, wavelength, r_r, z_rl, amplitude="unit_gain"):
    """Limit of :func:`lhs_closed_partial` as the array grows at fixed spacing."""
    if not (d > 0 and r > 0):
        raise DomainError("spacing and distance must be positive")
    x = math.pi * r / d
    coth = 1.0 if x > COTH_SATURATION else 1.0 / math.tanh(x)
    rk = r * 2 * math.pi / wavelength
    gain = interarray_gain(amplitude) ** 2
    return gain * r_r**2 / abs(z_rl) * (d + r * math.pi * coth) / (2 * d * rk**2)


def fixed_aperture_term_bound(n, n_elements, aperture, r, r_r, k):
    """Term ``a_n`` of the fixed-aperture series and its floor ``(R_r/k)^2/(r^2+D^2)``."""
    if not 1 <= n <= n_elements - 1:
        raise DomainError(f"term index must satisfy 1 <= n <= N-1, got n={n}, N={n_elements}")
    num = (r_r / k) ** 2
    # n/(N-1) <= 1 exactly in floating point, so the offset never exceeds D
    a_n = num / (r**2 + (aperture * (n / (n_elements - 1))) ** 2)
    floor = num / (r**2 + aperture**2)
    assert a_n >= floor
    return a_n, floor


def estimate_growth_exponent(samples, window=None):
    """Least-squares slope of log(value) against log(N)."""
    pts = [(n, v) for n, v in samples
           if window is None or window[0] <= n <= window[1]]
    if any(v <= 0 for _, v in pts):
        raise DomainError("growth fit needs strictly positive values")
    ns = np.array([p[0] for p in pts], dtype=float)
    if len(np.unique(ns)) < 3:
        raise DomainError("growth fit needs at least 3 distinct N in the window")
    x, y = np.log(ns), np.log([p[1] for p in pts])
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    return AsymptoticFit(float(slope), (int(ns.min()), int(ns.max())),
                         float(np.sqrt(np.mean(resid**2))), float(math.exp(icpt)))


@dataclass(frozen=True)
class ScenarioPoint:
    ula: object
    link: object
    terminations: object
    role: Role = Role.MISO


@dataclass(frozen=True)
class EvaluationOptions:
    threshold: float = 10.0
    rhs_exact_cap: int = DENSE_CAP
    constants: object = field(default=DEFAULT_CONSTANTS)
    interarray_amplitude: str = "unit_gain"


@dataclass(frozen=True)
class CouplingReport:
    role: Role
    n: int
    spacing: float
    aperture: float
    sides: ConditionSides
    poisson_limit: Optional[float]
    threshold: float

    @property
    def lhs(self):
        return self.sides.lhs

    @property
    def margin_bound(self):
        return self.sides.margin_bound

    @property
    def margin_exact(self):
        return self.sides.margin_exact

    @property
    def passed(self):
        return self.margin_bound >= self.threshold

    @property
    def bound_ratio(self):
        """Measured ``rhs_exact / rhs_bound`` (tightness of the row bound)."""
        s = self.sides
        return None if s.rhs_exact is None else s.rhs_exact / s.rhs_bound


def role_impedances(point, constants=DEFAULT_CONSTANTS):
    """(array-side termination, single-antenna loaded impedance) for a role."""
    term = point.terminations
    array_z, single_z = term.z_generator, term.z_load
    if point.role is Role.SIMO:
        array_z, single_z = single_z, array_z
    r_r = radiation_resistance(point.ula.dipole_length, point.ula.wavelength, constants)
    return array_z, single_z + r_r


def evaluate_condition(point, options=EvaluationOptions()):
    """Evaluate the sufficient condition at one (array, link, terminations) point.

    For ``Role.SIMO`` the array terminations and the single-antenna
    impedance swap roles; the formulas are otherwise the MISO ones.
    """
    ula, link, c = point.ula, point.link, options.constants
    array_z, single_z = role_impedances(point, c)
    amp = options.interarray_amplitude
    if link.is_broadside:
        lhs = lhs_closed_partial(ula, link, single_z, c, amp)
    else:
        lhs = miso_lhs(inter_array_coupling(ula, link, c, amp), single_z)
    rhs_bound = frobenius_lower_bound(ula, array_z, c)
    rhs_exact = None
    if ula.n_elements <= options.rhs_exact_cap:
        rhs_exact = toeplitz_frobenius(intra_array_impedance(ula, c).shifted(array_z).first_row)
    limit = None
    if ula.spacing_mode is SpacingMode.FIXED_SPACING and ula.spacing > 0:
        r_r = radiation_resistance(ula.dipole_length, ula.wavelength, c)
        limit = poisson_limit(ula.spacing, link.distance, ula.wavelength, r_r, single_z, amp)
    return CouplingReport(point.role, ula.n_elements, ula.spacing, ula.aperture,
                          ConditionSides(lhs, rhs_exact, rhs_bound), limit, options.threshold)


def link_network(ula, link, role=Role.MISO, constants=DEFAULT_CONSTANTS, amplitude="unit_gain"):
    """Dense antenna multiport of an array and a single dipole.

    In MISO the array transmits (``tt`` is the Toeplitz matrix); in SIMO it
    receives. The single dipole's self-impedance is ``R_r``.
    """
    z_arr = intra_array_impedance(ula, constants).dense()
    z = inter_array_coupling(ula, link, constants, amplitude).entries.reshape(-1, 1)
    r_r = radiation_resistance(ula.dipole_length, ula.wavelength, constants)
    single = np.array([[r_r]], dtype=complex)
    if role is Role.MISO:
        return PartitionedImpedance(z_arr, z, z.T, single)
    return PartitionedImpedance(single, z.T, z, z_arr)
