"""Scenario configuration, field-region labels and N-sweeps."""

import dataclasses
import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .antenna import (DENSE_CAP, ETA_0, LinkGeometry, PhysicalConstants, SpacingMode, UlaSpec,
                      interarray_gain)
from .criteria import EvaluationOptions, Role, ScenarioPoint, evaluate_condition
from .errors import ConfigError, CouplingLabError, DomainError, SweepError
from .multiport import TerminationSpec

THREADS_ENV = "COUPLING_LAB_THREADS"

#: Relative band around the Fresnel distance treated as the region boundary.
BOUNDARY_RTOL = 0.01

OUT_OF_RANGE = "model-out-of-range"


class Region(enum.Enum):
    REACTIVE_NEAR_FIELD = "ReactiveNearField"
    RADIATIVE_NEAR_FIELD = "RadiativeNearField"
    FAR_FIELD = "FarField"


@dataclass(frozen=True)
class RegionClassification:
    fresnel_distance: float
    fraunhofer_distance: float
    region: Region
    near_boundary: bool = False

    @property
    def out_of_range(self):
        """The point-source link model does not hold in the reactive near field."""
        return self.region is Region.REACTIVE_NEAR_FIELD


def fresnel_distance(aperture, wavelength):
    return 0.62 * math.sqrt(aperture**3 / wavelength)


def fraunhofer_distance(aperture, wavelength):
    return 2.0 * aperture**2 / wavelength


def classify_region(aperture, wavelength, distance, boundary_rtol=BOUNDARY_RTOL):
    """Label the field region of an aperture seen from ``distance``.

    A distance within ``boundary_rtol`` (relative) of the Fresnel distance
    is a boundary case: it is labelled radiative and flagged, which absorbs
    the two-significant-figure rounding of the 0.62 coefficient.
    """
    if not (aperture > 0 and wavelength > 0 and distance > 0):
        raise DomainError("aperture, wavelength and distance must be positive")
    fresnel = fresnel_distance(aperture, wavelength)
    fraunhofer = fraunhofer_distance(aperture, wavelength)
    near_fresnel = abs(distance - fresnel) <= boundary_rtol * fresnel
    near_fraunhofer = abs(distance - fraunhofer) <= boundary_rtol * fraunhofer
    if distance < fresnel and not near_fresnel:
        region = Region.REACTIVE_NEAR_FIELD
    elif distance < fraunhofer:
        region = Region.RADIATIVE_NEAR_FIELD
    else:
        region = Region.FAR_FIELD
    return RegionClassification(fresnel, fraunhofer, region, near_fresnel or near_fraunhofer)


@dataclass(frozen=True)
class ScenarioConfig:
    """Flat description of a sweep; every field is also a config-file key.

    ``spacing`` is used in fixed-spacing mode and ``aperture`` in
    fixed-aperture mode. Defaults reproduce the fixed-spacing preset.
    """

    name: str = "custom"
    spacing_mode: SpacingMode = SpacingMode.FIXED_SPACING
    spacing: float = 0.5e-3
    aperture: float = 1.0
    dipole_length: float = 0.05e-3
    wavelength: float = 1e-3
    distance: float = 55.0
    incidence_angle: float = math.pi / 2
    z_generator: complex = 186 - 31.6j
    z_load: complex = 186 - 31.6j
    n_min: int = 10
    n_max: int = 2000
    points: int = 60
    grid_spacing: str = "log"
    threshold: float = 10.0
    rhs_exact_cap: int = DENSE_CAP
    eta: float = ETA_0
    role: Role = Role.MISO
    interarray_amplitude: str = "unit_gain"

    def __post_init__(self):
        lower = 2 if self.spacing_mode is SpacingMode.FIXED_APERTURE else 1
        if self.n_min < lower:
            raise ConfigError(f"n_min must be >= {lower} in {self.spacing_mode.value} mode")
        if self.n_max < self.n_min:
            raise ConfigError("n_max must not be smaller than n_min")
        if self.points < 1:
            raise ConfigError("points must be positive")
        if self.grid_spacing not in ("log", "linear"):
            raise ConfigError(f"grid_spacing must be 'log' or 'linear', got {self.grid_spacing!r}")
        try:
            self.link
            self.terminations
            self.constants
            self.ula(self.n_min)
            interarray_gain(self.interarray_amplitude)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None

    def ula(self, n):
        if self.spacing_mode is SpacingMode.FIXED_SPACING:
            return UlaSpec.with_spacing(int(n), self.spacing, self.dipole_length, self.wavelength)
        return UlaSpec.with_aperture(int(n), self.aperture, self.dipole_length, self.wavelength)

    @property
    def link(self):
        return LinkGeometry(self.distance, self.incidence_angle)

    @property
    def terminations(self):
        return TerminationSpec(self.z_generator, self.z_load)

    @property
    def constants(self):
        return PhysicalConstants(self.eta)

    @property
    def options(self):
        return EvaluationOptions(self.threshold, self.rhs_exact_cap, self.constants,
                                 self.interarray_amplitude)

    def point(self, n):
        return ScenarioPoint(self.ula(n), self.link, self.terminations, self.role)

    def n_values(self):
        """Deduplicated ascending integer grid of array sizes."""
        if self.grid_spacing == "log":
            raw = np.geomspace(self.n_min, self.n_max, self.points)
        else:
            raw = np.linspace(self.n_min, self.n_max, self.points)
        grid = np.unique(np.clip(np.rint(raw), self.n_min, self.n_max).astype(np.int64))
        return [int(n) for n in grid]

    def replace(self, **changes):
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


def scenario1():
    """Fixed half-wavelength spacing, receiver 55 m away."""
    return ScenarioConfig(name="scenario1")


def scenario2():
    """Fixed 1 m aperture, receiver at the computed Fresnel distance."""
    wavelength, aperture = 1e-3, 1.0
    return ScenarioConfig(name="scenario2", spacing_mode=SpacingMode.FIXED_APERTURE,
                          aperture=aperture, wavelength=wavelength,
                          distance=fresnel_distance(aperture, wavelength),
                          n_min=10, n_max=10**6)


PRESETS = {"scenario1": scenario1, "scenario2": scenario2}


def _parse_complex(text):
    return complex(text.replace(" ", "").replace("i", "j"))


def _parse_int(text):
    value = float(text)
    if value != int(value):
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


_PARSERS = {
    "name": str, "spacing_mode": SpacingMode.parse, "spacing": float, "aperture": float,
    "dipole_length": float, "wavelength": float, "distance": float,
    "incidence_angle": float, "z_generator": _parse_complex, "z_load": _parse_complex,
    "n_min": _parse_int, "n_max": _parse_int, "points": _parse_int, "grid_spacing": str,
    "threshold": float, "rhs_exact_cap": _parse_int, "eta": float,
    "role": lambda s: Role(s.lower()), "interarray_amplitude": str,
}


def parse_config(text):
    """Parse ``key = value`` lines (``#`` starts a comment) into a config."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except (ValueError, CouplingLabError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    return ScenarioConfig(**values)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


@dataclass(frozen=True)
class SweepRow:
    n: int
    d_m: float
    aperture_m: float
    region: RegionClassification
    lhs: float
    rhs_exact: Optional[float]
    rhs_bound: float
    poisson_limit: Optional[float]
    margin_bound: float
    margin_exact: Optional[float]
    verdict: bool

    @property
    def annotation(self):
        return OUT_OF_RANGE if self.region.out_of_range else ""


def sweep_row(config, n):
    report = evaluate_condition(config.point(n), config.options)
    # a single dipole has no aperture; its length is the radiating dimension
    size = report.aperture if report.aperture > 0 else config.dipole_length
    region = classify_region(size, config.wavelength, config.distance)
    return SweepRow(n, report.spacing, report.aperture, region, report.lhs,
                    report.sides.rhs_exact, report.sides.rhs_bound, report.poisson_limit,
                    report.margin_bound, report.margin_exact, report.passed)


def worker_count():
    """Worker threads for sweeps: ``$COUPLING_LAB_THREADS`` if set, else the CPU count."""
    env = os.environ.get(THREADS_ENV, "").strip()
    if not env:
        return os.cpu_count() or 1
    try:
        return max(1, int(env))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None


def run_sweep(config, workers=None):
    """Evaluate every grid point; rows come back in ascending N."""
    def row(n):
        try:
            return sweep_row(config, n)
        except CouplingLabError as exc:
            raise SweepError(n, exc) from exc

    grid = config.n_values()
    workers = worker_count() if workers is None else workers
    if workers <= 1:
        return [row(n) for n in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(row, grid))
