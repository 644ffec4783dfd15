"""Shared signal, geometry, and coefficient types used across the simulator.

All RF quantities live in complex baseband: a waveform is a sequence of
complex samples referenced to an explicit carrier frequency. Instances of
the types below are treated as immutable values after construction; no
operation in this package mutates its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299792458.0
TWO_PI = 2.0 * np.pi


class ConfigurationError(ValueError):
    """A statically invalid configuration (rates, dimensions, scenario fields)."""


class ContractViolation(ValueError):
    """Data handed between pipeline stages does not satisfy the stage contract."""


def wrap_phase(phase):
    """Reduce an angle in radians (scalar or array) to [0, 2*pi)."""
    wrapped = np.mod(np.asarray(phase, dtype=float), TWO_PI)
    # np.mod can land on exactly 2*pi for tiny negative inputs; fold the seam
    wrapped = np.where(wrapped >= TWO_PI, 0.0, wrapped)
    if np.ndim(phase) == 0:
        return float(wrapped)
    return wrapped


def wavelength_of(frequency_hz: float) -> float:
    """Free-space wavelength in meters for a given frequency."""
    if frequency_hz <= 0:
        raise ValueError("frequency must be positive")
    return SPEED_OF_LIGHT / frequency_hz


@dataclass(frozen=True, eq=False)
class ComplexEnvelope:
    """Uniformly sampled complex baseband waveform around a reference carrier.

    samples are dimensionless field amplitudes; sample_rate and carrier_freq
    are in Hz; t0 is the time of the first sample in seconds.
    """

    samples: np.ndarray
    sample_rate: float
    carrier_freq: float
    t0: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("envelope samples must form a non-empty 1-D array")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) / self.sample_rate

    def with_samples(self, samples) -> "ComplexEnvelope":
        """New envelope with the same rates/origin but different samples."""
        return ComplexEnvelope(samples, self.sample_rate, self.carrier_freq, self.t0)


def tone_envelope(num_samples: int, sample_rate: float, carrier_freq: float,
                  amplitude: float = 1.0, freq_offset: float = 0.0,
                  t0: float = 0.0) -> ComplexEnvelope:
    """Complex exponential at `freq_offset` from the carrier (constant for 0)."""
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    if freq_offset == 0.0:
        samples = np.full(num_samples, amplitude, dtype=np.complex128)
    else:
        n = np.arange(num_samples)
        samples = amplitude * np.exp(2j * np.pi * freq_offset * n / sample_rate)
    return ComplexEnvelope(samples, sample_rate, carrier_freq, t0)


@dataclass(frozen=True)
class SurfaceGeometry:
    """N x M unit-cell grid with uniform pitch.

    The surface lies in the x-y plane of its frame with outward normal +z;
    the grid is centered on `origin`. Cells are indexed row-major from the
    lower-left cell: flat index = n * cols + m.
    """

    rows: int
    cols: int
    spacing: float
    origin: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ConfigurationError("geometry needs rows >= 1 and cols >= 1")
        if self.spacing <= 0:
            raise ConfigurationError("cell spacing must be positive")
        origin = tuple(float(v) for v in self.origin)
        if len(origin) != 3:
            raise ConfigurationError("origin must be a 3-D point")
        object.__setattr__(self, "origin", origin)

    @property
    def num_cells(self) -> int:
        return self.rows * self.cols

    @property
    def normal(self) -> tuple:
        return (0.0, 0.0, 1.0)


def cell_position(geometry: SurfaceGeometry, n: int, m: int) -> np.ndarray:
    """3-D position (meters) of cell (n, m); grid centered on the origin."""
    if not (0 <= n < geometry.rows and 0 <= m < geometry.cols):
        raise ValueError(
            f"cell index ({n}, {m}) outside {geometry.rows}x{geometry.cols} grid")
    ox, oy, oz = geometry.origin
    return np.array([
        ox + (m - (geometry.cols - 1) / 2) * geometry.spacing,
        oy + (n - (geometry.rows - 1) / 2) * geometry.spacing,
        oz,
    ])


def cell_positions(geometry: SurfaceGeometry) -> np.ndarray:
    """All cell positions, shape (num_cells, 3), row-major from lower-left."""
    n, m = np.divmod(np.arange(geometry.num_cells), geometry.cols)
    ox, oy, oz = geometry.origin
    x = ox + (m - (geometry.cols - 1) / 2) * geometry.spacing
    y = oy + (n - (geometry.rows - 1) / 2) * geometry.spacing
    return np.column_stack([x, y, np.full_like(x, oz)])


@dataclass(frozen=True)
class ReflectionCoefficient:
    """Per-cell complex reflection coefficient A * exp(j*phi).

    amplitude is clipped to 1.0 when within 1e-12 above it (float dust from
    |exp(j*phi)| arithmetic); larger values are rejected. phase is stored
    normalized to [0, 2*pi).
    """

    amplitude: float
    phase: float

    def __post_init__(self):
        a = float(self.amplitude)
        if not 0.0 <= a <= 1.0 + 1e-12:
            raise ValueError(f"amplitude {a} outside [0, 1]")
        object.__setattr__(self, "amplitude", min(a, 1.0))
        object.__setattr__(self, "phase", wrap_phase(float(self.phase)))

    @property
    def value(self) -> complex:
        return self.amplitude * complex(np.cos(self.phase), np.sin(self.phase))

    @classmethod
    def from_complex(cls, z: complex) -> "ReflectionCoefficient":
        return cls(abs(z), float(np.angle(z)))


@dataclass(frozen=True, eq=False)
class CoefficientSchedule:
    """Per-cell piecewise-constant reflection coefficients at the control rate.

    values has shape (num_cells, num_steps); each value is held for
    1 / control_rate seconds (zero-order hold). Magnitudes must not exceed 1.
    """

    values: np.ndarray
    control_rate: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.ndim != 2 or values.size == 0:
            raise ValueError("schedule values must form a non-empty 2-D array")
        if self.control_rate <= 0:
            raise ValueError("control_rate must be positive")
        if np.max(np.abs(values)) > 1.0 + 1e-9:
            raise ValueError("coefficient magnitudes must stay within [0, 1]")
        object.__setattr__(self, "values", values)

    @property
    def num_cells(self) -> int:
        return self.values.shape[0]

    @property
    def num_steps(self) -> int:
        return self.values.shape[1]

    @property
    def duration(self) -> float:
        return self.num_steps / self.control_rate

    def coefficient(self, cell: int, step: int) -> ReflectionCoefficient:
        return ReflectionCoefficient.from_complex(self.values[cell, step])

    @classmethod
    def from_coefficients(cls, per_cell, control_rate: float) -> "CoefficientSchedule":
        """Build from nested sequences of ReflectionCoefficient."""
        values = np.array([[c.value for c in row] for row in per_cell],
                          dtype=np.complex128)
        return cls(values, control_rate)


def resample_hold(schedule: CoefficientSchedule, target_rate: float) -> CoefficientSchedule:
    """Zero-order-hold resampling of a schedule to an integer multiple rate.

    Each coefficient is repeated target_rate / control_rate times; fractional
    ratios are rejected rather than interpolated.
    """
    ratio_f = target_rate / schedule.control_rate
    ratio = int(round(ratio_f))
    if ratio < 1 or abs(ratio_f - ratio) > 1e-9 * ratio_f:
        raise ConfigurationError(
            f"target_rate must be an integer multiple of control_rate "
            f"(got ratio {ratio_f})")
    if ratio == 1:
        return schedule
    return CoefficientSchedule(np.repeat(schedule.values, ratio, axis=1), target_rate)


@dataclass(frozen=True, eq=False)
class PointSet:
    """Tagged 3-D observation/feed points (meters).

    Roles are free-form tags; the propagation module treats the single point
    tagged "feed" as the illuminating antenna and every other point as an
    observation point. Points must not coincide with any cell position.
    """

    positions: np.ndarray
    roles: tuple

    def __post_init__(self):
        positions = np.asarray(self.positions, dtype=float)
        if positions.ndim != 2 or positions.shape[1] != 3 or positions.shape[0] == 0:
            raise ValueError("positions must form a non-empty (P, 3) array")
        roles = tuple(str(r) for r in self.roles)
        if len(roles) != positions.shape[0]:
            raise ValueError("one role per point required")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "roles", roles)

    def __len__(self) -> int:
        return self.positions.shape[0]

    def indices_with_role(self, role: str) -> list:
        return [i for i, r in enumerate(self.roles) if r == role]

    def positions_with_role(self, role: str) -> np.ndarray:
        return self.positions[self.indices_with_role(role)]
