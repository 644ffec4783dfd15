"""Time-varying reflection control of the unit-cell grid.

Implements the per-cell reflection product, schedule application, staircase
phase ramps for frequency translation, and finite-resolution coefficient
quantization. A down-shifting ramp with period T moves a tone by -1/T; the
L-step staircase approximation concentrates sin(pi/L)/(pi/L) of the phasor
amplitude at that line and spreads the remainder over harmonics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    TWO_PI,
    CoefficientSchedule,
    ComplexEnvelope,
    ConfigurationError,
    ContractViolation,
    ReflectionCoefficient,
    wrap_phase,
)


@dataclass(frozen=True)
class QuantizationModel:
    """Finite-resolution coefficient control; None means continuous.

    Quantized phases are {phase_offset + 2*pi*k/L : k < phase_levels};
    quantized amplitudes are uniform on [0, 1]. Nearest level wins, with
    exact ties broken toward the lower level index.
    """

    phase_levels: int | None = None
    amplitude_levels: int | None = None
    phase_offset: float = 0.0

    def __post_init__(self):
        for name in ("phase_levels", "amplitude_levels"):
            levels = getattr(self, name)
            if levels is not None and levels < 1:
                raise ConfigurationError(f"{name} must be None or >= 1")
        object.__setattr__(self, "phase_offset", wrap_phase(float(self.phase_offset)))

    @property
    def is_continuous(self) -> bool:
        return self.phase_levels is None and self.amplitude_levels is None


CONTINUOUS = QuantizationModel()


@dataclass(frozen=True)
class StaircaseRampSpec:
    """L-step staircase approximation of a time-linear phase ramp.

    period is the time for a full 2*pi phase sweep; direction is the sign of
    the induced frequency shift (-1, the default, shifts down by 1/period).
    """

    period: float
    steps_per_period: int
    direction: int = -1
    amplitude: float = 1.0

    def __post_init__(self):
        if self.period <= 0:
            raise ConfigurationError("staircase period must be positive")
        if self.steps_per_period < 2:
            raise ConfigurationError("staircase needs at least 2 steps per period")
        if self.direction not in (-1, 1):
            raise ConfigurationError("direction must be -1 (down) or +1 (up)")
        if not 0.0 <= self.amplitude <= 1.0:
            raise ConfigurationError("staircase amplitude must lie in [0, 1]")

    @property
    def frequency_shift(self) -> float:
        """Induced shift in Hz: direction / period."""
        return self.direction / self.period


def reflect(coefficient: ReflectionCoefficient, incident):
    """Reflected field sample(s): A * exp(j*phi) * incident."""
    return coefficient.value * incident


def apply_schedule(incident: ComplexEnvelope, schedule: CoefficientSchedule,
                   cell: int) -> ComplexEnvelope:
    """Sample-wise product of an envelope with one cell's held coefficients.

    The schedule must already be at the envelope sample rate (resample_hold)
    and cover exactly the same number of samples.
    """
    if not (0 <= cell < schedule.num_cells):
        raise ValueError(f"cell {cell} outside schedule with {schedule.num_cells} cells")
    if not np.isclose(schedule.control_rate, incident.sample_rate, rtol=1e-12, atol=0.0):
        raise ContractViolation(
            f"schedule rate {schedule.control_rate} Hz does not match envelope "
            f"rate {incident.sample_rate} Hz; resample_hold it first")
    if schedule.num_steps != len(incident):
        raise ContractViolation(
            f"schedule length {schedule.num_steps} does not match envelope "
            f"length {len(incident)}")
    return incident.with_samples(incident.samples * schedule.values[cell])


def compile_staircase(spec: StaircaseRampSpec, control_rate: float,
                      duration: float) -> CoefficientSchedule:
    """Single-cell schedule stepping the phase linearly through 2*pi per period.

    Requires control_rate * period == steps_per_period exactly (one control
    sample per step); fractional ratios are rejected so spectra stay
    bit-reproducible. The pattern repeats every L samples for the duration.
    """
    L = spec.steps_per_period
    samples_per_period = control_rate * spec.period
    if abs(samples_per_period - L) > 1e-9 * L:
        raise ConfigurationError(
            f"control_rate * period = {samples_per_period} must equal "
            f"steps_per_period = {L} (integer samples per period)")
    num_steps = int(round(control_rate * duration))
    if num_steps < 1:
        raise ConfigurationError("duration too short for one control sample")
    phases = spec.direction * TWO_PI * (np.arange(num_steps) % L) / L
    values = spec.amplitude * np.exp(1j * phases)
    return CoefficientSchedule(values[np.newaxis, :], control_rate)


def frequency_shift(envelope: ComplexEnvelope, shift_hz: float) -> ComplexEnvelope:
    """Ideal continuous-phase ramp: exact frequency translation by shift_hz.

    The ramp is referenced to the first sample, matching a schedule that
    starts at the envelope start.
    """
    n = np.arange(len(envelope))
    ramp = np.exp(2j * np.pi * shift_hz * n / envelope.sample_rate)
    return envelope.with_samples(envelope.samples * ramp)


def _quantize_phases(phases: np.ndarray, levels: int, offset: float) -> np.ndarray:
    if levels == 1:
        return np.full_like(phases, wrap_phase(offset))
    # grid coordinate in level units; exact half-integers are the tie cases
    u = np.mod((phases - offset) * levels / TWO_PI, levels)
    base = np.floor(u)
    frac = u - base
    lower = base.astype(np.int64) % levels
    upper = (lower + 1) % levels
    k = np.where(frac < 0.5, lower,
                 np.where(frac > 0.5, upper, np.minimum(lower, upper)))
    return wrap_phase(offset + TWO_PI * k / levels)


def _quantize_amplitudes(amplitudes: np.ndarray, levels: int) -> np.ndarray:
    if levels == 1:
        return np.zeros_like(amplitudes)
    v = amplitudes * (levels - 1)
    k = np.clip(np.ceil(v - 0.5), 0, levels - 1)  # ceil(v - 1/2): ties go down
    return k / (levels - 1)


def quantize_values(values: np.ndarray, model: QuantizationModel) -> np.ndarray:
    """Vectorized quantization of complex coefficients A * exp(j*phi)."""
    if model.is_continuous:
        return values
    amplitudes = np.minimum(np.abs(values), 1.0)
    phases = wrap_phase(np.angle(values))
    if model.phase_levels is not None:
        phases = _quantize_phases(phases, model.phase_levels, model.phase_offset)
    if model.amplitude_levels is not None:
        amplitudes = _quantize_amplitudes(amplitudes, model.amplitude_levels)
    return amplitudes * np.exp(1j * phases)


def quantize(coefficient: ReflectionCoefficient,
             model: QuantizationModel) -> ReflectionCoefficient:
    """Snap a coefficient to the nearest quantization levels.

    Phase distance is circular, amplitude distance Euclidean; exact ties go
    to the lower level index. Continuous models return the input unchanged.
    """
    if model.is_continuous:
        return coefficient
    amplitude = coefficient.amplitude
    phase = coefficient.phase
    if model.phase_levels is not None:
        phase = float(_quantize_phases(np.asarray([phase]), model.phase_levels,
                                       model.phase_offset)[0])
    if model.amplitude_levels is not None:
        amplitude = float(_quantize_amplitudes(np.asarray([amplitude]),
                                               model.amplitude_levels)[0])
    return ReflectionCoefficient(amplitude, phase)
