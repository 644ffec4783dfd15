"""Feed-to-cell illumination, cell-to-point channels, and field superposition.

Channels are narrowband: one complex gain per (source, destination) pair,
valid across the whole envelope bandwidth. The free-space model is the
scalar spherical wave (lambda / (4*pi*r)) * exp(-j*2*pi*r/lambda) with no
element pattern or polarization. Receiver noise is injected only at the
observation points; the surface itself is passive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ComplexEnvelope,
    ConfigurationError,
    ContractViolation,
    PointSet,
    SurfaceGeometry,
    cell_positions,
)

CHANNEL_KINDS = ("identity", "free_space", "explicit_matrix")


@dataclass(frozen=True, eq=False)
class ChannelModel:
    """How complex gains between cells and points are produced.

    kind "identity" gives unit gains, "free_space" the spherical-wave model,
    "explicit_matrix" copies a user matrix of shape (num_cells, num_points).
    noise_psd is the complex-Gaussian noise variance per received sample.
    """

    kind: str
    wavelength: float | None = None
    matrix: np.ndarray | None = None
    noise_psd: float = 0.0

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ConfigurationError(f"unknown channel kind {self.kind!r}")
        if self.kind == "free_space" and (self.wavelength is None or self.wavelength <= 0):
            raise ConfigurationError("free_space channel needs wavelength > 0")
        if self.kind == "explicit_matrix":
            if self.matrix is None:
                raise ConfigurationError("explicit_matrix channel needs a matrix")
            matrix = np.asarray(self.matrix, dtype=np.complex128)
            if matrix.ndim != 2:
                raise ConfigurationError("channel matrix must be 2-D (cells x points)")
            object.__setattr__(self, "matrix", matrix)
        if self.noise_psd < 0:
            raise ConfigurationError("noise_psd must be >= 0")


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """Complex gains: feed antenna -> cells, and cells -> observation points."""

    feed_gains: np.ndarray
    obs_gains: np.ndarray

    def __post_init__(self):
        feed = np.asarray(self.feed_gains, dtype=np.complex128)
        obs = np.asarray(self.obs_gains, dtype=np.complex128)
        if feed.ndim != 1 or obs.ndim != 2 or obs.shape[0] != feed.shape[0]:
            raise ValueError("feed_gains must be (C,), obs_gains (C, P)")
        object.__setattr__(self, "feed_gains", feed)
        object.__setattr__(self, "obs_gains", obs)

    @property
    def num_cells(self) -> int:
        return self.feed_gains.shape[0]

    @property
    def num_points(self) -> int:
        return self.obs_gains.shape[1]


def free_space_gain(src, dst, wavelength: float) -> complex:
    """Spherical-wave gain (lambda / (4*pi*r)) * exp(-j*2*pi*r/lambda)."""
    r = float(np.linalg.norm(np.asarray(dst, float) - np.asarray(src, float)))
    if r == 0.0:
        raise ValueError("source and destination coincide (zero distance)")
    return (wavelength / (4.0 * np.pi * r)) * np.exp(-2j * np.pi * r / wavelength)


def _free_space_gains(src: np.ndarray, dsts: np.ndarray, wavelength: float) -> np.ndarray:
    r = np.linalg.norm(dsts - src, axis=-1)
    if np.any(r == 0.0):
        raise ValueError("a point coincides with a cell position (zero distance)")
    return (wavelength / (4.0 * np.pi * r)) * np.exp(-2j * np.pi * r / wavelength)


def build_channels(geometry: SurfaceGeometry, points: PointSet,
                   model: ChannelModel) -> ChannelSet:
    """Gains for the feed leg and every (cell, observation point) pair.

    Exactly one point may be tagged "feed"; with none, the illumination is
    ideal (unit feed gains). All other points are observation points, in
    their PointSet order.
    """
    feed_idx = points.indices_with_role("feed")
    if len(feed_idx) > 1:
        raise ConfigurationError("at most one point may have role 'feed'")
    obs_idx = [i for i in range(len(points)) if i not in feed_idx]
    cells = cell_positions(geometry)
    num_cells = geometry.num_cells

    if model.kind == "identity":
        feed = np.ones(num_cells, dtype=np.complex128)
        obs = np.ones((num_cells, len(obs_idx)), dtype=np.complex128)
    elif model.kind == "free_space":
        if feed_idx:
            feed = _free_space_gains(points.positions[feed_idx[0]], cells,
                                     model.wavelength)
        else:
            feed = np.ones(num_cells, dtype=np.complex128)
        obs = np.empty((num_cells, len(obs_idx)), dtype=np.complex128)
        for col, p in enumerate(obs_idx):
            obs[:, col] = _free_space_gains(points.positions[p], cells,
                                            model.wavelength)
    else:  # explicit_matrix
        if model.matrix.shape != (num_cells, len(obs_idx)):
            raise ConfigurationError(
                f"channel matrix shape {model.matrix.shape} does not match "
                f"({num_cells} cells, {len(obs_idx)} observation points)")
        feed = np.ones(num_cells, dtype=np.complex128)
        obs = model.matrix
    return ChannelSet(feed, obs)


def illuminate(carrier: ComplexEnvelope, feed_gains) -> list:
    """Per-cell incident envelopes: feed_gain * carrier for every cell."""
    gains = np.asarray(feed_gains, dtype=np.complex128)
    return [carrier.with_samples(g * carrier.samples) for g in gains]


def superpose(fields, gains, noise_psd: float = 0.0, rng_seed=None) -> ComplexEnvelope:
    """Weighted sum of per-cell envelopes at one observation point.

    Adds i.i.d. circular complex Gaussian noise of variance noise_psd per
    sample when noise_psd > 0; the noise sequence is a pure function of
    rng_seed. With noise_psd == 0 no RNG is touched and the output is the
    exact weighted sum.
    """
    fields = list(fields)
    if not fields:
        raise ContractViolation("superpose needs at least one field")
    first = fields[0]
    for env in fields[1:]:
        if (len(env) != len(first)
                or env.sample_rate != first.sample_rate
                or env.t0 != first.t0
                or env.carrier_freq != first.carrier_freq):
            raise ContractViolation("per-cell envelopes must share rate, length, "
                                    "t0, and carrier")
    gains = np.asarray(gains, dtype=np.complex128)
    if gains.shape != (len(fields),):
        raise ContractViolation(
            f"need one gain per cell: {gains.shape} vs {len(fields)} fields")
    stacked = np.stack([env.samples for env in fields])
    total = gains @ stacked
    if noise_psd > 0.0:
        rng = np.random.default_rng(rng_seed)
        scale = np.sqrt(noise_psd / 2.0)
        total = total + scale * (rng.standard_normal(total.size)
                                 + 1j * rng.standard_normal(total.size))
    return first.with_samples(total)
