import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from metalink.core import (
    ContractViolation,
    SurfaceGeometry,
    resample_hold,
    tone_envelope,
)
from metalink.metasurface import QuantizationModel, apply_schedule
from metalink.propagation import illuminate, superpose
from metalink.txrx import (
    DetectionError,
    FrameSpec,
    SurfacePartition,
    ber,
    demap_symbols,
    evm,
    get_scheme,
    make_pilots,
    map_bits,
    receive_frame,
    symbols_to_schedule,
    symbols_to_waveform,
)

ALL_SCHEMES = ["BPSK", "QPSK", "8PSK", "16QAM"]


def all_words_bits(bits_per_symbol):
    words = np.arange(2 ** bits_per_symbol)
    shifts = np.arange(bits_per_symbol - 1, -1, -1)
    return ((words[:, None] >> shifts) & 1).reshape(-1)


# ---------------------------------------------------------------------------
# constellations
# ---------------------------------------------------------------------------

def test_bpsk_mapping():
    scheme = get_scheme("BPSK")
    assert np.array_equal(map_bits([0, 1], scheme), [1.0, -1.0])


def test_qpsk_all_zero_word():
    scheme = get_scheme("QPSK")
    assert map_bits([0, 0], scheme)[0] == pytest.approx((1 + 1j) / np.sqrt(2))


def test_16qam_points_live_on_the_documented_grid():
    scheme = get_scheme("16QAM")
    symbols = map_bits(all_words_bits(4), scheme)
    assert len(set(np.round(symbols, 12))) == 16
    grid = np.array([-1.0, -1 / 3, 1 / 3, 1.0]) / np.sqrt(2)
    for s in symbols:
        assert np.min(np.abs(s.real - grid)) < 1e-12
        assert np.min(np.abs(s.imag - grid)) < 1e-12
    assert np.max(np.abs(symbols)) == pytest.approx(1.0)


@pytest.mark.parametrize("name", ALL_SCHEMES)
def test_peak_amplitude_is_exactly_one(name):
    scheme = get_scheme(name)
    assert np.max(np.abs(scheme.points)) == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("name", ALL_SCHEMES)
def test_demap_inverts_map_exhaustively(name):
    scheme = get_scheme(name)
    bits = all_words_bits(scheme.bits_per_symbol)
    symbols = map_bits(bits, scheme)
    recovered, points = demap_symbols(symbols, scheme)
    assert np.array_equal(recovered, bits)
    assert np.array_equal(points, symbols)


@settings(max_examples=40)
@given(st.sampled_from(ALL_SCHEMES), st.integers(0, 2 ** 32 - 1))
def test_demap_inverts_map_on_random_payloads(name, seed):
    scheme = get_scheme(name)
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=scheme.bits_per_symbol * 64)
    recovered, _ = demap_symbols(map_bits(bits, scheme), scheme)
    assert np.array_equal(recovered, bits)


@pytest.mark.parametrize("name", ["QPSK", "16QAM"])
def test_gray_adjacency_on_rectangular_grids(name):
    # nearest constellation neighbours differ in exactly one bit
    scheme = get_scheme(name)
    points = scheme.points
    dist = np.abs(points[:, None] - points[None, :])
    min_dist = np.min(dist[dist > 1e-12])
    for a in range(points.size):
        for b in range(points.size):
            if a < b and dist[a, b] < min_dist * 1.001:
                assert bin(a ^ b).count("1") == 1


def test_gray_adjacency_around_the_psk_circle():
    scheme = get_scheme("8PSK")
    angles = np.angle(scheme.points)
    order = np.argsort(angles)
    for i in range(8):
        a, b = order[i], order[(i + 1) % 8]
        assert bin(int(a) ^ int(b)).count("1") == 1


def test_map_bits_rejects_ragged_input():
    with pytest.raises(ValueError):
        map_bits([0, 1, 0], get_scheme("QPSK"))
    with pytest.raises(ValueError):
        map_bits([0, 2], get_scheme("BPSK"))


# ---------------------------------------------------------------------------
# partitions, pilots, frames
# ---------------------------------------------------------------------------

def test_left_right_partition_splits_columns():
    geo = SurfaceGeometry(2, 4, 0.05)
    part = SurfacePartition.left_right(geo)
    assert np.array_equal(part.stream_of_cell, [0, 0, 1, 1, 0, 0, 1, 1])


def test_left_right_needs_even_columns():
    with pytest.raises(Exception):
        SurfacePartition.left_right(SurfaceGeometry(2, 3, 0.05))


def test_partition_requires_every_stream_populated():
    with pytest.raises(Exception):
        SurfacePartition(np.array([0, 0, 0]), 2)


def test_pilots_are_orthogonal_pm_one():
    for streams in (1, 2, 4):
        pilots = make_pilots(streams)
        assert pilots.shape == (streams, 4 * max(streams, 1))
        assert np.all(np.abs(pilots) == 1.0)
        gram = pilots @ pilots.conj().T
        assert np.allclose(gram, np.eye(streams) * pilots.shape[1])


def test_frame_control_rate():
    frame = FrameSpec.with_default_pilots(2, 100, 2.5e6, 40)
    assert frame.control_rate == 1e8
    assert frame.pilot_length == 8
    assert frame.num_symbols == 108


# ---------------------------------------------------------------------------
# symbols_to_schedule
# ---------------------------------------------------------------------------

def test_single_constant_symbol_schedule():
    geo = SurfaceGeometry(2, 2, 0.05)
    part = SurfacePartition.full_surface(geo)
    frame = FrameSpec.with_default_pilots(1, 1, 1e6, 4)
    sched = symbols_to_schedule([[1.0 + 0j]], part, frame)
    assert sched.num_cells == 4
    assert sched.num_steps == (4 + 1) * 4
    assert np.all(sched.values[:, -4:] == 1.0)  # payload after the pilots
    assert np.array_equal(sched.values[:, :16],
                          np.repeat(frame.pilots[0], 4)[None, :].repeat(4, axis=0))


def test_two_stream_bpsk_schedule_sets_halves():
    geo = SurfaceGeometry(2, 4, 0.05)
    part = SurfacePartition.left_right(geo)
    frame = FrameSpec.with_default_pilots(2, 1, 1e6, 2)
    sched = symbols_to_schedule([[1.0], [-1.0]], part, frame)
    payload = sched.values[:, -2:]
    left = part.stream_of_cell == 0
    assert np.all(payload[left] == 1.0)
    assert np.all(payload[~left] == -1.0)


def test_symbol_rate_for_20mbps_aggregate():
    # 2 streams x 4 bits x 2.5 MBd = 20 Mbps; 100 MHz control -> 40 samples
    frame = FrameSpec.with_default_pilots(2, 10, 2.5e6, 40)
    assert frame.samples_per_symbol == 40
    assert frame.control_rate == pytest.approx(1e8)
    aggregate_bps = 2 * 4 * frame.symbol_rate
    assert aggregate_bps == pytest.approx(20e6)


def test_quantized_schedule_snaps_payload():
    geo = SurfaceGeometry(1, 1, 0.05)
    part = SurfacePartition.full_surface(geo)
    frame = FrameSpec.with_default_pilots(1, 1, 1e6, 1)
    quant = QuantizationModel(phase_levels=2)
    sched = symbols_to_schedule([[np.exp(0.4j * np.pi)]], part, frame, quant)
    assert sched.values[0, -1] == pytest.approx(1.0)


def test_schedule_length_mismatch_is_rejected():
    geo = SurfaceGeometry(1, 2, 0.05)
    part = SurfacePartition.full_surface(geo)
    frame = FrameSpec.with_default_pilots(1, 2, 1e6, 1)
    with pytest.raises(ValueError):
        symbols_to_schedule([[1.0]], part, frame)
    with pytest.raises(ValueError):
        symbols_to_schedule([[1.0, 1.0], [1.0, 1.0]], part, frame)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def test_evm_of_identical_sequences_is_zero():
    ref = np.array([1.0, 1j, -1.0])
    assert evm(ref, ref) == 0.0


def test_evm_of_uniform_scale_error():
    ref = np.array([1.0, 1j, -1.0, -1j])
    assert evm(1.1 * ref, ref) == pytest.approx(10.0, rel=1e-12)


def test_evm_converges_to_noise_sigma():
    rng = np.random.default_rng(17)
    n = 100_000
    ref = np.exp(1j * rng.uniform(0, 2 * np.pi, n))  # unit RMS
    sigma = 0.05
    noise = sigma / np.sqrt(2) * (rng.standard_normal(n)
                                  + 1j * rng.standard_normal(n))
    assert evm(ref + noise, ref) == pytest.approx(100 * sigma, rel=0.02)


def test_evm_rejects_zero_reference():
    with pytest.raises(ValueError):
        evm(np.ones(3), np.zeros(3))


def test_ber_counts_flips():
    assert ber([0, 1, 1], [0, 1, 1]) == 0.0
    assert ber([1, 0, 0], [0, 1, 1]) == 1.0
    bits = np.zeros(1000, dtype=int)
    flipped = bits.copy()
    flipped[123] = 1
    assert ber(flipped, bits) == pytest.approx(0.001)
    with pytest.raises(ContractViolation):
        ber([0, 1], [0, 1, 1])


# ---------------------------------------------------------------------------
# receive_frame
# ---------------------------------------------------------------------------

def run_explicit_link(h, scheme_name, payload, noise_psd=0.0, seed=0,
                      samples_per_symbol=4):
    """Loopback through an explicit stream-level channel matrix h (A x S)."""
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    antennas, streams = h.shape
    scheme = get_scheme(scheme_name)
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(streams, payload * scheme.bits_per_symbol))
    symbols = np.stack([map_bits(bits[s], scheme) for s in range(streams)])
    frame = FrameSpec.with_default_pilots(streams, payload, 1e6,
                                          samples_per_symbol)
    waves = [symbols_to_waveform(
        np.concatenate([frame.pilots[s], symbols[s]]), samples_per_symbol,
        frame.control_rate, 4.25e9) for s in range(streams)]
    noise_seeds = np.random.SeedSequence(seed).spawn(antennas)
    rx = [superpose(waves, h[a], noise_psd, noise_seeds[a])
          for a in range(antennas)]
    return receive_frame(rx, frame, scheme, reference=symbols), h, symbols


def test_bpsk_identity_loopback():
    report, _, _ = run_explicit_link([[1.0]], "BPSK", payload=64)
    assert report.ber[0] == 0.0
    assert report.evm_percent[0] < 1e-9


def test_16qam_decoupled_streams():
    report, _, _ = run_explicit_link(np.eye(2), "16QAM", payload=256)
    assert np.all(report.ber == 0.0)
    assert np.all(report.evm_percent < 1e-9)


def test_random_well_conditioned_channel_is_estimated_and_inverted():
    rng = np.random.default_rng(11)
    while True:
        h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        if np.linalg.cond(h) < 5:
            break
    report, h_true, symbols = run_explicit_link(h, "16QAM", payload=200, seed=3)
    assert np.allclose(report.channel_estimate, h_true, rtol=1e-6)
    assert np.all(report.ber == 0.0)
    for s in range(2):
        assert np.allclose(report.detected_symbols[s], symbols[s], rtol=1e-9,
                           atol=1e-12)


def test_more_antennas_than_streams():
    h = np.array([[1.0, 0.2], [0.1, 0.9], [0.3, -0.4]])
    report, _, _ = run_explicit_link(h, "QPSK", payload=100)
    assert np.all(report.ber == 0.0)


def test_rank_deficient_channel_raises_detection_error():
    h = np.array([[1.0, 1.0], [1.0, 1.0]])  # identical columns
    with pytest.raises(DetectionError) as excinfo:
        run_explicit_link(h, "QPSK", payload=16)
    assert excinfo.value.condition_number > 1e8


def test_expected_shift_derotation():
    # shift the transmit waveform by +3 symbol rates, tell the receiver
    scheme = get_scheme("QPSK")
    rng = np.random.default_rng(2)
    bits = rng.integers(0, 2, size=2 * 128)
    symbols = map_bits(bits, scheme)
    frame = FrameSpec.with_default_pilots(1, 128, 1e6, 8)
    wave = symbols_to_waveform(np.concatenate([frame.pilots[0], symbols]),
                               8, 8e6, 4.25e9)
    n = np.arange(len(wave))
    shifted = wave.with_samples(wave.samples * np.exp(2j * np.pi * 3e6 * n / 8e6))
    report = receive_frame([shifted], frame, scheme, expected_shift=3e6,
                           reference=symbols[None, :])
    assert report.ber[0] == 0.0
    assert report.evm_percent[0] < 1e-9


def test_receive_frame_contract_checks():
    scheme = get_scheme("BPSK")
    frame = FrameSpec.with_default_pilots(2, 4, 1e6, 2)
    wave = symbols_to_waveform(np.ones(8), 2, 2e6, 4.25e9)
    with pytest.raises(ContractViolation):
        receive_frame([wave], frame, scheme)  # 1 antenna, 2 streams
    frame1 = FrameSpec.with_default_pilots(1, 4, 1e6, 2)
    short = symbols_to_waveform(np.ones(7), 2, 2e6, 4.25e9)
    with pytest.raises(ContractViolation):
        receive_frame([short], frame1, scheme)


def test_partition_permutation_leaves_stream_products_unchanged():
    # identity channel: shuffling cells within a stream cannot change the sum
    geo = SurfaceGeometry(2, 4, 0.05)
    part = SurfacePartition.left_right(geo)
    frame = FrameSpec.with_default_pilots(2, 8, 1e6, 2)
    rng = np.random.default_rng(23)
    scheme = get_scheme("QPSK")
    symbols = np.stack([map_bits(rng.integers(0, 2, 16), scheme)
                        for _ in range(2)])
    sched = symbols_to_schedule(symbols, part, frame)

    perm = np.arange(8)
    left = np.flatnonzero(part.stream_of_cell == 0)
    perm[left] = left[::-1]  # reverse the left-stream cells
    shuffled = SurfacePartition(part.stream_of_cell[perm], 2)
    sched_perm = symbols_to_schedule(symbols, shuffled, frame)

    carrier = tone_envelope(sched.num_steps, frame.control_rate, 4.25e9)
    gains = np.ones(8, dtype=complex)
    out = superpose([apply_schedule(f, sched, c)
                     for c, f in enumerate(illuminate(carrier, gains))], gains)
    out_perm = superpose([apply_schedule(f, sched_perm, c)
                          for c, f in enumerate(illuminate(carrier, gains))], gains)
    assert np.allclose(out.samples, out_perm.samples, rtol=1e-12, atol=1e-15)


def test_noiseless_loopback_all_schemes():
    for name in ALL_SCHEMES:
        report, _, _ = run_explicit_link(
            [[0.9 + 0.3j, -0.2j], [0.4, 1.1 - 0.5j]], name, payload=64, seed=5)
        assert np.all(report.ber == 0.0), name
        assert np.all(report.evm_percent < 1e-8), name


def test_evm_grows_with_noise():
    levels = [1e-6, 1e-4, 1e-2]
    medians = []
    for psd in levels:
        evms = []
        for seed in range(20):
            report, _, _ = run_explicit_link([[1.0]], "QPSK", payload=64,
                                             noise_psd=psd, seed=seed)
            evms.append(report.evm_percent[0])
        medians.append(np.median(evms))
    assert medians[0] < medians[1] < medians[2]
