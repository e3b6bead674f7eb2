"""Time-frequency oracles: direct DFT, per-frame energy conservation,
independent bilinear resampler."""

import numpy as np
import pytest

from gnss_sentinel.errors import DataError
from gnss_sentinel.signals import IqSignal, JamClass
from gnss_sentinel.spectrogram import (
    DB_EPS,
    Spectrogram,
    SpectrogramImage,
    StftConfig,
    Window,
    bilinear_resize,
    bin_of_frequency,
    read_pgm,
    stft,
    to_image,
    write_grid_csv,
    write_pgm,
)


def make_signal(samples, fs=1024.0):
    return IqSignal(np.asarray(samples, dtype=np.complex128), fs, JamClass.NOJAM, 0)


def test_tone_at_quarter_rate_hits_expected_bin():
    fs, n_fft = 1024.0, 64
    t = np.arange(4096) / fs
    sig = make_signal(np.exp(2j * np.pi * (fs / 4) * t), fs)
    config = StftConfig(n_fft=n_fft, hop=n_fft, window=Window.RECTANGULAR)
    spec = stft(sig, config)
    expected_bin = bin_of_frequency(fs / 4, n_fft, fs)
    assert expected_bin == n_fft // 4 + n_fft // 2
    assert np.all(np.argmax(spec.grid, axis=1) == expected_bin)
    # Direct DFT oracle on the first frame.
    frame = sig.samples[:n_fft]
    dft = np.array([np.sum(frame * np.exp(-2j * np.pi * k * np.arange(n_fft) / n_fft)) for k in range(n_fft)])
    oracle = 10 * np.log10(np.abs(np.fft.fftshift(dft)) ** 2 + DB_EPS)
    assert np.allclose(spec.grid[0], oracle, atol=1e-6)


def test_all_zero_signal_hits_floor():
    sig = make_signal(np.zeros(512))
    spec = stft(sig, StftConfig(n_fft=64, hop=32, window=Window.RECTANGULAR))
    assert np.allclose(spec.grid, 10 * np.log10(DB_EPS))


def test_parseval_per_frame():
    rng = np.random.default_rng(5)
    x = rng.standard_normal(1024) + 1j * rng.standard_normal(1024)
    sig = make_signal(x)
    n_fft = 128
    spec = stft(sig, StftConfig(n_fft=n_fft, hop=n_fft, window=Window.RECTANGULAR))
    for t in range(spec.frames):
        frame = x[t * n_fft : (t + 1) * n_fft]
        time_energy = float(np.sum(np.abs(frame) ** 2))
        freq_energy = float(np.sum(10 ** (spec.grid[t] / 10) - DB_EPS)) / n_fft
        assert abs(time_energy - freq_energy) < 1e-6 * time_energy


def test_power_scaling_shifts_db():
    rng = np.random.default_rng(6)
    x = rng.standard_normal(512) + 1j * rng.standard_normal(512)
    config = StftConfig(n_fft=64, hop=32, window=Window.HANN)
    base = stft(make_signal(x), config)
    scaled = stft(make_signal(3.5 * x), config)
    shift = 20 * np.log10(3.5)
    away_from_floor = base.grid > -200.0
    assert np.allclose(scaled.grid[away_from_floor] - base.grid[away_from_floor], shift, atol=1e-6)


def test_signal_shorter_than_window_rejected():
    with pytest.raises(DataError):
        stft(make_signal(np.zeros(16)), StftConfig(n_fft=64, hop=32))


def test_frame_count():
    sig = make_signal(np.zeros(1000))
    spec = stft(sig, StftConfig(n_fft=256, hop=128))
    assert spec.frames == (1000 - 256) // 128 + 1


def test_config_validation():
    with pytest.raises(DataError):
        StftConfig(n_fft=100, hop=10).validate()  # not a power of two
    with pytest.raises(DataError):
        StftConfig(n_fft=64, hop=65).validate()
    with pytest.raises(DataError):
        StftConfig(n_fft=4, hop=2).validate()


def test_image_identity_resize_min_max_mapping():
    spec = Spectrogram(np.array([[0.0, 10.0], [20.0, 30.0]]), StftConfig(), 1.0)
    image = to_image(spec, 2, 2)
    assert image.pixels[0, 0] == 0
    assert image.pixels[1, 1] == 255
    assert image.min_db == 0.0
    assert image.max_db == 30.0


def test_constant_grid_maps_to_zero_pixels():
    spec = Spectrogram(np.full((4, 8), 7.5), StftConfig(), 1.0)
    image = to_image(spec, 8, 4)
    assert np.all(image.pixels == 0)
    assert image.min_db == image.max_db == 7.5


def test_image_attains_full_range():
    rng = np.random.default_rng(7)
    spec = Spectrogram(rng.normal(0, 20, (48, 64)), StftConfig(), 1.0)
    image = to_image(spec, 32, 32)
    assert image.pixels.min() == 0
    assert image.pixels.max() == 255


def naive_bilinear(grid, height, width):
    h_in, w_in = grid.shape
    out = np.zeros((height, width))
    for r in range(height):
        for c in range(width):
            y = r * (h_in - 1) / (height - 1) if height > 1 else (h_in - 1) / 2
            x = c * (w_in - 1) / (width - 1) if width > 1 else (w_in - 1) / 2
            y0 = min(int(np.floor(y)), h_in - 2) if h_in > 1 else 0
            x0 = min(int(np.floor(x)), w_in - 2) if w_in > 1 else 0
            fy, fx = y - y0, x - x0
            y1 = y0 + 1 if h_in > 1 else 0
            x1 = x0 + 1 if w_in > 1 else 0
            out[r, c] = (
                grid[y0, x0] * (1 - fy) * (1 - fx)
                + grid[y0, x1] * (1 - fy) * fx
                + grid[y1, x0] * fy * (1 - fx)
                + grid[y1, x1] * fy * fx
            )
    return out


def test_bilinear_matches_naive_oracle():
    rng = np.random.default_rng(8)
    grid = rng.normal(0, 10, (17, 23))
    for shape in [(9, 11), (5, 23), (17, 7), (1, 4), (30, 40)]:
        assert np.allclose(bilinear_resize(grid, *shape), naive_bilinear(grid, *shape), atol=1e-12)


def test_downsampled_ramp_stays_monotone():
    ramp = np.tile(np.linspace(0.0, 63.0, 64), (64, 1))
    small = bilinear_resize(ramp, 32, 32)
    assert np.all(np.diff(small, axis=1) > 0)


def test_invalid_image_requests_rejected():
    spec = Spectrogram(np.zeros((2, 2)), StftConfig(), 1.0)
    with pytest.raises(DataError):
        to_image(spec, 0, 4)
    with pytest.raises(DataError):
        to_image(Spectrogram(np.zeros((0, 2)), StftConfig(), 1.0), 2, 2)


def test_pgm_round_trip(tmp_path):
    rng = np.random.default_rng(9)
    pixels = rng.integers(0, 256, (12, 17), dtype=np.uint8)
    image = SpectrogramImage(17, 12, pixels, -10.0, 5.0)
    path = write_pgm(tmp_path / "img.pgm", image)
    header = path.read_bytes().split(b"\n", 3)
    assert header[0] == b"P5"
    assert header[1] == b"17 12"
    assert header[2] == b"255"
    back = read_pgm(path)
    assert back.width == 17 and back.height == 12
    assert np.array_equal(back.pixels, pixels)


def test_grid_csv_round_trip(tmp_path):
    grid = np.array([[1.25, -3.5], [0.0, 42.0], [1e-7, -120.0]])
    spec = Spectrogram(grid, StftConfig(), 1.0)
    path = write_grid_csv(tmp_path / "grid.csv", spec)
    back = np.loadtxt(path, delimiter=",")
    assert np.array_equal(back, grid)
