"""Time-frequency conversion of IQ signals into dB grids and 8-bit images.

The short-time transform slides a window of ``n_fft`` samples by ``hop``,
takes the FFT, shifts bins so row frequency runs from -fs/2 upward, and
stores 10*log10(|X|^2 + eps). Images are produced by bilinear resampling of
the dB grid followed by min/max quantization to 0..255; the quantization
extrema are recorded on the image for traceability.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DataError
from .signals import IqSignal

DB_EPS = 1e-12
DB_FLOOR = 10 * np.log10(DB_EPS)


class Window(Enum):
    RECTANGULAR = "rectangular"
    HANN = "hann"


@dataclass(frozen=True)
class StftConfig:
    n_fft: int = 256
    hop: int = 128
    window: Window = Window.HANN

    def validate(self) -> None:
        if self.n_fft < 8 or (self.n_fft & (self.n_fft - 1)) != 0:
            raise DataError(f"n_fft must be a power of two >= 8, got {self.n_fft}")
        if not (0 < self.hop <= self.n_fft):
            raise DataError(f"hop must be in [1, n_fft], got {self.hop}")


@dataclass
class Spectrogram:
    grid: np.ndarray  # (frames, n_fft) dB power
    config: StftConfig
    sample_rate_hz: float

    @property
    def frames(self) -> int:
        return self.grid.shape[0]


@dataclass
class SpectrogramImage:
    width: int
    height: int
    pixels: np.ndarray  # uint8, shape (height, width), row-major
    min_db: float
    max_db: float


def _window_values(config: StftConfig) -> np.ndarray:
    if config.window is Window.RECTANGULAR:
        return np.ones(config.n_fft)
    n = np.arange(config.n_fft)
    return 0.5 - 0.5 * np.cos(2 * np.pi * n / config.n_fft)  # periodic Hann


def stft(signal: IqSignal, config: StftConfig = StftConfig()) -> Spectrogram:
    """dB-power short-time spectrum, frequency rows ordered -fs/2 .. +fs/2."""
    config.validate()
    x = np.asarray(signal.samples, dtype=np.complex128)
    n_fft, hop = config.n_fft, config.hop
    if len(x) < n_fft:
        raise DataError(f"signal length {len(x)} shorter than n_fft {n_fft}")
    n_frames = (len(x) - n_fft) // hop + 1
    win = _window_values(config)
    offsets = np.arange(n_frames) * hop
    frames = x[offsets[:, None] + np.arange(n_fft)[None, :]] * win
    spectrum = np.fft.fft(frames, axis=1)
    spectrum = np.fft.fftshift(spectrum, axes=1)
    grid = 10 * np.log10(np.abs(spectrum) ** 2 + DB_EPS)
    return Spectrogram(grid, config, signal.sample_rate_hz)


def bin_of_frequency(freq_hz: float, n_fft: int, sample_rate_hz: float) -> int:
    """Shifted-spectrum row index of a given frequency."""
    k = int(round(freq_hz / sample_rate_hz * n_fft)) % n_fft
    return (k + n_fft // 2) % n_fft


def _resample_axis_coords(n_in: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Endpoint-aligned bilinear: output j maps to input j*(n_in-1)/(n_out-1).
    if n_out == 1:
        coord = np.array([(n_in - 1) / 2.0])
    else:
        coord = np.arange(n_out) * (n_in - 1) / (n_out - 1)
    lo = np.floor(coord).astype(int)
    lo = np.clip(lo, 0, max(n_in - 2, 0))
    frac = coord - lo
    if n_in == 1:
        lo = np.zeros(n_out, dtype=int)
        frac = np.zeros(n_out)
    return lo, lo + (1 if n_in > 1 else 0), frac


def bilinear_resize(grid: np.ndarray, height: int, width: int) -> np.ndarray:
    rows_lo, rows_hi, row_frac = _resample_axis_coords(grid.shape[0], height)
    cols_lo, cols_hi, col_frac = _resample_axis_coords(grid.shape[1], width)
    top = grid[rows_lo][:, cols_lo] * (1 - col_frac) + grid[rows_lo][:, cols_hi] * col_frac
    bottom = grid[rows_hi][:, cols_lo] * (1 - col_frac) + grid[rows_hi][:, cols_hi] * col_frac
    return top * (1 - row_frac[:, None]) + bottom * row_frac[:, None]


def to_image(spec: Spectrogram, width: int, height: int) -> SpectrogramImage:
    """Bilinear resample the dB grid, then min/max quantize to 8 bits.

    A constant-valued grid quantizes to all-zero pixels.
    """
    if width < 1 or height < 1:
        raise DataError(f"image dimensions must be >= 1, got {width}x{height}")
    if spec.grid.size == 0:
        raise DataError("empty spectrogram")
    resized = bilinear_resize(np.asarray(spec.grid, dtype=np.float64), height, width)
    min_db = float(resized.min())
    max_db = float(resized.max())
    if max_db > min_db:
        norm = (resized - min_db) / (max_db - min_db)
        pixels = np.round(norm * 255.0).astype(np.uint8)
    else:
        pixels = np.zeros((height, width), dtype=np.uint8)
    return SpectrogramImage(width, height, pixels, min_db, max_db)


def write_pgm(path: str | Path, image: SpectrogramImage) -> Path:
    path = Path(path)
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    path.write_bytes(header + image.pixels.tobytes())
    return path


def read_pgm(path: str | Path) -> SpectrogramImage:
    raw = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4 and pos < len(raw):
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":  # comment line
            while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        fields.append(raw[start:pos])
    if len(fields) < 4 or fields[0] != b"P5":
        raise DataError(f"{path}: not a binary PGM file")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise DataError(f"{path}: unsupported maxval {maxval}")
    pos += 1  # single whitespace after maxval
    pixels = np.frombuffer(raw[pos : pos + width * height], dtype=np.uint8)
    if pixels.size != width * height:
        raise DataError(f"{path}: truncated pixel data")
    return SpectrogramImage(width, height, pixels.reshape(height, width).copy(), 0.0, 0.0)


def write_grid_csv(path: str | Path, spec: Spectrogram) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        for row in spec.grid:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    return path
