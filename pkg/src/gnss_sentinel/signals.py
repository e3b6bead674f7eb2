"""Labeled complex-baseband IQ generation for six interference classes.

Each generator emits a noise-free jammer waveform normalized so its mean
power is exactly 10^(jsr_db/10) relative to the unit-power complex white
Gaussian noise floor it is summed with. The no-jamming class carries only
the noise floor plus a -20 dB BPSK spreading sequence standing in for a
navigation signal buried below the noise.

All randomness flows through per-role Philox streams derived from the call
seed, so the jammer component of ``synth_signal`` equals the output of
``jammer_only`` bit for bit.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np

from .errors import DataError
from .rng import make_rng

GIQ_MAGIC = b"GIQ1"
GIQ_VERSION = 1

# Navigation-like BPSK component of the no-jamming class.
_GNSS_POWER_DB = -20.0
_GNSS_SAMPLES_PER_CHIP = 8


class JamClass(IntEnum):
    """Interference classes with stable integer codes."""

    NOJAM = 0
    SINGLE_AM = 1
    SINGLE_CHIRP = 2
    SINGLE_FM = 3
    NB = 4
    DME = 5

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def from_label(cls, text: str) -> "JamClass":
        key = text.strip().lower()
        for jc, name in _LABELS.items():
            if key == name.lower() or key == jc.name.lower():
                return jc
        if key.isdigit() and int(key) in cls._value2member_map_:
            return cls(int(key))
        valid = ", ".join(_LABELS.values())
        raise DataError(f"unknown jamming class {text!r}; valid: {valid}")


_LABELS = {
    JamClass.NOJAM: "NoJam",
    JamClass.SINGLE_AM: "SingleAM",
    JamClass.SINGLE_CHIRP: "SingleChirp",
    JamClass.SINGLE_FM: "SingleFM",
    JamClass.NB: "NB",
    JamClass.DME: "DME",
}


@dataclass(frozen=True)
class AmParams:
    carrier_offset_hz: float
    mod_index: float  # in (0, 1]
    mod_rate_hz: float


@dataclass(frozen=True)
class ChirpParams:
    f_start_hz: float
    f_end_hz: float
    sweep_period_s: float


@dataclass(frozen=True)
class FmParams:
    carrier_offset_hz: float
    freq_dev_hz: float
    mod_rate_hz: float


@dataclass(frozen=True)
class NbParams:
    center_hz: float
    bandwidth_hz: float


@dataclass(frozen=True)
class DmeParams:
    pulse_pair_spacing_s: float
    pulse_width_s: float  # half-amplitude (FWHM) width of each Gaussian pulse
    pair_rate_hz: float


@dataclass(frozen=True)
class SynthParams:
    duration_s: float
    sample_rate_hz: float
    jsr_db: float
    am: AmParams
    chirp: ChirpParams
    fm: FmParams
    nb: NbParams
    dme: DmeParams

    @classmethod
    def defaults(cls, duration_s: float, sample_rate_hz: float, jsr_db: float = 5.0) -> "SynthParams":
        fs = sample_rate_hz
        return cls(
            duration_s=duration_s,
            sample_rate_hz=fs,
            jsr_db=jsr_db,
            am=AmParams(carrier_offset_hz=0.0, mod_index=0.8, mod_rate_hz=min(1000.0, fs / 16)),
            chirp=ChirpParams(f_start_hz=-fs / 2, f_end_hz=fs / 2, sweep_period_s=1e-3),
            fm=FmParams(carrier_offset_hz=0.0, freq_dev_hz=0.05 * fs, mod_rate_hz=fs / 4096),
            nb=NbParams(center_hz=fs / 8, bandwidth_hz=fs / 8),
            dme=DmeParams(pulse_pair_spacing_s=12e-6, pulse_width_s=3.5e-6, pair_rate_hz=2700.0),
        )

    def validate(self) -> None:
        fs = self.sample_rate_hz
        nyq = fs / 2
        if self.duration_s <= 0:
            raise DataError(f"duration_s must be positive, got {self.duration_s}")
        if fs <= 0:
            raise DataError(f"sample_rate_hz must be positive, got {fs}")
        if not (0.0 < self.am.mod_index <= 1.0):
            raise DataError(f"AM mod_index must be in (0, 1], got {self.am.mod_index}")
        if self.am.mod_rate_hz <= 0:
            raise DataError("AM mod_rate_hz must be positive")
        for name, f in (
            ("am.carrier_offset_hz", abs(self.am.carrier_offset_hz) + self.am.mod_rate_hz),
            ("chirp.f_start_hz", abs(self.chirp.f_start_hz)),
            ("chirp.f_end_hz", abs(self.chirp.f_end_hz)),
            ("fm peak deviation", abs(self.fm.carrier_offset_hz) + self.fm.freq_dev_hz),
            ("nb band edge", abs(self.nb.center_hz) + self.nb.bandwidth_hz / 2),
        ):
            if f > nyq + 1e-9:
                raise DataError(f"{name} exceeds Nyquist ({nyq} Hz)")
        if self.chirp.sweep_period_s <= 0:
            raise DataError("chirp sweep_period_s must be positive")
        if self.fm.freq_dev_hz < 0 or self.fm.mod_rate_hz <= 0:
            raise DataError("FM freq_dev_hz must be >= 0 and mod_rate_hz > 0")
        if self.nb.bandwidth_hz <= 0:
            raise DataError("NB bandwidth_hz must be positive")
        if not (0 < self.dme.pulse_width_s < self.dme.pulse_pair_spacing_s):
            raise DataError("DME pulse_width_s must be in (0, pulse_pair_spacing_s)")
        if self.dme.pair_rate_hz <= 0:
            raise DataError("DME pair_rate_hz must be positive")


@dataclass
class IqSignal:
    samples: np.ndarray  # complex128 baseband
    sample_rate_hz: float
    label: JamClass
    seed: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


def _num_samples(params: SynthParams) -> int:
    n = int(round(params.duration_s * params.sample_rate_hz))
    if n <= 0:
        raise DataError(
            f"duration {params.duration_s}s at {params.sample_rate_hz} Hz yields no samples"
        )
    return n


def _am_wave(t: np.ndarray, p: AmParams) -> np.ndarray:
    envelope = 1.0 + p.mod_index * np.cos(2 * np.pi * p.mod_rate_hz * t)
    return envelope * np.exp(2j * np.pi * p.carrier_offset_hz * t)


def _chirp_wave(t: np.ndarray, p: ChirpParams) -> np.ndarray:
    # Quadratic phase per sweep segment plus the exact accumulated phase of
    # completed segments keeps the phase continuous across sweep wraps.
    period = p.sweep_period_s
    rate = (p.f_end_hz - p.f_start_hz) / period
    n_seg = np.floor(t / period)
    tau = t - n_seg * period
    seg_phase = 2 * np.pi * (p.f_start_hz * period + 0.5 * rate * period**2)
    phase = 2 * np.pi * (p.f_start_hz * tau + 0.5 * rate * tau**2) + n_seg * seg_phase
    return np.exp(1j * phase)


def _fm_wave(t: np.ndarray, p: FmParams) -> np.ndarray:
    beta = p.freq_dev_hz / p.mod_rate_hz
    phase = 2 * np.pi * p.carrier_offset_hz * t + beta * np.sin(2 * np.pi * p.mod_rate_hz * t)
    return np.exp(1j * phase)


# Narrowing factor applied to the windowed-sinc design cutoff so that the
# filter transition band stays inside [center - bw/2, center + bw/2].
_NB_TAPS = 64
_NB_CUTOFF_SHRINK_HZ_PER_FS = 1.1 / _NB_TAPS  # roughly half the Hamming transition width


def _nb_filter_taps(p: NbParams, fs: float) -> np.ndarray:
    m = _NB_TAPS - 1
    n = np.arange(_NB_TAPS) - m / 2
    cutoff = max(p.bandwidth_hz / 2 - _NB_CUTOFF_SHRINK_HZ_PER_FS * fs, 0.02 * p.bandwidth_hz)
    lowpass = 2 * cutoff / fs * np.sinc(2 * cutoff / fs * n)
    window = np.hamming(_NB_TAPS)
    taps = lowpass * window
    return taps * np.exp(2j * np.pi * p.center_hz / fs * n)


def _nb_wave(n_samples: int, p: NbParams, fs: float, rng: np.random.Generator) -> np.ndarray:
    white = rng.normal(0.0, math.sqrt(0.5), n_samples) + 1j * rng.normal(0.0, math.sqrt(0.5), n_samples)
    return np.convolve(white, _nb_filter_taps(p, fs), mode="same")


def _dme_wave(t: np.ndarray, p: DmeParams, duration: float, rng: np.random.Generator) -> np.ndarray:
    sigma = p.pulse_width_s / (2 * math.sqrt(2 * math.log(2)))
    n_pairs = int(rng.poisson(p.pair_rate_hz * duration))
    n_pairs = max(n_pairs, 1)  # a window with zero pulse pairs would be unlabeled noise
    starts = np.sort(rng.uniform(0.0, duration, n_pairs))
    wave = np.zeros(len(t))
    for t0 in starts:
        for offset in (0.0, p.pulse_pair_spacing_s):
            wave += np.exp(-0.5 * ((t - t0 - offset) / sigma) ** 2)
    return wave.astype(np.complex128)


def _bpsk_wave(n_samples: int, rng: np.random.Generator) -> np.ndarray:
    n_chips = -(-n_samples // _GNSS_SAMPLES_PER_CHIP)
    chips = rng.integers(0, 2, n_chips) * 2.0 - 1.0
    return np.repeat(chips, _GNSS_SAMPLES_PER_CHIP)[:n_samples].astype(np.complex128)


def _scale_to_power(wave: np.ndarray, power: float) -> np.ndarray:
    realized = float(np.mean(np.abs(wave) ** 2))
    if realized <= 0:
        raise DataError("jammer waveform has zero power")
    return wave * math.sqrt(power / realized)


def jammer_only(jam_class: JamClass, params: SynthParams, seed: int) -> IqSignal:
    """Noise-free jammer component at the configured jammer-to-noise power.

    For the no-jamming class this is the -20 dB BPSK navigation stand-in.
    """
    params.validate()
    n = _num_samples(params)
    fs = params.sample_rate_hz
    t = np.arange(n) / fs
    rng = make_rng(seed, "jammer", int(jam_class))
    if jam_class == JamClass.NOJAM:
        wave = _bpsk_wave(n, rng)
        power = 10 ** (_GNSS_POWER_DB / 10)
    else:
        if jam_class == JamClass.SINGLE_AM:
            wave = _am_wave(t, params.am)
        elif jam_class == JamClass.SINGLE_CHIRP:
            wave = _chirp_wave(t, params.chirp)
        elif jam_class == JamClass.SINGLE_FM:
            wave = _fm_wave(t, params.fm)
        elif jam_class == JamClass.NB:
            wave = _nb_wave(n, params.nb, fs, rng)
        elif jam_class == JamClass.DME:
            wave = _dme_wave(t, params.dme, params.duration_s, rng)
        else:  # pragma: no cover
            raise DataError(f"unhandled jamming class {jam_class}")
        power = 10 ** (params.jsr_db / 10)
    return IqSignal(_scale_to_power(wave, power), fs, jam_class, seed)


def synth_signal(jam_class: JamClass, params: SynthParams, seed: int) -> IqSignal:
    """Jammer plus unit-power complex white Gaussian noise floor."""
    jam = jammer_only(jam_class, params, seed)
    n = len(jam.samples)
    noise_rng = make_rng(seed, "noise", int(jam_class))
    noise = noise_rng.normal(0.0, math.sqrt(0.5), n) + 1j * noise_rng.normal(0.0, math.sqrt(0.5), n)
    return IqSignal(jam.samples + noise, params.sample_rate_hz, jam_class, seed)


# ---------------------------------------------------------------------------
# GIQ1 file format: 16-byte header (magic, version u16 LE, label u8, pad u8,
# sample rate f64 LE) followed by interleaved little-endian float32 I,Q pairs.
# A key=value sidecar carries class, seed, jsr_db, duration_s.
# ---------------------------------------------------------------------------


def write_iq(path: str | Path, sig: IqSignal, jsr_db: float) -> Path:
    path = Path(path)
    header = struct.pack("<4sHBB", GIQ_MAGIC, GIQ_VERSION, int(sig.label), 0)
    header += struct.pack("<d", sig.sample_rate_hz)
    interleaved = np.empty(2 * len(sig.samples), dtype="<f4")
    interleaved[0::2] = sig.samples.real.astype(np.float32)
    interleaved[1::2] = sig.samples.imag.astype(np.float32)
    path.write_bytes(header + interleaved.tobytes())
    sidecar = (
        f"class={sig.label.label}\n"
        f"seed={sig.seed}\n"
        f"jsr_db={jsr_db!r}\n"
        f"duration_s={sig.duration_s!r}\n"
    )
    Path(str(path) + ".meta").write_text(sidecar)
    return path


def read_iq(path: str | Path) -> IqSignal:
    raw = Path(path).read_bytes()
    if len(raw) < 16:
        raise DataError(f"{path}: truncated IQ file")
    magic, version, label, _pad = struct.unpack("<4sHBB", raw[:8])
    if magic != GIQ_MAGIC:
        raise DataError(f"{path}: bad magic {magic!r}")
    if version != GIQ_VERSION:
        raise DataError(f"{path}: unsupported version {version}")
    (fs,) = struct.unpack("<d", raw[8:16])
    flat = np.frombuffer(raw[16:], dtype="<f4")
    if len(flat) % 2:
        raise DataError(f"{path}: odd float count, not interleaved I/Q")
    samples = flat[0::2].astype(np.float64) + 1j * flat[1::2].astype(np.float64)
    meta = read_sidecar(path)
    seed = int(meta.get("seed", 0))
    return IqSignal(samples, fs, JamClass(label), seed)


def read_sidecar(path: str | Path) -> dict[str, str]:
    sidecar = Path(str(path) + ".meta")
    if not sidecar.exists():
        return {}
    out: dict[str, str] = {}
    for line in sidecar.read_text().splitlines():
        if "=" in line:
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out
