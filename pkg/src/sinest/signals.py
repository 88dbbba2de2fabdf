"""Test-signal generation, WAV I/O and frame extraction."""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import UnsupportedWavError, WavParseError

#: Total length (samples) of the standard synthetic chirp mixture.
DEFAULT_CHIRP_LENGTH = 16384


@dataclass(frozen=True)
class ChirpSpec:
    """One linear chirp: instantaneous frequency runs from theta_start to
    theta_end (rad/sample) across the signal; amplitude is relative to
    the loudest component (0 dB = 1.0)."""

    theta_start: float
    theta_end: float
    amplitude_db: float = 0.0
    phase0: float = 0.0

    def __post_init__(self):
        for th in (self.theta_start, self.theta_end):
            if not 0.0 < th < math.pi:
                raise ValueError(f"chirp frequency {th} outside (0, pi)")

    @property
    def amplitude(self) -> float:
        return 10.0 ** (self.amplitude_db / 20.0)


def five_chirp_preset() -> list[ChirpSpec]:
    """The standard five-chirp benchmark mixture: frequencies sweeping
    0.05..0.25 up to 2.0..2.8 rad/sample at 0 to -12 dB."""
    starts = (0.05, 0.10, 0.15, 0.20, 0.25)
    ends = (2.0, 2.2, 2.4, 2.6, 2.8)
    dbs = (0.0, -3.0, -6.0, -9.0, -12.0)
    return [ChirpSpec(s, e, db) for s, e, db in zip(starts, ends, dbs)]


def true_frequency_at(spec: ChirpSpec, total_length: int, sample_index: float) -> float:
    """Instantaneous frequency of the chirp at a (possibly fractional)
    sample index: linear interpolation between the endpoints."""
    if not 0 <= sample_index < total_length:
        raise ValueError(f"sample index {sample_index} outside [0, {total_length})")
    frac = sample_index / (total_length - 1)
    return spec.theta_start + (spec.theta_end - spec.theta_start) * frac


def chirp_phase_track(spec: ChirpSpec, total_length: int) -> np.ndarray:
    """Cumulative phase such that phase[m+1] - phase[m] equals the
    instantaneous frequency at sample m exactly."""
    m = np.arange(total_length, dtype=np.float64)
    inst = spec.theta_start + (spec.theta_end - spec.theta_start) * m / (total_length - 1)
    phase = np.empty(total_length)
    phase[0] = spec.phase0
    phase[1:] = spec.phase0 + np.cumsum(inst[:-1])
    return phase


def gen_chirp_mix(specs, total_length: int) -> np.ndarray:
    """Sum of linear chirps with exactly known per-sample frequencies."""
    if total_length < 2:
        raise ValueError("total_length must be >= 2")
    out = np.zeros(total_length)
    for spec in specs:
        out += spec.amplitude * np.cos(chirp_phase_track(spec, total_length))
    return out


def add_awgn(signal: np.ndarray, snr_db: float, seed: int) -> np.ndarray:
    """Add white Gaussian noise at the requested SNR; deterministic per seed."""
    signal = np.asarray(signal, dtype=np.float64)
    if math.isinf(snr_db) and snr_db > 0:
        return signal.copy()
    power = float(np.mean(signal * signal))
    if power == 0.0:
        raise ValueError("cannot set a finite SNR on a silent signal")
    noise_power = power / (10.0 ** (snr_db / 10.0))
    rng = np.random.default_rng(seed)
    return signal + math.sqrt(noise_power) * rng.standard_normal(signal.size)


@dataclass(frozen=True)
class AudioBuffer:
    """Mono float audio in [-1, 1)."""

    samples: np.ndarray
    sample_rate: int


def read_wav(path) -> AudioBuffer:
    """Read a 16-bit PCM RIFF/WAVE file (stereo is averaged to mono).

    Unknown chunks are skipped; a malformed container raises
    WavParseError and unsupported codecs raise UnsupportedWavError.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavParseError("not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if cid == b"fmt ":
            if size < 16:
                raise WavParseError("fmt chunk too small")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data":
            if len(body) < size:
                raise WavParseError("data chunk truncated")
            payload = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    if fmt is None or payload is None:
        raise WavParseError("missing fmt or data chunk")

    audio_format, channels, sample_rate, _, _, bits = fmt
    if audio_format != 1:
        raise UnsupportedWavError(f"audio format {audio_format} is not PCM")
    if bits != 16:
        raise UnsupportedWavError(f"{bits}-bit PCM is not supported (16-bit only)")
    if channels not in (1, 2):
        raise UnsupportedWavError(f"{channels}-channel audio is not supported")

    raw = np.frombuffer(payload, dtype="<i2")
    if channels == 2:
        if raw.size % 2:
            raise WavParseError("stereo data chunk has an odd sample count")
        raw = raw.reshape(-1, 2).mean(axis=1)
    samples = np.asarray(raw, dtype=np.float64) / 32768.0
    return AudioBuffer(samples=samples, sample_rate=sample_rate)


def write_wav(path, buffer: AudioBuffer) -> None:
    """Write mono 16-bit PCM, rounding and saturating the samples."""
    x = np.asarray(buffer.samples, dtype=np.float64)
    q = np.clip(np.rint(x * 32768.0), -32768, 32767).astype("<i2")
    payload = q.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    fmt = b"fmt " + struct.pack(
        "<IHHIIHH", 16, 1, 1, buffer.sample_rate, buffer.sample_rate * 2, 2, 16
    )
    data = b"data" + struct.pack("<I", len(payload)) + payload
    with open(path, "wb") as fh:
        fh.write(header + fmt + data)


@dataclass(frozen=True)
class FramePlan:
    """Frame length and hop for overlapped analysis."""

    frame_length: int = 256
    hop: int = 192

    def __post_init__(self):
        if not 1 <= self.hop <= self.frame_length:
            raise ValueError("hop must satisfy 1 <= hop <= frame_length")


def frame_stream(signal: np.ndarray, plan: FramePlan) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (start, frame) pairs at offsets 0, hop, 2*hop, ...; a final
    partial frame is dropped."""
    signal = np.asarray(signal, dtype=np.float64)
    L = plan.frame_length
    start = 0
    while start + L <= signal.size:
        yield start, signal[start:start + L]
        start += plan.hop
