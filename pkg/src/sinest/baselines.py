"""Seeding and baseline estimation: DFT peak picking and matching pursuit."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SinusoidState, make_sine_window, make_time_grid
from .solvers import OpCounter


@dataclass
class PeakPickConfig:
    """Greedy spectral peak selection parameters."""

    max_peaks: int
    min_separation: int = 2  # bins

    def __post_init__(self):
        if self.max_peaks < 1:
            raise ValueError("max_peaks must be >= 1")
        if self.min_separation < 1:
            raise ValueError("min_separation must be >= 1")


def dft_peak_pick(x_h: np.ndarray, config: PeakPickConfig) -> np.ndarray:
    """Seed frequencies from the highest DFT-magnitude local maxima.

    Operates on the windowed frame; candidate bins 1..L/2-1 are local
    maxima of the magnitude spectrum, picked greedily by magnitude while
    suppressing neighbours closer than min_separation bins.  Returns at
    most max_peaks seeds theta = 2 pi bin / L, ascending; a spectrum
    with no interior local maximum yields an empty array.
    """
    x_h = np.asarray(x_h, dtype=np.float64)
    L = x_h.size
    if L < 8:
        raise ValueError(f"frame too short for peak picking: {L}")
    mag = np.abs(np.fft.rfft(x_h))
    bins = np.arange(1, L // 2)
    left = mag[bins - 1]
    mid = mag[bins]
    right = mag[bins + 1]
    is_peak = (mid >= left) & (mid >= right) & ((mid > left) | (mid > right))
    candidates = bins[is_peak]
    if candidates.size == 0:
        return np.array([])
    order = candidates[np.argsort(-mag[candidates], kind="stable")]
    chosen: list[int] = []
    for b in order:
        if all(abs(b - c) >= config.min_separation for c in chosen):
            chosen.append(int(b))
            if len(chosen) == config.max_peaks:
                break
    chosen.sort()
    return 2.0 * math.pi * np.array(chosen, dtype=np.float64) / L


@dataclass
class MpConfig:
    """Matching-pursuit dictionary and extraction parameters.

    The dictionary is an `oversampling`-times refinement of the DFT
    grid: frequency step 2 pi / (L * oversampling).  With seeds given
    and clamp_to_seeds set, only dictionary points within
    `band_halfwidth` (default one DFT bin) of a seed are searched.
    """

    oversampling: int = 64
    max_atoms: int = 1
    clamp_to_seeds: bool = True
    band_halfwidth: float | None = None  # rad/sample; None -> 2 pi / L

    def __post_init__(self):
        P = self.oversampling
        if P < 1 or (P & (P - 1)) != 0:
            raise ValueError("oversampling must be a power of two >= 1")
        if self.max_atoms < 1:
            raise ValueError("max_atoms must be >= 1")
        if self.band_halfwidth is not None and not self.band_halfwidth > 0.0:
            raise ValueError("band_halfwidth must be positive")


def _dictionary_thetas(L: int, seeds, config: MpConfig) -> np.ndarray:
    step = 2.0 * math.pi / (L * config.oversampling)
    n_points = (L * config.oversampling) // 2
    k = np.arange(1, n_points)
    thetas = k * step
    if seeds is not None and config.clamp_to_seeds:
        seeds = np.atleast_1d(np.asarray(seeds, dtype=np.float64))
        halfwidth = config.band_halfwidth
        if halfwidth is None:
            halfwidth = 2.0 * math.pi / L
        keep = np.zeros(thetas.size, dtype=bool)
        for seed in seeds:
            keep |= np.abs(thetas - seed) <= halfwidth
        thetas = thetas[keep]
    return thetas


def matching_pursuit(
    x_h: np.ndarray,
    seeds=None,
    config: MpConfig | None = None,
    ops: OpCounter | None = None,
) -> list[SinusoidState]:
    """Greedy sinusoid extraction over a non-modulated dictionary.

    At each step the dictionary frequency whose windowed (cos, sin) pair
    captures the most residual energy is selected; the joint projection
    is subtracted and the atom recorded with amp_slope = 0.  Atoms use
    the same sine window as the estimators so residuals are comparable.
    """
    if config is None:
        raise ValueError("an MpConfig is required")
    x_h = np.asarray(x_h, dtype=np.float64)
    L = x_h.size
    grid = make_time_grid(L)
    window = make_sine_window(L)
    thetas = _dictionary_thetas(L, seeds, config)
    if thetas.size == 0:
        raise ValueError("empty dictionary after seed constraints")

    n = grid.n_values
    h = window.h
    phases = np.outer(thetas, n)
    cos_atoms = h * np.cos(phases)          # (n_atoms, L)
    sin_atoms = h * np.sin(phases)
    cos_n2 = np.einsum("ij,ij->i", cos_atoms, cos_atoms)
    sin_n2 = np.einsum("ij,ij->i", sin_atoms, sin_atoms)
    if ops is not None:
        ops.ew_mult(thetas.size * L)              # phase outer product
        ops.ew_mult(2 * thetas.size * L)          # windowing the dictionary
        ops.multiplies += 2 * thetas.size * L     # per-row squared norms
        ops.additions += 2 * thetas.size * (L - 1)

    residual = x_h.copy()
    out: list[SinusoidState] = []
    for _ in range(config.max_atoms):
        pc = cos_atoms @ residual
        ps = sin_atoms @ residual
        if ops is not None:
            ops.multiplies += 2 * thetas.size * L
            ops.additions += 2 * thetas.size * (L - 1)
        energy = pc * pc / cos_n2 + ps * ps / sin_n2
        best = int(np.argmax(energy))
        c = pc[best] / cos_n2[best]
        s = ps[best] / sin_n2[best]
        residual = residual - c * cos_atoms[best] - s * sin_atoms[best]
        if ops is not None:
            ops.axpy(L)
            ops.axpy(L)
        amp = math.hypot(c, s)
        if amp == 0.0:
            break
        phi = math.atan2(-s, c)
        out.append(SinusoidState(amp=amp, theta=float(thetas[best]), phi=phi))
    return out
