"""Windowed sinusoid model: time grid, basis construction, coefficient maps.

A frame of N sinusoids is modelled as

    x(n) = h(n) * sum_k (A_k + A._k n [+ A.._k n^2])
                  * cos((theta_k [+ theta._k n]) n + phi_k)

on a time grid centred on the frame (n = 0 falls between the two middle
samples when the frame length is even).  Linearising around seed
frequencies turns each sinusoid into 4 (order 1) or 6 (order 2) windowed
basis columns whose coefficients map back to the explicit parameters in
closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBasisError, InvalidFrequencyError

ModelOrder = int  # 1 or 2

# per-sinusoid component groups in solver sweep order; parity is fixed by
# the symmetry of the grid: cos-like columns are even, sin-like odd
_GROUPS_1 = ("c", "s", "t", "d")
_GROUPS_2 = ("c", "s", "t", "d", "f", "u")
_GROUP_PARITY = {"c": "even", "s": "odd", "t": "even", "d": "odd", "f": "even", "u": "odd"}


def check_order(order: int) -> int:
    if order not in (1, 2):
        raise ValueError(f"model order must be 1 or 2, got {order!r}")
    return order


def component_groups(order: int) -> tuple[str, ...]:
    """Component-group labels in the order a solver sweep visits them."""
    return _GROUPS_1 if check_order(order) == 1 else _GROUPS_2


@dataclass(frozen=True)
class TimeGrid:
    """Centred, unit-spaced sample times for one frame.

    n_values[i] = i - (L-1)/2, so the grid is symmetric about zero and
    half-integer valued for even L.
    """

    length: int
    n_values: np.ndarray

    def split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Decompose a frame into orthogonal even/odd parity halves.

        The sqrt(2) scaling makes the transform orthonormal: norms and
        inner products against parity-definite vectors are preserved.
        For odd L the centre sample belongs wholly to the even half.
        """
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.length,):
            raise ValueError(f"expected length-{self.length} frame, got {x.shape}")
        L = self.length
        half = L // 2
        right = x[L - half:]
        left = x[:half][::-1]
        inv_sqrt2 = 1.0 / math.sqrt(2.0)
        even = (right + left) * inv_sqrt2
        odd = (right - left) * inv_sqrt2
        if L % 2:
            even = np.concatenate(([x[half]], even))
        return even, odd

    def merge(self, even: np.ndarray, odd: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`split`."""
        L = self.length
        half = L // 2
        inv_sqrt2 = 1.0 / math.sqrt(2.0)
        ev = np.asarray(even, dtype=np.float64)
        centre = None
        if L % 2:
            centre = ev[0]
            ev = ev[1:]
        right = (ev + odd) * inv_sqrt2
        left = ((ev - odd) * inv_sqrt2)[::-1]
        if centre is None:
            return np.concatenate((left, right))
        return np.concatenate((left, [centre], right))


def make_time_grid(length: int) -> TimeGrid:
    """Centred time grid for a frame of `length` samples."""
    if length < 2:
        raise ValueError(f"frame length must be >= 2, got {length}")
    n = np.arange(length, dtype=np.float64) - (length - 1) / 2.0
    n.setflags(write=False)
    return TimeGrid(length=length, n_values=n)


@dataclass(frozen=True)
class Window:
    """Even-symmetric analysis window, weights in (0, 1]."""

    length: int
    h: np.ndarray


def make_sine_window(length: int) -> Window:
    """Sine window h(n) = cos(pi n / L) on the centred grid.

    Applying it to both the input frame and the basis columns gives an
    effective Hanning weighting of the fit.
    """
    if length < 2:
        raise ValueError(f"window length must be >= 2, got {length}")
    n = make_time_grid(length).n_values
    h = np.cos(np.pi * n / length)
    h.setflags(write=False)
    return Window(length=length, h=h)


@dataclass(frozen=True)
class SinusoidState:
    """Explicit parameters of one windowed sinusoid.

    amp is in signal units, theta in rad/sample, phi in rad (normalised
    into (-pi, pi]), amp_slope in units/sample.  amp_curve and
    theta_slope participate only in the order-2 model.
    """

    amp: float
    theta: float
    phi: float
    amp_slope: float = 0.0
    amp_curve: float = 0.0
    theta_slope: float = 0.0

    def __post_init__(self):
        if not self.amp >= 0.0:
            raise ValueError(f"amplitude must be >= 0, got {self.amp}")
        if not 0.0 < self.theta < math.pi:
            raise InvalidFrequencyError(
                f"theta must lie in (0, pi) rad/sample, got {self.theta}"
            )
        phi = math.remainder(self.phi, 2.0 * math.pi)  # (-pi, pi]
        if phi <= -math.pi:
            phi += 2.0 * math.pi
        object.__setattr__(self, "phi", phi)


@dataclass(frozen=True)
class LinearCoeffs:
    """Linearised-model coefficients of one sinusoid.

    c, s weight cos/sin; d, t weight n cos/n sin; f, u weight the
    order-2 columns n^2 cos/n^2 sin and stay zero in the order-1 model.
    """

    c: float
    s: float
    d: float
    t: float
    f: float = 0.0
    u: float = 0.0

    def __post_init__(self):
        for name in ("c", "s", "d", "t", "f", "u"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"coefficient {name} is not finite")


@dataclass(frozen=True)
class BasisSet:
    """Windowed, pre-normalised basis columns for a set of seed frequencies.

    Column layout is group-major in sweep order: all c columns (one per
    sinusoid, ascending as given), then all s, t, d (and f, u for order
    2).  `columns[:, j]` has unit norm; `norms[j]` is the original norm
    so physical coefficients can be recovered.  `half_cols[j]` is the
    parity-projected half of the *unnormalised* column (its norm equals
    `norms[j]`), which is what the fast solver path consumes.
    """

    thetas: np.ndarray
    order: int
    grid: TimeGrid
    window: Window
    columns: np.ndarray          # (L, K), unit-norm
    norms: np.ndarray            # (K,)
    parity: tuple[str, ...]      # "even" | "odd" per column
    half_cols: tuple[np.ndarray, ...]
    norm2: np.ndarray = field(repr=False, default=None)  # squared half-column norms

    @property
    def n_sinusoids(self) -> int:
        return len(self.thetas)

    @property
    def n_components(self) -> int:
        return self.columns.shape[1]

    def component_index(self, group: str, k: int) -> int:
        """Flat column index of component `group` for sinusoid k."""
        groups = component_groups(self.order)
        return groups.index(group) * self.n_sinusoids + k


def _raw_column(group: str, theta: float, n: np.ndarray, h: np.ndarray) -> np.ndarray:
    phase = theta * n
    if group == "c":
        return h * np.cos(phase)
    if group == "s":
        return h * np.sin(phase)
    if group == "d":
        return n * (h * np.cos(phase))
    if group == "t":
        return n * (h * np.sin(phase))
    if group == "f":
        return n * n * (h * np.cos(phase))
    if group == "u":
        return n * n * (h * np.sin(phase))
    raise ValueError(f"unknown component group {group!r}")


def build_basis(seeds, grid: TimeGrid, window: Window, order: int = 1) -> BasisSet:
    """Build the windowed basis at the given seed frequencies.

    Raises InvalidFrequencyError for seeds outside (0, pi) and
    DegenerateBasisError if a column cannot be normalised.
    """
    check_order(order)
    thetas = np.atleast_1d(np.asarray(seeds, dtype=np.float64))
    if thetas.ndim != 1 or thetas.size == 0:
        raise ValueError("seeds must be a non-empty 1-D sequence")
    if np.any(thetas <= 0.0) or np.any(thetas >= math.pi):
        raise InvalidFrequencyError(
            "all seed frequencies must lie strictly inside (0, pi) rad/sample"
        )
    if grid.length != window.length:
        raise ValueError("grid and window lengths differ")

    n = grid.n_values
    h = window.h
    groups = component_groups(order)
    raw = [
        _raw_column(g, float(th), n, h) for g in groups for th in thetas
    ]
    norms = np.array([np.linalg.norm(col) for col in raw])
    if np.any(norms < 1e-300):
        raise DegenerateBasisError("basis column with zero norm")
    columns = np.column_stack([col / nrm for col, nrm in zip(raw, norms)])

    parity = tuple(_GROUP_PARITY[g] for g in groups for _ in thetas)
    halves = []
    for col, par in zip(raw, parity):
        even, odd = grid.split(col)
        halves.append(np.ascontiguousarray(even if par == "even" else odd))
    norm2 = np.array([np.dot(hc, hc) for hc in halves])

    return BasisSet(
        thetas=thetas,
        order=order,
        grid=grid,
        window=window,
        columns=columns,
        norms=norms,
        parity=parity,
        half_cols=tuple(halves),
        norm2=norm2,
    )


def coeffs_from_params(
    state: SinusoidState, order: int = 1, delta_theta: float = 0.0
) -> LinearCoeffs:
    """Map explicit parameters to linearised coefficients.

    With delta_theta = 0 this is the forward step of the non-linear
    solver (the frequency correction has just been folded into theta).
    A non-zero delta_theta produces the full linearised expansion about
    theta, which is what the linearisation-error diagnostics need.
    """
    check_order(order)
    cos_phi = math.cos(state.phi)
    sin_phi = math.sin(state.phi)
    c = state.amp * cos_phi
    s = -state.amp * sin_phi
    d = state.amp_slope * cos_phi - state.amp * delta_theta * sin_phi
    t = -state.amp_slope * sin_phi - state.amp * delta_theta * cos_phi
    if order == 1:
        return LinearCoeffs(c=c, s=s, d=d, t=t)
    f = state.amp_curve * cos_phi - state.amp * state.theta_slope * sin_phi
    u = -state.amp_curve * sin_phi - state.amp * state.theta_slope * cos_phi
    return LinearCoeffs(c=c, s=s, d=d, t=t, f=f, u=u)


def params_from_coeffs(
    coeffs: LinearCoeffs,
    theta_prev: float,
    order: int = 1,
    amp_floor: float = 0.0,
) -> tuple[SinusoidState, float]:
    """Recover explicit parameters from linearised coefficients.

    Returns the state together with the frequency correction
    delta_theta, which the caller applies as theta <- theta + alpha *
    delta_theta.  Amplitudes at or below `amp_floor` short-circuit to a
    silent state instead of dividing by a vanishing amplitude.
    """
    check_order(order)
    amp = math.hypot(coeffs.c, coeffs.s)
    if amp <= amp_floor or amp == 0.0:
        return SinusoidState(amp=0.0, theta=theta_prev, phi=0.0), 0.0
    phi = math.atan2(-coeffs.s, coeffs.c)
    amp_slope = (coeffs.d * coeffs.c + coeffs.s * coeffs.t) / amp
    delta_theta = (coeffs.d * coeffs.s - coeffs.t * coeffs.c) / (amp * amp)
    if order == 1:
        state = SinusoidState(amp=amp, theta=theta_prev, phi=phi, amp_slope=amp_slope)
        return state, delta_theta
    amp_curve = (coeffs.f * coeffs.c + coeffs.s * coeffs.u) / amp
    theta_slope = (coeffs.f * coeffs.s - coeffs.u * coeffs.c) / (amp * amp)
    state = SinusoidState(
        amp=amp,
        theta=theta_prev,
        phi=phi,
        amp_slope=amp_slope,
        amp_curve=amp_curve,
        theta_slope=theta_slope,
    )
    return state, delta_theta


def synthesize_exact(states, grid: TimeGrid, window: Window, order: int = 1) -> np.ndarray:
    """Windowed sum of exact (non-linearised) modulated sinusoids."""
    check_order(order)
    n = grid.n_values
    out = np.zeros(grid.length)
    for st in states:
        amp = st.amp + st.amp_slope * n
        phase = st.theta * n + st.phi
        if order == 2:
            amp = amp + st.amp_curve * n * n
            phase = phase + st.theta_slope * n * n
        out += amp * np.cos(phase)
    return window.h * out


def synthesize_linearised(coeffs, basis: BasisSet) -> np.ndarray:
    """Reconstruct the linearised model from physical coefficients.

    `coeffs` is one LinearCoeffs per sinusoid in basis order; physical
    values are rescaled by the recorded column norms so the sum runs
    over the stored unit-norm columns.
    """
    coeffs = list(coeffs)
    if len(coeffs) != basis.n_sinusoids:
        raise ValueError(
            f"got {len(coeffs)} coefficient sets for {basis.n_sinusoids} sinusoids"
        )
    w = coeffs_to_array(coeffs, basis.order)
    return basis.columns @ (w * basis.norms)


def coeffs_to_array(coeffs, order: int) -> np.ndarray:
    """Flatten per-sinusoid coefficients into group-major solver layout."""
    groups = component_groups(order)
    return np.array([getattr(cf, g) for g in groups for cf in coeffs])


def array_to_coeffs(w: np.ndarray, n_sinusoids: int, order: int) -> list[LinearCoeffs]:
    """Inverse of :func:`coeffs_to_array`."""
    groups = component_groups(order)
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (len(groups) * n_sinusoids,):
        raise ValueError(f"coefficient array has shape {w.shape}")
    per_group = {g: w[i * n_sinusoids:(i + 1) * n_sinusoids] for i, g in enumerate(groups)}
    out = []
    for k in range(n_sinusoids):
        kw = {g: float(per_group[g][k]) for g in groups}
        out.append(LinearCoeffs(**kw))
    return out


def linearisation_error(
    state: SinusoidState,
    delta_theta: float,
    grid: TimeGrid,
    window: Window,
    order: int = 1,
) -> float:
    """RMS gap between exact synthesis at theta + delta_theta and the
    linearised model expanded about theta."""
    check_order(order)
    shifted = SinusoidState(
        amp=state.amp,
        theta=state.theta + delta_theta,
        phi=state.phi,
        amp_slope=state.amp_slope,
        amp_curve=state.amp_curve,
        theta_slope=state.theta_slope,
    )
    exact = synthesize_exact([shifted], grid, window, order)
    basis = build_basis([state.theta], grid, window, order)
    coeffs = coeffs_from_params(state, order, delta_theta=delta_theta)
    approx = synthesize_linearised([coeffs], basis)
    return float(np.sqrt(np.mean((exact - approx) ** 2)))
