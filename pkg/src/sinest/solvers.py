"""Least-squares solvers for the linearised sinusoid model.

Three routes solve the same normal equations:

* :func:`direct_ls_solve` -- dense solve, the accuracy oracle;
* :func:`jacobi_solve` -- reference simultaneous-update iteration,
  convergence not guaranteed;
* :func:`gauss_seidel_sweep` / :func:`linear_estimate` -- the production
  O(LN) path: sequential single-column projections with an immediately
  corrected residual, run on half-length parity components.

:func:`nonlinear_estimate` wraps the sweep in an outer loop that folds
each recovered frequency correction back into the basis seeds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import IllConditionedError, SolverDivergedError
from .model import (
    BasisSet,
    LinearCoeffs,
    SinusoidState,
    TimeGrid,
    Window,
    array_to_coeffs,
    check_order,
    component_groups,
    make_time_grid,
    params_from_coeffs,
)

_CONDITION_LIMIT = 1e12
_AMP_FLOOR_REL = 1e-12  # amplitude floor as a fraction of frame RMS


@dataclass
class SolverConfig:
    """Knobs shared by the iterative estimators.

    clamp_halfwidth defaults to one DFT bin (2 pi / L) at solve time;
    pass math.inf to disable clamping.  stop_tol optionally stops
    iterating once the relative residual improvement falls below it
    (off by default: fixed iteration counts match the evaluation
    protocol).
    """

    order: int = 1
    iterations: int = 1
    alpha: float = 1.0
    clamp_halfwidth: float | None = None
    count_ops: bool = False
    stop_tol: float | None = None

    def __post_init__(self):
        check_order(self.order)
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError("alpha must lie in (0, 2]")
        if self.clamp_halfwidth is not None and not self.clamp_halfwidth > 0.0:
            raise ValueError("clamp_halfwidth must be positive")

    def resolve_clamp(self, frame_length: int) -> float:
        if self.clamp_halfwidth is None:
            return 2.0 * math.pi / frame_length
        return self.clamp_halfwidth


@dataclass
class OpCounter:
    """Tally of multiplies and additions performed by an instrumented solve.

    Counts the arithmetic of the algorithm's vector operations (basis
    construction, projections, residual updates); transcendental
    evaluations are not operations in this accounting.
    """

    multiplies: int = 0
    additions: int = 0

    @property
    def total(self) -> int:
        return self.multiplies + self.additions

    def dot(self, n: int) -> None:
        self.multiplies += n
        self.additions += max(n - 1, 0)

    def axpy(self, n: int) -> None:
        """y <- y + a*x over n elements."""
        self.multiplies += n
        self.additions += n

    def ew_mult(self, n: int) -> None:
        self.multiplies += n

    def ew_add(self, n: int) -> None:
        self.additions += n


@dataclass
class SolveTrace:
    """Optional per-iteration record filled by the estimators.

    residual_rms[i] is ||x_h - A w|| / sqrt(L) after iteration i's sweep;
    thetas[i] are the frequencies after iteration i's update (non-linear
    solves only).  Because iterations are prefix-stable, one long run
    traces every shorter run.
    """

    residual_rms: list = field(default_factory=list)
    thetas: list = field(default_factory=list)


@dataclass
class ResidualState:
    """Residual of one frame, held as orthonormal parity halves.

    The full-length residual is reconstructed on demand; the halves are
    what the sweep reads and writes.
    """

    grid: TimeGrid
    e_even: np.ndarray
    e_odd: np.ndarray

    @classmethod
    def from_signal(cls, x_h: np.ndarray, grid: TimeGrid) -> "ResidualState":
        even, odd = grid.split(x_h)
        return cls(grid=grid, e_even=even, e_odd=odd)

    @property
    def e(self) -> np.ndarray:
        return self.grid.merge(self.e_even, self.e_odd)

    def energy(self) -> float:
        return float(np.dot(self.e_even, self.e_even) + np.dot(self.e_odd, self.e_odd))


@dataclass(frozen=True)
class NormalSystem:
    """Normal equations R w = b for a pre-normalised basis."""

    R: np.ndarray
    b: np.ndarray


def build_normal_system(basis: BasisSet, x_h: np.ndarray) -> NormalSystem:
    A = basis.columns
    return NormalSystem(R=A.T @ A, b=A.T @ np.asarray(x_h, dtype=np.float64))


def split_even_odd(signal: np.ndarray, grid: TimeGrid) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal even/odd parity decomposition of a frame."""
    return grid.split(signal)


def clamp_frequency(theta: float, seed: float, halfwidth: float) -> float:
    """Clamp theta into [seed - halfwidth, seed + halfwidth] and into (0, pi)."""
    if not halfwidth > 0.0:
        raise ValueError("halfwidth must be positive")
    lo = max(seed - halfwidth, 1e-9)
    hi = min(seed + halfwidth, math.pi - 1e-9)
    return min(hi, max(lo, theta))


class _HalfBasis:
    """Parity-half basis columns, built without materialising full columns.

    For a parity-definite column the orthonormal parity transform is
    sqrt(2) times its right half (the centre sample of odd-length frames
    keeps weight 1 and belongs to the even half).  This is the
    instrumented fast path: what it counts is what it computes.
    """

    __slots__ = ("thetas", "order", "cols", "norm2", "parity", "n_sinusoids")

    def __init__(self, thetas, grid: TimeGrid, window: Window, order: int,
                 ops: OpCounter | None = None):
        check_order(order)
        thetas = np.atleast_1d(np.asarray(thetas, dtype=np.float64))
        L = grid.length
        half = L // 2
        if L % 2 == 0:
            n_h = grid.n_values[half:]
            base = math.sqrt(2.0) * window.h[half:]
            n_e = n_o = n_h
            base_e = base_o = base
            shared_half = True
        else:
            n_e = grid.n_values[half:]
            base_e = math.sqrt(2.0) * window.h[half:]
            base_e = base_e.copy()
            base_e[0] = window.h[half]
            n_o = grid.n_values[half + 1:]
            base_o = math.sqrt(2.0) * window.h[half + 1:]
            shared_half = False

        groups = component_groups(order)
        per_group: dict[str, list[np.ndarray]] = {g: [] for g in groups}
        for th in thetas:
            if shared_half:
                ph = th * n_h
                if ops is not None:
                    ops.ew_mult(n_h.size)
                cos_h, sin_h = np.cos(ph), np.sin(ph)
                c_col = base * cos_h
                s_col = base * sin_h
                t_col = n_h * s_col
                d_col = n_h * c_col
                if ops is not None:
                    ops.ew_mult(4 * n_h.size)
                if order == 2:
                    f_col = n_h * d_col
                    u_col = n_h * t_col
                    if ops is not None:
                        ops.ew_mult(2 * n_h.size)
            else:
                ph = th * n_e
                if ops is not None:
                    ops.ew_mult(n_e.size)
                cos_e, sin_e = np.cos(ph), np.sin(ph)
                c_col = base_e * cos_e
                s_col = base_o * sin_e[1:]
                t_col = n_e * (base_e * sin_e)
                d_col = n_o * (base_o * cos_e[1:])
                if ops is not None:
                    ops.ew_mult(3 * n_e.size + 3 * n_o.size)
                if order == 2:
                    f_col = n_e * (n_e * c_col)
                    u_col = n_o * (n_o * s_col)
                    if ops is not None:
                        ops.ew_mult(2 * n_e.size + 2 * n_o.size)
            per_group["c"].append(c_col)
            per_group["s"].append(s_col)
            per_group["t"].append(t_col)
            per_group["d"].append(d_col)
            if order == 2:
                per_group["f"].append(f_col)
                per_group["u"].append(u_col)

        self.cols = tuple(col for g in groups for col in per_group[g])
        self.norm2 = np.empty(len(self.cols))
        for j, col in enumerate(self.cols):
            self.norm2[j] = np.dot(col, col)
            if ops is not None:
                ops.dot(col.size)
        pmap = {"c": "even", "s": "odd", "t": "even", "d": "odd",
                "f": "even", "u": "odd"}
        self.parity = tuple(pmap[g] for g in groups for _ in thetas)
        self.thetas = thetas
        self.order = order
        self.n_sinusoids = thetas.size

    @property
    def n_components(self) -> int:
        return len(self.cols)

    @property
    def half_cols(self):
        return self.cols


def _sweep(basis_like, residual: ResidualState, w: np.ndarray,
           ops: OpCounter | None = None) -> None:
    """One projection sweep over all components; w and residual mutate."""
    e_even = residual.e_even
    e_odd = residual.e_odd
    half_cols = basis_like.half_cols
    norm2 = basis_like.norm2
    parity = basis_like.parity
    for j in range(len(half_cols)):
        col = half_cols[j]
        e = e_even if parity[j] == "even" else e_odd
        dv = np.dot(col, e) / norm2[j]
        e -= col * dv
        w[j] += dv
        if ops is not None:
            ops.dot(col.size)
            ops.multiplies += 1  # the norm division
            ops.axpy(col.size)
            ops.additions += 1


def gauss_seidel_sweep(
    basis: BasisSet,
    residual: ResidualState,
    w: np.ndarray,
    ops: OpCounter | None = None,
) -> tuple[ResidualState, np.ndarray]:
    """One full sweep of single-column projections with residual feedback.

    Components are visited group-major (all c, then s, t, d, and f, u at
    order 2), sinusoids in basis order within each group.  Each step
    projects the residual's matching parity half onto one column and
    immediately subtracts the projection, so e = x_h - A w holds again
    on exit.  `w` holds physical-domain coefficients in the group-major
    layout of :func:`sinest.model.coeffs_to_array` and is updated in
    place (and returned for convenience).
    """
    if w.shape != (basis.n_components,):
        raise ValueError(f"w has shape {w.shape}, expected ({basis.n_components},)")
    _sweep(basis, residual, w, ops)
    return residual, w


def _unnormalise(w: np.ndarray, basis: BasisSet) -> list[LinearCoeffs]:
    """Normalised-domain solution -> physical per-sinusoid coefficients."""
    return array_to_coeffs(w / basis.norms, basis.n_sinusoids, basis.order)


def direct_ls_solve(basis: BasisSet, x_h: np.ndarray) -> list[LinearCoeffs]:
    """Exact least-squares fit via the normal equations.

    Serves as the oracle the iterative solvers are checked against.
    Raises IllConditionedError when the Cholesky pivot ratio puts the
    condition estimate above 1e12.
    """
    system = build_normal_system(basis, x_h)
    try:
        cho = scipy.linalg.cho_factor(system.R, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise IllConditionedError(math.inf) from exc
    pivots = np.abs(np.diag(cho[0]))
    cond_est = float((pivots.max() / pivots.min()) ** 2)
    if cond_est > _CONDITION_LIMIT:
        raise IllConditionedError(cond_est)
    w = scipy.linalg.cho_solve(cho, system.b)
    return _unnormalise(w, basis)


def jacobi_solve(basis: BasisSet, x_h: np.ndarray, iterations: int) -> list[LinearCoeffs]:
    """Reference Jacobi iteration on the pre-normalised basis.

    w starts from the matched-filter estimate A^T x_h (unit-norm columns
    make the diagonal scaling the identity) and is refined by
    `iterations` simultaneous sweeps.  Convergence is NOT guaranteed: a
    residual growing 10x past its initial value raises
    SolverDivergedError.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    A = basis.columns
    x_h = np.asarray(x_h, dtype=np.float64)
    w = A.T @ x_h
    r = x_h - A @ w
    guard = 10.0 * np.linalg.norm(r) + 1e-300
    for _ in range(iterations):
        w = w + A.T @ r
        r = x_h - A @ w
        if np.linalg.norm(r) > guard:
            raise SolverDivergedError("Jacobi residual grew past 10x its initial value")
    return _unnormalise(w, basis)


def _window_frame(x: np.ndarray, window: Window, ops: OpCounter | None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (window.length,):
        raise ValueError(f"frame shape {x.shape} does not match window length {window.length}")
    if ops is not None:
        ops.ew_mult(window.length)
    return window.h * x


def _split_counted(x_h: np.ndarray, grid: TimeGrid, ops: OpCounter | None):
    if ops is not None:
        ops.ew_add(grid.length)
        ops.ew_mult(grid.length)
    return grid.split(x_h)


def _amp_floor(x_h: np.ndarray) -> float:
    return _AMP_FLOOR_REL * float(np.sqrt(np.mean(x_h * x_h)))


def _check_seeds(seeds) -> np.ndarray:
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.float64))
    if seeds.size < 1:
        raise ValueError("need at least one seed frequency")
    if len(np.unique(seeds)) != seeds.size:
        raise ValueError("seed frequencies must be distinct")
    return np.sort(seeds)  # ascending processing order, deterministic output


def linear_estimate(
    x: np.ndarray,
    seeds,
    window: Window,
    config: SolverConfig,
    ops: OpCounter | None = None,
    trace: SolveTrace | None = None,
) -> list[tuple[SinusoidState, float]]:
    """Estimate sinusoid parameters with the basis fixed at the seeds.

    Windows the frame, runs `config.iterations` projection sweeps, and
    recovers one (state, delta_theta) pair per seed, sorted by ascending
    seed frequency.  delta_theta is clamped so seed + delta_theta stays
    within the configured band; the state's theta remains the seed.
    """
    seeds = _check_seeds(seeds)
    grid = make_time_grid(window.length)
    x_h = _window_frame(x, window, ops)
    basis = _HalfBasis(seeds, grid, window, config.order, ops)
    e_even, e_odd = _split_counted(x_h, grid, ops)
    residual = ResidualState(grid=grid, e_even=e_even, e_odd=e_odd)
    w = np.zeros(basis.n_components)
    prev = residual.energy() if config.stop_tol is not None else 0.0
    for _ in range(config.iterations):
        _sweep(basis, residual, w, ops)
        if trace is not None:
            trace.residual_rms.append(math.sqrt(residual.energy() / grid.length))
        if config.stop_tol is not None:
            cur = residual.energy()
            if prev - cur <= config.stop_tol * max(prev, 1e-300):
                break
            prev = cur

    floor = _amp_floor(x_h)
    halfwidth = config.resolve_clamp(grid.length)
    coeffs = array_to_coeffs(w, basis.n_sinusoids, config.order)
    out = []
    for k, seed in enumerate(seeds):
        state, dth = params_from_coeffs(coeffs[k], float(seed), config.order, floor)
        dth = clamp_frequency(seed + dth, seed, halfwidth) - seed
        out.append((state, dth))
    return out


def nonlinear_estimate(
    x: np.ndarray,
    seeds,
    window: Window,
    config: SolverConfig,
    ops: OpCounter | None = None,
    trace: SolveTrace | None = None,
) -> list[SinusoidState]:
    """Iteratively re-linearised estimate (frequencies track corrections).

    Each outer iteration rebuilds the basis at the current frequencies,
    maps the explicit parameters back to coefficients, restores the
    residual e = x_h - A w, runs one projection sweep, recovers the
    parameters and steps theta <- theta + alpha * delta_theta (clamped
    to the seed band).  Returned states carry the final frequencies;
    order-2 configs additionally estimate amplitude curvature and the
    within-frame frequency slope.
    """
    seeds = _check_seeds(seeds)
    grid = make_time_grid(window.length)
    order = config.order
    x_h = _window_frame(x, window, ops)
    ev0, od0 = _split_counted(x_h, grid, ops)
    floor = _amp_floor(x_h)
    halfwidth = config.resolve_clamp(grid.length)

    N = seeds.size
    groups = component_groups(order)
    K = len(groups) * N
    th = seeds.copy()
    amp = np.zeros(N)
    phi = np.zeros(N)
    amp_slope = np.zeros(N)
    amp_curve = np.zeros(N)
    theta_slope = np.zeros(N)
    prev_energy = None

    for it in range(config.iterations):
        basis = _HalfBasis(th, grid, window, order, ops)
        cos_phi = np.cos(phi)
        sin_phi = np.sin(phi)
        w = np.zeros(K)
        w[0:N] = amp * cos_phi
        w[N:2 * N] = -amp * sin_phi
        w[2 * N:3 * N] = -amp_slope * sin_phi          # t
        w[3 * N:4 * N] = amp_slope * cos_phi           # d
        if order == 2:
            w[4 * N:5 * N] = amp_curve * cos_phi - amp * theta_slope * sin_phi
            w[5 * N:6 * N] = -amp_curve * sin_phi - amp * theta_slope * cos_phi

        e_even = ev0.copy()
        e_odd = od0.copy()
        if it > 0:
            for j, col in enumerate(basis.cols):
                wj = w[j]
                if wj != 0.0:
                    if basis.parity[j] == "even":
                        e_even -= col * wj
                    else:
                        e_odd -= col * wj
                    if ops is not None:
                        ops.axpy(col.size)
        residual = ResidualState(grid=grid, e_even=e_even, e_odd=e_odd)
        _sweep(basis, residual, w, ops)

        coeffs = array_to_coeffs(w, N, order)
        for k in range(N):
            state, dth = params_from_coeffs(coeffs[k], float(th[k]), order, floor)
            amp[k] = state.amp
            phi[k] = state.phi
            amp_slope[k] = state.amp_slope
            amp_curve[k] = state.amp_curve
            theta_slope[k] = state.theta_slope
            th[k] = clamp_frequency(th[k] + config.alpha * dth, float(seeds[k]), halfwidth)

        if trace is not None:
            trace.residual_rms.append(math.sqrt(residual.energy() / grid.length))
            trace.thetas.append(th.copy())

        if config.stop_tol is not None:
            cur = residual.energy()
            if prev_energy is not None and prev_energy - cur <= config.stop_tol * max(prev_energy, 1e-300):
                break
            prev_energy = cur

    out = []
    for k in range(N):
        out.append(
            SinusoidState(
                amp=float(amp[k]),
                theta=float(th[k]),
                phi=float(phi[k]),
                amp_slope=float(amp_slope[k]),
                amp_curve=float(amp_curve[k]) if order == 2 else 0.0,
                theta_slope=float(theta_slope[k]) if order == 2 else 0.0,
            )
        )
    return out
