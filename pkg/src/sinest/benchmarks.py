"""Metrics and experiment drivers emitting CSV tables.

Each driver reproduces one benchmark family (convergence, region of
convergence, chirp accuracy vs SNR, iteration sweeps, complexity) and
returns an :class:`ExperimentTable` whose header records the
configuration and RNG seed, so identical invocations produce identical
CSV bytes.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .baselines import MpConfig, PeakPickConfig, dft_peak_pick, matching_pursuit
from .errors import UndefinedMetricError
from .model import (
    SinusoidState,
    Window,
    make_sine_window,
    make_time_grid,
    synthesize_exact,
)
from .signals import (
    DEFAULT_CHIRP_LENGTH,
    FramePlan,
    add_awgn,
    five_chirp_preset,
    frame_stream,
    gen_chirp_mix,
    true_frequency_at,
)
from .solvers import (
    OpCounter,
    SolverConfig,
    SolveTrace,
    linear_estimate,
    nonlinear_estimate,
)

#: Paper-standard iteration counts per algorithm ("typical scenario").
TYPICAL_ITERATIONS = {"linear": 2, "nonlinear": 3, "second_order": 5}

CHIRP_ALGORITHMS = ("mp", "linear", "nonlinear", "second_order")


@dataclass
class BenchConfig:
    """Shared experiment configuration; defaults follow the typical scenario."""

    frame_length: int = 256
    hop: int = 192
    max_sines: int = 20
    mp_oversampling: int = 64
    sample_rate: float = 16000.0
    chirp_length: int = DEFAULT_CHIRP_LENGTH
    trials: int = 20
    seed: int = 0
    count_ops: bool = True
    match_gate_bins: float = 2.0

    def meta(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class ExperimentTable:
    """Rows of (condition, metric) values with a fixed schema.

    Serialised as CSV with '#'-prefixed header comments carrying the
    configuration and RNG seed.
    """

    schema: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add_row(self, *values) -> None:
        if len(values) != len(self.schema):
            raise ValueError(
                f"row arity {len(values)} does not match schema {self.schema}"
            )
        for v in values:
            if isinstance(v, (int, float, np.integer, np.floating)) and not math.isfinite(v):
                raise ValueError(f"non-finite cell value {v!r}")
        self.rows.append(tuple(values))

    def column(self, name: str) -> list:
        idx = self.schema.index(name)
        return [row[idx] for row in self.rows]

    @staticmethod
    def _cell(v) -> str:
        if isinstance(v, (bool, np.bool_)):
            return str(bool(v))
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        if isinstance(v, (float, np.floating)):
            return repr(float(v))
        return str(v)

    def to_csv_text(self) -> str:
        lines = [f"# {k}={v}" for k, v in self.meta.items()]
        lines.append(",".join(self.schema))
        for row in self.rows:
            lines.append(",".join(self._cell(v) for v in row))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv_text())


@dataclass(frozen=True)
class MatchReport:
    """Greedy nearest-frequency association between estimates and truths."""

    pairs: tuple[tuple[int, int], ...]  # (estimate index, truth index)
    unmatched_estimates: int
    unmatched_truths: int


def match_nearest(est_thetas, true_thetas) -> MatchReport:
    """Associate estimates to ground truth, globally closest pair first;
    each side is used at most once."""
    est = np.atleast_1d(np.asarray(est_thetas, dtype=np.float64))
    tru = np.atleast_1d(np.asarray(true_thetas, dtype=np.float64))
    free_e = set(range(est.size))
    free_t = set(range(tru.size))
    pairs = []
    while free_e and free_t:
        best = None
        for i in sorted(free_e):
            for j in sorted(free_t):
                d = abs(est[i] - tru[j])
                if best is None or d < best[0]:
                    best = (d, i, j)
        _, i, j = best
        pairs.append((i, j))
        free_e.remove(i)
        free_t.remove(j)
    return MatchReport(
        pairs=tuple(pairs),
        unmatched_estimates=len(free_e),
        unmatched_truths=len(free_t),
    )


def freq_rms_error(est_thetas, true_thetas) -> float:
    """RMS frequency error over greedily matched estimate/truth pairs."""
    est = np.atleast_1d(np.asarray(est_thetas, dtype=np.float64))
    tru = np.atleast_1d(np.asarray(true_thetas, dtype=np.float64))
    report = match_nearest(est, tru)
    if not report.pairs:
        raise UndefinedMetricError("no matched estimate/truth pairs")
    sq = [(est[i] - tru[j]) ** 2 for i, j in report.pairs]
    return float(np.sqrt(np.mean(sq)))


def residual_rms(x_h: np.ndarray, x_tilde: np.ndarray) -> float:
    """||x_h - x_tilde|| / sqrt(L)."""
    x_h = np.asarray(x_h, dtype=np.float64)
    x_tilde = np.asarray(x_tilde, dtype=np.float64)
    if x_h.shape != x_tilde.shape:
        raise ValueError("length mismatch")
    return float(np.sqrt(np.mean((x_h - x_tilde) ** 2)))


def reconstruction_rms_vs_clean(x_tilde: np.ndarray, clean_windowed: np.ndarray) -> float:
    """Reconstruction error against the noise-free windowed reference."""
    return residual_rms(clean_windowed, x_tilde)


# ---------------------------------------------------------------------------
# estimation helpers shared by the drivers


def _linear_final_states(results) -> list[SinusoidState]:
    """Fold the reported frequency corrections into the states."""
    out = []
    for state, dth in results:
        out.append(dataclasses.replace(state, theta=state.theta + dth))
    return out


def estimate_frame(
    frame: np.ndarray,
    seeds,
    window: Window,
    algorithm: str,
    mp_oversampling: int = 64,
    ops: OpCounter | None = None,
) -> list[SinusoidState]:
    """Run one algorithm at its standard configuration on one raw frame."""
    if algorithm == "mp":
        x_h = window.h * np.asarray(frame, dtype=np.float64)
        cfg = MpConfig(
            oversampling=mp_oversampling,
            max_atoms=len(np.atleast_1d(seeds)),
            clamp_to_seeds=True,
        )
        return matching_pursuit(x_h, seeds, cfg, ops=ops)
    if algorithm == "linear":
        cfg = SolverConfig(order=1, iterations=TYPICAL_ITERATIONS["linear"])
        return _linear_final_states(linear_estimate(frame, seeds, window, cfg, ops=ops))
    if algorithm == "nonlinear":
        cfg = SolverConfig(order=1, iterations=TYPICAL_ITERATIONS["nonlinear"])
        return nonlinear_estimate(frame, seeds, window, cfg, ops=ops)
    if algorithm == "second_order":
        cfg = SolverConfig(order=2, iterations=TYPICAL_ITERATIONS["second_order"])
        return nonlinear_estimate(frame, seeds, window, cfg, ops=ops)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def _resynthesize(states, window: Window, algorithm: str) -> np.ndarray:
    grid = make_time_grid(window.length)
    order = 2 if algorithm == "second_order" else 1
    return synthesize_exact(states, grid, window, order)


# ---------------------------------------------------------------------------
# drivers


def run_convergence_experiment(alphas, config: BenchConfig, max_iterations: int = 8) -> ExperimentTable:
    """Frequency error per outer iteration for a single off-seed sinusoid.

    Setup: true theta = 0.1 pi, seed 0.095 pi, first-order model.  Rows
    are (alpha, iteration, abs_theta_error).
    """
    L = config.frame_length
    theta_true = 0.1 * math.pi
    seed_theta = 0.095 * math.pi
    phi = 0.37  # arbitrary fixed phase; results are phase-insensitive here
    window = make_sine_window(L)
    n = make_time_grid(L).n_values
    x = np.cos(theta_true * n + phi)

    table = ExperimentTable(
        schema=("alpha", "iteration", "abs_theta_error"),
        meta={**config.meta(), "theta_true": theta_true, "seed_theta": seed_theta},
    )
    for alpha in alphas:
        cfg = SolverConfig(order=1, iterations=max_iterations, alpha=float(alpha))
        trace = SolveTrace()
        nonlinear_estimate(x, [seed_theta], window, cfg, trace=trace)
        for m, thetas in enumerate(trace.thetas, start=1):
            table.add_row(float(alpha), m, abs(float(thetas[0]) - theta_true))
    return table


def run_region_experiment(
    theta_grid,
    config: BenchConfig,
    iterations: int = 20,
    n_phases: int = 8,
    max_offset_bins: float = 2.0,
    bisection_steps: int = 12,
) -> ExperimentTable:
    """Largest initial-seed offset (in DFT bins) that still converges.

    For each true frequency the offset is bisected on the worst case
    over a phase grid and both offset signs; convergence means a final
    error below 1e-4 bins after `iterations` outer iterations.  The
    frequency step is left unclamped here, otherwise the measurement
    could never exceed one bin.
    """
    L = config.frame_length
    bin_w = 2.0 * math.pi / L
    window = make_sine_window(L)
    n = make_time_grid(L).n_values
    solver = dict(order=1, iterations=iterations, alpha=1.0, clamp_halfwidth=math.pi)

    def converges(theta: float, offset_bins: float, sign: int, phi: float) -> bool:
        seed = theta + sign * offset_bins * bin_w
        if not 1e-6 < seed < math.pi - 1e-6:
            return False
        x = np.cos(theta * n + phi)
        states = nonlinear_estimate(x, [seed], window, SolverConfig(**solver))
        return abs(states[0].theta - theta) < 1e-4 * bin_w

    table = ExperimentTable(
        schema=("theta", "max_offset_bins"),
        meta={**config.meta(), "iterations": iterations, "n_phases": n_phases},
    )
    phases = np.linspace(0.0, 2.0 * math.pi, n_phases, endpoint=False)
    for theta in np.atleast_1d(np.asarray(theta_grid, dtype=np.float64)):
        worst = math.inf
        for phi in phases:
            for sign in (+1, -1):
                lo, hi = 0.0, max_offset_bins
                for _ in range(bisection_steps):
                    mid = 0.5 * (lo + hi)
                    if converges(float(theta), mid, sign, float(phi)):
                        lo = mid
                    else:
                        hi = mid
                worst = min(worst, lo)
        table.add_row(float(theta), worst)
    return table


def _chirp_frame_truths(specs, total_length: int, plan: FramePlan, starts) -> list[np.ndarray]:
    centre = (plan.frame_length - 1) / 2.0
    return [
        np.array([true_frequency_at(sp, total_length, start + centre) for sp in specs])
        for start in starts
    ]


def run_chirp_experiment(snr_list, algorithms, config: BenchConfig) -> ExperimentTable:
    """Frequency and reconstruction accuracy on the five-chirp mixture.

    Per (SNR, algorithm): seeds come from DFT peak picking on each noisy
    frame, every method is clamped to one DFT bin of its seeds, and the
    squared errors are pooled over `config.trials` noise seeds and all
    frames.  Matched pairs further apart than `config.match_gate_bins`
    DFT bins are discarded: a clamped estimate can only sit that far
    from every truth when its seed was a spurious peak, and such pairs
    carry no information about estimator accuracy.  Reconstruction is
    measured against the noise-free windowed frames.
    """
    for alg in algorithms:
        if alg not in CHIRP_ALGORITHMS:
            raise ValueError(f"unknown algorithm {alg!r}")
    specs = five_chirp_preset()
    clean = gen_chirp_mix(specs, config.chirp_length)
    plan = FramePlan(config.frame_length, config.hop)
    window = make_sine_window(config.frame_length)
    frames = list(frame_stream(clean, plan))
    starts = [start for start, _ in frames]
    truths = _chirp_frame_truths(specs, config.chirp_length, plan, starts)
    clean_windowed = [window.h * frame for _, frame in frames]
    peak_cfg = PeakPickConfig(max_peaks=len(specs), min_separation=2)

    table = ExperimentTable(
        schema=(
            "snr_db", "algorithm", "freq_rms_error", "reconstruction_rms",
            "matched_pairs", "frames",
        ),
        meta={**config.meta(), "algorithms": "|".join(algorithms)},
    )
    gate = config.match_gate_bins * 2.0 * math.pi / config.frame_length
    for snr_index, snr_db in enumerate(snr_list):
        freq_sq = {alg: 0.0 for alg in algorithms}
        n_pairs = {alg: 0 for alg in algorithms}
        recon_sq = {alg: 0.0 for alg in algorithms}
        n_samples = {alg: 0 for alg in algorithms}
        n_frames = {alg: 0 for alg in algorithms}
        for trial in range(config.trials):
            noise_seed = config.seed + 104729 * snr_index + trial
            noisy = add_awgn(clean, float(snr_db), noise_seed)
            for fi, start in enumerate(starts):
                frame = noisy[start:start + plan.frame_length]
                seeds = dft_peak_pick(window.h * frame, peak_cfg)
                if seeds.size == 0:
                    continue
                for alg in algorithms:
                    states = estimate_frame(
                        frame, seeds, window, alg, config.mp_oversampling
                    )
                    est = [st.theta for st in states if st.amp > 0.0]
                    if est:
                        report = match_nearest(est, truths[fi])
                        for i, j in report.pairs:
                            err = est[i] - truths[fi][j]
                            if abs(err) <= gate:
                                freq_sq[alg] += err * err
                                n_pairs[alg] += 1
                    recon = _resynthesize(states, window, alg)
                    diff = recon - clean_windowed[fi]
                    recon_sq[alg] += float(np.dot(diff, diff))
                    n_samples[alg] += diff.size
                    n_frames[alg] += 1
        for alg in algorithms:
            if n_pairs[alg] == 0:
                raise UndefinedMetricError(f"no matches for {alg} at {snr_db} dB")
            table.add_row(
                float(snr_db),
                alg,
                math.sqrt(freq_sq[alg] / n_pairs[alg]),
                math.sqrt(recon_sq[alg] / n_samples[alg]),
                n_pairs[alg],
                n_frames[alg],
            )
    return table


def run_iteration_sweep(
    config: BenchConfig,
    algorithms=("linear", "nonlinear"),
    max_iterations: int = 10,
    signal: np.ndarray | None = None,
) -> ExperimentTable:
    """Residual RMS of the fitted model vs iteration count.

    The residual is the solver's own ||x_h - A w|| after each iteration,
    pooled over all frames of the clean chirp preset (or a
    caller-provided signal).  One long run traces every iteration count.
    """
    if signal is None:
        signal = gen_chirp_mix(five_chirp_preset(), config.chirp_length)
    plan = FramePlan(config.frame_length, config.hop)
    window = make_sine_window(config.frame_length)
    peak_cfg = PeakPickConfig(max_peaks=config.max_sines, min_separation=2)
    frames = list(frame_stream(signal, plan))

    table = ExperimentTable(
        schema=("algorithm", "iterations", "residual_rms"),
        meta=config.meta(),
    )
    L = config.frame_length
    for alg in algorithms:
        order = 2 if alg == "second_order" else 1
        sq = np.zeros(max_iterations)
        count = 0
        for _, frame in frames:
            x_h = window.h * frame
            seeds = dft_peak_pick(x_h, peak_cfg)
            if seeds.size == 0:
                continue
            cfg = SolverConfig(order=order, iterations=max_iterations)
            trace = SolveTrace()
            if alg == "linear":
                linear_estimate(frame, seeds, window, cfg, trace=trace)
            else:
                nonlinear_estimate(frame, seeds, window, cfg, trace=trace)
            sq += np.array(trace.residual_rms) ** 2 * L
            count += L
        for m in range(1, max_iterations + 1):
            table.add_row(alg, m, math.sqrt(sq[m - 1] / count))
    return table


def _typical_mflops(ops_per_frame: float, config: BenchConfig) -> float:
    return ops_per_frame * (config.sample_rate / config.hop) / 1e6


def complexity_report(config: BenchConfig) -> ExperimentTable:
    """Formula vs instrumented operation counts per frame.

    The three iterative estimators run on an N-sinusoid test frame with
    their typical iteration counts; matching pursuit runs with the full
    (unconstrained) oversampled dictionary.  Two published formulas
    exist for direct MP (2 L^2 N P and 2 L N^2 P); both rows are
    emitted.  The Mflops column assumes the typical real-time scenario
    (sample_rate, hop from the config).
    """
    if not config.count_ops:
        raise ValueError("complexity_report requires count_ops")
    L = config.frame_length
    N = config.max_sines
    P = config.mp_oversampling
    window = make_sine_window(L)
    n = make_time_grid(L).n_values

    # well-separated exact-bin test frame (op counts are data-independent)
    lo_bin, hi_bin = 8, L // 2 - 6
    bins = np.linspace(lo_bin, hi_bin, N).round().astype(int)
    rng = np.random.default_rng(config.seed)
    phases = rng.uniform(-math.pi, math.pi, size=N)
    thetas = 2.0 * math.pi * bins / L
    frame = sum(np.cos(th * n + ph) for th, ph in zip(thetas, phases))

    measured = {}
    for alg in ("linear", "nonlinear", "second_order"):
        ops = OpCounter()
        estimate_frame(frame, thetas, window, alg, config.mp_oversampling, ops=ops)
        measured[alg] = ops.total
    mp_ops = OpCounter()
    matching_pursuit(
        window.h * frame,
        seeds=None,
        config=MpConfig(oversampling=P, max_atoms=N, clamp_to_seeds=False),
        ops=mp_ops,
    )

    m_lin = TYPICAL_ITERATIONS["linear"]
    m_non = TYPICAL_ITERATIONS["nonlinear"]
    m_2nd = TYPICAL_ITERATIONS["second_order"]
    formulas = {
        "linear": (8 * m_lin + 5) * L * N,
        "nonlinear": (17 * m_non - 4) * L * N,
        "second_order": (24 * m_2nd - 6) * L * N,
        "mp_direct_LLNP": 2 * L * L * N * P,
        "mp_direct_LNNP": 2 * L * N * N * P,
    }

    table = ExperimentTable(
        schema=(
            "algorithm", "formula_ops_per_frame", "measured_ops_per_frame",
            "measured_over_formula", "typical_mflops",
        ),
        meta={**config.meta(), "iterations": f"linear={m_lin};nonlinear={m_non};second_order={m_2nd}"},
    )
    for alg in ("linear", "nonlinear", "second_order"):
        formula = formulas[alg]
        table.add_row(
            alg, formula, measured[alg], measured[alg] / formula,
            _typical_mflops(formula, config),
        )
    for key in ("mp_direct_LLNP", "mp_direct_LNNP"):
        formula = formulas[key]
        table.add_row(
            key, formula, mp_ops.total, mp_ops.total / formula,
            _typical_mflops(formula, config),
        )
    return table
