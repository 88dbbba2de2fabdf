"""sinest: sinusoidal parameter estimation via iterative linearised least squares.

The package models signal frames as windowed, amplitude- and
frequency-modulated sinusoids, linearises the model around seed
frequencies, and solves the resulting least-squares problem with an
O(LN) Gauss-Seidel sweep wrapped in a non-linear refinement loop.
Baselines (DFT peak picking, matching pursuit), signal/WAV utilities
and the benchmark drivers round out the toolkit.
"""

from .baselines import MpConfig, PeakPickConfig, dft_peak_pick, matching_pursuit
from .benchmarks import (
    BenchConfig,
    ExperimentTable,
    MatchReport,
    complexity_report,
    estimate_frame,
    freq_rms_error,
    match_nearest,
    reconstruction_rms_vs_clean,
    residual_rms,
    run_chirp_experiment,
    run_convergence_experiment,
    run_iteration_sweep,
    run_region_experiment,
)
from .errors import (
    DegenerateBasisError,
    IllConditionedError,
    InvalidFrequencyError,
    SolverDivergedError,
    TrackParseError,
    UndefinedMetricError,
    UnsupportedWavError,
    WavParseError,
)
from .model import (
    BasisSet,
    LinearCoeffs,
    SinusoidState,
    TimeGrid,
    Window,
    build_basis,
    coeffs_from_params,
    linearisation_error,
    make_sine_window,
    make_time_grid,
    params_from_coeffs,
    synthesize_exact,
    synthesize_linearised,
)
from .signals import (
    AudioBuffer,
    ChirpSpec,
    FramePlan,
    add_awgn,
    five_chirp_preset,
    frame_stream,
    gen_chirp_mix,
    read_wav,
    true_frequency_at,
    write_wav,
)
from .solvers import (
    NormalSystem,
    OpCounter,
    ResidualState,
    SolveTrace,
    SolverConfig,
    build_normal_system,
    clamp_frequency,
    direct_ls_solve,
    gauss_seidel_sweep,
    jacobi_solve,
    linear_estimate,
    nonlinear_estimate,
    split_even_odd,
)

__version__ = "0.1.0"

__all__ = [
    "AudioBuffer",
    "BasisSet",
    "BenchConfig",
    "ChirpSpec",
    "DegenerateBasisError",
    "ExperimentTable",
    "FramePlan",
    "IllConditionedError",
    "InvalidFrequencyError",
    "LinearCoeffs",
    "MatchReport",
    "MpConfig",
    "NormalSystem",
    "OpCounter",
    "PeakPickConfig",
    "ResidualState",
    "SinusoidState",
    "SolveTrace",
    "SolverConfig",
    "SolverDivergedError",
    "TimeGrid",
    "TrackParseError",
    "UndefinedMetricError",
    "UnsupportedWavError",
    "WavParseError",
    "Window",
    "add_awgn",
    "build_basis",
    "build_normal_system",
    "clamp_frequency",
    "coeffs_from_params",
    "complexity_report",
    "dft_peak_pick",
    "direct_ls_solve",
    "estimate_frame",
    "five_chirp_preset",
    "frame_stream",
    "freq_rms_error",
    "gauss_seidel_sweep",
    "gen_chirp_mix",
    "jacobi_solve",
    "linear_estimate",
    "linearisation_error",
    "make_sine_window",
    "make_time_grid",
    "match_nearest",
    "matching_pursuit",
    "nonlinear_estimate",
    "params_from_coeffs",
    "read_wav",
    "reconstruction_rms_vs_clean",
    "residual_rms",
    "run_chirp_experiment",
    "run_convergence_experiment",
    "run_iteration_sweep",
    "run_region_experiment",
    "split_even_odd",
    "synthesize_exact",
    "synthesize_linearised",
    "true_frequency_at",
    "write_wav",
]
