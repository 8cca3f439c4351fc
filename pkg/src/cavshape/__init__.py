"""Single-photon pulse shaping in a coupled three-cavity system.

A quantum emitter sits in a lossy target cavity flanked by two detuned
control cavities.  Sweeping the symmetric control detuning steers the
weight of the zero-frequency supermode on the target cavity, which sets
the instantaneous emission rate into the collection channel; a designed
detuning schedule therefore shapes the emitted single-photon envelope.

Module map:

* :mod:`~cavshape.modes`      static model: Hamiltonians, eigenstructure,
                              emission-rate ratios
* :mod:`~cavshape.continuum`  discretized output channel
* :mod:`~cavshape.dynamics`   amplitude-equation integration (compiled
                              kernel with numpy fallback)
* :mod:`~cavshape.pulse`      emitted-pulse reconstruction and metrics
* :mod:`~cavshape.schedule`   detuning schedules and adiabaticity checks
* :mod:`~cavshape.design`     schedule design for a Gaussian target pulse
* :mod:`~cavshape.config`     JSON run configuration
* :mod:`~cavshape.scenarios`  end-to-end runs with CSV + manifest output
* :mod:`~cavshape.cli`        the ``sim`` command
"""

from ._version import __version__
from .continuum import BandwidthError, ContinuumGrid, build_continuum
from .design import (
    GaussianPulseTarget,
    InfeasibleTargetError,
    design_symmetric_schedule,
    detuning_to_fraction,
    fraction_to_detuning,
    required_fraction,
)
from .dynamics import (
    AmplitudeState,
    IntegrationInstabilityError,
    Trajectory,
    available_backends,
    default_backend,
    integrate,
    populations,
    rhs,
)
from .modes import (
    EigenSystem,
    EigensolverError,
    SystemParams,
    analytic_eigenvalues,
    build_cavity_hamiltonian,
    coupled_qe_hamiltonian,
    dark_mode_vector,
    index_shift_to_detuning,
    ldos_ratio,
    numeric_eigensystem,
    se_rate_ratio,
    target_fraction,
)
from .pulse import (
    AliasingError,
    FidelityReport,
    GaussianFit,
    GaussianFitError,
    PhaseProfile,
    Waveform,
    extract_output_pulse,
    fit_gaussian,
    make_waveform,
    overlap_fidelity,
    phase_profile,
    time_invert,
)
from .schedule import (
    AdiabaticityReport,
    DetuningSchedule,
    check_adiabaticity,
    make_constant,
    make_ramp,
    make_sampled,
    make_zero,
    schedule_from_csv,
    schedule_to_csv,
)
from .config import (
    ConfigError,
    RunConfig,
    apply_overrides,
    build_config,
    config_to_dict,
    parse_config,
)
from .scenarios import run_scenario

__all__ = [
    "__version__",
    "AdiabaticityReport",
    "AliasingError",
    "AmplitudeState",
    "BandwidthError",
    "ConfigError",
    "ContinuumGrid",
    "DetuningSchedule",
    "EigenSystem",
    "EigensolverError",
    "FidelityReport",
    "GaussianFit",
    "GaussianFitError",
    "GaussianPulseTarget",
    "InfeasibleTargetError",
    "IntegrationInstabilityError",
    "PhaseProfile",
    "RunConfig",
    "SystemParams",
    "Trajectory",
    "Waveform",
    "analytic_eigenvalues",
    "apply_overrides",
    "available_backends",
    "build_cavity_hamiltonian",
    "build_config",
    "build_continuum",
    "config_to_dict",
    "check_adiabaticity",
    "coupled_qe_hamiltonian",
    "dark_mode_vector",
    "default_backend",
    "design_symmetric_schedule",
    "detuning_to_fraction",
    "extract_output_pulse",
    "fit_gaussian",
    "fraction_to_detuning",
    "index_shift_to_detuning",
    "integrate",
    "ldos_ratio",
    "make_constant",
    "make_ramp",
    "make_sampled",
    "make_waveform",
    "make_zero",
    "numeric_eigensystem",
    "overlap_fidelity",
    "parse_config",
    "phase_profile",
    "populations",
    "required_fraction",
    "rhs",
    "run_scenario",
    "schedule_from_csv",
    "schedule_to_csv",
    "se_rate_ratio",
    "target_fraction",
    "time_invert",
]
