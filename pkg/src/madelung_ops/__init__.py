"""Operator-method solutions of the Madelung-Bohm continuity equation for
separable phases ``S = Q(x) nu'(t) + mu(t)``, with independent numerical
verification."""
from .errors import *  # noqa: F401,F403
from .madelung import (
    FieldSample,
    InitialAmplitude,
    MadelungModel,
    PhaseAnsatz,
    TimeFunctions,
    TruncationPolicy,
    amplitude,
    bohm_potential,
    evaluate_F_series,
    external_potential,
    fk_sequence,
    gaussian,
    phase,
    wavefunction,
)
from .powersum import PowerSum, PowerTerm, antidifferentiate, differentiate, evaluate, multiply
from .scenarios import (
    FreeParticleClosed,
    FreeParticleParams,
    WaveguideN1Closed,
    WaveguideParams,
    free_particle_c2,
    free_particle_fields,
    free_particle_model,
    free_particle_mu,
    free_particle_nu,
    waveguide_F,
    waveguide_fields,
    waveguide_model,
    waveguide_n1_closed,
    waveguide_q_prime,
)
from .verify import (
    GridSpec,
    ResidualReport,
    StencilConfig,
    characteristics_amplitude,
    characteristics_backtrace,
    residual_continuity,
    residual_qhj,
    residual_schrodinger,
)

__version__ = "0.1.0"
