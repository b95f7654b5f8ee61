"""Channel model for magnetic induction links with metamaterial-shell coils."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegenerateTuning,
    DomainError,
    LayerMismatch,
    M2IError,
    MethodMismatch,
    NoCrossing,
    NoResonance,
    NoSignChange,
    QuadratureFailure,
    SchemaError,
    SingularSystem,
    UnitError,
    UnknownPreset,
)
from .fieldsolver import FieldPoint, ShellDesign, solve_receiver, solve_transmitter  # noqa: E402
from .inductance import (  # noqa: E402
    analyze,
    det_exact,
    det_tilde,
    flux_oracle_L,
    inductance_gain,
    mutual_inductance,
    resonant_thickness,
    self_inductance,
)
from .linkmodel import (  # noqa: E402
    ChannelState,
    bandwidth_3db,
    channel_capacity,
    frequency_response,
    link_metrics,
    pathloss_p2p,
    pathloss_waveguide,
)
from .media import DrudeParams, LayerStack, Medium, drude_mu, preset_medium, table1_stack  # noqa: E402
from .optimizer import find_resonance_numeric, recommend_design, sweep_gain  # noqa: E402
