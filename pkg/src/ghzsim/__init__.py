"""Few-photon linear-optics simulator for the three-photon GHZ experiment."""

from .detection import (
    AnalyzerSetting,
    DetectionPattern,
    conditional_d3,
    fidelity,
    pattern_probability,
    postselect,
)
from .errors import (
    ConfigError,
    GhzSimError,
    InvalidParameterError,
    UndefinedConditionalError,
)
from .experiments import (
    GhzParams,
    ScanRecord,
    build_ghz_circuit,
    coherence_time_from_filter,
    control_scan,
    delay_scan,
    entangled_entanglement_check,
    ghz_reference,
    term_histogram,
    visibility,
)
from .modes import (
    KetTerm,
    ModeLabel,
    Photon,
    Polarization,
    StateVector,
    WavePacket,
    canonicalize,
    mode,
    permanent,
    state_inner_product,
    term_inner_product,
    wavepacket_overlap,
)
from .optics import (
    Circuit,
    DelayStage,
    ModeMap,
    apply_delay,
    apply_mode_map,
    bs_map,
    check_isometry,
    ghz_paper_preset,
    hwp_map,
    pbs_map,
    run_circuit,
)
from .rates import CountReport, RateParams, calibrate, fourfold_prob_per_pulse, simulate_counts
from .sources import SourceParams, double_pair, sample_pair_count, spdc_pair

__version__ = "0.1.0"
