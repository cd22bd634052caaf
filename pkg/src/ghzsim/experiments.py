"""Scripted reproductions of the three-photon GHZ measurements.

Everything here is built from the lower layers: a double pair is sent through the
trigger/detector circuit, post-selected on one photon per detector and analysed.
Pump-pulse jitter is handled by averaging fourfold probabilities over independent
Gaussian emission times of the two pairs (ratio of averaged counts, exactly as a
coincidence counter would accumulate them).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .detection import (
    MINUS45,
    PLUS45,
    DetectionPattern,
    absorb_photon,
    fidelity,
    normalize_pair,
    pattern_probability,
    postselect,
)
from .errors import InvalidParameterError, UndefinedConditionalError
from .modes import KetTerm, Photon, Polarization, StateVector, WavePacket, mode, state_inner_product
from .optics import CONVENTIONS, Circuit, DelayStage, ghz_element_chain, ghz_paper_preset, run_circuit
from .sources import COHERENCE_TIME_FS, FWHM_PER_SIGMA, PUMP_FWHM_FS, SourceParams, double_pair

SPEED_OF_LIGHT = 299_792_458.0  # m/s
PHOTON_WAVELENGTH_NM = 788.0
TRIGGER_FILTER_NM = 4.5
DETECTOR_FILTER_NM = 3.6
MC_BATCH = 16
# angle from vertical that transmits H / V
ANGLE_H, ANGLE_V = 90.0, 0.0


@dataclass(frozen=True)
class GhzParams:
    """Parameters of the GHZ experiment.

    ``coherence_sigma`` sets the packet width and ``pump_sigma`` the emission-time
    jitter of each pair; they override the corresponding ``source`` fields, of which
    only ``phase`` is used here.  ``delay`` (fs) acts on path a.
    """

    source: SourceParams = field(default_factory=SourceParams)
    delay: float = 0.0
    pump_sigma: float = PUMP_FWHM_FS / FWHM_PER_SIGMA
    coherence_sigma: float = COHERENCE_TIME_FS / 2.0
    noise_w: float = 0.0
    mc_samples: int = 32
    seed: int = 0
    convention: str = "paper"

    def __post_init__(self):
        if not 0.0 <= self.noise_w <= 1.0:
            raise InvalidParameterError(f"noise_w must lie in [0, 1], got {self.noise_w!r}")
        if int(self.mc_samples) != self.mc_samples or self.mc_samples < 1:
            raise InvalidParameterError(f"mc_samples must be a positive integer, got {self.mc_samples!r}")
        if not self.pump_sigma >= 0.0:
            raise InvalidParameterError(f"pump_sigma must be >= 0, got {self.pump_sigma!r}")
        if not self.coherence_sigma > 0.0:
            raise InvalidParameterError(f"coherence_sigma must be > 0, got {self.coherence_sigma!r}")
        if not math.isfinite(self.delay):
            raise InvalidParameterError(f"delay must be finite, got {self.delay!r}")
        if self.convention not in CONVENTIONS:
            raise InvalidParameterError(f"convention must be one of {CONVENTIONS}, got {self.convention!r}")

    @property
    def pair_source(self) -> SourceParams:
        return replace(self.source, packet_sigma=self.coherence_sigma, pump_sigma=self.pump_sigma)


@dataclass(frozen=True)
class ScanRecord:
    delay: float
    p_plus45: float
    p_minus45: float
    visibility_contribution: float


@dataclass(frozen=True)
class HistogramResult:
    probabilities: dict
    ideal: dict
    noise_w: float

    @property
    def desired_sum(self) -> float:
        return sum(self.probabilities[k] for k in DESIRED_TERMS)

    @property
    def undesired_sum(self) -> float:
        return sum(v for k, v in self.probabilities.items() if k not in DESIRED_TERMS)

    @property
    def summed_ratio(self) -> float:
        """Total desired counts over total undesired counts."""
        u = self.undesired_sum
        return math.inf if u == 0 else self.desired_sum / u

    @property
    def per_combination_ratio(self) -> float:
        """Mean desired combination over mean undesired combination."""
        u = self.undesired_sum / (len(self.probabilities) - len(DESIRED_TERMS))
        return math.inf if u == 0 else (self.desired_sum / len(DESIRED_TERMS)) / u


COMBINATIONS = tuple(
    "".join(f"{pol}{i + 1}" for i, pol in enumerate(pols)) for pols in itertools.product("HV", repeat=3)
)
DESIRED_TERMS = ("H1H2V3", "V1V2H3")


# --- circuit and states -----------------------------------------------------


def build_ghz_circuit(params: GhzParams) -> Circuit:
    delay = DelayStage("a", params.delay)
    if params.convention == "paper":
        return Circuit((delay, ghz_paper_preset()))
    return Circuit((delay, *ghz_element_chain("physical")))


def evolve(params: GhzParams, t0_first: float = 0.0, t0_second: float = 0.0) -> StateVector:
    """Double pair emitted at the given times, propagated to the detectors."""
    state = double_pair(params.pair_source, t0_first, t0_second)
    return run_circuit(state, build_ghz_circuit(params))


def postselected_ghz(params: GhzParams, t0_first: float = 0.0, t0_second: float = 0.0):
    """``(probability, state)`` of the fourfold coincidence with no polarisers."""
    return postselect(evolve(params, t0_first, t0_second), DetectionPattern.fourfold())


def ghz_reference(packet: WavePacket = WavePacket()) -> StateVector:
    """(1/sqrt2) |H>_T (|H1 H2 V3> + |V1 V2 H3>)."""
    H, V = Polarization.H, Polarization.V

    def ket(p1, p2, p3):
        photons = (
            Photon(mode("T", H), packet),
            Photon(mode(1, p1), packet),
            Photon(mode(2, p2), packet),
            Photon(mode(3, p3), packet),
        )
        return KetTerm(1.0 / math.sqrt(2.0), photons)

    return StateVector((ket(H, H, V), ket(V, V, H)))


def diagonal_pair_reference(packet2: WavePacket = WavePacket(), packet3: WavePacket = WavePacket()) -> StateVector:
    """(|+45>_2|+45>_3 - |-45>_2|-45>_3)/sqrt2 with |+-45> = (|H> +- |V>)/sqrt2."""
    r = 1.0 / math.sqrt(2.0)
    H, V = Polarization.H, Polarization.V

    def diag(path, packet, sign):
        return StateVector((KetTerm(r, (Photon(mode(path, H), packet),)), KetTerm(sign * r, (Photon(mode(path, V), packet),))))

    plus = diag(2, packet2, 1.0) @ diag(3, packet3, 1.0)
    minus = diag(2, packet2, -1.0) @ diag(3, packet3, -1.0)
    return (plus - minus) * r


# --- emission-time averaging ------------------------------------------------


def emission_times(params: GhzParams) -> np.ndarray:
    """``(n, 2)`` array of pair creation times in fs.

    Batch ``k`` of the standard-normal draws comes from the substream
    ``SeedSequence(seed).spawn(...)[k]``; draws are scaled by ``pump_sigma`` so that
    a fixed seed yields common random numbers across delays and jitter widths.
    """
    if params.pump_sigma == 0.0:
        return np.zeros((1, 2))
    n = int(params.mc_samples)
    n_batches = -(-n // MC_BATCH)
    children = np.random.SeedSequence(params.seed).spawn(n_batches)
    draws = [np.random.default_rng(child).standard_normal((MC_BATCH, 2)) for child in children]
    return np.concatenate(draws)[:n] * params.pump_sigma


def averaged_probabilities(params: GhzParams, patterns: Sequence[DetectionPattern], times=None) -> np.ndarray:
    """Mean fourfold probability of each pattern over the emission-time draws."""
    times = emission_times(params) if times is None else times
    total = np.zeros(len(patterns))
    for t1, t2 in times:
        state = evolve(params, float(t1), float(t2))
        total += [pattern_probability(state, p) for p in patterns]
    return total / len(times)


def d3_patterns(theta1, theta2) -> tuple:
    return (
        DetectionPattern.fourfold(theta1, theta2, PLUS45),
        DetectionPattern.fourfold(theta1, theta2, MINUS45),
    )


# --- experiments ------------------------------------------------------------


def delay_scan(params: GhzParams, delays: Iterable[float], theta1: float = PLUS45, theta2: float = MINUS45) -> list:
    """Conditional D3 statistics at +45/-45 deg versus the path-a delay."""
    times = emission_times(params)
    patterns = d3_patterns(theta1, theta2)
    records = []
    for delay in delays:
        p = averaged_probabilities(replace(params, delay=float(delay)), patterns, times)
        try:
            p_plus, p_minus = normalize_pair(float(p[0]), float(p[1]))
        except UndefinedConditionalError as exc:
            raise UndefinedConditionalError(f"delay {delay} fs: {exc}") from None
        records.append(ScanRecord(float(delay), p_plus, p_minus, p_minus - p_plus))
    return records


def control_scan(params: GhzParams, delays: Iterable[float], theta2: float = MINUS45) -> list:
    """Same scan with D1 at 0 deg (V); no D2/D3 correlation is expected."""
    return delay_scan(params, delays, ANGLE_V, theta2)


def term_histogram(params: GhzParams) -> HistogramResult:
    """Trigger-conditioned H/V statistics of the three detectors, mixed with white noise."""
    angle = {"H": ANGLE_H, "V": ANGLE_V}
    patterns = [DetectionPattern.fourfold(*(angle[c] for c in label[0::2])) for label in COMBINATIONS]
    raw = averaged_probabilities(params, patterns)
    total = raw.sum()
    if not total > 0.0:
        raise UndefinedConditionalError("no fourfold coincidences in the H/V basis")
    ideal = {label: float(p / total) for label, p in zip(COMBINATIONS, raw)}
    w = params.noise_w
    mixed = {label: (1.0 - w) * p + w / len(COMBINATIONS) for label, p in ideal.items()}
    return HistogramResult(mixed, ideal, w)


def noise_for_ratio(ratio: float) -> float:
    """White-noise weight giving a desired:undesired summed ratio ``ratio`` for an ideal GHZ."""
    if not ratio > 0:
        raise InvalidParameterError(f"ratio must be positive, got {ratio!r}")
    # desired = 1 - 6w/8, undesired = 6w/8
    return 1.0 / (0.75 * (ratio + 1.0))


def entangled_entanglement_check(state: StateVector, theta1: float):
    """Project photon 1 on ``theta1`` and compare photons 2, 3 with the diagonal-basis Bell state.

    A trigger photon, if still present, is absorbed with <H|.  Returns the normalised
    two-photon state and its fidelity with (|+45,+45> - |-45,-45>)/sqrt2.
    """
    if any(p.spatial == "T" for t in state.terms for p in t.photons):
        state = absorb_photon(state, "T", Polarization.H)
    reduced = absorb_photon(state, "1", theta1)
    prob = state_inner_product(reduced, reduced).real
    if not prob > 0.0:
        raise UndefinedConditionalError(f"photon 1 never passes a polariser at {theta1} deg")
    reduced = reduced * (1.0 / math.sqrt(prob))
    packets = {}
    for t in reduced.terms:
        for p in t.photons:
            packets.setdefault(p.spatial, p.packet)
    reference = diagonal_pair_reference(packets.get("2", WavePacket()), packets.get("3", WavePacket()))
    return reduced, fidelity(reduced, reference)


def coherence_time_from_filter(lambda_nm: float, dlambda_nm: float) -> float:
    """Coherence time lambda^2 / (c dlambda) in fs."""
    if not (lambda_nm > 0 and dlambda_nm > 0) or not math.isfinite(lambda_nm / dlambda_nm):
        raise InvalidParameterError(f"wavelength and bandwidth must be positive, got {lambda_nm!r}, {dlambda_nm!r}")
    seconds = (lambda_nm * 1e-9) ** 2 / (SPEED_OF_LIGHT * dlambda_nm * 1e-9)
    return seconds * 1e15


def packet_sigma_from_coherence_time(tau_c: float) -> float:
    if not tau_c > 0:
        raise InvalidParameterError(f"coherence time must be positive, got {tau_c!r}")
    return tau_c / 2.0


def pump_sigma_from_fwhm(fwhm: float) -> float:
    if not fwhm >= 0:
        raise InvalidParameterError(f"pulse FWHM must be >= 0, got {fwhm!r}")
    return fwhm / FWHM_PER_SIGMA


def visibility(records: Sequence[ScanRecord]) -> float:
    """Zero-delay contrast (p_-45 - p_+45)/(p_-45 + p_+45), using the record closest to zero delay."""
    if not records:
        raise InvalidParameterError("visibility needs at least one scan record")
    rec = min(records, key=lambda r: abs(r.delay))
    total = rec.p_minus45 + rec.p_plus45
    if not total > 0:
        raise UndefinedConditionalError("zero-delay record has no counts")
    return (rec.p_minus45 - rec.p_plus45) / total
