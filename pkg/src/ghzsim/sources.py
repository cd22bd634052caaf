"""Down-conversion pair sources and pair-number statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError
from .modes import KetTerm, Photon, Polarization, StateVector, WavePacket, mode

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))
PUMP_FWHM_FS = 200.0
COHERENCE_TIME_FS = 500.0
DEFAULT_PAIR_MEAN = 4e-4
ORIGIN_TAGS = ("unprimed", "primed", "primed2", "primed3")


@dataclass(frozen=True)
class SourceParams:
    """phase in radians (pi gives the singlet sign), sigmas in fs."""

    phase: float = math.pi
    pair_mean: float = DEFAULT_PAIR_MEAN
    packet_sigma: float = COHERENCE_TIME_FS / 2.0
    pump_sigma: float = PUMP_FWHM_FS / FWHM_PER_SIGMA

    def __post_init__(self):
        if not (self.pair_mean >= 0.0) or not math.isfinite(self.pair_mean):
            raise InvalidParameterError(f"pair_mean must be >= 0, got {self.pair_mean!r}")
        if not (self.packet_sigma > 0.0):
            raise InvalidParameterError(f"packet_sigma must be > 0, got {self.packet_sigma!r}")
        if not (self.pump_sigma >= 0.0):
            raise InvalidParameterError(f"pump_sigma must be >= 0, got {self.pump_sigma!r}")
        if not math.isfinite(self.phase):
            raise InvalidParameterError(f"phase must be finite, got {self.phase!r}")


def _phase_factor(phase: float) -> complex:
    c, s = math.cos(phase), math.sin(phase)
    # exact values at multiples of pi/2 keep golden amplitudes clean
    c = round(c) if abs(c - round(c)) < 1e-15 else c
    s = round(s) if abs(s - round(s)) < 1e-15 else s
    return complex(c, s)


def spdc_pair(path_a="a", path_b="b", params: SourceParams = SourceParams(), t0: float = 0.0, origin_tag=None) -> StateVector:
    """(|H>_a|V>_b + e^{i phase}|V>_a|H>_b)/sqrt2, both photons born at ``t0``."""
    packet = WavePacket(t0, params.packet_sigma)
    H, V = Polarization.H, Polarization.V

    def ph(path, pol):
        return Photon(mode(path, pol), packet, origin_tag)

    r = 1.0 / math.sqrt(2.0)
    return StateVector(
        (
            KetTerm(r, (ph(path_a, H), ph(path_b, V))),
            KetTerm(r * _phase_factor(params.phase), (ph(path_a, V), ph(path_b, H))),
        )
    )


def multi_pair(params: SourceParams, t0s: Sequence[float], normalize: bool = True) -> StateVector:
    """Product of ``len(t0s)`` pairs on arms a/b, tagged unprimed, primed, primed2, ...

    The plain product of normalised pairs is not itself normalised once the pairs
    overlap in time (bosonic enhancement of the same-mode terms); ``normalize``
    rescales it to unit norm.
    """
    if not 1 <= len(t0s) <= len(ORIGIN_TAGS):
        raise InvalidParameterError(f"between 1 and {len(ORIGIN_TAGS)} pairs supported, got {len(t0s)}")
    state = StateVector.vacuum()
    for tag, t0 in zip(ORIGIN_TAGS, t0s):
        state = state @ spdc_pair("a", "b", params, t0, tag)
    return state.normalized() if normalize else state


def double_pair(params: SourceParams = SourceParams(), t0_first: float = 0.0, t0_second: float = 0.0, normalize: bool = True) -> StateVector:
    return multi_pair(params, (t0_first, t0_second), normalize=normalize)


def pair_count_pmf(n: int, pair_mean: float) -> float:
    if pair_mean < 0:
        raise InvalidParameterError(f"pair_mean must be >= 0, got {pair_mean!r}")
    if pair_mean == 0:
        return 1.0 if n == 0 else 0.0
    return math.exp(-pair_mean + n * math.log(pair_mean) - math.lgamma(n + 1))


def sample_pair_count(pair_mean: float, rng: np.random.Generator, size=None):
    """Poisson number of pairs per pulse."""
    if not (pair_mean >= 0.0):
        raise InvalidParameterError(f"pair_mean must be >= 0, got {pair_mean!r}")
    draw = rng.poisson(pair_mean, size=size)
    return int(draw) if size is None else draw
