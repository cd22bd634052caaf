"""Polarisation analysis and coincidence post-selection.

Post-selection keeps the terms with exactly one photon on each listed path and none
elsewhere, then projects analysed photons onto their polariser axis.  The success
probability is the squared norm of what is left, evaluated with the full overlap
inner product, so partially distinguishable wavepackets lose coherence on their own.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

from .errors import InvalidParameterError, UndefinedConditionalError
from .modes import KetTerm, Polarization, StateVector, state_inner_product
from .optics import analyzer_axis, analyzer_map, apply_mode_map

NORMALIZATION_TOL = 1e-9
PLUS45, MINUS45 = 45.0, -45.0


@dataclass(frozen=True)
class AnalyzerSetting:
    """Polariser on ``path`` at ``angle`` degrees from vertical; ``None`` means no polariser."""

    path: str
    angle: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "path", str(self.path))
        if self.angle is not None:
            if not math.isfinite(self.angle):
                raise InvalidParameterError(f"analyzer angle must be finite, got {self.angle!r}")
            object.__setattr__(self, "angle", float(self.angle) % 180.0)


@dataclass(frozen=True)
class DetectionPattern:
    """Exactly one photon on every path in ``required``; zero photons elsewhere."""

    required: Mapping

    @classmethod
    def of(cls, settings: Iterable[AnalyzerSetting]) -> "DetectionPattern":
        req = {}
        for s in settings:
            if s.path in req:
                raise InvalidParameterError(f"path {s.path!r} listed twice in detection pattern")
            req[s.path] = s
        return cls(req)

    @classmethod
    def fourfold(cls, theta1=None, theta2=None, theta3=None, trigger=None) -> "DetectionPattern":
        return cls.of(
            [
                AnalyzerSetting("T", trigger),
                AnalyzerSetting("1", theta1),
                AnalyzerSetting("2", theta2),
                AnalyzerSetting("3", theta3),
            ]
        )

    @property
    def paths(self) -> frozenset:
        return frozenset(self.required)


def _path_counts(term: KetTerm) -> Counter:
    return Counter(p.spatial for p in term.photons)


def _matches(term: KetTerm, paths: frozenset) -> bool:
    counts = _path_counts(term)
    return set(counts) == paths and all(n == 1 for n in counts.values())


def project(s: StateVector, pattern: DetectionPattern) -> StateVector:
    """Unnormalised post-selected state (the projected vector, not renormalised)."""
    kept = StateVector(tuple(t for t in s.terms if _matches(t, pattern.paths)))
    for setting in pattern.required.values():
        if setting.angle is not None and kept:
            kept = apply_mode_map(kept, analyzer_map(setting.path, setting.angle))
    return kept


def postselect(s: StateVector, pattern: DetectionPattern):
    """Return ``(probability, conditional_state)``; ``(0.0, empty)`` when nothing survives."""
    projected = project(s, pattern)
    if not projected:
        return 0.0, StateVector()
    prob = state_inner_product(projected, projected).real
    if prob <= 0.0:
        return 0.0, StateVector()
    return prob, projected * (1.0 / math.sqrt(prob))


def pattern_probability(s: StateVector, settings: Union[DetectionPattern, Iterable[AnalyzerSetting]]) -> float:
    pattern = settings if isinstance(settings, DetectionPattern) else DetectionPattern.of(settings)
    return postselect(s, pattern)[0]


def d3_joint_probabilities(s: StateVector, theta1, theta2) -> tuple:
    """Fourfold probabilities (D3 at +45, D3 at -45) with the trigger unanalysed."""
    p_plus = pattern_probability(s, DetectionPattern.fourfold(theta1, theta2, PLUS45))
    p_minus = pattern_probability(s, DetectionPattern.fourfold(theta1, theta2, MINUS45))
    return p_plus, p_minus


def normalize_pair(p_plus: float, p_minus: float) -> tuple:
    total = p_plus + p_minus
    if not total > 0.0:
        raise UndefinedConditionalError("conditioning event has zero probability")
    return p_plus / total, p_minus / total


def conditional_d3(s: StateVector, theta1, theta2) -> tuple:
    """D3 analyser statistics ``(p_plus45, p_minus45)`` given the trigger and D1/D2 settings."""
    return normalize_pair(*d3_joint_probabilities(s, theta1, theta2))


def fidelity(s: StateVector, reference: StateVector) -> float:
    for name, state in (("state", s), ("reference", reference)):
        n2 = state.norm_squared()
        if abs(n2 - 1.0) > NORMALIZATION_TOL:
            raise InvalidParameterError(f"{name} is not normalised (<psi|psi> = {n2!r})")
    return min(1.0, abs(state_inner_product(reference, s)) ** 2)


def path_count_distribution(s: StateVector) -> dict:
    """Probability of each photon-number pattern over spatial paths.

    Keys are tuples of ``(path, count)`` sorted by path.  Terms with different path
    occupations are orthogonal, so each group is normed separately.
    """
    groups = defaultdict(list)
    for t in s.terms:
        groups[tuple(sorted(_path_counts(t).items()))].append(t)
    out = {}
    for key, terms in groups.items():
        sub = StateVector(tuple(terms))
        out[key] = state_inner_product(sub, sub).real
    return out


def absorb_photon(s: StateVector, path, analyzer: Union[float, Polarization]) -> StateVector:
    """Contract the single photon on ``path`` with a polarisation bra, removing it.

    ``analyzer`` is a polariser angle (degrees from vertical) or a basis polarisation.
    The absorbed photons must share one wavepacket across all terms; otherwise the
    remaining photons would be left in a mixed state, which is not representable here.
    """
    path = str(path)
    if isinstance(analyzer, Polarization):
        ah, av = (1.0, 0.0) if analyzer is Polarization.H else (0.0, 1.0)
    else:
        ah, av = analyzer_axis(analyzer)
    packets = set()
    out = []
    for t in s.terms:
        on_path = [p for p in t.photons if p.spatial == path]
        if len(on_path) != 1:
            raise InvalidParameterError(f"term {t} does not have exactly one photon on path {path!r}")
        photon = on_path[0]
        packets.add(photon.packet)
        weight = ah if photon.polarization is Polarization.H else av
        rest = tuple(p for p in t.photons if p is not photon)
        out.append(KetTerm(t.amplitude * weight, rest))
    if len(packets) > 1:
        raise InvalidParameterError(f"photons on path {path!r} occupy different wavepackets; reduced state is mixed")
    return StateVector(tuple(out))
