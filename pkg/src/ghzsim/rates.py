"""Fourfold coincidence rates, analytic and Monte Carlo.

Per pulse the source emits a Poisson number of pairs.  For one, two or three pairs
the photon-number distribution over the four detector paths is computed exactly
from the circuit (ideal, indistinguishable emission).  Each photon is then detected
independently with probability ``efficiency``.  A fourfold event is exactly one
detected photon at each of T, D1, D2 and D3; a detector "clicks" when it registers at
least one photon, which defines the singles and twofold tallies.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.stats import binom

from .detection import path_count_distribution
from .errors import InvalidParameterError
from .optics import Circuit, ghz_paper_preset, run_circuit
from .sources import DEFAULT_PAIR_MEAN, SourceParams, multi_pair, pair_count_pmf

PULSE_RATE = 7.6e7  # 1/s
EFFICIENCY = 0.1
TARGET_FOURFOLD_PER_PULSE = 1e-10
DETECTOR_PATHS = ("T", "1", "2", "3")
MAX_PAIRS = 3
SECONDS_PER_DAY = 86400.0
CLASSES = ("none", "singles", "twofolds", "threefolds", "fourclicks", "fourfold")


@lru_cache(maxsize=None)
def outcome_distribution(n_pairs: int) -> tuple:
    """Photon numbers on (T, 1, 2, 3) and their probabilities for ``n_pairs`` ideal pairs.

    Returns ``(patterns, probs)`` with ``patterns`` an int array of shape (m, 4).
    """
    if not 1 <= n_pairs <= MAX_PAIRS:
        raise InvalidParameterError(f"n_pairs must be in 1..{MAX_PAIRS}, got {n_pairs}")
    state = multi_pair(SourceParams(), [0.0] * n_pairs).erase_origins()
    out = run_circuit(state, Circuit((ghz_paper_preset(),)))
    dist = path_count_distribution(out)
    patterns, probs = [], []
    for key, p in sorted(dist.items()):
        counts = dict(key)
        unknown = set(counts) - set(DETECTOR_PATHS)
        if unknown:
            raise RuntimeError(f"photons left the detector paths: {unknown}")
        patterns.append([counts.get(path, 0) for path in DETECTOR_PATHS])
        probs.append(p)
    probs = np.array(probs)
    return np.array(patterns, dtype=int), probs / probs.sum()


def _class_probabilities(counts, efficiency: float) -> np.ndarray:
    """Detection-class probabilities for photon numbers ``counts`` on the four paths."""
    per_path = [binom.pmf(np.arange(n + 1), n, efficiency) for n in counts]
    out = np.zeros(len(CLASSES))
    for detected in itertools.product(*(range(n + 1) for n in counts)):
        p = 1.0
        for k, pmf in zip(detected, per_path):
            p *= pmf[k]
        if p == 0.0:
            continue
        out[_classify(detected)] += p
    return out


def _classify(detected) -> int:
    if all(d == 1 for d in detected):
        return CLASSES.index("fourfold")
    clicks = sum(1 for d in detected if d > 0)
    return (0, 1, 2, 3, 4)[clicks]


@lru_cache(maxsize=256)
def _class_table(n_pairs: int, efficiency: float) -> np.ndarray:
    """Rows: outcome patterns of ``n_pairs``; columns: CLASSES."""
    patterns, _ = outcome_distribution(n_pairs)
    return np.array([_class_probabilities(tuple(p), efficiency) for p in patterns])


def class_probabilities_given_pairs(n_pairs: int, efficiency: float) -> np.ndarray:
    _, probs = outcome_distribution(n_pairs)
    return probs @ _class_table(n_pairs, float(efficiency))


@dataclass(frozen=True)
class RateParams:
    """``postselect_prob_double`` excludes detector efficiency (applied as efficiency**4);
    ``postselect_prob_triple`` already contains the loss of two of the six photons."""

    pulse_rate: float = PULSE_RATE
    pair_mean: float = DEFAULT_PAIR_MEAN
    efficiency: float = EFFICIENCY
    postselect_prob_double: float = 0.0
    postselect_prob_triple: float = 0.0

    def __post_init__(self):
        if not (self.pulse_rate >= 0 and math.isfinite(self.pulse_rate)):
            raise InvalidParameterError(f"pulse_rate must be >= 0, got {self.pulse_rate!r}")
        if not self.pair_mean >= 0:
            raise InvalidParameterError(f"pair_mean must be >= 0, got {self.pair_mean!r}")
        for name in ("efficiency", "postselect_prob_double", "postselect_prob_triple"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidParameterError(f"{name} must lie in [0, 1], got {value!r}")

    @classmethod
    def from_model(cls, pulse_rate: float = PULSE_RATE, pair_mean: float = DEFAULT_PAIR_MEAN, efficiency: float = EFFICIENCY) -> "RateParams":
        """Fill the post-selection probabilities from the circuit model."""
        if not 0.0 <= efficiency <= 1.0:
            raise InvalidParameterError(f"efficiency must lie in [0, 1], got {efficiency!r}")
        return cls(
            pulse_rate=pulse_rate,
            pair_mean=pair_mean,
            efficiency=efficiency,
            postselect_prob_double=double_postselect_probability(),
            postselect_prob_triple=triple_postselect_probability(efficiency),
        )


def double_postselect_probability() -> float:
    """Probability that two ideal pairs put exactly one photon on each detector path."""
    patterns, probs = outcome_distribution(2)
    return float(probs[np.all(patterns == 1, axis=1)].sum())


def triple_postselect_probability(efficiency: float) -> float:
    """Probability that three pairs leave exactly one detected photon per detector."""
    return float(class_probabilities_given_pairs(3, efficiency)[CLASSES.index("fourfold")])


def fourfold_terms(params: RateParams) -> tuple:
    """(double-pair, triple-pair) contributions to the fourfold probability per pulse."""
    double = pair_count_pmf(2, params.pair_mean) * params.postselect_prob_double * params.efficiency**4
    triple = pair_count_pmf(3, params.pair_mean) * params.postselect_prob_triple
    return double, triple


def fourfold_prob_per_pulse(params: RateParams) -> float:
    return sum(fourfold_terms(params))


def expected_class_probabilities(params: RateParams) -> dict:
    """Per-pulse probability of each detection class, summed over 1..3 pairs."""
    out = np.zeros(len(CLASSES))
    for k in range(1, MAX_PAIRS + 1):
        out += pair_count_pmf(k, params.pair_mean) * class_probabilities_given_pairs(k, params.efficiency)
    return dict(zip(CLASSES, out))


def triple_to_double_ratio(params: RateParams) -> float:
    double, triple = fourfold_terms(params)
    return math.inf if double == 0 else triple / double


def calibrate(target: float = TARGET_FOURFOLD_PER_PULSE, knob: str = "efficiency", pulse_rate: float = PULSE_RATE,
              pair_mean: float = DEFAULT_PAIR_MEAN, efficiency: float = EFFICIENCY) -> RateParams:
    """Solve for ``efficiency`` or ``pair_mean`` so the fourfold probability per pulse equals ``target``."""
    if not target > 0:
        raise InvalidParameterError(f"target must be positive, got {target!r}")
    if knob == "efficiency":
        def f(eta):
            return fourfold_prob_per_pulse(RateParams.from_model(pulse_rate, pair_mean, eta)) - target
        lo, hi = 1e-9, 1.0
    elif knob == "pair_mean":
        def f(mu):
            return fourfold_prob_per_pulse(RateParams.from_model(pulse_rate, mu, efficiency)) - target
        lo, hi = 1e-12, 2.0
    else:
        raise InvalidParameterError(f"unknown calibration knob {knob!r}")
    if f(hi) < 0:
        raise InvalidParameterError(f"target {target!r} unreachable by varying {knob}")
    root = brentq(f, lo, hi, xtol=1e-15, rtol=1e-13)
    if knob == "efficiency":
        return RateParams.from_model(pulse_rate, pair_mean, root)
    return RateParams.from_model(pulse_rate, root, efficiency)


@dataclass(frozen=True)
class CountReport:
    duration: float
    pulses: int
    fourfold_double: int
    fourfold_triple: int
    singles: int
    twofolds: int
    threefolds: int
    seed: int
    method: str = "thinned"

    @property
    def fourfold(self) -> int:
        return self.fourfold_double + self.fourfold_triple


def simulate_counts(params: RateParams, duration: float, seed: int = 0, method: str = "thinned") -> CountReport:
    """Monte Carlo tally of detection events over ``duration`` seconds of pulses.

    ``pulse`` draws every pulse individually (pair number, path pattern, per-path
    binomial detection).  ``thinned`` draws the same hierarchy as multinomials over
    pulse counts, so its cost does not grow with the number of pulses.  Pulses with
    more than three pairs are counted but not tallied.
    """
    if not duration > 0:
        raise InvalidParameterError(f"duration must be positive, got {duration!r}")
    n_pulses = int(round(params.pulse_rate * duration))
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if method == "thinned":
        tallies = _simulate_thinned(params, n_pulses, rng)
    elif method == "pulse":
        tallies = _simulate_pulses(params, n_pulses, rng)
    else:
        raise InvalidParameterError(f"unknown simulation method {method!r}")
    fourfold = CLASSES.index("fourfold")
    totals = tallies.sum(axis=0)
    return CountReport(
        duration=float(duration),
        pulses=n_pulses,
        fourfold_double=int(tallies[2, fourfold]),
        fourfold_triple=int(tallies[3, fourfold]),
        singles=int(totals[CLASSES.index("singles")]),
        twofolds=int(totals[CLASSES.index("twofolds")]),
        threefolds=int(totals[CLASSES.index("threefolds")]),
        seed=int(seed),
        method=method,
    )


def _pair_probs(params: RateParams) -> np.ndarray:
    p = np.array([pair_count_pmf(k, params.pair_mean) for k in range(MAX_PAIRS + 1)])
    return np.append(p, max(0.0, 1.0 - p.sum()))


def _simulate_thinned(params: RateParams, n_pulses: int, rng: np.random.Generator) -> np.ndarray:
    tallies = np.zeros((MAX_PAIRS + 1, len(CLASSES)), dtype=np.int64)
    by_pairs = rng.multinomial(n_pulses, _pair_probs(params))
    for k in range(1, MAX_PAIRS + 1):
        if by_pairs[k] == 0:
            continue
        _, probs = outcome_distribution(k)
        per_pattern = rng.multinomial(by_pairs[k], probs)
        table = _class_table(k, float(params.efficiency))
        for count, row in zip(per_pattern, table):
            if count:
                tallies[k] += rng.multinomial(count, row / row.sum())
    return tallies


def _simulate_pulses(params: RateParams, n_pulses: int, rng: np.random.Generator, chunk: int = 1 << 22) -> np.ndarray:
    tallies = np.zeros((MAX_PAIRS + 1, len(CLASSES)), dtype=np.int64)
    remaining = n_pulses
    while remaining > 0:
        size = min(chunk, remaining)
        remaining -= size
        pairs = rng.poisson(params.pair_mean, size)
        for k in range(1, MAX_PAIRS + 1):
            m = int(np.count_nonzero(pairs == k))
            if m == 0:
                continue
            patterns, probs = outcome_distribution(k)
            routed = patterns[rng.choice(len(probs), size=m, p=probs)]
            detected = rng.binomial(routed, params.efficiency)
            exact = np.all(detected == 1, axis=1)
            clicks = np.count_nonzero(detected > 0, axis=1)
            cls = np.where(exact, CLASSES.index("fourfold"), clicks)
            tallies[k] += np.bincount(cls, minlength=len(CLASSES))
    return tallies
