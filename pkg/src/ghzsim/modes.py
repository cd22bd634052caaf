"""Multi-photon states on labelled optical modes with Gaussian temporal wavepackets.

A :class:`KetTerm` stands for ``amplitude * a†(p1) a†(p2) ... |0>``, a product of
(unnormalised) creation operators, one per :class:`Photon`.  Photons in the same
spatial/polarisation mode but with different wavepackets are only partially
distinguishable; inner products therefore go through matrix permanents of the
single-photon overlap matrix, which gives bunching and partial-coherence effects
without any special casing.
"""

from __future__ import annotations

import enum
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidParameterError

PRUNE_EPS = 1e-12
# packet centres live on a 1e-9 fs grid so that shifting by +d then -d is exact
_CENTER_DECIMALS = 9
MAX_PERMANENT_SIZE = 8


class Polarization(enum.Enum):
    H = "H"
    V = "V"

    def __lt__(self, other: "Polarization") -> bool:
        return self.value < other.value


@dataclass(frozen=True, order=True)
class ModeLabel:
    spatial: str
    polarization: Polarization

    def __post_init__(self):
        object.__setattr__(self, "spatial", str(self.spatial))

    def __str__(self) -> str:
        return f"{self.polarization.value}_{self.spatial}"


def mode(spatial, polarization) -> ModeLabel:
    """Shorthand: ``mode("a", "H")`` or ``mode(1, Polarization.V)``."""
    return ModeLabel(str(spatial), Polarization(polarization) if isinstance(polarization, str) else polarization)


@dataclass(frozen=True)
class WavePacket:
    """Gaussian temporal envelope; ``width`` is the intensity standard deviation in fs."""

    center: float = 0.0
    width: float = 250.0

    def __post_init__(self):
        if not (self.width > 0.0) or not math.isfinite(self.width):
            raise InvalidParameterError(f"wavepacket width must be positive, got {self.width!r}")
        if not math.isfinite(self.center):
            raise InvalidParameterError(f"wavepacket center must be finite, got {self.center!r}")
        object.__setattr__(self, "center", round(float(self.center), _CENTER_DECIMALS) + 0.0)
        object.__setattr__(self, "width", float(self.width))

    def shifted(self, delta: float) -> "WavePacket":
        return WavePacket(self.center + delta, self.width)

    def amplitude(self, t):
        """Normalised real amplitude psi(t), with |psi|^2 a Gaussian of std ``width``."""
        t = np.asarray(t, dtype=float)
        norm = (2.0 * math.pi * self.width**2) ** -0.25
        return norm * np.exp(-((t - self.center) ** 2) / (4.0 * self.width**2))


@lru_cache(maxsize=65536)
def wavepacket_overlap(w1: WavePacket, w2: WavePacket) -> complex:
    """Return the overlap integral of two normalised Gaussian amplitudes.

    For widths s1, s2 and centre separation d the closed form is
    ``sqrt(2 s1 s2 / (s1^2 + s2^2)) * exp(-d^2 / (4 (s1^2 + s2^2)))``.
    The amplitudes carry no carrier phase, so the result is real (returned as complex).
    """
    if w1 == w2:
        return 1.0 + 0.0j
    s1, s2 = w1.width, w2.width
    ssum = s1 * s1 + s2 * s2
    d = w1.center - w2.center
    prefactor = math.sqrt(2.0 * s1 * s2 / ssum)
    return complex(prefactor * math.exp(-d * d / (4.0 * ssum)))


@dataclass(frozen=True)
class Photon:
    mode: ModeLabel
    packet: WavePacket = field(default_factory=WavePacket)
    # bookkeeping only; never enters overlaps
    origin: Optional[str] = None

    @property
    def spatial(self) -> str:
        return self.mode.spatial

    @property
    def polarization(self) -> Polarization:
        return self.mode.polarization

    def sort_key(self):
        return (
            self.mode.spatial,
            self.mode.polarization.value,
            self.packet.center,
            self.packet.width,
            self.origin or "",
        )

    def with_mode(self, new_mode: ModeLabel) -> "Photon":
        return Photon(new_mode, self.packet, self.origin)

    def __str__(self) -> str:
        tag = f"'{self.origin}" if self.origin else ""
        return f"{self.mode}{tag}@{self.packet.center:g}"


def photon_overlap(p1: Photon, p2: Photon) -> complex:
    if p1.mode != p2.mode:
        return 0.0j
    return wavepacket_overlap(p1.packet, p2.packet)


@dataclass(frozen=True)
class KetTerm:
    amplitude: complex
    photons: tuple = ()

    def __post_init__(self):
        photons = tuple(sorted(self.photons, key=Photon.sort_key))
        object.__setattr__(self, "photons", photons)
        object.__setattr__(self, "amplitude", complex(self.amplitude))

    @property
    def key(self) -> tuple:
        return tuple(p.sort_key() for p in self.photons)

    @property
    def n_photons(self) -> int:
        return len(self.photons)

    def mode_signature(self) -> tuple:
        return tuple(p.mode for p in self.photons)

    def scaled(self, factor: complex) -> "KetTerm":
        return KetTerm(self.amplitude * factor, self.photons)

    def __str__(self) -> str:
        body = " ".join(str(p) for p in self.photons) or "vac"
        return f"({self.amplitude:.6g})|{body}>"


def canonicalize_terms(terms: Iterable[KetTerm], prune_eps: float = PRUNE_EPS) -> tuple:
    merged: dict = {}
    for term in terms:
        key = term.key
        if key in merged:
            amp, photons = merged[key]
            merged[key] = (amp + term.amplitude, photons)
        else:
            merged[key] = (term.amplitude, term.photons)
    kept = [
        KetTerm(amp, photons)
        for key, (amp, photons) in sorted(merged.items(), key=lambda kv: kv[0])
        if abs(amp) >= prune_eps
    ]
    return tuple(kept)


@dataclass(frozen=True)
class StateVector:
    """Linear combination of :class:`KetTerm`; always stored in canonical form."""

    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", canonicalize_terms(self.terms))

    @classmethod
    def vacuum(cls) -> "StateVector":
        return cls((KetTerm(1.0, ()),))

    @classmethod
    def single(cls, *photons: Photon, amplitude: complex = 1.0) -> "StateVector":
        return cls((KetTerm(amplitude, photons),))

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: "StateVector") -> "StateVector":
        return StateVector(self.terms + other.terms)

    def __sub__(self, other: "StateVector") -> "StateVector":
        return self + (-1.0) * other

    def __mul__(self, factor) -> "StateVector":
        return StateVector(tuple(t.scaled(factor) for t in self.terms))

    __rmul__ = __mul__

    def __matmul__(self, other: "StateVector") -> "StateVector":
        """Tensor product (concatenation of creation-operator strings)."""
        return StateVector(
            tuple(KetTerm(a.amplitude * b.amplitude, a.photons + b.photons) for a in self.terms for b in other.terms)
        )

    def norm_squared(self) -> float:
        return state_inner_product(self, self).real

    def norm(self) -> float:
        return math.sqrt(max(self.norm_squared(), 0.0))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise InvalidParameterError("cannot normalise the zero vector")
        return self * (1.0 / n)

    def erase_origins(self) -> "StateVector":
        """Drop pair-of-origin tags and merge the terms that become identical."""
        return StateVector(
            tuple(KetTerm(t.amplitude, tuple(Photon(p.mode, p.packet) for p in t.photons)) for t in self.terms)
        )

    def __str__(self) -> str:
        return " + ".join(str(t) for t in self.terms) if self.terms else "0"


def canonicalize(s: StateVector | Sequence[KetTerm], prune_eps: float = PRUNE_EPS) -> StateVector:
    terms = s.terms if isinstance(s, StateVector) else tuple(s)
    out = StateVector.__new__(StateVector)
    object.__setattr__(out, "terms", canonicalize_terms(terms, prune_eps))
    return out


# --- permanents -------------------------------------------------------------


def _permanent_enumerate(m: np.ndarray) -> complex:
    n = m.shape[0]
    total = 0j
    for perm in itertools.permutations(range(n)):
        prod = 1 + 0j
        for i, j in enumerate(perm):
            prod *= m[i, j]
        total += prod
    return total


def _permanent_ryser(m: np.ndarray) -> complex:
    # Ryser with Gray-code ordering of column subsets: O(2^n n)
    n = m.shape[0]
    row_sums = np.zeros(n, dtype=complex)
    in_set = [False] * n
    size = 0
    total = 0j
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1
        if in_set[j]:
            row_sums -= m[:, j]
            size -= 1
        else:
            row_sums += m[:, j]
            size += 1
        in_set[j] = not in_set[j]
        term = complex(np.prod(row_sums))
        # (-1)^(n - |S|)
        total += term if (n - size) % 2 == 0 else -term
    return total


def permanent(m) -> complex:
    """Permanent of a square matrix of size at most 8.

    Direct enumeration is used up to 4x4, Ryser's inclusion-exclusion formula above.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidParameterError(f"permanent needs a square matrix, got shape {m.shape}")
    n = m.shape[0]
    if n > MAX_PERMANENT_SIZE:
        raise InvalidParameterError(f"permanent limited to n <= {MAX_PERMANENT_SIZE}, got {n}")
    if n == 0:
        return 1 + 0j
    if n == 1:
        return complex(m[0, 0])
    if n == 2:
        return complex(m[0, 0] * m[1, 1] + m[0, 1] * m[1, 0])
    if n <= 4:
        return _permanent_enumerate(m)
    return _permanent_ryser(m)


# --- inner products ---------------------------------------------------------


def _block_overlap(bra: Sequence[Photon], ket: Sequence[Photon]) -> complex:
    if len(bra) == 1:
        return wavepacket_overlap(bra[0].packet, ket[0].packet)
    g = np.array([[wavepacket_overlap(p.packet, q.packet) for q in ket] for p in bra], dtype=complex)
    if np.all(g == 1.0):
        return complex(math.factorial(len(bra)))
    return permanent(g)


def term_inner_product(t1: KetTerm, t2: KetTerm) -> complex:
    """<t1|t2> = conj(a1) a2 perm(G), G[i, j] = <photon_i|photon_j>.

    G is block diagonal over optical modes (distinct modes are orthogonal), so the
    permanent factorises into per-mode blocks; terms whose mode multisets differ
    give zero directly.
    """
    if t1.n_photons != t2.n_photons:
        return 0j
    if t1.mode_signature() != t2.mode_signature():
        return 0j
    value = t1.amplitude.conjugate() * t2.amplitude
    if value == 0:
        return 0j
    blocks1: dict = defaultdict(list)
    blocks2: dict = defaultdict(list)
    for p in t1.photons:
        blocks1[p.mode].append(p)
    for p in t2.photons:
        blocks2[p.mode].append(p)
    for m, bra in blocks1.items():
        value *= _block_overlap(bra, blocks2[m])
        if value == 0:
            return 0j
    return value


def _group_by_signature(s: StateVector) -> dict:
    groups: dict = defaultdict(list)
    for t in s.terms:
        groups[t.mode_signature()].append(t)
    return groups


def state_inner_product(s1: StateVector, s2: StateVector) -> complex:
    """<s1|s2>, conjugate-linear in ``s1``."""
    g1 = _group_by_signature(s1)
    g2 = _group_by_signature(s2)
    total = 0j
    for sig, bra_terms in g1.items():
        ket_terms = g2.get(sig)
        if not ket_terms:
            continue
        for a in bra_terms:
            for b in ket_terms:
                total += term_inner_product(a, b)
    return total
