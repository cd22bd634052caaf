"""Independent reference computations used to check the library.

None of these import the code paths they check: permanents by plain permutation
sums, bosonic inner products by commuting annihilators through creators, Gaussian
overlaps by numerical quadrature, and the double-pair evolution by a hand-written
expansion over plain tuples.
"""

import itertools
import math

import numpy as np
from scipy.integrate import quad


def brute_permanent(m):
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    return sum(math.prod(m[i, s[i]] for i in range(n)) for s in itertools.permutations(range(n))) if n else 1.0


def gaussian_amp(t, center, width):
    return (2 * math.pi * width**2) ** -0.25 * math.exp(-((t - center) ** 2) / (4 * width**2))


def quadrature_overlap(c1, w1, c2, w2):
    lo = min(c1 - 40 * w1, c2 - 40 * w2)
    hi = max(c1 + 40 * w1, c2 + 40 * w2)
    # split at both centres so quad sees each peak
    points = sorted({c1, c2})
    val, _ = quad(
        lambda t: gaussian_amp(t, c1, w1) * gaussian_amp(t, c2, w2),
        lo,
        hi,
        points=points,
        epsabs=1e-14,
        epsrel=1e-13,
        limit=500,
    )
    return val


def _single_overlap(a, b):
    """a, b: (mode_key, center, width). Closed form re-derived for the oracle."""
    if a[0] != b[0]:
        return 0.0
    s1, s2 = a[2], b[2]
    d = a[1] - b[1]
    return math.sqrt(2 * s1 * s2 / (s1**2 + s2**2)) * math.exp(-(d**2) / (4 * (s1**2 + s2**2)))


def commutator_vacuum_expectation(bra, ket):
    """<0| a(bra_n)...a(bra_1) a†(ket_1)...a†(ket_n) |0> by repeated [a, a†] contraction."""
    if len(bra) != len(ket):
        return 0.0
    if not bra:
        return 1.0
    first, rest = bra[0], bra[1:]
    total = 0.0
    for i, photon in enumerate(ket):
        c = _single_overlap(first, photon)
        if c:
            total += c * commutator_vacuum_expectation(rest, ket[:i] + ket[i + 1 :])
    return total


def photon_tuple(p):
    return ((p.mode.spatial, p.mode.polarization.value), p.packet.center, p.packet.width)


def brute_term_inner(t1, t2):
    bra = [photon_tuple(p) for p in t1.photons]
    ket = [photon_tuple(p) for p in t2.photons]
    return np.conj(t1.amplitude) * t2.amplitude * commutator_vacuum_expectation(bra, ket)


# --- hand expansion of the double pair through the four substitution rules ----

R = 1 / math.sqrt(2)
# (pol, arm) -> list of ((pol, detector), amplitude)
SUBSTITUTION = {
    ("H", "a"): [(("H", "T"), 1.0)],
    ("V", "b"): [(("V", "2"), R), (("V", "3"), R)],
    ("V", "a"): [(("V", "1"), R), (("H", "2"), R)],
    ("H", "b"): [(("H", "1"), R), (("H", "3"), R)],
}


def double_pair_terms(phase_sign=-1.0):
    """The four product terms of two singlet-like pairs; photons are (pol, arm, pair)."""
    pair = [([("H", "a"), ("V", "b")], 0.5**0.5), ([("V", "a"), ("H", "b")], phase_sign * 0.5**0.5)]
    terms = []
    for (p1, a1), (p2, a2) in itertools.product(pair, pair):
        photons = [(pol, arm, 0) for pol, arm in p1] + [(pol, arm, 1) for pol, arm in p2]
        terms.append((photons, a1 * a2))
    return terms


def expand_fourfold(phase_sign=-1.0):
    """Exhaustive expansion, keeping one photon per detector.

    Returns ``(kept, n_expanded)`` where ``kept`` maps a frozenset of
    (pol, detector, pair) to the summed amplitude, with distinguishable pairs.
    """
    kept = {}
    n_expanded = 0
    for photons, amp in double_pair_terms(phase_sign):
        options = [SUBSTITUTION[(pol, arm)] for pol, arm, _ in photons]
        for combo in itertools.product(*options):
            n_expanded += 1
            detectors = [det for (_, det), _ in combo]
            if sorted(detectors) != ["1", "2", "3", "T"]:
                continue
            a = amp * math.prod(x for _, x in combo)
            key = frozenset((pol, det, photons[i][2]) for i, ((pol, det), _) in enumerate(combo))
            kept[key] = kept.get(key, 0.0) + a
    return kept, n_expanded


# --- creation-operator polynomials for identical pairs ------------------------


def _poly_mul(p, q):
    out = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            key = tuple(sorted(m1 + m2))
            out[key] = out.get(key, 0.0) + c1 * c2
    return out


def fock_path_distribution(n_pairs, phase_sign=-1.0):
    """Photon numbers per detector for ``n_pairs`` identical pairs.

    The pair creator (Ha Vb + sign Va Hb)/sqrt2 is raised to the n-th power as a
    commuting polynomial, pushed through SUBSTITUTION, and each output monomial is
    weighted by |c|^2 times the product of occupation factorials.
    """
    pair = {(("H", "a"), ("V", "b")): R, (("V", "a"), ("H", "b")): phase_sign * R}
    # sort keys the same way _poly_mul does
    pair = {tuple(sorted(k)): v for k, v in pair.items()}
    poly = {(): 1.0}
    for _ in range(n_pairs):
        poly = _poly_mul(poly, pair)
    out = {}
    for monomial, c in poly.items():
        expanded = {(): c}
        for pol, arm in monomial:
            expanded = _poly_mul(expanded, {((p, d),): a for (p, d), a in SUBSTITUTION[(pol, arm)]})
        for k, v in expanded.items():
            out[k] = out.get(k, 0.0) + v
    dist = {}
    for monomial, c in out.items():
        weight = abs(c) ** 2 * math.prod(math.factorial(monomial.count(m)) for m in set(monomial))
        counts = tuple(sum(1 for _, d in monomial if d == det) for det in ("T", "1", "2", "3"))
        dist[counts] = dist.get(counts, 0.0) + weight
    total = sum(dist.values())
    return {k: v / total for k, v in dist.items() if v / total > 1e-15}
