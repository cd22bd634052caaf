"""Linear optical elements as substitutions of creation operators.

A :class:`ModeMap` sends every declared input mode to a linear combination of
output modes; modes it does not declare pass through unchanged.  Wavepackets and
origin tags ride along untouched.  Delays are separate stages because they act on
the temporal envelope rather than on the mode label.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import InvalidParameterError
from .modes import KetTerm, ModeLabel, Photon, Polarization, StateVector, mode

H, V = Polarization.H, Polarization.V
SQRT_HALF = 1.0 / math.sqrt(2.0)
ISOMETRY_TOL = 1e-12

CONVENTIONS = ("paper", "physical")


@dataclass(frozen=True, eq=False)
class ModeMap:
    """``entries[m]`` is a tuple of ``(output_mode, amplitude)`` pairs."""

    entries: Mapping
    name: str = ""

    def __post_init__(self):
        clean = {}
        for src, outs in dict(self.entries).items():
            acc: dict = {}
            for dst, amp in outs:
                acc[dst] = acc.get(dst, 0j) + complex(amp)
            clean[src] = tuple((dst, amp) for dst, amp in acc.items())
        object.__setattr__(self, "entries", clean)

    @property
    def declared_inputs(self) -> frozenset:
        return frozenset(self.entries)

    @property
    def output_modes(self) -> frozenset:
        return frozenset(dst for outs in self.entries.values() for dst, _ in outs)

    def image(self, m: ModeLabel) -> tuple:
        return self.entries.get(m, ((m, 1.0 + 0j),))

    def matrix(self, inputs: Optional[Sequence[ModeLabel]] = None):
        """Dense matrix (rows: outputs, columns: inputs) with the label orderings used."""
        inputs = sorted(self.declared_inputs) if inputs is None else list(inputs)
        outputs = sorted({dst for m in inputs for dst, _ in self.image(m)})
        index = {m: i for i, m in enumerate(outputs)}
        u = np.zeros((len(outputs), len(inputs)), dtype=complex)
        for j, m in enumerate(inputs):
            for dst, amp in self.image(m):
                u[index[dst], j] += amp
        return u, outputs, inputs

    def then(self, other: "ModeMap") -> "ModeMap":
        """Composition: apply ``self`` first, then ``other``."""
        entries = {}
        for src in self.declared_inputs | other.declared_inputs:
            acc: dict = {}
            for mid, a in self.image(src):
                for dst, b in other.image(mid):
                    acc[dst] = acc.get(dst, 0j) + a * b
            entries[src] = tuple(acc.items())
        return ModeMap(entries, name=f"{self.name}>{other.name}")

    def __repr__(self) -> str:
        return f"ModeMap({self.name or '?'}, inputs={sorted(map(str, self.declared_inputs))})"


@dataclass(frozen=True)
class DelayStage:
    path: str
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "path", str(self.path))
        if not math.isfinite(self.delta):
            raise InvalidParameterError(f"delay must be finite, got {self.delta!r}")


Stage = Union[ModeMap, DelayStage]


@dataclass(frozen=True)
class Circuit:
    stages: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))

    def __len__(self) -> int:
        return len(self.stages)

    def __iter__(self):
        return iter(self.stages)

    def mode_maps(self) -> list:
        return [s for s in self.stages if isinstance(s, ModeMap)]


def apply_mode_map(s: StateVector, m: ModeMap) -> StateVector:
    """Substitute every creation operator by its image under ``m`` and expand."""
    out = []
    for term in s.terms:
        choices = []
        for p in term.photons:
            choices.append([(p.with_mode(dst), amp) for dst, amp in m.image(p.mode)])
        for combo in itertools.product(*choices):
            amp = term.amplitude
            for _, a in combo:
                amp *= a
            if amp != 0:
                out.append(KetTerm(amp, tuple(ph for ph, _ in combo)))
    return StateVector(tuple(out))


def apply_delay(s: StateVector, d: DelayStage) -> StateVector:
    if d.delta == 0:
        return s
    out = []
    for term in s.terms:
        photons = tuple(
            Photon(p.mode, p.packet.shifted(d.delta), p.origin) if p.spatial == d.path else p for p in term.photons
        )
        out.append(KetTerm(term.amplitude, photons))
    return StateVector(tuple(out))


def run_circuit(s: StateVector, circuit: Union[Circuit, Iterable[Stage]]) -> StateVector:
    for stage in circuit:
        if isinstance(stage, DelayStage):
            s = apply_delay(s, stage)
        else:
            s = apply_mode_map(s, stage)
    return s


@dataclass
class IsometryReport:
    ok: bool
    violations: list

    def __bool__(self) -> bool:
        return self.ok


def check_isometry(m: ModeMap, tol: float = ISOMETRY_TOL) -> IsometryReport:
    """Check that the columns of ``m`` over its declared inputs are orthonormal.

    ``violations`` holds ``(input_i, input_j, gram_ij)`` for every offending pair.
    """
    u, _, inputs = m.matrix()
    gram = u.conj().T @ u
    violations = []
    for i, j in itertools.combinations_with_replacement(range(len(inputs)), 2):
        target = 1.0 if i == j else 0.0
        if abs(gram[i, j] - target) > tol:
            violations.append((inputs[i], inputs[j], complex(gram[i, j])))
    return IsometryReport(not violations, violations)


# --- element library --------------------------------------------------------


def ghz_paper_preset() -> ModeMap:
    """Input arms a, b to the trigger T and detectors 1, 2, 3 in one step (all-positive amplitudes)."""
    r = SQRT_HALF
    return ModeMap(
        {
            mode("a", H): ((mode("T", H), 1.0),),
            mode("b", V): ((mode(2, V), r), (mode(3, V), r)),
            mode("a", V): ((mode(1, V), r), (mode(2, H), r)),
            mode("b", H): ((mode(1, H), r), (mode(3, H), r)),
        },
        name="ghz-paper",
    )


def hwp_map(theta: float, path, convention: str = "jones") -> ModeMap:
    """Half-wave plate with fast axis at ``theta`` degrees on ``path``.

    ``jones``: H -> cos2t H + sin2t V, V -> sin2t H - cos2t V.
    ``rotation``: H -> cos2t H - sin2t V, V -> sin2t H + cos2t V.
    """
    c = math.cos(math.radians(2.0 * theta))
    s = math.sin(math.radians(2.0 * theta))
    h, v = mode(path, H), mode(path, V)
    if convention == "jones":
        entries = {h: ((h, c), (v, s)), v: ((h, s), (v, -c))}
    elif convention == "rotation":
        entries = {h: ((h, c), (v, -s)), v: ((h, s), (v, c))}
    else:
        raise InvalidParameterError(f"unknown wave-plate convention {convention!r}")
    return ModeMap(entries, name=f"hwp{theta:g}@{path}")


def _check_ports(inputs, outputs):
    if len(inputs) != 2 or len(outputs) != 2:
        raise InvalidParameterError("beamsplitters take two input and two output ports")
    labels = [str(p) for p in (*inputs, *outputs) if p is not None]
    if len(set(labels)) != len(labels):
        raise InvalidParameterError(f"duplicate port labels: {labels}")
    if outputs[0] is None or outputs[1] is None or inputs[0] is None:
        raise InvalidParameterError("first input and both outputs must be named")


def bs_map(inputs: Sequence, outputs: Sequence, convention: str = "paper") -> ModeMap:
    """Polarisation-independent 50/50 beamsplitter.

    ``inputs[0]`` transmits to ``outputs[0]`` and reflects to ``outputs[1]``;
    ``inputs[1]`` (may be None if unused) does the opposite.  ``paper``: amplitudes
    +1/sqrt2 on the first input, the second input gets a sign on transmission to stay
    unitary.  ``physical``: transmission 1/sqrt2, reflection i/sqrt2.
    """
    _check_ports(inputs, outputs)
    if convention == "paper":
        t1, r1, t2, r2 = SQRT_HALF, SQRT_HALF, -SQRT_HALF, SQRT_HALF
    elif convention == "physical":
        t1, r1, t2, r2 = SQRT_HALF, 1j * SQRT_HALF, SQRT_HALF, 1j * SQRT_HALF
    else:
        raise InvalidParameterError(f"unknown beamsplitter convention {convention!r}")
    a, b = inputs
    c, d = outputs
    entries = {}
    for pol in (H, V):
        entries[mode(a, pol)] = ((mode(c, pol), t1), (mode(d, pol), r1))
        if b is not None:
            entries[mode(b, pol)] = ((mode(d, pol), t2), (mode(c, pol), r2))
    return ModeMap(entries, name=f"bs({a},{b})")


def pbs_map(inputs: Sequence, outputs: Sequence, convention: str = "paper") -> ModeMap:
    """Polarising beamsplitter: H transmitted, V reflected.

    ``inputs[0]``: H -> outputs[0], V -> outputs[1]; ``inputs[1]``: H -> outputs[1],
    V -> outputs[0].  The reflection amplitude is 1 (``paper``) or i (``physical``).
    """
    _check_ports(inputs, outputs)
    if convention == "paper":
        r = 1.0
    elif convention == "physical":
        r = 1j
    else:
        raise InvalidParameterError(f"unknown beamsplitter convention {convention!r}")
    a, b = inputs
    c, d = outputs
    entries = {
        mode(a, H): ((mode(c, H), 1.0),),
        mode(a, V): ((mode(d, V), r),),
    }
    if b is not None:
        entries[mode(b, H)] = ((mode(d, H), 1.0),)
        entries[mode(b, V)] = ((mode(c, V), r),)
    return ModeMap(entries, name=f"pbs({a},{b})")


def analyzer_axis(angle: float) -> tuple:
    """(H, V) components of the polariser transmission axis.

    Angles are measured from vertical: 0 deg transmits V, 90 deg transmits H,
    +45 deg transmits (H + V)/sqrt2 and -45 deg transmits (V - H)/sqrt2.
    """
    rad = math.radians(angle)
    h, v = math.sin(rad), math.cos(rad)
    # snap exact zeros so that 0/90 deg give clean projectors
    if abs(h) < 1e-15:
        h = 0.0
    if abs(v) < 1e-15:
        v = 0.0
    return h, v


def analyzer_map(path, angle: float) -> ModeMap:
    """Projector onto the polariser axis on ``path``; not an isometry."""
    ah, av = analyzer_axis(angle)
    h, v = mode(path, H), mode(path, V)
    entries = {
        h: ((h, ah * ah), (v, ah * av)),
        v: ((h, av * ah), (v, av * av)),
    }
    return ModeMap(entries, name=f"pol{angle:g}@{path}")


def ghz_element_chain(convention: str = "physical") -> list:
    """Fig.-1 style chain of discrete elements: PBS on a, HWP, 50/50 BS on b, final PBS.

    Internal paths: ``x`` joins the first PBS (via the wave plate) to the final PBS,
    ``y`` joins the 50/50 beamsplitter to the final PBS.  With ``convention='paper'``
    the chain composes to :func:`ghz_paper_preset`.
    """
    if convention not in CONVENTIONS:
        raise InvalidParameterError(f"unknown convention {convention!r}")
    plate = "rotation" if convention == "paper" else "jones"
    return [
        pbs_map(("a", None), ("T", "x"), convention),
        hwp_map(22.5, "x", plate),
        bs_map(("b", None), ("3", "y"), convention),
        pbs_map(("y", "x"), ("1", "2"), convention),
    ]


def shipped_mode_maps() -> list:
    """Every isometric ModeMap the package constructs, for property suites."""
    maps = [ghz_paper_preset()]
    for conv in CONVENTIONS:
        maps.extend(ghz_element_chain(conv))
        maps.append(bs_map(("x", "y"), ("c", "d"), conv))
        maps.append(pbs_map(("x", "y"), ("c", "d"), conv))
    for theta in (0.0, 22.5, 45.0, 67.5):
        maps.append(hwp_map(theta, "x", "jones"))
        maps.append(hwp_map(theta, "x", "rotation"))
    return maps
