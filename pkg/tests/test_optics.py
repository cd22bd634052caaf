import math
import random
from functools import reduce

import numpy as np
import pytest

from ghzsim.errors import InvalidParameterError
from ghzsim.modes import KetTerm, Photon, Polarization, StateVector, WavePacket, mode, state_inner_product
from ghzsim.optics import (
    DelayStage,
    analyzer_map,
    apply_delay,
    apply_mode_map,
    bs_map,
    check_isometry,
    ghz_element_chain,
    ghz_paper_preset,
    hwp_map,
    pbs_map,
    run_circuit,
    shipped_mode_maps,
)

H, V = Polarization.H, Polarization.V
R = 1 / math.sqrt(2)


def one(label, t=0.0):
    return StateVector.single(Photon(mode(label[1:], label[0]), WavePacket(t, 250.0)))


def amplitudes(s):
    return {tuple(str(p.mode) for p in t.photons): t.amplitude for t in s.terms}


def close(a, b, tol=1e-12):
    return state_inner_product(a - b, a - b).real < tol**2


# --- substitution preset ----------------------------------------------------


def test_preset_substitution_rules():
    m = ghz_paper_preset()
    assert close(apply_mode_map(one("Ha"), m), one("HT"))
    assert close(apply_mode_map(one("Va"), m), R * (one("V1") + one("H2")))
    assert close(apply_mode_map(one("Vb"), m), R * (one("V2") + one("V3")))
    assert close(apply_mode_map(one("Hb"), m), R * (one("H1") + one("H3")))


def test_preset_mode_sets():
    m = ghz_paper_preset()
    assert m.declared_inputs == {mode("a", H), mode("a", V), mode("b", H), mode("b", V)}
    assert m.output_modes == {mode("T", H), mode(1, H), mode(1, V), mode(2, H), mode(2, V), mode(3, H), mode(3, V)}
    assert check_isometry(m)


def test_two_photons_on_b_expand_to_four_terms():
    s = StateVector.single(Photon(mode("b", H)), Photon(mode("b", V)))
    out = apply_mode_map(s, ghz_paper_preset())
    # (H1 + H3)(V2 + V3)/2 expanded by hand
    assert amplitudes(out) == pytest.approx(
        {("H_1", "V_2"): 0.5, ("H_1", "V_3"): 0.5, ("V_2", "H_3"): 0.5, ("H_3", "V_3"): 0.5}
    )


def test_element_chain_composes_to_preset():
    composed = reduce(lambda a, b: a.then(b), ghz_element_chain("paper"))
    preset = ghz_paper_preset()
    u1, outs1, ins = preset.matrix()
    u2, outs2, _ = composed.matrix(ins)
    assert outs1 == outs2
    np.testing.assert_allclose(u2, u1, atol=1e-15)


# --- wave plates ------------------------------------------------------------


def test_hwp_zero_jones():
    m = hwp_map(0.0, "x", "jones")
    assert close(apply_mode_map(one("Hx"), m), one("Hx"))
    assert close(apply_mode_map(one("Vx"), m), -1.0 * one("Vx"))


def test_hwp_22_5_rotation_makes_45():
    m = hwp_map(22.5, "x", "rotation")
    assert close(apply_mode_map(one("Vx"), m), R * (one("Hx") + one("Vx")))


def test_hwp_45_jones_swaps():
    m = hwp_map(45.0, "x", "jones")
    assert close(apply_mode_map(one("Hx"), m), one("Vx"))
    assert close(apply_mode_map(one("Vx"), m), one("Hx"))


def test_hwp_unknown_convention():
    with pytest.raises(InvalidParameterError):
        hwp_map(10, "x", "fresnel")


# --- beamsplitters ----------------------------------------------------------


def test_physical_bs_single_photon():
    m = bs_map(("x", "y"), ("c", "d"), "physical")
    assert close(apply_mode_map(one("Hx"), m), R * (one("Hc") + 1j * one("Hd")))


def test_physical_bs_bunching():
    m = bs_map(("x", "y"), ("c", "d"), "physical")
    s = StateVector.single(Photon(mode("x", H)), Photon(mode("y", H)))
    out = apply_mode_map(s, m)
    # coincidence amplitude U_cx U_dy + U_cy U_dx = 0 (2x2 brute force)
    assert ("H_c", "H_d") not in amplitudes(out)
    assert out.norm_squared() == pytest.approx(1.0, abs=1e-12)


def test_distinguishable_photons_do_not_bunch():
    m = bs_map(("x", "y"), ("c", "d"), "physical")
    s = StateVector.single(Photon(mode("x", H), WavePacket(0, 250)), Photon(mode("y", H), WavePacket(1e5, 250)))
    out = apply_mode_map(s, m)
    coinc = StateVector(tuple(t for t in out.terms if {p.spatial for p in t.photons} == {"c", "d"}))
    assert coinc.norm_squared() == pytest.approx(0.5, abs=1e-12)


def test_pbs_conventions():
    m = pbs_map(("a", None), ("T", "x"), "paper")
    assert close(apply_mode_map(one("Ha"), m), one("HT"))
    assert close(apply_mode_map(one("Va"), m), one("Vx"))
    phys = pbs_map(("a", None), ("T", "x"), "physical")
    assert close(apply_mode_map(one("Va"), phys), 1j * one("Vx"))


@pytest.mark.parametrize("factory", [bs_map, pbs_map])
def test_duplicate_ports_rejected(factory):
    with pytest.raises(InvalidParameterError):
        factory(("x", "x"), ("c", "d"))
    with pytest.raises(InvalidParameterError):
        factory(("x", "y"), ("c", "x"))


# --- delays -----------------------------------------------------------------


def test_delay_zero_is_identity():
    s = one("Ha") @ one("Vb")
    assert apply_delay(s, DelayStage("a", 0.0)) == s


def test_delay_inverse_exact():
    s = StateVector.single(Photon(mode("a", H), WavePacket(0.1, 250)), Photon(mode("b", V), WavePacket(-7.3, 250)))
    for delta in (0.2, 300.0, 1e-3, 123.456789):
        back = apply_delay(apply_delay(s, DelayStage("a", delta)), DelayStage("a", -delta))
        assert back == s


def test_delay_selective():
    s = one("Ha") @ one("Vb")
    out = apply_delay(s, DelayStage("a", 300.0))
    centers = {p.spatial: p.packet.center for p in out.terms[0].photons}
    assert centers == {"a": 300.0, "b": 0.0}


def test_delay_commutes_with_maps_off_path():
    s = (one("Ha") @ one("Vb")) + (one("Va") @ one("Hb"))
    m = bs_map(("b", None), ("3", "y"))
    d = DelayStage("a", 250.0)
    assert apply_mode_map(apply_delay(s, d), m) == apply_delay(apply_mode_map(s, m), d)


# --- isometry and linearity -------------------------------------------------


def test_isometry_checks():
    assert check_isometry(bs_map(("x", "y"), ("c", "d"), "physical"))
    report = check_isometry(analyzer_map("1", 45.0))
    assert not report
    assert report.violations


def test_all_shipped_maps_isometric():
    for m in shipped_mode_maps():
        assert check_isometry(m), m


def test_linearity():
    m = ghz_paper_preset()
    s1 = one("Ha") @ one("Vb")
    s2 = one("Va") @ one("Hb")
    a, b = 0.3 - 0.2j, 1.1
    lhs = apply_mode_map(a * s1 + b * s2, m)
    rhs = a * apply_mode_map(s1, m) + b * apply_mode_map(s2, m)
    assert close(lhs, rhs)


def test_composition_equals_sequential():
    chain = ghz_element_chain("physical")
    composed = reduce(lambda a, b: a.then(b), chain)
    s = (one("Ha") @ one("Vb") @ one("Va", 100.0)) + 0.5j * (one("Hb") @ one("Hb", 50.0) @ one("Va"))
    assert close(run_circuit(s, chain), apply_mode_map(s, composed))


def test_norm_preserved_random_states():
    rng = random.Random(3)
    for m in shipped_mode_maps()[:6]:
        inputs = sorted(m.declared_inputs)
        for _ in range(10):
            terms = []
            for _ in range(rng.randint(1, 3)):
                n = rng.randint(1, 3)
                photons = tuple(Photon(rng.choice(inputs), WavePacket(rng.choice([0.0, 80.0, 300.0]), 250.0)) for _ in range(n))
                terms.append(KetTerm(complex(rng.gauss(0, 1), rng.gauss(0, 1)), photons))
            s = StateVector(tuple(terms))
            assert apply_mode_map(s, m).norm_squared() == pytest.approx(s.norm_squared(), rel=1e-9)
