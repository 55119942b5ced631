import json
import math

import numpy as np
import pytest
from scipy import integrate as sint, special

from conftest import DATA, constant
from rodcasimir.free_energy import (EnergyMode, IntegrationSettings, force_per_length, free_energy, g_term,
                                    universal_moments)
from rodcasimir.matsubara import ThermalEnvironment
from rodcasimir.rod_kernel import RodSystem


def system(e1, e2, e3, a=1e-9, b=1e-9):
    return RodSystem(a, b, constant(e1), constant(e2), constant(e3))


def trapezoid_g0(e1, e2, e3, a, b, R, T, n=200_001):
    """n = 0 term by a dense trapezoid rule with scipy Bessel functions."""
    k = np.linspace(0.0, 80.0 / R, n)[1:]
    x = k * R
    dd = (e3 - e1) * (e3 - e2)
    K0, K1, K2 = special.kn(0, x), special.kn(1, x), special.kn(2, x)
    c = a * a * b * b
    G = (-c / 4 * dd / e3**2 * k**4 * K0**2
         - c / 2 * dd * (1 / (e3 * (e3 + e2)) + 1 / (e3 * (e3 + e1))) * k**4 * K1**2
         - c / 2 * dd / ((e3 + e1) * (e3 + e2)) * k**4 * (K2**2 + K0**2))
    G0 = -c / 2 * dd / ((e3 + e1) * (e3 + e2)) * 4.0 / R**4
    kk = np.concatenate([[0.0], k])
    GG = np.concatenate([[G0], G])
    return sint.trapezoid(GG, kk) * 1.380649e-23 * T / (2 * math.pi)


# -- g_term ------------------------------------------------------------------

def test_trapezoid_oracle(toy_system, env):
    ref = json.loads((DATA / "g_term_trapezoid.json").read_text())
    got = g_term(toy_system, env, 0, ref["R_m"])
    assert got.value == pytest.approx(ref["g_J_per_m"], rel=1e-6)


@pytest.mark.parametrize("mode", ["retarded", "nonretarded"])
@pytest.mark.parametrize("n", [0, 1, 7, 300])
def test_index_matched_term_is_zero(representative, env, mode, n):
    s = RodSystem(1e-9, 1e-9, representative.material_3, representative.material_2,
                  representative.material_3)
    assert g_term(s, env, n, 20e-9, mode).value == 0.0


@pytest.mark.parametrize("R", [3e-9, 40e-9, 2e-6])
def test_zero_mode_identical_in_both_modes(representative, env, R):
    a = g_term(representative, env, 0, R, "retarded")
    b = g_term(representative, env, 0, R, "nonretarded")
    assert a.value == b.value


def test_retarded_term_converges(representative, env):
    t = g_term(representative, env, 5, 30e-9)
    assert t.converged
    assert t.abs_error <= 1e-8 * abs(t.value) + 1e-35


def test_retarded_terms_below_nonretarded_for_like_rods(env):
    # same-sign terms are weakened by retardation
    s = system(4.0, 4.0, 2.0)
    for n in (1, 10, 100):
        ret = g_term(s, env, n, 50e-9, "retarded").value
        nonret = g_term(s, env, n, 50e-9, "nonretarded").value
        assert nonret < ret < 0


def test_universal_moments_closed_form():
    (j0, j1, j2), _ = universal_moments()
    closed = [math.sqrt(math.pi) * math.gamma(2.5 + v) * math.gamma(2.5 - v) * math.gamma(2.5)
              / (4 * math.gamma(3.0)) for v in (0, 1, 2)]
    assert j0 == pytest.approx(closed[0], rel=1e-13)
    assert j1 == pytest.approx(closed[1], rel=1e-13)
    assert j2 == pytest.approx(closed[2] + closed[0], rel=1e-13)


@pytest.mark.parametrize("R", [0.0, -1e-9, math.nan])
def test_nonpositive_separation(toy_system, env, R):
    with pytest.raises(ValueError):
        free_energy(toy_system, env, R)


def test_settings_validation():
    with pytest.raises(ValueError):
        IntegrationSettings(rel_tol=0.1)
    with pytest.raises(ValueError):
        IntegrationSettings(max_matsubara_n=0)


# -- free_energy -------------------------------------------------------------

@pytest.mark.parametrize("mode", ["retarded", "nonretarded", "n0"])
def test_uniform_medium_is_zero(env, mode):
    s = system(2.3, 2.3, 2.3)
    for R in (5e-9, 1e-7, 3e-6):
        assert free_energy(s, env, R, mode).F == 0.0


def test_zero_frequency_mode(representative, env):
    res = free_energy(representative, env, 80e-9, "zero_frequency_only")
    assert res.mode is EnergyMode.ZERO_FREQUENCY
    assert res.F == 0.5 * g_term(representative, env, 0, 80e-9).value
    assert res.converged and res.n_terms_used == 1


def test_nonretarded_constant_dielectrics_power_law(env):
    s = system(2.0, 4.0, 3.0)
    for R in (10e-9, 200e-9):
        a = free_energy(s, env, R, "nonretarded")
        b = free_energy(s, env, 2 * R, "nonretarded")
        assert b.F / a.F == pytest.approx(2.0**-5, rel=1e-4)
        # frequency independent media give a divergent nonretarded sum
        assert not a.converged and a.warnings


def test_like_rods_attract(env):
    s = system(4.0, 4.0, 2.0)
    for R in np.geomspace(4e-9, 2e-6, 6):
        assert free_energy(s, env, R).F < 0
    # the dominant static term agrees with an independent quadrature
    for R in (10e-9, 100e-9, 1e-6):
        ref = trapezoid_g0(4.0, 4.0, 2.0, 1e-9, 1e-9, R, 300.0)
        assert ref < 0
        assert g_term(s, env, 0, R).value == pytest.approx(ref, rel=1e-6)


def test_dzyaloshinskii_ordering_repels(env):
    s = system(2.0, 4.0, 3.0)
    for R in (5e-9, 60e-9, 1e-6):
        assert free_energy(s, env, R).F > 0
        assert free_energy(s, env, R, "nonretarded").F > 0


def test_converged_means_tail_within_tolerance(representative, env):
    st = IntegrationSettings()
    for R in (6e-9, 70e-9, 900e-9):
        for mode in ("retarded", "nonretarded"):
            res = free_energy(representative, env, R, mode, st)
            assert res.converged
            assert res.tail_estimate <= st.rel_tol * abs(res.F) + st.abs_floor


def test_entropic_limit(representative, env):
    R = 10e-6
    ret = free_energy(representative, env, R)
    n0 = free_energy(representative, env, R, "n0")
    assert abs(ret.F / n0.F - 1.0) < 0.10


def test_short_separation_limit(representative, env):
    # the retarded/nonretarded ratio approaches 1 as R shrinks
    ratios = []
    for R in (1e-8, 1e-9, 1e-11):
        ret = free_energy(representative, env, R)
        nonret = free_energy(representative, env, R, "nonretarded")
        ratios.append(ret.F / nonret.F)
    assert all(abs(a - 1) > abs(b - 1) for a, b in zip(ratios, ratios[1:]))
    assert abs(ratios[-1] - 1.0) < 0.01


def test_short_separation_one_nanometre(representative, env):
    ret = free_energy(representative, env, 1e-9)
    nonret = free_energy(representative, env, 1e-9, "nonretarded")
    assert any("thin-rod" in w for w in ret.warnings)
    assert abs(ret.F / nonret.F - 1.0) <= 0.05, f"ratio {ret.F / nonret.F:.4f}"


def test_terms_decay_monotonically_beyond_retardation_scale(env):
    s = system(2.0, 5.0, 3.0)
    R = 100e-9
    res = free_energy(s, env, R)
    n_star = env.c / (env.spacing * R * math.sqrt(3.0))
    mags = np.abs(res.terms[int(math.ceil(n_star)) + 1:])
    assert mags.size > 10
    assert np.all(np.diff(mags) < 0)


def test_truncation_cap_flags_nonconvergence(representative, env):
    res = free_energy(representative, env, 20e-9, settings=IntegrationSettings(max_matsubara_n=50))
    assert not res.converged
    assert res.n_terms_used == 51
    assert any("truncated" in w for w in res.warnings)


def test_worker_count_does_not_change_result(representative, env):
    one = free_energy(representative, env, 25e-9, settings=IntegrationSettings(workers=1))
    three = free_energy(representative, env, 25e-9, settings=IntegrationSettings(workers=3))
    assert one.F == three.F
    assert np.array_equal(one.terms, three.terms)


def test_force_matches_power_law(env):
    s = system(2.0, 4.0, 3.0)
    R = 30e-9
    F = free_energy(s, env, R, "n0").F
    force = force_per_length(s, env, R, "n0")
    assert force == pytest.approx(5.0 * F / R, rel=1e-5)


def test_temperature_scales_zero_mode(representative):
    a = free_energy(representative, ThermalEnvironment(150.0), 1e-7, "n0").F
    b = free_energy(representative, ThermalEnvironment(300.0), 1e-7, "n0").F
    assert b == pytest.approx(2 * a, rel=1e-14)
