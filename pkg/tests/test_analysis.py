import numpy as np
import pytest

from conftest import constant
from rodcasimir.analysis import log_grid, local_exponent, sweep
from rodcasimir.free_energy import IntegrationSettings, free_energy, g_term
from rodcasimir.rod_kernel import RodSystem
from test_free_energy import trapezoid_g0


def system(e1, e2, e3):
    return RodSystem(1e-9, 1e-9, constant(e1), constant(e2), constant(e3))


@pytest.fixture(scope="module")
def coarse_representative(representative, env):
    return sweep(representative, env, 4e-9, 1e-5, points_per_decade=4)


def test_log_grid():
    g = log_grid(1e-9, 1e-7, 16)
    assert g[0] == 1e-9 and g[-1] == 1e-7
    assert g.size == 33
    assert np.all(np.diff(g) > 0)
    assert np.allclose(np.diff(np.log10(g)), 1 / 16)


@pytest.mark.parametrize("args", [(1e-7, 1e-9, 16), (0.0, 1e-7, 16), (1e-9, 1e-7, 3)])
def test_invalid_sweep_arguments(toy_system, env, args):
    with pytest.raises(ValueError):
        sweep(toy_system, env, *args)


def test_index_matched_sweep(env):
    rep = sweep(system(2.5, 4.0, 2.5), env, 5e-9, 5e-7, 4)
    for col in ("ret", "nonret", "n0"):
        assert np.all(rep.values(col) == 0.0)
    assert rep.boundaries == [] and rep.extrema == []
    assert rep.n_regions == 1


def test_persistent_ordering_repulsive_everywhere(env):
    s = system(2.0, 4.0, 3.0)
    rep = sweep(s, env, 5e-9, 5e-6, 4)
    assert rep.boundaries == []
    assert np.all(rep.values("ret") > 0)
    assert np.all(rep.values("nonret") > 0)
    for R in (1e-8, 1e-7, 1e-6):
        assert trapezoid_g0(2.0, 4.0, 3.0, 1e-9, 1e-9, R, 300.0) > 0
        assert g_term(s, env, 0, R).value > 0


def test_representative_sign_structure(coarse_representative):
    rep = coarse_representative
    assert len(rep.boundaries) == 2
    assert rep.region_signs() == [-1, 1, -1]
    assert np.all(rep.values("nonret") < 0)
    assert np.all(rep.values("n0") < 0)
    assert rep.n_regions == 3
    assert np.all(np.diff(rep.R) > 0)


def test_boundaries_are_bracketed(coarse_representative, representative, env):
    for b in coarse_representative.boundaries:
        lo = free_energy(representative, env, b * (1 - 1e-3)).F
        hi = free_energy(representative, env, b * (1 + 1e-3)).F
        assert lo * hi < 0


def test_extrema_present(coarse_representative):
    kinds = {e.kind: e for e in coarse_representative.extrema}
    assert kinds["max"].F > 0
    assert kinds["min"].F < 0
    b1, b2 = coarse_representative.boundaries
    assert b1 < kinds["max"].R < b2 < kinds["min"].R


def test_ratio_column(coarse_representative):
    ratio = coarse_representative.ratio
    assert len(ratio) == len(coarse_representative.grid)
    R, r = ratio[-1]
    p = coarse_representative.grid[-1]
    assert r == abs(p.F_ret / p.F_nonret)


def test_nonretarded_exponent_constant_dielectrics(env):
    rep = sweep(system(2.0, 4.0, 3.0), env, 10e-9, 1e-6, 8)
    for R in np.geomspace(20e-9, 500e-9, 5):
        assert local_exponent(rep, "nonret", R) == pytest.approx(-5.0, abs=0.01)


def test_zero_mode_exponent_at_large_separation(coarse_representative):
    assert local_exponent(coarse_representative, "n0", 3e-6) == pytest.approx(-5.0, abs=0.05)


def test_exponent_undefined_across_boundary(coarse_representative):
    b = coarse_representative.boundaries[0]
    with pytest.raises(ValueError):
        local_exponent(coarse_representative, "ret", b)


def test_exponent_outside_grid(coarse_representative):
    with pytest.raises(ValueError):
        local_exponent(coarse_representative, "nonret", 1e-9)
    with pytest.raises(ValueError):
        local_exponent(coarse_representative, "nonret", 1e-5)


def test_nonconverged_points_reported_and_excluded(representative, env):
    st = IntegrationSettings(max_matsubara_n=30)
    rep = sweep(representative, env, 20e-9, 2e-7, 4, st)
    assert not rep.converged
    assert any("excluded" in w for w in rep.warnings)
    assert rep.boundaries == []


def test_sweep_independent_of_workers(representative, env):
    a = sweep(representative, env, 30e-9, 3e-7, 4, IntegrationSettings(workers=1))
    b = sweep(representative, env, 30e-9, 3e-7, 4, IntegrationSettings(workers=3))
    assert [(p.R, p.F_ret, p.F_nonret, p.F_n0) for p in a.grid] == [(p.R, p.F_ret, p.F_nonret, p.F_n0)
                                                                  for p in b.grid]
    assert a.boundaries == b.boundaries
    assert [(e.R, e.F) for e in a.extrema] == [(e.R, e.F) for e in b.extrema]
