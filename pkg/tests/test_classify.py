import numpy as np
import pytest
from dataclasses import replace

from ktgeo.catalog import catalog_names, get_manifold
from ktgeo.classify import (
    check_hkt, classify, plaquette_holonomy_check, vanishing_hypotheses,
)
from ktgeo.errors import PreconditionError

EXPECTED_FLAGS = {
    #            kahler strong almost balanced lck   su
    "flat_torus_4": (True, True, True, True, True, True),
    "flat_torus_6": (True, True, True, True, True, True),
    "hopf_standard": (False, True, True, False, True, True),
    "su2xu1": (False, True, True, False, True, True),
    "hopf_hkt": (False, True, True, False, True, True),
    "conf_torus_4": (False, False, False, False, True, True),
    "conf_torus_6": (False, False, False, False, True, False),
}


@pytest.mark.parametrize("name", catalog_names())
def test_expected_flags(name):
    m = get_manifold(name)
    flags = classify(m, m.sample_points(8, seed=0))
    got = (flags.kahler, flags.strong_kt, flags.almost_strong_kt,
           flags.balanced, flags.lck, flags.su_holonomy_indicator)
    assert got == EXPECTED_FLAGS[name], flags.residuals


@pytest.mark.parametrize("name", catalog_names())
def test_taxonomy_implications(name):
    m = get_manifold(name)
    flags = classify(m, m.sample_points(8, seed=1))
    if flags.kahler:
        assert flags.strong_kt
    if flags.strong_kt:
        assert flags.almost_strong_kt


def test_dim4_almost_strong_equals_strong():
    for name in ("flat_torus_4", "hopf_standard", "su2xu1", "conf_torus_4", "hopf_hkt"):
        m = get_manifold(name)
        flags = classify(m, m.sample_points(8, seed=2))
        assert flags.almost_strong_kt == flags.strong_kt, name


def test_su_indicator_monotone_in_tolerance():
    for name in ("hopf_standard", "conf_torus_4"):
        m = get_manifold(name)
        pts = m.sample_points(6, seed=0)
        tight = classify(m, pts, tol=1e-6)
        loose = classify(m, pts, tol=1e-3)
        if tight.su_holonomy_indicator:
            assert loose.su_holonomy_indicator


def test_empty_point_set_rejected(flat4):
    with pytest.raises(PreconditionError):
        classify(flat4, np.zeros((0, 4)))


def test_check_hkt_hopf_triple():
    m = get_manifold("hopf_hkt")
    flags = check_hkt(m, m.sample_points(8, seed=0))
    assert flags.quaternion_residual < 1e-8
    assert flags.torsion_match_residual < 1e-5
    assert flags.lee_match_residual < 1e-5
    assert flags.hkt


def test_check_hkt_flat_quaternionic_torus(flat4):
    # constant quaternionic triple on the flat torus: the hyper-Kaehler case
    hkt_src = get_manifold("hopf_hkt")
    m = replace(flat4, name="flat_hkt", hypercomplex=hkt_src.hypercomplex)
    flags = check_hkt(m, m.sample_points(8, seed=0))
    assert flags.hkt


def test_check_hkt_requires_triple(hopf):
    with pytest.raises(PreconditionError):
        check_hkt(hopf, hopf.sample_points(2, seed=0))


def test_vanishing_hypotheses_flat(flat4):
    out = vanishing_hypotheses(flat4, flat4.sample_points(6, seed=0))
    assert abs(out["plurigenera_margin"]) < 1e-10
    assert abs(out["quad_form_min_eig"]) < 1e-10


def test_vanishing_hypotheses_hopf(hopf):
    # b = 0 and h = 0 there, so the margin is min |C|^2 = 8 and the quadratic
    # form is <i_X C, i_Y C> with smallest eigenvalue 2
    out = vanishing_hypotheses(hopf, hopf.sample_points(8, seed=0))
    assert out["plurigenera_margin"] > 0
    assert abs(out["plurigenera_margin"] - 8.0) < 1e-4
    assert out["quad_form_min_eig"] > -1e-6
    assert abs(out["quad_form_min_eig"] - 2.0) < 1e-4


def test_vanishing_hypotheses_su2_cross_checked_against_u_trace(su2):
    # the margin b + |C|^2 - h/2 equals 2u by the trace of the
    # mean-curvature identity; compare against the Chern trace route
    pts = su2.sample_points(8, seed=0)
    out = vanishing_hypotheses(su2, pts)
    from ktgeo.curvature import curvature_pack
    two_u = 2.0 * curvature_pack(su2, pts).u
    assert abs(out["plurigenera_margin"] - float(np.min(two_u))) < 1e-4


def test_plaquette_transport_matches_curvature_endomorphism(conf4):
    pts = conf4.sample_points(2, seed=5)
    assert plaquette_holonomy_check(conf4, pts, side=1e-2) < 0.05


def test_loop_check_flag_off_by_default(conf4):
    pts = conf4.sample_points(4, seed=0)
    flags = classify(conf4, pts)
    assert "loop_transport" not in flags.residuals
    flags2 = classify(conf4, pts, loop_check=True)
    assert "loop_transport" in flags2.residuals
