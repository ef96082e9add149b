import numpy as np
import pytest

from ktgeo.catalog import catalog_names, get_manifold
from ktgeo.connections import (
    bismut, chern, compatibility_residuals, connection, covariant_derivative,
    covariant_derivative_field_values, lee_field, lee_form, lee_form_routes,
    lee_form_values, levi_civita, torsion_C, torsion_T, torsion_bismut_values,
    torsion_chern_values, torsion_type_defect,
)
from ktgeo.errors import ChartDomainError
from ktgeo.tensor_core import TensorField, exterior_derivative_values, wedge

from conftest import sample


def test_flat_torus_all_flavors_vanish(flat4):
    pts = sample("flat_torus_4", 6)
    for fl in ("levi_civita", "bismut", "chern"):
        gam = connection(flat4, fl).coefficients(pts)
        assert np.max(np.abs(gam)) < 1e-12


def test_levi_civita_metric_compatibility_and_symmetry(hopf):
    pts = sample("hopf_standard", 16, seed=9)
    res = compatibility_residuals(connection(hopf, "levi_civita"), pts)
    assert res["nabla_g"] < 1e-6
    assert res["torsion"] < 1e-12


def test_levi_civita_conformal_christoffel_oracle(hopf):
    # g = exp(2 phi) delta with phi = -ln r:
    # Gamma^k_ij = d_i phi delta^k_j + d_j phi delta^k_i - d_k phi delta_ij
    pts = np.array([[1.0, 0.0, 0.0, 0.0], [0.8, 0.3, -0.5, 0.2]])
    gam = levi_civita(hopf, pts)
    r2 = np.sum(pts * pts, axis=-1)
    dphi = -pts / r2[:, None]
    eye = np.eye(4)
    oracle = (np.einsum("...i,kj->...kij", dphi, eye)
              + np.einsum("...j,ki->...kij", dphi, eye)
              - np.einsum("...k,ij->...kij", dphi, eye))
    assert np.max(np.abs(gam - oracle)) < 1e-7


@pytest.mark.parametrize("flavor", ["bismut", "chern"])
def test_hermitian_connections_preserve_g_and_j(hopf, su2, flavor):
    for m in (hopf, su2):
        pts = m.sample_points(32, seed=2)
        res = compatibility_residuals(connection(m, flavor), pts)
        assert res["nabla_g"] < 1e-6
        assert res["nabla_j"] < 1e-6


def test_torsion_of_bismut_coefficients_is_the_torsion_form(su2):
    pts = sample("su2xu1", 8)
    gam = connection(su2, "bismut").coefficients(pts)
    g = su2.metric(pts)
    skew = np.einsum("...kij->...kij", gam) - np.einsum("...kji->...kij", gam)
    lowered = np.einsum("...lk,...kij->...ijl", g, skew)
    T = torsion_bismut_values(su2, pts)
    assert np.max(np.abs(lowered - T)) < 1e-6


def test_chern_torsion_commutes_with_j(hopf):
    pts = sample("hopf_standard", 8)
    C = torsion_chern_values(hopf, pts)
    J = hopf.complex_structure(pts)
    # C(JX,Y) = C(X,JY), and C(JX,Y) = J C(X,Y) i.e. C(JX,Y,Z) = -C(X,Y,JZ)
    lhs = np.einsum("...mi,...mjk->...ijk", J, C)
    assert np.max(np.abs(lhs - np.einsum("...mj,...imk->...ijk", J, C))) < 1e-6
    assert np.max(np.abs(lhs + np.einsum("...mk,...ijm->...ijk", J, C))) < 1e-6


def test_chern_torsion_from_kahler_form_derivative(conf4):
    pts = sample("conf_torus_4", 8)
    C = torsion_chern_values(conf4, pts)
    assert np.max(np.abs(C)) > 1e-2  # genuinely nonzero
    dom = exterior_derivative_values(conf4.kahler_form, pts, 2)
    J = conf4.complex_structure(pts)
    rhs = 0.5 * (np.einsum("...ai,...ajk->...ijk", J, dom)
                 + np.einsum("...bj,...ibk->...ijk", J, dom))
    assert np.max(np.abs(C - rhs)) < 1e-12


def test_torsion_forms_and_types():
    for name in catalog_names():
        m = get_manifold(name)
        pts = m.sample_points(8, seed=1)
        T = torsion_bismut_values(m, pts)
        # totally antisymmetric
        assert np.max(np.abs(T + np.einsum("...ijk->...jik", T))) < 1e-12
        assert np.max(np.abs(T + np.einsum("...ikj->...ijk", T))) < 1e-12
        # no (3,0)+(0,3) part
        assert torsion_type_defect(m, pts) < 1e-6
        # Chern torsion antisymmetric in its first two slots
        C = torsion_chern_values(m, pts)
        assert np.max(np.abs(C + np.einsum("...jik->...ijk", C))) < 1e-12


def test_flat_torus_6_torsion_vanishes():
    m = get_manifold("flat_torus_6")
    pts = m.sample_points(6, seed=0)
    assert np.max(np.abs(torsion_bismut_values(m, pts))) < 1e-12


def test_lck_torsion_shape():
    hopf = get_manifold("hopf_standard")
    pts = hopf.sample_points(8, seed=0)
    theta = lee_form_values(hopf, pts)
    J = hopf.complex_structure(pts)
    jth = -np.einsum("...m,...mi->...i", theta, J)
    expected = wedge(jth, 1, hopf.kahler_form(pts), 2)
    assert np.max(np.abs(torsion_bismut_values(hopf, pts) - expected)) < 1e-5

    c6 = get_manifold("conf_torus_6")
    pts = c6.sample_points(8, seed=0)
    theta = lee_form_values(c6, pts)
    jth = -np.einsum("...m,...mi->...i", theta, c6.complex_structure(pts))
    expected = 0.5 * wedge(jth, 1, c6.kahler_form(pts), 2)
    assert np.max(np.abs(torsion_bismut_values(c6, pts) - expected)) < 1e-5


def test_lee_form_routes_agree_everywhere():
    for name in catalog_names():
        m = get_manifold(name)
        pts = m.sample_points(8, seed=2)
        a, b, c = lee_form_routes(m, pts)
        assert np.max(np.abs(a - b)) < 1e-5
        assert np.max(np.abs(a - c)) < 1e-5


def test_lee_form_values_and_public_op(flat4, conf4):
    pts = sample("flat_torus_4", 6)
    assert np.max(np.abs(lee_form_values(flat4, pts))) < 1e-12
    pts = sample("conf_torus_4", 6)
    f_grad = np.stack([0.3 * np.cos(pts[..., 0]) * np.cos(pts[..., 2]),
                       np.zeros(len(pts)),
                       -0.3 * np.sin(pts[..., 0]) * np.sin(pts[..., 2]),
                       np.zeros(len(pts))], axis=-1)
    assert np.max(np.abs(lee_form_values(conf4, pts) - 2.0 * f_grad)) < 1e-5
    out = lee_form(conf4, pts[0])
    assert out.valence == 1


def test_covariant_derivative_basics(flat4, hopf):
    pts = sample("flat_torus_4", 4)
    const = TensorField(lambda p: np.broadcast_to(np.array([1.0, 0, 2.0, 0]),
                                                  np.asarray(p).shape[:-1] + (4,)).copy(),
                        4, 1, form_flag=True)
    out = covariant_derivative(connection(flat4, "bismut"), const, pts[0])
    assert np.max(np.abs(out.components)) < 1e-12

    hp = sample("hopf_standard", 8)
    for fl in ("bismut", "levi_civita"):
        nth = covariant_derivative_field_values(connection(hopf, fl), lee_field(hopf).fn, 1, hp)
        assert np.max(np.abs(nth)) < 1e-5


def test_boundary_guards(hopf):
    near_edge = np.array([0.50005, 0.0, 0.0, 0.0])
    with pytest.raises(ChartDomainError):
        levi_civita(hopf, near_edge)
    with pytest.raises(ChartDomainError):
        torsion_T(hopf, near_edge)
    inside = np.array([1.0, 0.0, 0.0, 0.0])
    assert torsion_T(hopf, inside).form_flag
    assert torsion_C(hopf, inside).valence == 3
    assert bismut(hopf, inside).shape == (4, 4, 4)
    assert chern(hopf, inside).shape == (4, 4, 4)
