import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ktgeo.catalog import get_manifold
from ktgeo.connections import lee_field, torsion_bismut_values
from ktgeo.errors import ChartDomainError, ContractViolationError, NumericError
from ktgeo.tensor_core import (
    Frame, PointTensor, TensorField, alt, codifferential, codifferential_values,
    exterior_derivative, exterior_derivative_values, gram_schmidt_frames,
    hodge_star_values, j_trace, j_trace_values, metric_inverse,
    orthonormal_frame, tensor_norm_sq, wedge,
)

from conftest import sample


# ---------------------------------------------------------------------------
# exterior derivative
# ---------------------------------------------------------------------------

def test_d_of_constant_one_form_is_zero(flat4):
    const = lambda pts: np.broadcast_to(np.array([1.0, 2.0, -1.0, 0.5]),
                                        np.asarray(pts).shape[:-1] + (4,)).copy()
    pts = sample("flat_torus_4", 8)
    d = exterior_derivative_values(const, pts, 1)
    assert np.max(np.abs(d)) == 0.0


@pytest.mark.parametrize("name", ["hopf_standard", "su2xu1", "conf_torus_4"])
def test_d_squared_vanishes_on_catalog_fields(name):
    # d(d omega) and d(d theta), 32 points per chart
    m = get_manifold(name)
    pts = m.sample_points(32, seed=5)
    om_fn = m.kahler_form
    ddom = exterior_derivative_values(
        lambda p: exterior_derivative_values(om_fn, p, 2), pts, 3)
    assert np.max(np.abs(ddom)) < 1e-6
    th_fn = lee_field(m).fn
    ddth = exterior_derivative_values(
        lambda p: exterior_derivative_values(th_fn, p, 1), pts, 2)
    assert np.max(np.abs(ddth)) < 1e-6


def _hopf_domega_oracle(p):
    """Hand-differentiated d of r^-2 (dx1^dy1 + dx2^dy2): the constant block
    is closed, so d(omega) = d(r^-2) ^ block with d(r^-2) = -2 r^-4 x_m dx_m,
    assembled through the explicit three-term convention
    (a ^ b)(X,Y,Z) = a(X)b(Y,Z) - a(Y)b(X,Z) + a(Z)b(X,Y)."""
    x = np.asarray(p, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    base = np.zeros(x.shape[:-1] + (4, 4))
    base[..., 0, 1] = 1.0
    base[..., 1, 0] = -1.0
    base[..., 2, 3] = 1.0
    base[..., 3, 2] = -1.0
    grad = -2.0 * x / (r2 ** 2)[..., None]
    return (np.einsum("...i,...jk->...ijk", grad, base)
            - np.einsum("...j,...ik->...ijk", grad, base)
            + np.einsum("...k,...ij->...ijk", grad, base))


def test_exterior_derivative_matches_symbolic_oracle_on_hopf(hopf):
    pts = np.array([[1.0, 0.0, 0.0, 0.0], [0.7, -0.3, 0.5, 0.2]])
    d_num = exterior_derivative_values(hopf.kahler_form, pts, 2)
    d_sym = _hopf_domega_oracle(pts)
    assert np.max(np.abs(d_num - d_sym)) < 1e-6
    # and it is genuinely nonzero there
    assert np.max(np.abs(d_num)) > 0.1


def test_exterior_derivative_public_contract(hopf):
    om = hopf.kahler_field()
    p = np.array([1.0, 0.0, 0.0, 0.0])
    out = exterior_derivative(om, p)
    assert out.valence == 3 and out.form_flag
    with pytest.raises(ChartDomainError):
        exterior_derivative(om, np.array([0.5001, 0.0, 0.0, 0.0]))
    not_form = TensorField(hopf.metric, 4, 2, form_flag=False, domain=hopf.chart)
    with pytest.raises(ContractViolationError):
        exterior_derivative(not_form, p)


# ---------------------------------------------------------------------------
# codifferential
# ---------------------------------------------------------------------------

def test_codifferential_trivial_cases(flat4):
    pts = sample("flat_torus_4", 8)
    const = lambda p: np.broadcast_to(np.array([1.0, 2.0, -1.0, 0.5]),
                                      np.asarray(p).shape[:-1] + (4,)).copy()
    assert np.max(np.abs(codifferential_values(flat4.metric, const, 1, pts))) < 1e-12
    # Kaehler: codiff of the Kaehler form vanishes, hence the Lee form does
    cod = codifferential_values(flat4.metric, flat4.kahler_form, 2, pts)
    assert np.max(np.abs(cod)) < 1e-12


@pytest.mark.parametrize("valence", [1, 2])
def test_codifferential_equals_minus_star_d_star_dim4(hopf, valence):
    pts = sample("hopf_standard", 6)
    if valence == 1:
        fn = lee_field(hopf).fn
    else:
        fn = hopf.kahler_form
    lhs = codifferential_values(hopf.metric, fn, valence, pts)
    g = hopf.metric(pts)

    def star_fn(p):
        return hodge_star_values(fn(p), hopf.metric(p), valence)

    d_star = exterior_derivative_values(star_fn, pts, 4 - valence)
    rhs = -hodge_star_values(d_star, g, 4 - valence + 1)
    assert np.max(np.abs(lhs - rhs)) < 1e-6


def test_codifferential_public_contract(hopf):
    p = np.array([1.0, 0.0, 0.0, 0.0])
    out = codifferential(hopf.kahler_field(), p, hopf.metric_field())
    assert out.valence == 1
    with pytest.raises(ContractViolationError):
        codifferential(hopf.metric_field(), p, hopf.metric_field())


# ---------------------------------------------------------------------------
# Hodge star
# ---------------------------------------------------------------------------

def test_star_of_one_is_volume_form(flat4):
    pts = sample("flat_torus_4", 1)
    vol = hodge_star_values(np.ones(pts.shape[:-1]), flat4.metric(pts), 0)
    assert vol.shape[-4:] == (4, 4, 4, 4)
    assert abs(vol[0, 0, 1, 2, 3] - 1.0) < 1e-14


@pytest.mark.parametrize("p", [1, 2, 3])
def test_hodge_involution(hopf, p):
    pts = sample("hopf_standard", 4)
    rng = np.random.default_rng(0)
    alpha = alt(rng.standard_normal(pts.shape[:-1] + (4,) * p), p)
    g = hopf.metric(pts)
    twice = hodge_star_values(hodge_star_values(alpha, g, p), g, 4 - p)
    sign = (-1) ** (p * (4 - p))
    assert np.max(np.abs(twice - sign * alpha)) < 1e-8


def test_kahler_form_is_selfdual(flat4, hopf):
    for m in (flat4, hopf):
        pts = m.sample_points(4, seed=2)
        om = m.kahler_form(pts)
        star = hodge_star_values(om, m.metric(pts), 2)
        assert np.max(np.abs(star - om)) < 1e-12


def test_star_degenerate_metric_raises():
    g = np.zeros((4, 4))
    with pytest.raises(NumericError):
        hodge_star_values(np.zeros(4), g, 1)


# ---------------------------------------------------------------------------
# frames, traces, norms
# ---------------------------------------------------------------------------

def test_frame_identity_metric_gives_coordinate_basis():
    f = orthonormal_frame(np.eye(4))
    assert np.allclose(f.vectors, np.eye(4))


def test_frame_diagonal_rescale():
    f = orthonormal_frame(np.diag([4.0, 1.0, 1.0, 1.0]))
    assert np.allclose(f.vectors[0], [0.5, 0, 0, 0])
    assert np.allclose(f.vectors[1:], np.eye(4)[1:])


def test_frame_gram_residual_on_hopf(hopf):
    p = 2.0 * np.array([1.0, 0, 0, 0]) / np.sqrt(1.0)
    pts = sample("hopf_standard", 16, seed=7)
    frames = gram_schmidt_frames(hopf.metric(pts))
    gram = np.einsum("...ai,...ij,...bj->...ab", frames, hopf.metric(pts), frames)
    assert np.max(np.abs(gram - np.eye(4))) < 1e-10


def test_j_trace_of_kahler_form_fixes_orientation(flat4):
    pts = sample("flat_torus_4", 1)
    om = flat4.kahler_form(pts)[0]
    J = flat4.complex_structure(pts)[0]
    frame = orthonormal_frame(flat4.metric(pts)[0])
    # convention record: sum_i omega(J e_i, e_i) = +dim, and the opposite
    # trace orientation sum_i omega(e_i, J e_i) = -dim
    assert abs(j_trace(PointTensor(4, 2, om, form_flag=True), J, frame) - 4.0) < 1e-12
    ginv = metric_inverse(flat4.metric(pts))[0]
    assert abs(j_trace_values(om, J, ginv) - 4.0) < 1e-12
    other = np.einsum("nm,mc,cn->", om, J, ginv)
    assert abs(other + 4.0) < 1e-12


def test_j_trace_zero_form_and_basis_independence(hopf):
    pts = sample("hopf_standard", 5)
    g = hopf.metric(pts)
    J = hopf.complex_structure(pts)
    zero = np.zeros(pts.shape[:-1] + (4, 4))
    assert np.max(np.abs(j_trace_values(zero, J, metric_inverse(g)))) == 0.0
    # two different orthonormal frames: coordinate order and reversed order
    om = hopf.kahler_form(pts)
    frames_a = gram_schmidt_frames(g)
    rev = g[..., ::-1, :][..., :, ::-1]
    frames_b = gram_schmidt_frames(rev)[..., ::-1][..., ::-1, :]
    # frames_b rows are an orthonormal frame in the original index order
    gram = np.einsum("...ai,...ij,...bj->...ab", frames_b, g, frames_b)
    assert np.max(np.abs(gram - np.eye(4))) < 1e-10
    ja = np.einsum("...ij,...aj->...ai", J, frames_a)
    jb = np.einsum("...ij,...aj->...ai", J, frames_b)
    tr_a = np.einsum("...mn,...am,...an->...", om, ja, frames_a)
    tr_b = np.einsum("...mn,...am,...an->...", om, jb, frames_b)
    assert np.max(np.abs(tr_a - tr_b)) < 1e-9


def test_tensor_norm_conventions(hopf):
    frame = Frame(np.eye(4))
    zero = PointTensor(4, 2, np.zeros((4, 4)))
    assert tensor_norm_sq(zero, frame) == 0.0
    theta = PointTensor(4, 1, np.array([2.0, 0, 0, 0]))
    assert abs(tensor_norm_sq(theta, frame) - 4.0) < 1e-14
    # full-index |T|^2 on the Hopf chart is 24 (calibrated by the trace identity)
    p = np.array([1.3, -0.2, 0.4, 0.1])
    T = PointTensor(4, 3, torsion_bismut_values(hopf, p), form_flag=True)
    f = orthonormal_frame(hopf.metric(p))
    assert abs(tensor_norm_sq(T, f) - 24.0) < 1e-5


def test_operations_are_pure(hopf):
    pts = sample("hopf_standard", 4)
    a = torsion_bismut_values(hopf, pts)
    b = torsion_bismut_values(hopf, pts)
    assert np.array_equal(a, b)
    fa = gram_schmidt_frames(hopf.metric(pts))
    fb = gram_schmidt_frames(hopf.metric(pts))
    assert np.array_equal(fa, fb)


def test_point_tensor_validation():
    with pytest.raises(ContractViolationError):
        PointTensor(3, 1, np.zeros(3))  # odd/low dimension
    with pytest.raises(ContractViolationError):
        PointTensor(4, 2, np.eye(4), form_flag=True)  # symmetric, not a form
    ok = PointTensor(4, 2, np.array([[0, 1.0], [-1.0, 0]]).repeat(2, 0).repeat(2, 1) * 0)
    assert ok.dim == 4


# ---------------------------------------------------------------------------
# wedge / antisymmetrization algebra
# ---------------------------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_wedge_antisymmetry_and_alt_projector(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(4)
    b = rng.standard_normal(4)
    ab = wedge(a, 1, b, 1)
    assert np.allclose(ab, -ab.T)
    assert np.allclose(ab, np.outer(a, b) - np.outer(b, a))
    t = rng.standard_normal((4, 4, 4))
    assert np.allclose(alt(alt(t, 3), 3), alt(t, 3))
    # wedge with a 2-form reproduces the three-term determinant convention
    beta = alt(rng.standard_normal((4, 4)), 2)
    w = wedge(a, 1, beta, 2)
    expected = (np.einsum("i,jk->ijk", a, beta) - np.einsum("j,ik->ijk", a, beta)
                + np.einsum("k,ij->ijk", a, beta))
    assert np.allclose(w, expected)
