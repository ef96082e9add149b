"""Curvature tensors of the three connections and every derived trace.

Sign and trace conventions (shared with the rest of the engine):

- ``R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_{[X,Y]} Z`` and
  the (0,4) tensor is ``R(X,Y,Z,V) = g(R(X,Y) Z, V)``; with these choices the
  unit round sphere has positive sectional curvature ``R(X,Y,Y,X) = +1``.
- ``Ric(X,Y) = sum_i R(e_i, X, Y, e_i)`` and ``Scal = sum_j Ric(e_j, e_j)``.
- Ricci forms: ``rho(X,Y) = 1/2 sum_i R(X,Y,e_i,J e_i)`` for the Bismut
  curvature R; ``rho_chern`` and ``kappa`` take the same half-trace of the
  Chern curvature K on the last and the first index pair respectively.
- J-traces of 2-forms use the orientation ``sum_i a(J e_i, e_i)``:
  ``b = jtr(rho)``, ``2 u = jtr(kappa)``, ``2 h = jtr(lambda_omega)``, with
  ``lambda_omega(X,Y) = sum_i dT(X,Y,e_i,J e_i)``.

Curvature is obtained by differentiating coefficient fields (one nested
central-difference stencil), never by transporting frames around loops; the
all-lower Koszul form keeps the only metric inversion at the base point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import HermitianManifold
from .connections import ConnectionField, lower_coefficients, torsion_bismut_values
from .errors import PreconditionError
from .tensor_core import (
    DEFAULT_STEP, PointTensor, exterior_derivative_values, fd_partial,
    levi_civita_symbol, metric_inverse, proj_one_one,
)

__all__ = [
    "riemann_values", "riemann", "CurvaturePack", "curvature_pack",
    "lambda_omega_values", "lambda_omega", "weyl_selfdual_values", "weyl_selfdual",
    "ricci_from_curvature", "rho_from_curvature", "j_trace_matrix",
]


def j_trace_matrix(J: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    """``jg[b,a] = sum_i e_i^a (J e_i)^b = J^b_c g^{ca}``, the bilinear form
    that implements frame J-traces without building a frame."""
    return np.einsum("...bc,...ca->...ba", J, ginv)


def riemann_values(m: HermitianManifold, flavor: str, points,
                   step: float = DEFAULT_STEP) -> np.ndarray:
    """Lowered curvature R[i,j,k,l] = R(d_i, d_j, d_k, d_l) of a flavor."""
    om_fn = lambda pts: lower_coefficients(m, flavor, pts, step)
    om = om_fn(points)
    dom = fd_partial(om_fn, points, step)          # dom[d, l, i, j]
    dg = fd_partial(m.metric, points, step)        # dg[d, a, b]
    ginv = metric_inverse(m.metric(points))
    gam = np.einsum("...kl,...lij->...kij", ginv, om)
    r = (np.einsum("...iljk->...ijkl", dom)
         - np.einsum("...jlik->...ijkl", dom)
         - np.einsum("...ilm,...mjk->...ijkl", dg, gam)
         + np.einsum("...jlm,...mik->...ijkl", dg, gam)
         + np.einsum("...lim,...mjk->...ijkl", om, gam)
         - np.einsum("...ljm,...mik->...ijkl", om, gam))
    return r


def riemann(conn: ConnectionField, point) -> PointTensor:
    conn.manifold.require_interior(point, 3 * conn.step)
    comp = riemann_values(conn.manifold, conn.flavor, point, conn.step)
    return PointTensor(conn.manifold.dim, 4, comp)


def ricci_from_curvature(r: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    """Ric[x,y] = sum_i R(e_i, x, y, e_i)."""
    return np.einsum("...il,...ixyl->...xy", ginv, r)


def rho_from_curvature(r: np.ndarray, jg: np.ndarray) -> np.ndarray:
    """Half J-trace on the last index pair: 1/2 sum_i R(.,.,e_i,J e_i)."""
    return 0.5 * np.einsum("...xyab,...ba->...xy", r, jg)


def lambda_omega_values(m: HermitianManifold, points, step: float = DEFAULT_STEP):
    """lambda_omega, its scalar half-J-trace h, and its (1,1)-defect."""
    t_fn = lambda pts: torsion_bismut_values(m, pts, step)
    dT = exterior_derivative_values(t_fn, points, 3, step)
    J = m.complex_structure(points)
    jg = j_trace_matrix(J, metric_inverse(m.metric(points)))
    lam = np.einsum("...xyab,...ba->...xy", dT, jg)
    h = 0.5 * np.einsum("...mn,...mn->...", lam, jg)
    defect = float(np.max(np.abs(lam - proj_one_one(lam, J))))
    return lam, h, defect


def lambda_omega(m: HermitianManifold, point, step: float = DEFAULT_STEP):
    m.require_interior(point, 3 * step)
    lam, h, defect = lambda_omega_values(m, point, step)
    return PointTensor(m.dim, 2, lam, form_flag=True), float(np.max(h)), defect


@dataclass(frozen=True)
class CurvaturePack:
    """Every curvature-derived object at the sampled points (batched)."""

    points: np.ndarray
    r_bismut: np.ndarray
    r_chern: np.ndarray
    r_lc: np.ndarray
    ric: np.ndarray
    ric_lc: np.ndarray
    rho: np.ndarray
    rho_chern: np.ndarray
    kappa: np.ndarray
    b: np.ndarray
    u: np.ndarray
    scal_bismut: np.ndarray
    lambda_omega: np.ndarray
    h: np.ndarray


def curvature_pack(m: HermitianManifold, points, step: float = DEFAULT_STEP) -> CurvaturePack:
    """All curvature objects from one pass (ingredients shared inside the
    pack; identity checks recompute their two sides independently)."""
    pts = np.asarray(points, dtype=float)
    m.require_interior(pts, 3 * step)
    g = m.metric(pts)
    ginv = metric_inverse(g)
    J = m.complex_structure(pts)
    jg = j_trace_matrix(J, ginv)

    r_b = riemann_values(m, "bismut", pts, step)
    r_c = riemann_values(m, "chern", pts, step)
    r_g = riemann_values(m, "levi_civita", pts, step)

    ric = ricci_from_curvature(r_b, ginv)
    ric_lc = ricci_from_curvature(r_g, ginv)
    rho = rho_from_curvature(r_b, jg)
    rho_chern = rho_from_curvature(r_c, jg)
    kappa = 0.5 * np.einsum("...abxy,...ba->...xy", r_c, jg)
    b = np.einsum("...mn,...mn->...", rho, jg)
    two_u = np.einsum("...mn,...mn->...", kappa, jg)
    scal = np.einsum("...mn,...mn->...", ric, ginv)
    lam, h, _ = lambda_omega_values(m, pts, step)
    return CurvaturePack(points=pts, r_bismut=r_b, r_chern=r_c, r_lc=r_g,
                         ric=ric, ric_lc=ric_lc, rho=rho, rho_chern=rho_chern,
                         kappa=kappa, b=b, u=0.5 * two_u, scal_bismut=scal,
                         lambda_omega=lam, h=h)


# ---------------------------------------------------------------------------
# Weyl tensor and its self-dual part (dimension 4)
# ---------------------------------------------------------------------------

def _kulkarni_nomizu(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kulkarni-Nomizu product matched to this module's slot order, i.e. the
    unit sphere curvature is ``(g kn g)/2``."""
    return (np.einsum("...jk,...il->...ijkl", a, b)
            + np.einsum("...il,...jk->...ijkl", a, b)
            - np.einsum("...ik,...jl->...ijkl", a, b)
            - np.einsum("...jl,...ik->...ijkl", a, b))


def _two_form_operator_compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(A o B)[i,j,k,l] with the 1/2 pairing of 2-form operator calculus."""
    return 0.5 * np.einsum("...ijab,...abkl->...ijkl", a, b)


def weyl_selfdual_values(m: HermitianManifold, points, step: float = DEFAULT_STEP):
    """Weyl tensor of the Levi-Civita curvature, its self-dual part on the
    last index pair sandwich, and the conformal scalar
    ``k = <3 W+(omega), omega>``.  Dimension 4 only."""
    if m.dim != 4:
        raise PreconditionError("self-dual Weyl decomposition requires dimension 4")
    pts = np.asarray(points, dtype=float)
    g = m.metric(pts)
    ginv = metric_inverse(g)
    r = riemann_values(m, "levi_civita", pts, step)
    ric = ricci_from_curvature(r, ginv)
    ric = 0.5 * (ric + np.einsum("...xy->...yx", ric))
    scal = np.einsum("...mn,...mn->...", ric, ginv)
    n = 4
    ric0 = ric - (scal / n)[..., None, None] * g
    weyl = (r - _kulkarni_nomizu(ric0, g) / (n - 2)
            - (scal / (2 * n * (n - 1)))[..., None, None, None, None] * _kulkarni_nomizu(g, g))

    # plus projector 1/2 (Id + *) acting on 2-form index pairs; operators A
    # act through the half pairing (A alpha)[i,j] = A[i,j,a,b] alpha[a,b] / 2,
    # so Id[i,j,a,b] = d_ia d_jb - d_ib d_ja and Star[i,j,a,b] carries no 1/2.
    eye = np.eye(4)
    ident = (np.einsum("ik,jl->ijkl", eye, eye) - np.einsum("il,jk->ijkl", eye, eye))
    eps = levi_civita_symbol(4)
    sqrtg = np.sqrt(np.linalg.det(g))
    star2 = sqrtg[..., None, None, None, None] * np.einsum(
        "cdij,...ca,...db->...ijab", eps, ginv, ginv)
    pplus = 0.5 * (ident + star2)
    wplus = _two_form_operator_compose(pplus, _two_form_operator_compose(weyl, pplus))

    omega = m.kahler_form(pts)
    w_of_omega = 0.5 * np.einsum("...ijab,...ak,...bl,...kl->...ij", wplus, ginv, ginv, omega)
    k = 3 * 0.5 * np.einsum("...ij,...ik,...jl,...kl->...", w_of_omega, ginv, ginv, omega)
    return weyl, wplus, k


def weyl_selfdual(m: HermitianManifold, point, step: float = DEFAULT_STEP):
    m.require_interior(point, 3 * step)
    weyl, wplus, k = weyl_selfdual_values(m, point, step)
    return PointTensor(4, 4, wplus), float(np.max(k))
