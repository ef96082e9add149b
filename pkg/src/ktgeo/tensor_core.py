"""Pointwise multilinear algebra and exterior calculus over a chart.

All conventions used by the rest of the engine are fixed here, once:

- Tensors are stored fully covariant; ``t[i1,..,ip] = t(d_{i1},..,d_{ip})`` on
  coordinate fields.  Index raising is always explicit and uses the inverse
  metric.
- Every ``*_values`` function is batched: points have shape ``(..., dim)`` and
  tensor outputs have shape ``(..., dim, .., dim)``.  Single points work the
  same way with an empty batch.
- Exterior derivative: ``(d a)(X0..Xp) = sum_m (-1)^m  D_{Xm} a(.., no Xm, ..)``
  on coordinate fields (determinant convention, no 1/p! factors).
- Codifferential: ``(codiff a)(X1..) = -sum_i (nabla^g_{e_i} a)(e_i, X1..)``
  over an orthonormal frame; equivalently a ``g^{-1}`` contraction of the
  Levi-Civita derivative, which is what the implementation uses.
- Hodge star: the chart coordinate order defines the positive orientation;
  ``(*a)_{j..} = (1/p!) a^{i..} sqrt(det g) eps_{i.. j..}``.
- J-trace orientation: ``jtr(a) = sum_i a(J e_i, e_i)``.  Definitions that
  need ``sum_i a(e_i, J e_i)`` call this with an explicit sign flip.
- Norms: full index sums of orthonormal-frame components, no combinatorial
  division.
- Differentiation: central differences with default step ``1e-4`` on
  O(1)-scaled charts.  Curvature-grade objects nest two stencils, so callers
  must keep a chart margin of a few steps around each evaluation point.

Everything here is a pure function of its arguments; no state, no caching.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import ContractViolationError, NumericError

DEFAULT_STEP = 1e-4

# Letters used to build einsum subscripts for generic-valence loops.  'd' is
# reserved for the derivative axis and 'm' for contractions.
_SLOT = "abcefghk"


# ---------------------------------------------------------------------------
# basic containers
# ---------------------------------------------------------------------------

def antisymmetry_defect(components: np.ndarray, valence: int) -> float:
    """Max deviation of the trailing `valence` axes from total antisymmetry,
    relative to the overall scale of the tensor."""
    if valence < 2:
        return 0.0
    alt_part = alt(components, valence)
    scale = max(1.0, float(np.max(np.abs(components))))
    return float(np.max(np.abs(components - alt_part))) / scale


@dataclass(frozen=True)
class PointTensor:
    """Components of a fully covariant tensor at a point.

    ``components`` carries the trailing ``(dim,)*valence`` axes; a leading
    batch is permitted and treated transparently.  ``form_flag`` asserts total
    antisymmetry, which is validated on construction.
    """

    dim: int
    valence: int
    components: np.ndarray
    form_flag: bool = False

    def __post_init__(self):
        comp = np.asarray(self.components, dtype=float)
        object.__setattr__(self, "components", comp)
        if self.dim < 4 or self.dim % 2:
            raise ContractViolationError(f"dimension must be even and >= 4, got {self.dim}")
        if comp.shape[comp.ndim - self.valence:] != (self.dim,) * self.valence:
            raise ContractViolationError(
                f"components shape {comp.shape} does not match valence {self.valence} in dim {self.dim}")
        if self.form_flag and antisymmetry_defect(comp, self.valence) > 1e-12:
            raise ContractViolationError("form_flag set but components are not totally antisymmetric")


@dataclass(frozen=True)
class TensorField:
    """A smooth tensor field on a chart: an evaluation map plus metadata.

    ``fn`` maps points ``(..., dim)`` to components ``(..., dim^valence)`` and
    must be deterministic.  ``domain`` (optional) is any object exposing
    ``require_interior(points, margin)``; when present, differential operators
    use it to reject stencils that would leave the chart.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    dim: int
    valence: int
    form_flag: bool = False
    domain: Optional[object] = None

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.fn(np.asarray(points, dtype=float))

    def at(self, point: np.ndarray) -> PointTensor:
        return PointTensor(self.dim, self.valence, self(point), self.form_flag)


@dataclass(frozen=True)
class Frame:
    """Orthonormal frame at a point; ``vectors[a]`` are the contravariant
    components of e_a."""

    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.vectors.shape[-1]


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

def fd_partial(fn: Callable[[np.ndarray], np.ndarray], points: np.ndarray,
               step: float = DEFAULT_STEP) -> np.ndarray:
    """Central-difference coordinate derivative of a batched field.

    Returns an array with the derivative axis first among the tensor axes:
    ``out[..., d, (slots)] = D_d fn[..., (slots)]``.
    """
    pts = np.asarray(points, dtype=float)
    d = pts.shape[-1]
    eye = step * np.eye(d)
    plus = fn(pts[..., None, :] + eye)
    minus = fn(pts[..., None, :] - eye)
    return (plus - minus) / (2.0 * step)


def _check_domain(field: TensorField, points: np.ndarray, margin: float) -> None:
    if field.domain is not None:
        field.domain.require_interior(points, margin)


def exterior_derivative_values(fn, points, valence: int, step: float = DEFAULT_STEP) -> np.ndarray:
    """d of a p-form field, batched; see module docstring for the convention."""
    df = fd_partial(fn, points, step)  # (..., d, slots)
    p = valence
    out = df.copy() if p == 0 else np.zeros_like(df)
    if p == 0:
        return out
    for m in range(p + 1):
        out += (-1) ** m * np.moveaxis(df, -(p + 1), -(p + 1) + m)
    return out


def exterior_derivative(field: TensorField, point: np.ndarray,
                        step: float = DEFAULT_STEP) -> PointTensor:
    """Exterior derivative of a form field at a point.

    Raises ``ContractViolationError`` for non-form input and
    ``ChartDomainError`` when the stencil would leave the declared domain.
    """
    if not field.form_flag and field.valence > 0:
        raise ContractViolationError("exterior_derivative requires a form (form_flag set)")
    _check_domain(field, point, 3.0 * step)
    comp = exterior_derivative_values(field.fn, point, field.valence, step)
    return PointTensor(field.dim, field.valence + 1, comp, form_flag=True)


# ---------------------------------------------------------------------------
# metric helpers, Levi-Civita connection at the chart level
# ---------------------------------------------------------------------------

def metric_inverse(g: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - degenerate input
        raise NumericError(f"metric not invertible: {exc}") from exc


def christoffel_values(metric_fn, points, step: float = DEFAULT_STEP) -> np.ndarray:
    """Levi-Civita coefficients ``Gamma[k,i,j]`` from a metric field (Koszul
    formula on coordinate fields, single inversion of g per point)."""
    g = metric_fn(points)
    dg = fd_partial(metric_fn, points, step)  # dg[d,a,b] = D_d g_ab
    omega = 0.5 * (np.einsum("...ijl->...lij", dg) + np.einsum("...jil->...lij", dg)
                   - np.einsum("...lij->...lij", dg))
    return np.einsum("...kl,...lij->...kij", metric_inverse(g), omega)


def covariant_derivative_values(fn, valence: int, points, gamma: np.ndarray,
                                step: float = DEFAULT_STEP) -> np.ndarray:
    """Covariant derivative of a covariant field given connection
    coefficients at the same points; derivative axis first."""
    nab = fd_partial(fn, points, step)
    if valence == 0:
        return nab
    base = fn(points)
    slots = _SLOT[:valence]
    for s in range(valence):
        t_sub = slots[:s] + "m" + slots[s + 1:]
        nab = nab - np.einsum(f"...md{slots[s]},...{t_sub}->...d{slots}", gamma, base)
    return nab


def codifferential_values(metric_fn, fn, valence: int, points,
                          step: float = DEFAULT_STEP) -> np.ndarray:
    """Codifferential of a p-form field: metric trace of the Levi-Civita
    derivative on its first two slots, with the adjoint minus sign."""
    if valence < 1:
        raise ContractViolationError("codifferential needs valence >= 1")
    gamma = christoffel_values(metric_fn, points, step)
    nab = covariant_derivative_values(fn, valence, points, gamma, step)
    ginv = metric_inverse(metric_fn(points))
    rest = _SLOT[: valence - 1]
    return -np.einsum(f"...dm,...dm{rest}->...{rest}", ginv, nab)


def codifferential(field: TensorField, point: np.ndarray, metric: TensorField,
                   step: float = DEFAULT_STEP) -> PointTensor:
    """Codifferential of a form field at a point (see module conventions)."""
    if not field.form_flag:
        raise ContractViolationError("codifferential requires a form (form_flag set)")
    _check_domain(field, point, 3.0 * step)
    comp = codifferential_values(metric.fn, field.fn, field.valence, point, step)
    return PointTensor(field.dim, field.valence - 1, comp, form_flag=True)


# ---------------------------------------------------------------------------
# frames, traces, norms
# ---------------------------------------------------------------------------

def gram_schmidt_frames(g: np.ndarray) -> np.ndarray:
    """Batched Gram-Schmidt on the coordinate basis, in index order and with
    no pivoting, so the result is deterministic.  ``out[..., a, i]`` is the
    i-th component of e_a."""
    g = np.asarray(g, dtype=float)
    d = g.shape[-1]
    frame = np.zeros_like(g)
    for a in range(d):
        v = np.zeros(g.shape[:-1])
        v[..., a] = 1.0
        for b in range(a):
            proj = np.einsum("...i,...ij,...j->...", frame[..., b, :], g, v)
            v = v - proj[..., None] * frame[..., b, :]
        nsq = np.einsum("...i,...ij,...j->...", v, g, v)
        if np.any(nsq <= 1e-14):
            bad = np.argwhere(np.atleast_1d(nsq) <= 1e-14)[0]
            raise NumericError(
                f"metric is not positive definite at sampled point index {tuple(bad)}")
        frame[..., a, :] = v / np.sqrt(nsq)[..., None]
    return frame


def orthonormal_frame(metric_at_point: np.ndarray) -> Frame:
    """Orthonormal frame at a single point (Gram-Schmidt, coordinate order)."""
    return Frame(gram_schmidt_frames(np.asarray(metric_at_point, dtype=float)))


def to_frame(t: np.ndarray, frame: np.ndarray, valence: int) -> np.ndarray:
    """Express covariant components in an orthonormal frame."""
    if valence == 0:
        return t
    slots = _SLOT[:valence]
    out_slots = slots.upper()
    ops = ",".join(f"...{o}{i}" for o, i in zip(out_slots, slots))
    return np.einsum(f"{ops},...{slots}->...{out_slots}",
                     *([frame] * valence), t)


def j_trace_values(two_tensor: np.ndarray, J: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    """``sum_i a(J e_i, e_i)`` for a (0,2)-tensor; basis independent."""
    return np.einsum("...mn,...mc,...cn->...", two_tensor, J, ginv)


def j_trace(two_form: PointTensor, J: np.ndarray, frame: Frame) -> float:
    """Frame form of the J-trace ``sum_i a(J e_i, e_i)``."""
    if two_form.valence != 2:
        raise ContractViolationError("j_trace expects a (0,2)-tensor")
    jf = np.einsum("...ij,...aj->...ai", J, frame.vectors)  # (J e_a)^i
    return float(np.einsum("...mn,...am,...an->...", two_form.components, jf, frame.vectors))


def norm_sq_values(t: np.ndarray, ginv: np.ndarray, valence: int) -> np.ndarray:
    """Full index-sum squared norm, ``sum t(e_i1,..,e_ip)^2``."""
    if valence == 0:
        return np.asarray(t) ** 2
    a = _SLOT[:valence]
    b = a.upper()
    gs = ",".join(f"...{x}{y}" for x, y in zip(a, b))
    return np.einsum(f"...{a},...{b},{gs}->...", t, t, *([ginv] * valence))


def tensor_norm_sq(t: PointTensor, frame: Frame) -> float:
    """Squared norm as the full index sum of frame components (single point)."""
    tf = to_frame(t.components, frame.vectors, t.valence)
    return float(np.sum(tf * tf))


# ---------------------------------------------------------------------------
# Hodge star and volume
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def levi_civita_symbol(dim: int) -> np.ndarray:
    """Totally antisymmetric symbol with eps[0,1,..,dim-1] = +1."""
    eps = np.zeros((dim,) * dim)
    for perm in itertools.permutations(range(dim)):
        sign = 1
        plist = list(perm)
        for i in range(dim):
            for j in range(i + 1, dim):
                if plist[i] > plist[j]:
                    sign = -sign
        eps[perm] = sign
    return eps


def raise_all(t: np.ndarray, ginv: np.ndarray, valence: int) -> np.ndarray:
    if valence == 0:
        return t
    a = _SLOT[:valence]
    b = a.upper()
    gs = ",".join(f"...{x}{y}" for x, y in zip(a, b))
    return np.einsum(f"...{a},{gs}->...{b}", t, *([ginv] * valence))


def hodge_star_values(alpha: np.ndarray, g: np.ndarray, valence: int,
                      orientation: int = 1) -> np.ndarray:
    """Hodge star with the coordinate-order orientation (times ``orientation``)."""
    d = g.shape[-1]
    det = np.linalg.det(g)
    if np.any(det <= 0):
        bad = np.argwhere(np.atleast_1d(det) <= 0)[0]
        raise NumericError(f"degenerate metric (det <= 0) at batch index {tuple(bad)}")
    sqrtg = np.asarray(np.sqrt(det))
    eps = levi_civita_symbol(d)
    weight = orientation * sqrtg[(...,) + (None,) * (d - valence)]
    if valence == 0:
        return weight * np.multiply.outer(np.asarray(alpha, dtype=float), eps) \
            if np.ndim(alpha) else orientation * float(sqrtg) * float(alpha) * eps
    raised = raise_all(alpha, metric_inverse(g), valence)
    up = _SLOT[:valence]
    out = _SLOT[valence:d]
    comp = np.einsum(f"...{up},{up}{out}->...{out}", raised, eps) / math.factorial(valence)
    return weight * comp


def hodge_star(form: PointTensor, metric: np.ndarray, orientation: int = 1) -> PointTensor:
    """Hodge star of a form at a point; ``metric`` is the metric matrix there."""
    comp = hodge_star_values(form.components, np.asarray(metric, dtype=float),
                             form.valence, orientation)
    return PointTensor(form.dim, form.dim - form.valence, comp, form_flag=True)


# ---------------------------------------------------------------------------
# algebra on components
# ---------------------------------------------------------------------------

def alt(t: np.ndarray, valence: int) -> np.ndarray:
    """Total antisymmetrization of the trailing `valence` axes (projector)."""
    if valence < 2:
        return np.asarray(t, dtype=float)
    slots = _SLOT[:valence]
    out = np.zeros_like(np.asarray(t, dtype=float))
    for perm in itertools.permutations(range(valence)):
        sign = 1
        plist = list(perm)
        for i in range(valence):
            for j in range(i + 1, valence):
                if plist[i] > plist[j]:
                    sign = -sign
        src = "".join(slots[p] for p in perm)
        out = out + sign * np.einsum(f"...{src}->...{slots}", t)
    return out / math.factorial(valence)


def wedge(a: np.ndarray, p: int, b: np.ndarray, q: int) -> np.ndarray:
    """Wedge of a p-form with a q-form in the determinant convention:
    ``a^b = (p+q)!/(p! q!) Alt(a (x) b)``."""
    sa = _SLOT[:p]
    sb = _SLOT[p:p + q]
    prod = np.einsum(f"...{sa},...{sb}->...{sa + sb}", a, b)
    factor = math.factorial(p + q) / (math.factorial(p) * math.factorial(q))
    return factor * alt(prod, p + q)


def interior_product(vec_contra: np.ndarray, t: np.ndarray, valence: int) -> np.ndarray:
    """Contraction of a contravariant vector into the first slot."""
    rest = _SLOT[: valence - 1]
    return np.einsum(f"...m,...m{rest}->...{rest}", vec_contra, t)


# The cyclic sum over three slots appears in several torsion/curvature
# identities; it is implemented exactly once so a sign cannot drift between
# them.

def cyclic3_of4(t: np.ndarray) -> np.ndarray:
    """Sum over cyclic permutations of the first three slots of t[x,y,z,u]."""
    return t + np.einsum("...yzxu->...xyzu", t) + np.einsum("...zxyu->...xyzu", t)


def cyclic3_of3(t: np.ndarray) -> np.ndarray:
    """Sum over cyclic permutations of the slots of t[x,y,z]."""
    return t + np.einsum("...yzx->...xyz", t) + np.einsum("...zxy->...xyz", t)


def proj_one_one(alpha: np.ndarray, J: np.ndarray) -> np.ndarray:
    """(1,1)-part of a (0,2)-tensor, ``(a(X,Y) + a(JX,JY)) / 2``, the unique
    J-invariant projection on 2-forms."""
    return 0.5 * (alpha + np.einsum("...mn,...mi,...nj->...ij", alpha, J, J))


def proj_two_zero(alpha: np.ndarray, J: np.ndarray) -> np.ndarray:
    """(2,0)+(0,2)-part: complement of the (1,1) projection."""
    return 0.5 * (alpha - np.einsum("...mn,...mi,...nj->...ij", alpha, J, J))
