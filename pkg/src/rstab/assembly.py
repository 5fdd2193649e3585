"""Discrete stability operators on P1 triangle meshes.

Every operator is stored as ``W = sign * (K + D + diag(V))`` together with the
lumped mass ``M``; its action on nodal values is ``T f = M^{-1} W f``.

* ``K`` is the weak form of ``div(P grad .)``: ``K_ij = -int <P grad phi_i, grad phi_j>``;
* ``D`` is the weak drift ``D_ij = int phi_i <b, grad phi_j>``;
* ``V_i = q_i M_i`` carries the potential.

Dirichlet conditions are imposed by eliminating the rows and columns of
non-interior nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import comb
from typing import Callable, Optional

import numpy as np
from scipy import sparse
from scipy.io import mmwrite

from .errors import (
    AmbientMismatch,
    BadParams,
    IdentityCheckFailed,
    InsufficientStencil,
    NotAdmissible,
    NotConstantHr1,
    NotSpaceForm,
    SingularPr,
)
from .geometry.ambient import Ambient
from .geometry.immersion import FD_STEP, chart_jet, check_immersed, frame_hessian, varied
from .geometry.surface import DiscreteHypersurface, ambient_curvature_term, r_area, rebuild
from .newton import admissibility, classify_definiteness, default_tolerance, elementary_symmetric_all

REF_GRAD = np.array([[-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]])


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    K: sparse.csr_matrix
    D: sparse.csr_matrix
    V: np.ndarray  # potential times mass
    M: np.ndarray  # lumped mass
    interior: np.ndarray  # bool mask of unknowns
    sign: int = 1
    symmetric: bool = True
    label: str = ""
    potential: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.M)

    @property
    def W(self) -> sparse.csr_matrix:
        return (self.sign * (self.K + self.D + sparse.diags(self.V))).tocsr()

    def apply(self, f: np.ndarray) -> np.ndarray:
        """``T f`` at every node; values at non-interior nodes are not meaningful."""
        return (self.W @ np.asarray(f, dtype=float)) / self.M

    def reduced(self):
        """``(W_II, M_I)`` on the interior unknowns."""
        idx = np.flatnonzero(self.interior)
        W = self.W
        return W[idx][:, idx].tocsr(), self.M[idx]

    def restrict(self, mask: np.ndarray, label: Optional[str] = None) -> "DiscreteOperator":
        """Same operator with Dirichlet data outside ``mask``."""
        mask = np.asarray(mask, dtype=bool)
        return replace(self, interior=self.interior & mask, label=label or self.label)

    def scaled(self, alpha: float) -> "DiscreteOperator":
        return replace(self, K=alpha * self.K, D=alpha * self.D, V=alpha * self.V,
                       potential=None if self.potential is None else alpha * self.potential,
                       label=f"{alpha:g}*{self.label}")

    def extend(self, g_interior: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n)
        out[self.interior] = g_interior
        return out

    def to_mtx(self, path) -> None:
        mmwrite(str(path), self.W, comment=f"{self.label} sign={self.sign}")


# ---------------------------------------------------------------------------
# element kernels


def _element_gradients(surface: DiscreteHypersurface) -> np.ndarray:
    """Ambient gradients of the three hat functions per triangle, ``(T, m, 3)``."""
    E, _, Ginv, _ = surface.triangle_data
    return np.einsum("tai,tij,jb->tab", E, Ginv, REF_GRAD)


def _element_tensor(surface: DiscreteHypersurface, P: np.ndarray) -> np.ndarray:
    """``P`` on each triangle in reference coordinates, averaged from the corners."""
    E = surface.triangle_data[0]
    J = np.diag(surface.ambient.J)
    Y = np.einsum("tai,a,tcaj->tcij", E, J, surface.frame[surface.tris])  # (T, 3, 2, 2)
    Pc = P[surface.tris]
    Pe = np.einsum("tcij,tcjk,tclk->til", Y, Pc, Y) / 3.0
    return 0.5 * (Pe + np.swapaxes(Pe, 1, 2))


def stiffness(surface: DiscreteHypersurface, P: np.ndarray) -> sparse.csr_matrix:
    """``K_ij = -int <P grad phi_i, grad phi_j>`` with ``P`` given in node frames."""
    _, _, Ginv, area = surface.triangle_data
    Pe = _element_tensor(surface, P)
    GD = np.einsum("tij,jb->tib", Ginv, REF_GRAD)
    local = -area[:, None, None] * np.einsum("tia,tij,tjb->tab", GD, Pe, GD)
    return _scatter(surface, local)


def drift_matrix(surface: DiscreteHypersurface, b_elem: np.ndarray) -> sparse.csr_matrix:
    """``D_ij = int phi_i <b, grad phi_j>`` for a piecewise-constant ambient field ``b``."""
    _, _, _, area = surface.triangle_data
    J = np.diag(surface.ambient.J)
    grads = _element_gradients(surface)
    bg = np.einsum("ta,a,tab->tb", b_elem, J, grads)  # <b, grad phi_j>
    local = (area / 3.0)[:, None, None] * np.broadcast_to(bg[:, None, :], (len(area), 3, 3))
    return _scatter(surface, local)


def _scatter(surface: DiscreteHypersurface, local: np.ndarray) -> sparse.csr_matrix:
    t = surface.tris
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    n = surface.n_nodes
    return sparse.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def nodal_to_elements(surface: DiscreteHypersurface, c: np.ndarray) -> np.ndarray:
    """Triangle averages ``(T, m)`` of nodal tangent fields given in frame coefficients."""
    return surface.from_frame(c)[surface.tris].mean(axis=1)


def weak_divergence(surface: DiscreteHypersurface, v_elem: np.ndarray) -> np.ndarray:
    """Nodal divergence of a piecewise-constant field: ``M_i^{-1} int phi_i div v``."""
    _, _, _, area = surface.triangle_data
    J = np.diag(surface.ambient.J)
    grads = _element_gradients(surface)
    local = -area[:, None] * np.einsum("ta,a,tab->tb", v_elem, J, grads)
    out = np.bincount(surface.tris.ravel(), weights=local.ravel(), minlength=surface.n_nodes)
    return out / surface.mass


# ---------------------------------------------------------------------------
# drift


def _tangent_projection(surface: DiscreteHypersurface, v: np.ndarray) -> np.ndarray:
    """Project per-triangle vectors onto the interpolated tangent plane at the centroid."""
    amb = surface.ambient
    J = np.diag(amb.J)
    N = surface.normal[surface.tris].mean(axis=1)
    if amb.dim == 4:
        x = surface.tri_X.mean(axis=1)
        xx = np.einsum("ta,a,ta->t", x, J, x)
        N = N - (np.einsum("ta,a,ta->t", N, J, x) / xx)[:, None] * x
        v = v - (np.einsum("ta,a,ta->t", v, J, x) / xx)[:, None] * x
    NN = np.einsum("ta,a,ta->t", N, J, N)
    return v - (np.einsum("ta,a,ta->t", v, J, N) / NN)[:, None] * N


def element_divergence(surface: DiscreteHypersurface, P: np.ndarray) -> np.ndarray:
    """``trace(grad P)`` per triangle as an ambient vector ``(T, m)``.

    The frame tensors are lifted to ambient endomorphisms (killing the normal),
    interpolated linearly, and differentiated along the triangle; projecting
    the result onto the tangent plane supplies the transport correction.
    """
    _, _, Ginv, _ = surface.triangle_data
    Phat = surface.to_ambient(P)[surface.tris]  # (T, 3, m, m)
    E = surface.triangle_data[0]
    dP = Phat[:, 1:] - Phat[:, :1]  # (T, 2, m, m)
    v = np.einsum("tab,tamn,tnb->tm", Ginv, dP, E)
    return _tangent_projection(surface, v)


def _ring_neighbours(surface: DiscreteHypersurface, depth: int = 2):
    """Padded ``(N, K)`` indices of the ``depth``-ring (excluding the node) and a mask."""
    A = surface.adjacency
    reach = A.copy()
    for _ in range(depth - 1):
        reach = reach + reach @ A
    reach = sparse.csr_matrix(reach)
    reach.setdiag(0)
    reach.eliminate_zeros()
    counts = np.diff(reach.indptr)
    K = int(counts.max())
    slot = np.arange(len(reach.indices)) - np.repeat(reach.indptr[:-1], counts)
    rows = np.repeat(np.arange(surface.n_nodes), counts)
    idx = np.zeros((surface.n_nodes, K), dtype=np.int64)
    mask = np.zeros((surface.n_nodes, K), dtype=bool)
    idx[rows, slot] = reach.indices
    mask[rows, slot] = True
    return idx, mask


def nodal_divergence(surface: DiscreteHypersurface, P: np.ndarray) -> np.ndarray:
    """``trace(grad P)`` per node by quadratic recovery, frame coefficients ``(N, 2)``.

    Around each node the lifted tensor differences ``P_j - P_i`` over the
    2-ring are fitted by a quadratic in tangent-plane coordinates; the linear
    coefficients are the derivatives along the frame. Second order on any
    triangulation; nodes with a rank-deficient stencil fall back to the
    area-weighted element values.
    """
    J = np.diag(surface.ambient.J)
    Phat = surface.to_ambient(P)
    m = Phat.shape[1]
    idx, mask = _ring_neighbours(surface)
    d = surface.X[idx] - surface.X[:, None, :]
    uv = np.einsum("nai,a,nka->nki", surface.frame, J, d)
    scale = np.sqrt(np.sum(mask[..., None] * uv**2, axis=(1, 2)) / np.maximum(mask.sum(1), 1))
    uv = uv / np.where(scale > 0, scale, 1.0)[:, None, None]
    u, v = uv[..., 0], uv[..., 1]
    Phi = np.stack([u, v, u * u, u * v, v * v], axis=-1) * mask[..., None]
    dT = (Phat[idx] - Phat[:, None]).reshape(idx.shape + (m * m,)) * mask[..., None]
    G = np.einsum("nkp,nkq->npq", Phi, Phi)
    rhs = np.einsum("nkp,nkc->npc", Phi, dT)
    cond = np.linalg.cond(G)
    good = np.isfinite(cond) & (cond < 1e10)
    coef = np.zeros((surface.n_nodes, 5, m * m))
    if np.any(good):
        coef[good] = np.linalg.solve(G[good], rhs[good])
    grad = coef[:, :2].reshape(-1, 2, m, m) / np.where(scale > 0, scale, 1.0)[:, None, None, None]
    vec = np.einsum("namk,nka->nm", grad, surface.frame)
    out = surface.to_frame(vec)
    if not np.all(good):
        out[~good] = _averaged(surface, element_divergence(surface, P))[~good]
    return out


def _averaged(surface: DiscreteHypersurface, v: np.ndarray) -> np.ndarray:
    area = surface.triangle_data[3]
    weights = np.bincount(surface.tris.ravel(), weights=np.repeat(area, 3), minlength=surface.n_nodes)
    if np.any(weights == 0):
        raise InsufficientStencil("some node belongs to no triangle")
    acc = np.zeros((surface.n_nodes, v.shape[1]))
    for j in range(3):
        np.add.at(acc, surface.tris[:, j], area[:, None] * v)
    return surface.to_frame(acc / weights[:, None])


def drift_field(surface: DiscreteHypersurface, r: int, P: Optional[np.ndarray] = None,
                return_elements: bool = False, method: str = "fit"):
    """``trace(grad P_r)`` at every node, in frame coefficients ``(N, 2)``.

    ``method="fit"`` uses the quadratic recovery of :func:`nodal_divergence`;
    ``"average"`` area-averages the element values (first order at irregular
    vertices). ``P`` overrides the Newton tensor field (for manufactured fields).
    """
    P = surface.newton(r) if P is None else np.asarray(P, dtype=float)
    v = element_divergence(surface, P)
    if method == "fit":
        nodal = nodal_divergence(surface, P)
    elif method == "average":
        nodal = _averaged(surface, v)
    else:
        raise BadParams(f"unknown drift method {method!r}")
    return (nodal, v) if return_elements else nodal


# ---------------------------------------------------------------------------
# potentials


def potential(surface: DiscreteHypersurface, r: int, ambient: Optional[Ambient] = None,
              P: Optional[np.ndarray] = None, check: bool = True) -> np.ndarray:
    """``q = trace(A^2 P_r) + trace(P_r R_N)`` per node.

    The direct trace is cross-checked against ``S_1 S_{r+1} - (r+2) S_{r+2}``
    whenever ``P`` is the genuine Newton tensor.
    """
    A = surface.shape
    Pr = surface.newton(r) if P is None else np.asarray(P, dtype=float)
    direct = np.einsum("nij,njk,nki->n", A, A, Pr)
    if check and P is None:
        S = elementary_symmetric_all(surface.principal, r + 2)
        ident = S[:, 1] * S[:, r + 1] - (r + 2) * S[:, r + 2]
        scale = 1.0 + np.max(np.abs(surface.principal)) ** (r + 2)
        worst = float(np.max(np.abs(direct - ident)))
        if worst > 1e-9 * scale:
            raise IdentityCheckFailed(f"trace(A^2 P_r) identity off by {worst:.3e}")
    return direct + ambient_curvature_term(surface, r, Pr, ambient)


# ---------------------------------------------------------------------------
# operators


def assemble_operator(surface: DiscreteHypersurface, P: Optional[np.ndarray] = None,
                      drift: Optional[np.ndarray] = None, q: Optional[np.ndarray] = None,
                      sign: int = 1, label: str = "operator",
                      interior: Optional[np.ndarray] = None) -> DiscreteOperator:
    """Generic ``div(P grad f) + <b, grad f> + q f``.

    ``P`` defaults to the identity (Laplace-Beltrami); ``drift`` is a
    piecewise-constant ambient field per triangle ``(T, m)`` or per node
    ``(N, 2)`` in frame coefficients.
    """
    n = surface.n_nodes
    if P is None:
        P = np.broadcast_to(np.eye(2), (n, 2, 2))
    K = stiffness(surface, P)
    if drift is None:
        D = sparse.csr_matrix((n, n))
    else:
        drift = np.asarray(drift, dtype=float)
        if drift.shape == (n, 2):
            b_elem = nodal_to_elements(surface, drift)
        elif drift.shape == (len(surface.tris), surface.ambient.dim):
            b_elem = drift
        else:
            raise BadParams("drift must be (nodes, 2) frame coefficients or (triangles, m) vectors")
        D = drift_matrix(surface, b_elem)
    M = surface.mass
    V = np.zeros(n) if q is None else np.asarray(q, dtype=float) * M
    if interior is None:
        interior = ~surface.boundary
    return DiscreteOperator(K=K, D=D, V=V, M=M, interior=np.asarray(interior, dtype=bool).copy(),
                            sign=int(sign), symmetric=drift is None, label=label,
                            potential=None if q is None else np.asarray(q, dtype=float))


def _admissible_sign(surface: DiscreteHypersurface, r: int, P: Optional[np.ndarray]) -> int:
    if P is None:
        adm = admissibility(surface.shape, r)
        if not adm.admissible:
            raise NotAdmissible(
                f"P_{r} is {adm.definiteness.tag} (margin {adm.definiteness.margin:.3e})"
            )
        return adm.sign
    cls = classify_definiteness(P, default_tolerance(surface.principal, r))
    if not cls.definite:
        raise NotAdmissible(f"tensor field is {cls.tag}")
    return cls.sign


def _drift_included(mode: str, ambient: Ambient) -> bool:
    if mode not in ("auto", "include", "drop"):
        raise BadParams(f"drift mode must be auto, include or drop, got {mode!r}")
    if mode == "auto":
        return not ambient.is_space_form
    return mode == "include"


def assemble_Lr(surface: DiscreteHypersurface, r: int, drift: str = "auto",
                P: Optional[np.ndarray] = None) -> DiscreteOperator:
    """``L_r f = div(P_r grad f) - <trace(grad P_r), grad f>`` (unsigned)."""
    _admissible_sign(surface, r, P)
    Pr = surface.newton(r) if P is None else np.asarray(P, dtype=float)
    b = None
    if _drift_included(drift, surface.ambient):
        b = -drift_field(surface, r, Pr)
    op = assemble_operator(surface, Pr, b, None, 1, f"L_{r}")
    return replace(op, meta={"r": r, "drift": b is not None})


def assemble_Tr(surface: DiscreteHypersurface, r: int, ambient: Optional[Ambient] = None,
                drift: str = "auto", P: Optional[np.ndarray] = None,
                signed: bool = True) -> DiscreteOperator:
    """The r-stability operator ``L_r + trace(A^2 P_r) + trace(P_r R_N)``.

    The sign is ``-1`` when ``P_r`` is negative definite (``signed=False``
    keeps the raw operator). ``drift="auto"`` drops the drift exactly in space
    forms and keeps it otherwise.
    """
    amb = surface.ambient if ambient is None else ambient
    if amb.model != surface.ambient.model:
        raise AmbientMismatch(f"surface lives in {surface.ambient.model}, ambient is {amb.model}")
    sign = _admissible_sign(surface, r, P)
    Pr = surface.newton(r) if P is None else np.asarray(P, dtype=float)
    q = potential(surface, r, amb, P)
    b = None
    if _drift_included(drift, amb):
        b = -drift_field(surface, r, Pr)
    op = assemble_operator(surface, Pr, b, q, sign if signed else 1, f"T_{r}")
    return replace(op, meta={"r": r, "drift": b is not None, "ambient": amb.name or amb.model,
                             "admissible_sign": sign})


@dataclass(frozen=True)
class SymmetrizedData:
    X: np.ndarray  # frame coefficients of -P^{-1} trace(grad P)
    Q: np.ndarray
    q: np.ndarray
    Phi: np.ndarray
    div_PX: np.ndarray


def symmetrize(surface: DiscreteHypersurface, r: int, ambient: Optional[Ambient] = None,
               P: Optional[np.ndarray] = None):
    """The self-adjoint operator ``div(P grad .) + Q`` with
    ``Q = q - div(P X)/2 - <P X, X>/4`` and ``X = -P^{-1} trace(grad P)``.

    The drift is always computed from the mesh here, so in space forms the
    result differs from ``T_r`` only by discretisation error.
    """
    amb = surface.ambient if ambient is None else ambient
    sign = _admissible_sign(surface, r, P)
    Pr = surface.newton(r) if P is None else np.asarray(P, dtype=float)
    ev = np.linalg.eigvalsh(Pr)
    if np.min(np.abs(ev)) <= default_tolerance(surface.principal, r):
        raise SingularPr("P_r is singular at some node")
    q = potential(surface, r, amb, P)
    w = drift_field(surface, r, Pr)
    X = -np.linalg.solve(Pr, w[..., None])[..., 0]
    div_PX = weak_divergence(surface, nodal_to_elements(surface, -w))
    Q = q - 0.5 * div_PX - 0.25 * np.einsum("ni,nij,nj->n", X, Pr, X)
    op = assemble_operator(surface, Pr, None, Q, sign, f"sym T_{r}")
    op = replace(op, meta={"r": r, "symmetrized": True})
    return op, SymmetrizedData(X=X, Q=Q, q=q, Phi=Pr, div_PX=div_PX)


def adjoint(op: DiscreteOperator) -> DiscreteOperator:
    """The ``M``-weighted adjoint ``M^{-1} W^t``."""
    return replace(op, K=op.K.T.tocsr(), D=op.D.T.tocsr(),
                   label=op.label[:-1] if op.label.endswith("*") else op.label + "*")


# ---------------------------------------------------------------------------
# variational checks


@dataclass(frozen=True)
class LinearizationResult:
    residual: float  # max-norm of lhs - rhs
    relative: float
    lhs: np.ndarray
    rhs: np.ndarray
    t: float


def pointwise_Lr(surface: DiscreteHypersurface, r: int, f: Callable, step: float = FD_STEP) -> np.ndarray:
    """``trace(P_r Hess f)`` at the nodes from the chart jet of ``f o x``."""
    imm = surface.immersion
    if imm is None:
        raise BadParams("pointwise evaluation needs a parametrised surface")
    geo = surface.geometry
    _, df, ddf = chart_jet(lambda p: f(imm.position(p)), surface.params, imm.param, step)
    H = frame_hessian(geo, df, ddf)
    return np.einsum("nij,nji->n", surface.newton(r), H)


def linearization_residual(surface: DiscreteHypersurface, r: int, f: Callable,
                           t: float, step: float = FD_STEP) -> LinearizationResult:
    """Centered difference of ``S_{r+1}`` along ``exp(t f N)`` against
    ``L_r f + f (S_1 S_{r+1} - (r+2) S_{r+2}) + f trace(P_r R_N)``.

    ``f`` is a function of the ambient position.
    """
    imm = surface.immersion
    if imm is None:
        raise BadParams("variations need a parametrised surface")
    fx = np.asarray(f(surface.X), dtype=float)
    if t == 0 or not np.any(fx):
        z = np.zeros(surface.n_nodes)
        return LinearizationResult(0.0, 0.0, z, z, t)
    S = elementary_symmetric_all(surface.principal, r + 2)
    vals = []
    for s in (t, -t):
        geo = varied(imm, f, s, step).geometry(surface.params, step)
        check_immersed(geo, surface.geometry)
        vals.append(elementary_symmetric_all(geo.principal, r + 1)[:, r + 1])
    lhs = (vals[0] - vals[1]) / (2 * t)
    rhs = (pointwise_Lr(surface, r, f, step)
           + fx * (S[:, 1] * S[:, r + 1] - (r + 2) * S[:, r + 2])
           + fx * ambient_curvature_term(surface, r))
    res = float(np.max(np.abs(lhs - rhs)))
    return LinearizationResult(res, res / max(float(np.max(np.abs(rhs))), 1e-300), lhs, rhs, t)


def _kappa(r: int, c: float, n: int) -> float:
    if r % 2 == 0:
        return 0.0
    if r == 1:
        return c * n
    return c * (n - r + 1) / (r - 1) * _kappa(r - 2, c, n)


def swept_volume(surface: DiscreteHypersurface, tau: np.ndarray, points: int = 8) -> float:
    """``int_M int_0^tau det(C(s) I - S(s) A) ds dM`` by Gauss-Legendre in ``s``."""
    x, w = np.polynomial.legendre.leggauss(points)
    s = 0.5 * (x[None, :] + 1.0) * tau[:, None]
    C, Sn = surface.ambient.jacobi(s)
    k = surface.principal
    S1 = k.sum(axis=1)[:, None]
    S2 = (k[:, 0] * k[:, 1])[:, None]
    det = C * C - C * Sn * S1 + Sn * Sn * S2
    per_node = 0.5 * tau * (det * w[None, :]).sum(axis=1)
    return float(np.sum(surface.mass * per_node))


@dataclass(frozen=True)
class SecondVariation:
    lhs: float
    rhs: float
    residual: float
    relative: float
    lhs_balanced: float
    rhs_balanced: float
    residual_balanced: float
    relative_balanced: float
    t: float


def second_variation_r_area(surface: DiscreteHypersurface, r: int, f: Callable, t: float,
                            tol: float = 1e-6, step: float = FD_STEP) -> SecondVariation:
    """Second difference of the r-area along ``exp(t f N)`` against
    ``-int f T_r f`` (raw operator, drift dropped).

    The ``balanced`` fields add the enclosed-volume term ``G_r V`` with
    ``G_r = (r+1) S_{r+1} - kappa_r`` and compare with ``-(r+1) int f T_r f``,
    the form that holds for normal variations of a constant ``S_{r+1}`` surface.
    """
    amb = surface.ambient
    if not amb.is_space_form:
        raise NotSpaceForm("the r-area variation is defined in space forms only")
    imm = surface.immersion
    if imm is None:
        raise BadParams("variations need a parametrised surface")
    S = elementary_symmetric_all(surface.principal, r + 1)[:, r + 1]
    spread = float(np.max(S) - np.min(S))
    if spread > tol * (1.0 + float(np.max(np.abs(S)))):
        raise NotConstantHr1(f"S_{r + 1} varies by {spread:.3e} over the surface")
    fx = np.asarray(f(surface.X), dtype=float)
    if not surface.closed and np.max(np.abs(fx[surface.boundary]), initial=0.0) > tol:
        raise BadParams("on surfaces with boundary f must vanish there")
    if not np.any(fx):
        return SecondVariation(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, t)
    a0 = r_area(surface, r)
    ap = r_area(rebuild(surface, varied(imm, f, t, step), step), r)
    am = r_area(rebuild(surface, varied(imm, f, -t, step), step), r)
    lhs = (ap - 2 * a0 + am) / t**2
    op = assemble_Tr(surface, r, drift="drop", signed=False)
    op = replace(op, interior=np.ones(surface.n_nodes, dtype=bool))
    rhs = -float(fx @ (op.W @ fx))
    G = (r + 1) * float(np.mean(S)) - _kappa(r, float(amb.c), surface.n)
    vol2 = (swept_volume(surface, t * fx) + swept_volume(surface, -t * fx)) / t**2
    lhs_b = lhs + G * vol2
    rhs_b = (r + 1) * rhs
    denom = max(abs(rhs), 1e-300)
    denom_b = max(abs(rhs_b), 1e-300)
    return SecondVariation(lhs, rhs, abs(lhs - rhs), abs(lhs - rhs) / denom,
                           lhs_b, rhs_b, abs(lhs_b - rhs_b), abs(lhs_b - rhs_b) / denom_b, t)


def umbilic_factor(k: float, r: int, n: int = 2) -> float:
    """``P_r = binom(n-1, r) k^r I`` on an umbilic point."""
    return comb(n - 1, r) * k**r
