"""Parametrised immersions and pointwise differential geometry.

An immersion maps a parameter domain into the flat coordinates of an ambient
model. Two parameter domains are supported:

``"sphere"``
    unit vectors of R^3; around every node a gnomonic chart
    ``u -> normalise(w + u1 a + u2 b)`` is used, so no pole is special.
``"plane"``
    a coordinate box in R^2, optionally periodic in either coordinate.

Shape-operator convention: ``A = -dN`` (so ``b_ij = <x_ij, N>``). The catalog
orients closed spheres by the inward normal, which makes every round sphere
have positive principal curvatures.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from ..errors import DegenerateMetric, ImmersionLost
from .ambient import Ambient

FD_STEP = 5e-3


@dataclass(frozen=True)
class Immersion:
    name: str
    ambient: Ambient
    param: str  # "sphere" | "plane"
    position: Callable[[np.ndarray], np.ndarray]
    normal: Optional[Callable[[np.ndarray], np.ndarray]] = None
    orientation: Optional[Callable[[np.ndarray], np.ndarray]] = None
    jet: Optional[Callable[[np.ndarray], tuple]] = None
    box: Optional[tuple] = None  # ((u0, u1), (v0, v1)) for plane charts
    periodic: tuple = (False, False)
    cap_angle: float = np.pi  # polar angle of the parameter cap (pi: closed)
    closed_form_k: Optional[tuple] = None
    params: dict = field(default_factory=dict)

    @property
    def closed(self) -> bool:
        if self.param == "sphere":
            return self.cap_angle >= np.pi
        return all(self.periodic)

    def with_ambient(self, ambient: Ambient) -> "Immersion":
        if ambient.model != self.ambient.model:
            raise ValueError("replacement ambient must share the coordinate model")
        return replace(self, ambient=ambient)

    # pointwise geometry ------------------------------------------------
    def geometry(self, points, step: float = FD_STEP) -> "PointGeometry":
        """Metric, normal, frame and shape operator at parameter points."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.jet is not None:
            x, xu, xuu = self.jet(points)
        else:
            x, xu, xuu = chart_jet(self.position, points, self.param, step)
        ref = None
        if self.normal is not None:
            ref = self.normal(points)
        elif self.orientation is not None:
            ref = self.orientation(points)
        return geometry_from_jet(self.ambient, x, xu, xuu, ref, exact_normal=self.normal is not None)

    def normal_at(self, points, step: float = FD_STEP) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.normal is not None:
            return self.normal(points)
        if self.jet is not None:
            x, xu, _ = self.jet(points)
        else:
            x, xu = chart_jet(self.position, points, self.param, step, order=1)
        ref = self.orientation(points) if self.orientation is not None else None
        return unit_normal(self.ambient, x, xu, ref)


@dataclass(frozen=True)
class PointGeometry:
    """Pointwise data; arrays carry a leading node axis."""

    x: np.ndarray  # (N, m)
    xu: np.ndarray  # (N, m, 2) chart tangents
    xuu: np.ndarray  # (N, m, 2, 2)
    metric: np.ndarray  # (N, 2, 2) chart metric
    chol: np.ndarray  # (N, 2, 2) lower Cholesky factor of the metric
    normal: np.ndarray  # (N, m)
    frame: np.ndarray  # (N, m, 2) orthonormal tangent frame
    shape: np.ndarray  # (N, 2, 2) shape operator in the frame
    christoffel: np.ndarray  # (N, 2, 2, 2) Gamma^l_ij as [.., l, i, j]

    @property
    def principal(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.shape)


# ---------------------------------------------------------------------------
# finite-difference jets


def _chart_points(points: np.ndarray, param: str, offsets: np.ndarray) -> np.ndarray:
    """Parameter points ``chart_p(u)`` for every node ``p`` and offset ``u``.

    Returns ``(N, K, d)``.
    """
    if param == "plane":
        return points[:, None, :] + offsets[None, :, :]
    w = points / np.linalg.norm(points, axis=1, keepdims=True)
    seed = np.where(np.abs(w[:, :1]) < 0.9, np.array([[1.0, 0.0, 0.0]]), np.array([[0.0, 1.0, 0.0]]))
    a = np.cross(w, seed)
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b = np.cross(w, a)
    q = w[:, None, :] + offsets[None, :, :1] * a[:, None, :] + offsets[None, :, 1:] * b[:, None, :]
    return q / np.linalg.norm(q, axis=2, keepdims=True)


def _stencil(h: float) -> np.ndarray:
    e = np.array(
        [[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [1, -1], [-1, 1], [-1, -1]],
        dtype=float,
    )
    return e * h


def _fd(values: np.ndarray, h: float, order: int):
    f0, fp1, fm1, fp2, fm2, fpp, fpm, fmp, fmm = (values[:, i] for i in range(9))
    d1 = np.stack([(fp1 - fm1) / (2 * h), (fp2 - fm2) / (2 * h)], axis=-1)
    if order == 1:
        return d1, None
    d11 = (fp1 - 2 * f0 + fm1) / h**2
    d22 = (fp2 - 2 * f0 + fm2) / h**2
    d12 = (fpp - fpm - fmp + fmm) / (4 * h * h)
    d2 = np.stack([np.stack([d11, d12], -1), np.stack([d12, d22], -1)], -2)
    return d1, d2


def chart_jet(fn, points, param: str, step: float = FD_STEP, order: int = 2):
    """Value and chart derivatives of ``fn`` (vector- or scalar-valued).

    Centered differences at steps ``h`` and ``h/2`` combined by one
    Richardson extrapolation, so the truncation error is ``O(h^4)``.
    Vector outputs come back as ``(N, m)``, ``(N, m, 2)``, ``(N, m, 2, 2)``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    offs = np.concatenate([_stencil(step), _stencil(step / 2)[1:]])
    q = _chart_points(points, param, offs)
    vals = np.asarray(fn(q.reshape(-1, q.shape[-1])), dtype=float)
    vals = vals.reshape(q.shape[:2] + vals.shape[1:])
    coarse = vals[:, :9]
    fine = np.concatenate([vals[:, :1], vals[:, 9:]], axis=1)
    d1c, d2c = _fd(coarse, step, order)
    d1f, d2f = _fd(fine, step / 2, order)
    d1 = (4 * d1f - d1c) / 3
    value = vals[:, 0]
    if order == 1:
        return value, d1
    d2 = (4 * d2f - d2c) / 3
    return value, d1, d2


# ---------------------------------------------------------------------------
# geometry from jets


def cross4(a, b, c):
    """Euclidean normal to three vectors of R^4 (generalised cross product)."""
    M = np.stack([a, b, c], axis=-2)
    out = np.empty(a.shape)
    for i in range(4):
        cols = [j for j in range(4) if j != i]
        out[..., i] = (-1) ** i * np.linalg.det(M[..., cols])
    return out


def unit_normal(ambient: Ambient, x, xu, ref=None):
    J = np.diag(ambient.J)
    if ambient.dim == 3:
        n = np.cross(xu[..., 0], xu[..., 1])
    else:
        n = cross4(x, xu[..., 0], xu[..., 1]) * J
    nn = ambient.inner(n, n)
    if np.any(nn <= 0):
        raise DegenerateMetric("tangent plane is degenerate somewhere")
    n = n / np.sqrt(nn)[..., None]
    if ref is not None:
        s = np.sign(ambient.inner(n, ref))
        s[s == 0] = 1.0
        n = n * s[..., None]
    return n


def geometry_from_jet(ambient: Ambient, x, xu, xuu, ref=None, exact_normal=False) -> PointGeometry:
    J = np.diag(ambient.J)
    g = np.einsum("nai,a,naj->nij", xu, J, xu)
    det = g[:, 0, 0] * g[:, 1, 1] - g[:, 0, 1] ** 2
    scale = np.maximum(g[:, 0, 0] + g[:, 1, 1], 1e-300)
    if np.any(det <= 1e-14 * scale**2) or not np.all(np.isfinite(det)):
        raise DegenerateMetric("first fundamental form is singular at some node")
    N = np.asarray(ref, dtype=float) if exact_normal else unit_normal(ambient, x, xu, ref)
    b = np.einsum("naij,a,na->nij", xuu, J, N)
    b = 0.5 * (b + np.swapaxes(b, 1, 2))
    L = np.linalg.cholesky(g)
    Linv = np.linalg.inv(L)
    frame = np.einsum("nai,nji->naj", xu, Linv)
    shape = Linv @ b @ np.swapaxes(Linv, 1, 2)
    shape = 0.5 * (shape + np.swapaxes(shape, 1, 2))
    first_kind = np.einsum("naij,a,nak->nijk", xuu, J, xu)
    ginv = np.linalg.inv(g)
    christoffel = np.einsum("nlk,nijk->nlij", ginv, first_kind)
    return PointGeometry(x=x, xu=xu, xuu=xuu, metric=g, chol=L, normal=N,
                         frame=frame, shape=shape, christoffel=christoffel)


def frame_hessian(geo: PointGeometry, dF, ddF) -> np.ndarray:
    """Covariant Hessian of a scalar, expressed in the orthonormal frame."""
    hess = ddF - np.einsum("nlij,nl->nij", geo.christoffel, dF)
    Linv = np.linalg.inv(geo.chol)
    return Linv @ hess @ np.swapaxes(Linv, 1, 2)


# ---------------------------------------------------------------------------
# normal variations


def varied(imm: Immersion, f: Callable[[np.ndarray], np.ndarray], t: float,
           step: float = FD_STEP) -> Immersion:
    """The immersion ``x_t = exp_x(t f N)`` for an ambient function ``f``."""
    amb = imm.ambient
    if t == 0:
        return imm

    def position(points):
        x = imm.position(points)
        N = imm.normal_at(points, step)
        return amb.exp_normal(x, N, t * f(x))[0]

    def orientation(points):
        x = imm.position(points)
        N = imm.normal_at(points, step)
        return amb.exp_normal(x, N, t * f(x))[1]

    return replace(imm, name=f"{imm.name}+variation", position=position, normal=None,
                   orientation=orientation, jet=None, closed_form_k=None)


def check_immersed(geo: PointGeometry, base: PointGeometry, ratio: float = 1e-6) -> None:
    det = np.linalg.det(geo.metric)
    det0 = np.linalg.det(base.metric)
    if np.any(det <= ratio * det0):
        raise ImmersionLost("variation degenerates the metric; reduce |t|")
