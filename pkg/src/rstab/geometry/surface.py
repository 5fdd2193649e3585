"""Discrete hypersurfaces: meshes carrying pointwise second-order data."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional

import numpy as np
from scipy import sparse

from ..errors import BadParams, NotSpaceForm
from ..newton import elementary_symmetric_all, newton_tensors
from .ambient import Ambient
from .immersion import FD_STEP, Immersion, PointGeometry
from .meshes import icosphere, octa_hemisphere, plane_grid, warp_cap


@dataclass(frozen=True, eq=False)
class DiscreteHypersurface:
    ambient: Ambient
    X: np.ndarray  # (N, m) node positions
    tris: np.ndarray  # (T, 3)
    tri_X: np.ndarray  # (T, 3, m) corner positions (unwrapped across periodic seams)
    frame: np.ndarray  # (N, m, 2)
    normal: np.ndarray  # (N, m)
    shape: np.ndarray  # (N, 2, 2)
    boundary: np.ndarray  # (N,) bool
    params: Optional[np.ndarray] = None
    immersion: Optional[Immersion] = None
    geometry: Optional[PointGeometry] = None
    level: Optional[int] = None
    name: str = ""
    accuracy: str = "analytic"
    meta: dict = field(default_factory=dict)

    # mesh -------------------------------------------------------------
    @property
    def n_nodes(self) -> int:
        return len(self.X)

    @property
    def closed(self) -> bool:
        return not bool(np.any(self.boundary))

    @cached_property
    def triangle_data(self):
        """Edge vectors ``(T, m, 2)``, Gram matrix, its inverse and areas."""
        J = np.diag(self.ambient.J)
        E = np.stack([self.tri_X[:, 1] - self.tri_X[:, 0], self.tri_X[:, 2] - self.tri_X[:, 0]], -1)
        G = np.einsum("tai,a,taj->tij", E, J, E)
        det = G[:, 0, 0] * G[:, 1, 1] - G[:, 0, 1] ** 2
        if np.any(det <= 0):
            raise BadParams("mesh contains degenerate triangles")
        Ginv = np.linalg.inv(G)
        area = 0.5 * np.sqrt(det)
        return E, G, Ginv, area

    @cached_property
    def mass(self) -> np.ndarray:
        """Lumped (barycentric) mass: a third of each incident triangle area."""
        area = self.triangle_data[3]
        return np.bincount(self.tris.ravel(), weights=np.repeat(area / 3, 3), minlength=self.n_nodes)

    @property
    def area(self) -> float:
        return float(self.triangle_data[3].sum())

    @cached_property
    def edges(self) -> np.ndarray:
        E = np.sort(np.concatenate([self.tris[:, [0, 1]], self.tris[:, [1, 2]], self.tris[:, [2, 0]]]), axis=1)
        return np.unique(E, axis=0)

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        e = self.edges
        n = self.n_nodes
        A = sparse.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
        return (A + A.T).tocsr()

    @cached_property
    def h(self) -> float:
        """Mean edge length (ambient chord length)."""
        E = self.triangle_data[0]
        J = np.diag(self.ambient.J)
        lens = [np.sqrt(np.einsum("ta,a,ta->t", E[..., i], J, E[..., i])) for i in range(2)]
        third = self.tri_X[:, 2] - self.tri_X[:, 1]
        lens.append(np.sqrt(np.einsum("ta,a,ta->t", third, J, third)))
        return float(np.mean(np.concatenate(lens)))

    # curvature data ----------------------------------------------------
    @property
    def n(self) -> int:
        return 2

    @cached_property
    def principal(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.shape)

    def S(self, r: int) -> np.ndarray:
        return elementary_symmetric_all(self.principal, max(r, 2))[:, r]

    def newton(self, r: int) -> np.ndarray:
        """``P_r`` per node in the orthonormal frame, ``(N, 2, 2)``."""
        return newton_tensors(self.shape, r)[r]

    def to_ambient(self, T: np.ndarray) -> np.ndarray:
        """Frame tensors ``(N, 2, 2)`` as ambient endomorphisms ``(N, m, m)``.

        ``Y -> E T E^t J Y``, which kills the normal (and position) direction.
        """
        J = np.diag(self.ambient.J)
        return np.einsum("nai,nij,nbj,b->nab", self.frame, T, self.frame, J)

    def to_frame(self, v: np.ndarray) -> np.ndarray:
        """Frame coefficients ``(N, 2)`` of ambient vectors ``(N, m)``."""
        J = np.diag(self.ambient.J)
        return np.einsum("nai,a,na->ni", self.frame, J, v)

    def from_frame(self, c: np.ndarray) -> np.ndarray:
        return np.einsum("nai,ni->na", self.frame, c)

    def flipped(self) -> "DiscreteHypersurface":
        """The same mesh with the opposite orientation (``N -> -N``)."""
        return replace(self, normal=-self.normal, shape=-self.shape, name=f"{self.name}(flipped)",
                       meta={**self.meta, "flipped": not self.meta.get("flipped", False)})

    def with_ambient(self, ambient: Ambient) -> "DiscreteHypersurface":
        if ambient.model != self.ambient.model:
            raise BadParams("replacement ambient must share the coordinate model")
        return replace(self, ambient=ambient)

    def stats(self) -> dict:
        return {
            "name": self.name,
            "nodes": int(self.n_nodes),
            "triangles": int(len(self.tris)),
            "boundary_nodes": int(self.boundary.sum()),
            "h": self.h,
            "area": self.area,
            "level": self.level,
            "accuracy": self.accuracy,
        }


def _plane_cells(imm: Immersion, level: int, cells):
    if cells is None:
        n = 8 * 2**level
        (u0, u1), (v0, v1) = imm.box
        ratio = (v1 - v0) / (u1 - u0)
        return n, max(8, int(round(n * ratio)))
    if np.isscalar(cells):
        return int(cells), int(cells)
    return tuple(int(c) for c in cells)


def discretize(imm: Immersion, level: int = 3, cells=None, step: float = FD_STEP) -> DiscreteHypersurface:
    """Mesh an immersion and attach pointwise geometry at every node.

    Closed sphere-type surfaces use subdivided icosahedra, caps a warped
    octahedral hemisphere whose rim is a mesh polygon, and charts a
    right-triangle grid with ``8 * 2**level`` cells per side unless ``cells``
    is given.
    """
    if level < 0:
        raise BadParams("level must be non-negative")
    if imm.param == "sphere":
        if imm.closed:
            params, tris = icosphere(level)
            boundary = np.zeros(len(params), dtype=bool)
        else:
            params, tris, boundary = octa_hemisphere(level)
            if not np.isclose(imm.cap_angle, np.pi / 2):
                params = warp_cap(params, imm.cap_angle)
        X = imm.position(params)
        tri_X = X[tris]
    elif imm.param == "plane":
        nx, ny = _plane_cells(imm, level, cells)
        if min(nx, ny) < 8:
            raise BadParams("need at least 8 cells per side")
        params, tris, corners, boundary = plane_grid(imm.box, (nx, ny), imm.periodic)
        X = imm.position(params)
        tri_X = imm.position(corners.reshape(-1, 2)).reshape(corners.shape[:2] + (X.shape[1],))
    else:
        raise BadParams(f"unknown parameter domain {imm.param!r}")
    geo = imm.geometry(params, step)
    return DiscreteHypersurface(
        ambient=imm.ambient,
        X=geo.x,
        tris=tris,
        tri_X=tri_X,
        frame=geo.frame,
        normal=geo.normal,
        shape=geo.shape,
        boundary=boundary,
        params=params,
        immersion=imm,
        geometry=geo,
        level=level,
        name=imm.name,
        accuracy="analytic-jet" if imm.jet is not None else "finite-difference",
    )


def rebuild(surface: DiscreteHypersurface, imm: Immersion, step: float = FD_STEP) -> DiscreteHypersurface:
    """Same mesh and parameters, geometry recomputed from another immersion."""
    geo = imm.geometry(surface.params, step)
    if imm.param == "plane" and any(imm.periodic):
        # corner positions must follow the unwrapped corner parameters
        corners = _unwrapped_corners(surface)
        tri_X = imm.position(corners.reshape(-1, 2)).reshape(corners.shape[:2] + (geo.x.shape[1],))
    else:
        tri_X = geo.x[surface.tris]
    return replace(surface, X=geo.x, tri_X=tri_X, frame=geo.frame, normal=geo.normal,
                   shape=geo.shape, immersion=imm, geometry=geo, name=imm.name,
                   accuracy="finite-difference" if imm.jet is None else "analytic-jet")


def _unwrapped_corners(surface: DiscreteHypersurface) -> np.ndarray:
    imm = surface.immersion
    (u0, u1), (v0, v1) = imm.box
    period = np.array([u1 - u0, v1 - v0])
    P = surface.params[surface.tris]  # (T, 3, 2)
    base = P[:, :1]
    d = P - base
    for k in range(2):
        if imm.periodic[k]:
            d[..., k] -= period[k] * np.round(d[..., k] / period[k])
    return base + d


def ambient_curvature_term(surface: DiscreteHypersurface, r: int, newton_field=None,
                           ambient: Optional[Ambient] = None) -> np.ndarray:
    """``trace(P_r R_N)`` per node.

    Space forms return ``c (n - r) S_r`` without touching any oracle; general
    ambients sum ``<R(e_i, N)N, P_r e_i>`` over the orthonormal frame.
    """
    amb = ambient if ambient is not None else surface.ambient
    P = surface.newton(r) if newton_field is None else np.asarray(newton_field)
    if amb.is_space_form:
        return amb.c * np.trace(P, axis1=1, axis2=2)
    cols = [amb.curvature_term(surface.X, surface.frame[..., i], surface.normal) for i in range(2)]
    R = np.stack([surface.to_frame(c) for c in cols], axis=-1)  # R[n, j, i] = <e_j, R(e_i,N)N>
    return np.einsum("nji,nji->n", R, P)


def F_r(S: np.ndarray, r: int, c: float, n: int = 2) -> np.ndarray:
    """Integrand of the r-area: ``F_0 = 1``, ``F_1 = S_1``,
    ``F_r = S_r + c (n - r + 1)/(r - 1) F_{r-2}``. ``S`` is ``(..., >= r+1)``."""
    if r == 0:
        return np.ones(S.shape[:-1])
    if r == 1:
        return S[..., 1]
    return S[..., r] + c * (n - r + 1) / (r - 1) * F_r(S, r - 2, c, n)


def r_area(surface: DiscreteHypersurface, r: int, c: Optional[float] = None) -> float:
    amb = surface.ambient
    if c is None:
        if not amb.is_space_form:
            raise NotSpaceForm("the r-area is defined for space-form ambients only")
        c = amb.c
    if not 0 <= r <= surface.n - 1:
        raise BadParams(f"r must lie in 0..{surface.n - 1}")
    S = elementary_symmetric_all(surface.principal, surface.n)
    return float(np.sum(surface.mass * F_r(S, r, c, surface.n)))
