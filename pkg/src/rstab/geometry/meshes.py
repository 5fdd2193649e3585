"""Triangle meshes of the parameter domains."""

from __future__ import annotations

import numpy as np


def _normalize(V):
    return V / np.linalg.norm(V, axis=1, keepdims=True)


def subdivide(V: np.ndarray, F: np.ndarray, project: bool = True):
    """One 1-to-4 midpoint subdivision, optionally projected to the unit sphere."""
    E = np.sort(np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]]), axis=1)
    uniq, inv = np.unique(E, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    mids = len(V) + inv.reshape(3, -1).T
    new = 0.5 * (V[uniq[:, 0]] + V[uniq[:, 1]])
    if project:
        new = _normalize(new)
    a, b, c = F.T
    ab, bc, ca = mids.T
    F2 = np.concatenate([
        np.stack([a, ab, ca], 1),
        np.stack([ab, b, bc], 1),
        np.stack([ca, bc, c], 1),
        np.stack([ab, bc, ca], 1),
    ])
    return np.concatenate([V, new]), F2


def icosphere(level: int):
    """Subdivided icosahedron on the unit sphere; ``10 * 4**level + 2`` nodes."""
    t = (1 + 5**0.5) / 2
    V = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=float)
    F = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    V = _normalize(V)
    for _ in range(level):
        V, F = subdivide(V, F)
    return V, F


def octa_hemisphere(level: int):
    """Upper half of a subdivided octahedron; the equator is a mesh polygon."""
    V = np.array([[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0], [0, 0, 1]], dtype=float)
    F = np.array([[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]])
    for _ in range(level + 1):
        V, F = subdivide(V, F)
    V[np.abs(V[:, 2]) < 1e-14, 2] = 0.0
    boundary = V[:, 2] == 0.0
    return V, F, boundary


def warp_cap(V: np.ndarray, angle: float) -> np.ndarray:
    """Map the unit upper hemisphere onto the cap of polar angle ``angle``.

    The polar angle is scaled by ``angle / (pi/2)``; the map is linear in
    normal coordinates at the pole and hence smooth.
    """
    phi = np.arccos(np.clip(V[:, 2], -1.0, 1.0))
    rxy = np.linalg.norm(V[:, :2], axis=1)
    scale = np.where(rxy > 0, 1.0 / np.where(rxy > 0, rxy, 1.0), 0.0)
    phi2 = phi * (angle / (np.pi / 2))
    out = np.empty_like(V)
    out[:, :2] = V[:, :2] * (scale * np.sin(phi2))[:, None]
    out[:, 2] = np.cos(phi2)
    return out


def plane_grid(box, cells, periodic=(False, False)):
    """Right-triangle grid of a coordinate box.

    Returns node parameters, triangles, per-triangle unwrapped corner
    parameters and the chart-boundary mask. Periodic directions identify the
    last column (row) with the first.
    """
    (u0, u1), (v0, v1) = box
    nx, ny = cells
    hx, hy = (u1 - u0) / nx, (v1 - v0) / ny
    NX = nx if periodic[0] else nx + 1
    NY = ny if periodic[1] else ny + 1
    ii, jj = np.meshgrid(np.arange(NX), np.arange(NY), indexing="xy")
    params = np.stack([u0 + ii.ravel() * hx, v0 + jj.ravel() * hy], axis=1)

    def nid(i, j):
        return (i % NX) + NX * (j % NY)

    ci, cj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
    ci, cj = ci.ravel(), cj.ravel()
    p00, p10 = nid(ci, cj), nid(ci + 1, cj)
    p01, p11 = nid(ci, cj + 1), nid(ci + 1, cj + 1)
    tris = np.concatenate([np.stack([p00, p10, p11], 1), np.stack([p00, p11, p01], 1)])
    cu = lambda i: u0 + i * hx  # noqa: E731
    cv = lambda j: v0 + j * hy  # noqa: E731
    c00 = np.stack([cu(ci), cv(cj)], 1)
    c10 = np.stack([cu(ci + 1), cv(cj)], 1)
    c01 = np.stack([cu(ci), cv(cj + 1)], 1)
    c11 = np.stack([cu(ci + 1), cv(cj + 1)], 1)
    corners = np.concatenate([np.stack([c00, c10, c11], 1), np.stack([c00, c11, c01], 1)])
    boundary = np.zeros(len(params), dtype=bool)
    if not periodic[0]:
        boundary |= (ii.ravel() == 0) | (ii.ravel() == nx)
    if not periodic[1]:
        boundary |= (jj.ravel() == 0) | (jj.ravel() == ny)
    return params, tris, corners, boundary
