"""ASCII OFF triangle meshes and curvature estimation by local quadratic fits."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import MeshFormatError
from .ambient import Ambient
from .surface import DiscreteHypersurface


def _tokens(text: str):
    """Yield ``(line_number, fields)`` with comments and blank lines removed."""
    for no, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if line:
            yield no, line.split()


def read_off(path) -> tuple[np.ndarray, np.ndarray]:
    """Vertices ``(N, 3)`` and triangles ``(T, 3)``; polygons are fan-triangulated."""
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise MeshFormatError(f"{path}: cannot read ({exc})") from exc
    lines = list(_tokens(text))
    if not lines:
        raise MeshFormatError(f"{path}: empty file")
    no, head = lines[0]
    if head[0] != "OFF":
        raise MeshFormatError(f"{path}:{no}: expected 'OFF' header")
    rest = head[1:]
    idx = 1
    if not rest:
        if len(lines) < 2:
            raise MeshFormatError(f"{path}: missing counts line")
        no, rest = lines[1]
        idx = 2
    try:
        nv, nf = int(rest[0]), int(rest[1])
    except (IndexError, ValueError):
        raise MeshFormatError(f"{path}:{no}: bad counts line") from None
    if len(lines) < idx + nv + nf:
        raise MeshFormatError(f"{path}: expected {nv} vertices and {nf} faces, file too short")
    V = np.empty((nv, 3))
    for k in range(nv):
        no, f = lines[idx + k]
        try:
            V[k] = [float(v) for v in f[:3]]
        except ValueError:
            raise MeshFormatError(f"{path}:{no}: bad vertex") from None
        if len(f) < 3:
            raise MeshFormatError(f"{path}:{no}: vertex needs three coordinates")
    tris = []
    for k in range(nf):
        no, f = lines[idx + nv + k]
        try:
            m = int(f[0])
            ids = [int(v) for v in f[1:1 + m]]
        except (IndexError, ValueError):
            raise MeshFormatError(f"{path}:{no}: bad face") from None
        if m < 3 or len(ids) != m or min(ids) < 0 or max(ids) >= nv:
            raise MeshFormatError(f"{path}:{no}: face indices invalid")
        tris.extend([ids[0], ids[j], ids[j + 1]] for j in range(1, m - 1))
    return V, np.asarray(tris, dtype=np.int64).reshape(-1, 3)


def write_off(path, V, F) -> None:
    V = np.asarray(V, dtype=float)
    F = np.asarray(F, dtype=np.int64)
    with open(path, "w") as fh:
        fh.write(f"OFF\n{len(V)} {len(F)} 0\n")
        np.savetxt(fh, V, fmt="%.17g")
        np.savetxt(fh, np.column_stack([np.full(len(F), 3), F]), fmt="%d")


def _rings(n: int, tris: np.ndarray, depth: int) -> list[np.ndarray]:
    from scipy import sparse

    e = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    A = sparse.coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
    A = ((A + A.T) > 0).astype(np.int8).tocsr()
    reach = sparse.identity(n, dtype=np.int8, format="csr")
    for _ in range(depth):
        reach = ((reach + reach @ A) > 0).astype(np.int8)
    return [reach.indices[reach.indptr[i]:reach.indptr[i + 1]] for i in range(n)]


def surface_from_mesh(V, F, name: str = "mesh", ring: int = 2) -> DiscreteHypersurface:
    """A Euclidean surface from raw positions; curvature from quadratic height fits.

    The normal is the opposite of the right-hand face normal, so a
    counter-clockwise (outward) sphere mesh gets the inward normal and
    positive curvature. Around each node the ``ring``-neighbourhood is fitted
    by ``z = a u^2 + b u v + c v^2 + d u + e v``; the result is lower accuracy
    than an analytic jet and is flagged as such.
    """
    V = np.asarray(V, dtype=float)
    F = np.asarray(F, dtype=np.int64)
    n = len(V)
    tri_X = V[F]
    fn = np.cross(tri_X[:, 1] - tri_X[:, 0], tri_X[:, 2] - tri_X[:, 0])
    vn = np.zeros_like(V)
    for j in range(3):
        np.add.at(vn, F[:, j], fn)
    norms = np.linalg.norm(vn, axis=1)
    if np.any(norms == 0):
        raise MeshFormatError("isolated or degenerate vertex in mesh")
    N0 = -vn / norms[:, None]

    seed = np.where(np.abs(N0[:, :1]) < 0.9, [[1.0, 0, 0]], [[0, 1.0, 0]])
    e1 = np.cross(N0, seed)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(N0, e1)

    normal = np.empty_like(V)
    frame = np.empty((n, 3, 2))
    shape = np.empty((n, 2, 2))
    for i, nb in enumerate(_rings(n, F, ring)):
        nb = nb[nb != i]
        if len(nb) < 5:
            raise MeshFormatError(f"vertex {i} has too few neighbours for a quadratic fit")
        d = V[nb] - V[i]
        u, v, z = d @ e1[i], d @ e2[i], d @ N0[i]
        M = np.column_stack([u * u, u * v, v * v, u, v])
        coef = np.linalg.lstsq(M, z, rcond=None)[0]
        a, b, c, p, q = coef
        xu = e1[i] + p * N0[i]
        xv = e2[i] + q * N0[i]
        Nn = N0[i] - p * e1[i] - q * e2[i]
        Nn /= np.linalg.norm(Nn)
        xuu = np.array([[2 * a, b], [b, 2 * c]])  # along N0
        bij = xuu * (N0[i] @ Nn)
        T = np.column_stack([xu, xv])
        g = T.T @ T
        L = np.linalg.cholesky(g)
        Li = np.linalg.inv(L)
        frame[i] = T @ Li.T
        normal[i] = Nn
        S = Li @ bij @ Li.T
        shape[i] = 0.5 * (S + S.T)

    e = np.sort(np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]]), axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    boundary = np.zeros(n, dtype=bool)
    boundary[uniq[counts == 1].ravel()] = True
    return DiscreteHypersurface(
        ambient=Ambient.euclidean(), X=V, tris=F, tri_X=tri_X, frame=frame,
        normal=normal, shape=shape, boundary=boundary, name=name,
        accuracy="quadratic-fit",
    )
