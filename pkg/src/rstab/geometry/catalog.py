"""Catalog of test immersions with analytic data.

Closed forms attached as ``closed_form_k`` follow the orientation chosen here:
round spheres (Euclidean, hyperbolic and spherical) use the inward normal, the
horosphere and the equidistant surface use the normal pointing to the side
that makes their curvature positive.
"""

from __future__ import annotations

import numpy as np

from ..errors import BadParams, UnknownSurface
from .ambient import Ambient
from .immersion import Immersion


def _unit(w):
    w = np.asarray(w, dtype=float)
    return w / np.linalg.norm(w, axis=-1, keepdims=True)


def _positive(name, value):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise BadParams(f"{name} must be positive, got {value}")
    return value


def sphere(radius: float = 1.0, cap_angle: float = np.pi, name: str = "sphere") -> Immersion:
    rho = _positive("radius", radius)
    if not 0 < cap_angle <= np.pi:
        raise BadParams("cap angle must lie in (0, pi]")
    return Immersion(
        name=name,
        ambient=Ambient.euclidean(),
        param="sphere",
        position=lambda w: rho * _unit(w),
        normal=lambda w: -_unit(w),
        cap_angle=float(cap_angle),
        closed_form_k=(1 / rho, 1 / rho),
        params={"radius": rho, "cap_angle": float(cap_angle)},
    )


def hemisphere(radius: float = 1.0, angle: float = np.pi / 2) -> Immersion:
    """Spherical cap of polar angle ``angle`` (``pi/2`` is the hemisphere)."""
    if not 0 < angle < np.pi:
        raise BadParams("cap angle must lie in (0, pi)")
    return sphere(radius, cap_angle=angle, name="hemisphere")


def cylinder(radius: float = 1.0, height: float = 2.0) -> Immersion:
    rho = _positive("radius", radius)
    height = _positive("height", height)

    def position(u):
        th, z = u[..., 0], u[..., 1]
        return np.stack([rho * np.cos(th), rho * np.sin(th), z], axis=-1)

    def jet(u):
        th = u[:, 0]
        c, s, o = np.cos(th), np.sin(th), np.zeros(len(u))
        xu = np.stack([np.stack([-rho * s, rho * c, o], -1), np.stack([o, o, o + 1], -1)], -1)
        xuu = np.zeros(xu.shape + (2,))
        xuu[:, :, 0, 0] = np.stack([-rho * c, -rho * s, o], -1)
        return position(u), xu, xuu

    return Immersion(
        name="cylinder",
        ambient=Ambient.euclidean(),
        param="plane",
        position=position,
        normal=lambda u: np.stack([-np.cos(u[..., 0]), -np.sin(u[..., 0]), 0 * u[..., 0]], -1),
        jet=jet,
        box=((0.0, 2 * np.pi), (-height / 2, height / 2)),
        periodic=(True, False),
        closed_form_k=(1 / rho, 0.0),
        params={"radius": rho, "height": height},
    )


def flat_torus_chart(lx: float = 1.0, ly: float = 1.0, periodic: bool = True) -> Immersion:
    """The plane ``z = 0`` over ``[0, lx] x [0, ly]``.

    With ``periodic`` the mesh identifies opposite sides (an intrinsically
    flat torus); without it the chart is a Dirichlet square.
    """
    lx = _positive("lx", lx)
    ly = _positive("ly", ly)

    def position(u):
        return np.stack([u[..., 0], u[..., 1], 0 * u[..., 0]], axis=-1)

    def jet(u):
        xu = np.zeros((len(u), 3, 2))
        xu[:, 0, 0] = 1.0
        xu[:, 1, 1] = 1.0
        return position(u), xu, np.zeros((len(u), 3, 2, 2))

    return Immersion(
        name="flat_torus_chart" if periodic else "flat_square",
        ambient=Ambient.euclidean(),
        param="plane",
        position=position,
        normal=lambda u: np.broadcast_to([0.0, 0.0, 1.0], u.shape[:-1] + (3,)).copy(),
        jet=jet,
        box=((0.0, lx), (0.0, ly)),
        periodic=(bool(periodic), bool(periodic)),
        closed_form_k=(0.0, 0.0),
        params={"lx": lx, "ly": ly, "periodic": bool(periodic)},
    )


def geodesic_sphere(radius: float = 1.0, cap_angle: float = np.pi) -> Immersion:
    """Geodesic sphere about the apex of the hyperboloid; ``k = coth(radius)``."""
    rho = _positive("radius", radius)

    def position(w):
        w = _unit(w)
        return np.concatenate([np.sinh(rho) * w, np.full(w.shape[:-1] + (1,), np.cosh(rho))], -1)

    def normal(w):
        w = _unit(w)
        return -np.concatenate([np.cosh(rho) * w, np.full(w.shape[:-1] + (1,), np.sinh(rho))], -1)

    k = 1 / np.tanh(rho)
    return Immersion(
        name="geodesic_sphere",
        ambient=Ambient.hyperbolic(),
        param="sphere",
        position=position,
        normal=normal,
        cap_angle=float(cap_angle),
        closed_form_k=(k, k),
        params={"radius": rho},
    )


def geodesic_sphere_s3(radius: float = 1.0) -> Immersion:
    """Geodesic sphere of S^3 about ``(0, 0, 0, 1)``; ``k = cot(radius)``."""
    rho = _positive("radius", radius)
    if rho >= np.pi:
        raise BadParams("radius must be below pi")

    def position(w):
        w = _unit(w)
        return np.concatenate([np.sin(rho) * w, np.full(w.shape[:-1] + (1,), np.cos(rho))], -1)

    def normal(w):
        w = _unit(w)
        return np.concatenate([-np.cos(rho) * w, np.full(w.shape[:-1] + (1,), np.sin(rho))], -1)

    k = 1 / np.tan(rho)
    return Immersion(
        name="geodesic_sphere_s3",
        ambient=Ambient.sphere(),
        param="sphere",
        position=position,
        normal=normal,
        closed_form_k=(k, k),
        params={"radius": rho},
    )


def horosphere(half_width: float = 1.0) -> Immersion:
    """Horosphere through the apex, in flat horospherical coordinates.

    Points are ``(u1, u2, |u|^2/2, 1 + |u|^2/2)``; ``u = 0`` is the apex.
    """
    L = _positive("half_width", half_width)

    def position(u):
        q = 0.5 * np.sum(u * u, axis=-1)
        return np.stack([u[..., 0], u[..., 1], q, 1 + q], axis=-1)

    def normal(u):
        q = 0.5 * np.sum(u * u, axis=-1)
        return np.stack([-u[..., 0], -u[..., 1], 1 - q, -q], axis=-1)

    def jet(u):
        n = len(u)
        xu = np.zeros((n, 4, 2))
        xu[:, 0, 0] = 1.0
        xu[:, 1, 1] = 1.0
        xu[:, 2, :] = u
        xu[:, 3, :] = u
        xuu = np.zeros((n, 4, 2, 2))
        xuu[:, 2, 0, 0] = xuu[:, 2, 1, 1] = 1.0
        xuu[:, 3, 0, 0] = xuu[:, 3, 1, 1] = 1.0
        return position(u), xu, xuu

    return Immersion(
        name="horosphere",
        ambient=Ambient.hyperbolic(),
        param="plane",
        position=position,
        normal=normal,
        jet=jet,
        box=((-L, L), (-L, L)),
        closed_form_k=(1.0, 1.0),
        params={"half_width": L},
    )


def equidistant(distance: float = 0.5, half_width: float = 1.0) -> Immersion:
    """Equidistant surface at ``distance`` from the totally geodesic plane ``x3 = 0``.

    Oriented towards the plane, so ``k = tanh(distance)``; ``u = 0`` sits
    above the apex.
    """
    d = float(distance)
    if not np.isfinite(d) or d < 0:
        raise BadParams("distance must be non-negative")
    L = _positive("half_width", half_width)
    ch, sh = np.cosh(d), np.sinh(d)

    def position(u):
        w = np.sqrt(1 + np.sum(u * u, axis=-1))
        return np.stack([ch * u[..., 0], ch * u[..., 1], sh + 0 * w, ch * w], axis=-1)

    def normal(u):
        w = np.sqrt(1 + np.sum(u * u, axis=-1))
        return -np.stack([sh * u[..., 0], sh * u[..., 1], ch + 0 * w, sh * w], axis=-1)

    def jet(u):
        n = len(u)
        w = np.sqrt(1 + np.sum(u * u, axis=-1))
        xu = np.zeros((n, 4, 2))
        xu[:, 0, 0] = ch
        xu[:, 1, 1] = ch
        xu[:, 3, :] = ch * u / w[:, None]
        xuu = np.zeros((n, 4, 2, 2))
        xuu[:, 3] = ch * (np.eye(2)[None] / w[:, None, None]
                          - u[:, :, None] * u[:, None, :] / w[:, None, None] ** 3)
        return position(u), xu, xuu

    k = float(np.tanh(d))
    return Immersion(
        name="equidistant",
        ambient=Ambient.hyperbolic(),
        param="plane",
        position=position,
        normal=normal,
        jet=jet,
        box=((-L, L), (-L, L)),
        closed_form_k=(k, k),
        params={"distance": d, "half_width": L},
    )


def clifford_torus(a: float = 1 / np.sqrt(2)) -> Immersion:
    """``S^1(a) x S^1(b)`` in S^3 with ``a^2 + b^2 = 1``; ``k = (a/b, -b/a)``."""
    a = float(a)
    if not 0 < a < 1:
        raise BadParams("a must lie in (0, 1)")
    b = np.sqrt(1 - a * a)

    def position(u):
        t, p = u[..., 0], u[..., 1]
        return np.stack([a * np.cos(t), a * np.sin(t), b * np.cos(p), b * np.sin(p)], -1)

    def normal(u):
        t, p = u[..., 0], u[..., 1]
        return np.stack([b * np.cos(t), b * np.sin(t), -a * np.cos(p), -a * np.sin(p)], -1)

    def jet(u):
        t, p = u[:, 0], u[:, 1]
        o = np.zeros(len(u))
        xu = np.stack([
            np.stack([-a * np.sin(t), a * np.cos(t), o, o], -1),
            np.stack([o, o, -b * np.sin(p), b * np.cos(p)], -1),
        ], -1)
        xuu = np.zeros((len(u), 4, 2, 2))
        xuu[:, :, 0, 0] = np.stack([-a * np.cos(t), -a * np.sin(t), o, o], -1)
        xuu[:, :, 1, 1] = np.stack([o, o, -b * np.cos(p), -b * np.sin(p)], -1)
        return position(u), xu, xuu

    return Immersion(
        name="clifford_torus",
        ambient=Ambient.sphere(),
        param="plane",
        position=position,
        normal=normal,
        jet=jet,
        box=((0.0, 2 * np.pi), (0.0, 2 * np.pi)),
        periodic=(True, True),
        closed_form_k=(a / b, -b / a),
        params={"a": a},
    )


CATALOG = {
    "sphere": sphere,
    "hemisphere": hemisphere,
    "spherical_cap": hemisphere,
    "cylinder": cylinder,
    "flat_torus_chart": flat_torus_chart,
    "flat_square": lambda **kw: flat_torus_chart(periodic=False, **kw),
    "geodesic_sphere": geodesic_sphere,
    "geodesic_sphere_s3": geodesic_sphere_s3,
    "horosphere": horosphere,
    "equidistant": equidistant,
    "clifford_torus": clifford_torus,
}


def catalog_surface(name: str, **params) -> Immersion:
    try:
        factory = CATALOG[name]
    except KeyError:
        raise UnknownSurface(f"unknown catalog surface {name!r}; known: {sorted(CATALOG)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise BadParams(f"bad parameters for {name!r}: {exc}") from exc
