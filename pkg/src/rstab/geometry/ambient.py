"""Ambient three-manifolds in their standard flat-coordinate models.

Euclidean space is R^3. The unit sphere S^3 and hyperbolic space H^3 live in
R^4 (the hyperboloid model uses the Lorentz form ``diag(1, 1, 1, -1)`` with
the time coordinate last). Only the bilinear form ``J`` differs between the
models; all tangent-vector algebra in this package goes through it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from ..errors import BadParams, GeneralAmbientUnsupported, OracleFailure

MODELS = ("euclidean", "sphere", "hyperboloid")

CurvatureOracle = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Ambient:
    """An ambient manifold.

    ``kind`` is ``"space_form"`` or ``"general"``. A general ambient keeps the
    coordinate model (and hence the metric) of ``model`` but supplies its own
    curvature through ``curvature_oracle(points, Y, N) -> R(Y, N)N``, all
    arguments vectorised as ``(..., m)`` arrays.
    """

    model: str
    kind: str = "space_form"
    c: Optional[float] = None
    curvature_oracle: Optional[CurvatureOracle] = field(default=None, compare=False)
    sec_infimum: Optional[float] = None
    serial_oracle: bool = False
    name: str = ""
    wraps_space_form: bool = False

    def __post_init__(self):
        if self.model not in MODELS:
            raise BadParams(f"unknown ambient model {self.model!r}")
        if self.kind == "space_form":
            expected = {"euclidean": 0.0, "sphere": 1.0, "hyperboloid": -1.0}[self.model]
            if self.c is None:
                object.__setattr__(self, "c", expected)
            elif float(self.c) != expected:
                raise BadParams(
                    f"model {self.model!r} has sectional curvature {expected}, got c={self.c}"
                )
            if self.sec_infimum is None:
                object.__setattr__(self, "sec_infimum", expected)
        elif self.kind == "general":
            if self.curvature_oracle is None:
                raise BadParams("a general ambient needs a curvature oracle")
        else:
            raise BadParams(f"unknown ambient kind {self.kind!r}")

    # constructors -------------------------------------------------------
    @classmethod
    def euclidean(cls) -> "Ambient":
        return cls(model="euclidean", name="R3")

    @classmethod
    def sphere(cls) -> "Ambient":
        return cls(model="sphere", name="S3")

    @classmethod
    def hyperbolic(cls) -> "Ambient":
        return cls(model="hyperboloid", name="H3")

    @classmethod
    def space_form(cls, c: float) -> "Ambient":
        if c == 0:
            return cls.euclidean()
        if c == 1:
            return cls.sphere()
        if c == -1:
            return cls.hyperbolic()
        raise BadParams("only the unit-curvature models c in {-1, 0, 1} are supported")

    @classmethod
    def general(cls, model: str, oracle: CurvatureOracle, sec_infimum=None,
                serial_oracle: bool = False, name: str = "general") -> "Ambient":
        return cls(model=model, kind="general", curvature_oracle=oracle,
                   sec_infimum=sec_infimum, serial_oracle=serial_oracle, name=name)

    def as_general(self) -> "Ambient":
        """The same space form, but seen only through its curvature oracle."""
        if self.is_space_form:
            c = float(self.c)
            J = self.J

            def oracle(points, Y, N):
                NN = np.einsum("...a,ab,...b->...", N, J, N)
                YN = np.einsum("...a,ab,...b->...", Y, J, N)
                return c * (NN[..., None] * Y - YN[..., None] * N)

            return replace(self, kind="general", curvature_oracle=oracle,
                           name=f"{self.name or self.model}-as-general",
                           wraps_space_form=True)
        return self

    # model data ---------------------------------------------------------
    @property
    def is_space_form(self) -> bool:
        return self.kind == "space_form"

    @property
    def dim(self) -> int:
        """Dimension of the flat coordinate space."""
        return 3 if self.model == "euclidean" else 4

    @property
    def J(self) -> np.ndarray:
        if self.model == "hyperboloid":
            return np.diag([1.0, 1.0, 1.0, -1.0])
        return np.eye(self.dim)

    @property
    def model_curvature(self) -> float:
        return {"euclidean": 0.0, "sphere": 1.0, "hyperboloid": -1.0}[self.model]

    def inner(self, u, v) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return np.einsum("...a,a,...a->...", u, np.diag(self.J), v)

    def norm(self, v) -> np.ndarray:
        return np.sqrt(np.maximum(self.inner(v, v), 0.0))

    # normal geodesics ---------------------------------------------------
    def jacobi(self, s):
        """``(C(s), S(s))`` with ``d exp_x(sN) = C(s) I - S(s) A`` on tangents."""
        s = np.asarray(s, dtype=float)
        k = self.model_curvature
        if k == 0:
            return np.ones_like(s), s
        if k > 0:
            return np.cos(s), np.sin(s)
        return np.cosh(s), np.sinh(s)

    def exp_normal(self, x, N, s):
        """Point ``exp_x(s N)`` and the transported unit normal there."""
        x = np.asarray(x, dtype=float)
        N = np.asarray(N, dtype=float)
        s = np.asarray(s, dtype=float)[..., None]
        k = self.model_curvature
        if k == 0:
            return x + s * N, N.copy()
        if k > 0:
            return np.cos(s) * x + np.sin(s) * N, -np.sin(s) * x + np.cos(s) * N
        return np.cosh(s) * x + np.sinh(s) * N, np.sinh(s) * x + np.cosh(s) * N

    # curvature ----------------------------------------------------------
    def curvature_term(self, points, Y, N) -> np.ndarray:
        """``R(Y, N)N`` through the oracle (space forms use the closed form)."""
        if self.is_space_form:
            return self.as_general().curvature_oracle(points, Y, N)
        try:
            out = np.asarray(self.curvature_oracle(points, Y, N), dtype=float)
        except Exception as exc:  # noqa: BLE001 - user callback
            raise OracleFailure(f"curvature oracle raised: {exc}") from exc
        if out.shape != np.shape(Y) or not np.all(np.isfinite(out)):
            raise OracleFailure("curvature oracle returned a malformed result")
        return out


def geodesic_distance(ambient: Ambient, p, q) -> np.ndarray:
    """Closed-form distance in the three model spaces.

    Chordal formulas are used so that short distances keep full precision.
    """
    if not (ambient.is_space_form or ambient.wraps_space_form):
        raise GeneralAmbientUnsupported("distance needs a model-space ambient")
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = q - p
    if ambient.model == "euclidean":
        return np.sqrt(np.sum(d * d, axis=-1))
    chord = np.sqrt(np.maximum(ambient.inner(d, d), 0.0))
    if ambient.model == "sphere":
        return 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))
    return 2.0 * np.arcsinh(chord / 2.0)
