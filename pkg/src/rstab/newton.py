"""Elementary symmetric functions, Newton tensors and admissibility.

Everything here is dimension generic (``2 <= n <= 16``) and vectorised over
leading axes: a field of shape operators is an array ``(..., n, n)`` and a
field of principal curvatures an array ``(..., n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import EmptyField, NonSymmetricInput

MAX_DIM = 16
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class CurvatureSpectrum:
    """Principal curvatures at one sample point."""

    k: tuple[float, ...]

    def __post_init__(self):
        if not 1 <= len(self.k) <= MAX_DIM:
            raise ValueError(f"dimension must be in 1..{MAX_DIM}, got {len(self.k)}")

    @property
    def n(self) -> int:
        return len(self.k)

    def S(self, r: int) -> float:
        return float(elementary_symmetric(self.k, r))

    def H(self, r: int) -> float:
        """Normalised r-mean curvature ``S_r / binom(n, r)``."""
        if r > self.n:
            return 0.0
        return self.S(r) / comb(self.n, r)


@dataclass(frozen=True)
class NewtonTensor:
    r: int
    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[-1]


@dataclass(frozen=True)
class DefinitenessClass:
    tag: str  # positive | negative | indefinite | degenerate
    margin: float
    tol: float

    @property
    def definite(self) -> bool:
        return self.tag in ("positive", "negative")

    @property
    def sign(self) -> int:
        return {"positive": 1, "negative": -1}.get(self.tag, 0)


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    sign: int
    criteria: tuple[str, ...]
    definiteness: DefinitenessClass


@dataclass(frozen=True)
class TraceResiduals:
    trace_P: float
    trace_AP: float
    trace_A2P: float
    restricted_sum: float

    def max(self) -> float:
        return max(self.trace_P, self.trace_AP, self.trace_A2P, self.restricted_sum)


def elementary_symmetric_all(k, rmax: int | None = None) -> np.ndarray:
    """All ``S_0..S_rmax`` of the trailing axis of ``k``.

    Uses the coefficients of ``prod(1 + k_i t)``, accumulated one curvature at
    a time; entries with ``r > n`` are zero.
    """
    k = np.asarray(k, dtype=float)
    n = k.shape[-1]
    if rmax is None:
        rmax = n
    width = max(rmax, n) + 1
    e = np.zeros(k.shape[:-1] + (width,))
    e[..., 0] = 1.0
    for i in range(n):
        ki = k[..., i, None]
        e[..., 1:] = e[..., 1:] + ki * e[..., :-1]
    return e[..., : rmax + 1]


def elementary_symmetric(k, r: int):
    """``S_r`` of the trailing axis of ``k`` (``S_0 = 1``, ``S_r = 0`` for ``r > n``)."""
    if r < 0:
        raise ValueError("r must be non-negative")
    if isinstance(k, CurvatureSpectrum):
        k = k.k
    k = np.asarray(k, dtype=float)
    if r > k.shape[-1]:
        return np.zeros(k.shape[:-1]) if k.ndim > 1 else 0.0
    out = elementary_symmetric_all(k, r)[..., r]
    return float(out) if np.ndim(out) == 0 else out


def restricted_symmetric(k, i: int, r: int):
    """``S_r(A_i)``: the elementary symmetric function with ``k_i`` removed.

    ``i`` is a zero-based index into the trailing axis.
    """
    if isinstance(k, CurvatureSpectrum):
        k = k.k
    k = np.asarray(k, dtype=float)
    n = k.shape[-1]
    if not 0 <= i < n:
        raise IndexError(f"curvature index {i} out of range for n={n}")
    return elementary_symmetric(np.delete(k, i, axis=-1), r)


def _check_symmetric(A: np.ndarray, tol: float = SYMMETRY_TOL) -> None:
    scale = 1.0 + np.max(np.abs(A), initial=0.0)
    asym = np.max(np.abs(A - np.swapaxes(A, -1, -2)), initial=0.0)
    if asym > tol * scale:
        raise NonSymmetricInput(f"operator not symmetric (max asymmetry {asym:.3e})")


def newton_tensors(A, rmax: int) -> np.ndarray:
    """``P_0..P_rmax`` for a (field of) symmetric operator(s).

    Built in the eigenbasis, ``P_r = Q diag(S_r(A_i)) Q^T``, which equals the
    recursion ``P_r = S_r I - A P_{r-1}`` but avoids its cancellation for
    large ``r``. Returns an array ``(rmax+1, ..., n, n)``.
    """
    A = np.asarray(A, dtype=float)
    _check_symmetric(A)
    n = A.shape[-1]
    k, Q = np.linalg.eigh(0.5 * (A + np.swapaxes(A, -1, -2)))
    # Sr_i[..., i, r] = S_r with k_i removed
    Sr_i = np.stack([elementary_symmetric_all(np.delete(k, i, axis=-1), rmax)
                     for i in range(n)], axis=-2)
    out = np.einsum("...ai,...ir,...bi->r...ab", Q, Sr_i, Q)
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def newton_tensor(A, r: int) -> NewtonTensor:
    if r < 0:
        raise ValueError("r must be non-negative")
    return NewtonTensor(r=r, matrix=newton_tensors(A, r)[r])


def trace_identities_report(A, r: int) -> TraceResiduals:
    """Residuals of the four trace identities for ``P_r`` built from ``A``.

    For a field the maximum over the field is reported.
    """
    A = np.asarray(A, dtype=float)
    _check_symmetric(A)
    n = A.shape[-1]
    k = np.linalg.eigvalsh(0.5 * (A + np.swapaxes(A, -1, -2)))
    S = elementary_symmetric_all(k, r + 2)
    P = newton_tensors(A, r)[r]
    tr = lambda X: np.trace(X, axis1=-2, axis2=-1)  # noqa: E731
    res_P = np.abs(tr(P) - (n - r) * S[..., r])
    res_AP = np.abs(tr(A @ P) - (r + 1) * S[..., r + 1])
    res_A2P = np.abs(tr(A @ A @ P) - (S[..., 1] * S[..., r + 1] - (r + 2) * S[..., r + 2]))
    restricted = sum(
        elementary_symmetric(np.delete(k, i, axis=-1), r) for i in range(n)
    )
    res_sum = np.abs(restricted - (n - r) * S[..., r])
    return TraceResiduals(
        trace_P=float(np.max(res_P)),
        trace_AP=float(np.max(res_AP)),
        trace_A2P=float(np.max(res_A2P)),
        restricted_sum=float(np.max(res_sum)),
    )


def default_tolerance(k, r: int) -> float:
    """Scale-aware definiteness tolerance ``1e-9 (1 + max|k|)^r``."""
    kmax = float(np.max(np.abs(np.asarray(k, dtype=float)), initial=0.0))
    return 1e-9 * (1.0 + kmax) ** r


def classify_definiteness(P, tol: float) -> DefinitenessClass:
    """Joint definiteness class of a field of symmetric tensors ``(..., n, n)``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    P = np.asarray(P, dtype=float)
    if P.size == 0:
        raise EmptyField("no tensors to classify")
    ev = np.linalg.eigvalsh(P.reshape((-1,) + P.shape[-2:]))
    margin = float(np.min(np.abs(ev)))
    if margin <= tol:
        tag = "degenerate"
    elif np.all(ev > tol):
        tag = "positive"
    elif np.all(ev < -tol):
        tag = "negative"
    else:
        tag = "indefinite"
    return DefinitenessClass(tag=tag, margin=margin, tol=tol)


def admissibility(shape, r: int, tol: float | None = None) -> Admissibility:
    """Direct definiteness test of ``P_r`` over a field of shape operators.

    The sufficient criteria (a) ``H_2 > 0`` with ``r = 1``, (b) ``H_{r+1} > 0``
    with a node where every ``k_i > 0``, and (c) ``H_{r+1} = 0`` with
    ``rank(A) > r`` are reported as tags; only the direct test decides.
    """
    shape = np.asarray(shape, dtype=float)
    if shape.size == 0:
        raise EmptyField("no shape operators given")
    field = shape.reshape((-1,) + shape.shape[-2:])
    n = field.shape[-1]
    k = np.linalg.eigvalsh(0.5 * (field + np.swapaxes(field, -1, -2)))
    if tol is None:
        tol = default_tolerance(k, r)
    P = newton_tensors(field, r)[r]
    cls = classify_definiteness(P, tol)

    S = elementary_symmetric_all(k, r + 1)
    Hr1 = S[:, r + 1] / comb(n, r + 1) if r + 1 <= n else np.zeros(len(field))
    criteria = []
    if r == 1 and n >= 2 and np.all(S[:, 2] > tol):
        criteria.append("a")
    if r >= 1 and np.all(Hr1 > tol) and np.any(np.all(k > tol, axis=1)):
        criteria.append("b")
    rank = np.sum(np.abs(k) > tol, axis=1)
    if r >= 1 and np.all(np.abs(Hr1) <= tol) and np.all(rank > r):
        criteria.append("c")
    return Admissibility(
        admissible=cls.definite,
        sign=cls.sign,
        criteria=tuple(criteria),
        definiteness=cls,
    )
