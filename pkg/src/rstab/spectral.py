"""Principal eigenvalues, sup-inf bounds and stability certificates.

Convention throughout: ``lambda`` solves ``T g + lambda g = 0``, i.e. it is
an eigenvalue of ``-T``; the principal one is the bottom of that spectrum.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla
from scipy import sparse
from scipy.sparse import linalg as spla

from .assembly import DiscreteOperator, adjoint
from .errors import BadParams, NonPositiveTestFunction, PositivityLost, SolverDivergence

CONVENTION = "T g + lambda g = 0 (lambda is an eigenvalue of -T)"
DENSE_LIMIT = 700


@dataclass(frozen=True)
class SpectralResult:
    lam: float
    eigenfunction: np.ndarray  # full nodal vector, max = 1, zero off the interior
    residual: float
    positivity_margin: float
    iterations: int
    method: str
    ritz: Optional[np.ndarray] = None
    convention: str = CONVENTION
    label: str = ""

    def summary(self) -> dict:
        out = {
            "lambda": self.lam,
            "residual": self.residual,
            "positivity_margin": self.positivity_margin,
            "iterations": self.iterations,
            "method": self.method,
            "convention": self.convention,
        }
        if self.ritz is not None:
            out["ritz_real_parts"] = [float(z.real) for z in self.ritz]
        return out


def _pencil(op: DiscreteOperator, mask=None):
    if mask is not None:
        op = op.restrict(mask)
    if not np.any(op.interior):
        raise BadParams("operator has no interior unknowns")
    W, M = op.reduced()
    return op, (-W).tocsr(), M


def _residual(A, M, g, lam) -> float:
    r = (A @ g) / M - lam * g
    return float(np.sqrt(np.sum(M * r * r) / np.sum(M * g * g)))


def _finish(op, g, lam, A, M, iterations, method, ritz=None) -> SpectralResult:
    g = np.real(g)
    if np.sum(g * M) < 0:
        g = -g
    g = g / np.max(np.abs(g))
    return SpectralResult(
        lam=float(lam),
        eigenfunction=op.extend(g),
        residual=_residual(A, M, g, lam),
        positivity_margin=float(np.min(g)),
        iterations=iterations,
        method=method,
        ritz=ritz,
        label=op.label,
    )


def gershgorin_lower(A: sparse.csr_matrix, M: np.ndarray) -> float:
    """A lower bound for the spectrum of the pencil ``(A, M)`` (``M`` diagonal)."""
    d = A.diagonal()
    off = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(d)
    return float(np.min((d - off) / M))


def principal_eigen_selfadjoint(op: DiscreteOperator, mask=None, tol: float = 1e-10,
                                maxiter: int = 5000) -> SpectralResult:
    """Bottom of the spectrum of ``-T`` on the masked subspace (generalised pencil)."""
    if not op.symmetric:
        raise BadParams("operator is not self-adjoint; use principal_eigen_nonselfadjoint")
    op, A, M = _pencil(op, mask)
    n = len(M)
    if n <= DENSE_LIMIT:
        vals, vecs = sla.eigh(A.toarray(), np.diag(M), subset_by_index=[0, 0])
        return _finish(op, vecs[:, 0], vals[0], A, M, 1, "dense-eigh")
    shift = gershgorin_lower(A, M)
    shift -= 1e-3 * (1.0 + abs(shift))
    try:
        vals, vecs = spla.eigsh(A, k=1, M=sparse.diags(M).tocsc(), sigma=shift, which="LM",
                                tol=tol, maxiter=maxiter)
    except spla.ArpackNoConvergence as exc:
        raise SolverDivergence(f"shift-invert Lanczos did not converge: {exc}") from exc
    return _finish(op, vecs[:, 0], vals[0], A, M, 0, "shift-invert-lanczos")


def _is_z_matrix(A: sparse.csr_matrix, tol: float = 0.0) -> bool:
    C = A.tocoo()
    off = C.row != C.col
    scale = np.max(np.abs(C.data)) if C.nnz else 1.0
    return bool(np.all(C.data[off] <= tol * scale))


def _ritz(A, M, lam: float, count: int):
    n = len(M)
    count = min(count, n)
    if n <= DENSE_LIMIT or count >= n - 1:
        vals = sla.eigvals(A.toarray(), np.diag(M))
    else:
        delta = 0.1 * (1.0 + abs(lam))
        vals = spla.eigs(A.tocsc(), k=count, M=sparse.diags(M).tocsc(), sigma=lam - delta,
                         which="LM", return_eigenvectors=False)
    vals = vals[np.argsort(vals.real)]
    return vals[:count]


def principal_eigen_nonselfadjoint(op: DiscreteOperator, mask=None, tol: float = 1e-11,
                                   maxiter: int = 500, ritz: int = 10) -> SpectralResult:
    """Principal (Perron) pair of a possibly non-symmetric operator.

    Shifted inverse iteration on ``-T - s``, started at ``s = -sigma`` with
    ``sigma = 1 + max row sum of |T|`` and then raised to the Collatz-Wielandt
    lower bound ``min(-T u / u)``. For Z-matrices that bound never overshoots
    the principal eigenvalue, so each solve keeps a positive iterate; for
    other matrices the shift moves only halfway. A sign change in the iterate
    is reported as PositivityLost.
    """
    op, A, M = _pencil(op, mask)
    n = len(M)
    Mop = sparse.diags(M).tocsc()
    B = sparse.diags(1.0 / M) @ A
    sigma = 1.0 + float(np.max(np.asarray(abs(B).sum(axis=1)).ravel()))
    s = -sigma
    z = _is_z_matrix(A)
    u = np.ones(n)
    lo = hi = s
    best, stalled = np.inf, 0
    for it in range(1, maxiter + 1):
        try:
            with np.errstate(all="raise"):
                w = spla.splu((A - s * Mop).tocsc()).solve(M * u)
        except (RuntimeError, FloatingPointError):
            # the shift landed on the eigenvalue itself
            break
        if not np.all(np.isfinite(w)):
            break
        scale = np.max(np.abs(w))
        if np.sum(w) < 0:
            w = -w
        if np.min(w) < -1e-10 * scale:
            raise PositivityLost(f"iterate changed sign at step {it} (shift {s:.6g})")
        u = np.maximum(w, 0.0) / np.max(w)
        if np.min(u) <= 0:
            raise PositivityLost("iterate vanished at an interior node")
        ratio = (A @ u) / (M * u)
        lo, hi = float(np.min(ratio)), float(np.max(ratio))
        gap = hi - lo
        if gap <= tol * (1.0 + abs(lo)):
            break
        # round-off floor: the gap stopped shrinking at a tiny level
        stalled = stalled + 1 if gap > 0.5 * best else 0
        best = min(best, gap)
        if stalled >= 5 and gap <= 1e-7 * (1.0 + abs(lo)):
            break
        if z:
            s = lo
        elif lo > s:
            s = s + 0.5 * (lo - s)
    else:
        raise SolverDivergence(f"no convergence after {maxiter} shifted solves (gap {hi - lo:.3e})")
    lam = 0.5 * (lo + hi)
    values = None
    if ritz:
        values = _ritz(A, M, lam, ritz)
        slack = 1e-6 * (1.0 + abs(lam))
        if np.any(values.real < lam - slack):
            raise SolverDivergence(
                f"a Ritz value ({values.real.min():.6g}) lies below the principal value {lam:.6g}"
            )
    method = "noda-inverse-iteration" if z else "damped-inverse-iteration"
    return _finish(op, u, lam, A, M, it, method, values)


def principal_eigen(op: DiscreteOperator, mask=None, **kw) -> SpectralResult:
    if op.symmetric:
        return principal_eigen_selfadjoint(op, mask)
    return principal_eigen_nonselfadjoint(op, mask, **kw)


@dataclass(frozen=True)
class AdjointCheck:
    lam: float
    lam_adjoint: float
    gap: float
    phi_star: np.ndarray


def adjoint_spectrum_check(op: DiscreteOperator, mask=None, tol: float = 1e-12) -> AdjointCheck:
    if mask is not None:
        op = op.restrict(mask)
    if not np.any(op.K.data) and not np.any(op.D.data) and not np.any(op.V):
        z = np.zeros(op.n)
        return AdjointCheck(0.0, 0.0, 0.0, z)
    a = principal_eigen_nonselfadjoint(op, tol=tol, ritz=0)
    b = principal_eigen_nonselfadjoint(adjoint(op), tol=tol, ritz=0)
    return AdjointCheck(a.lam, b.lam, abs(a.lam - b.lam), b.eigenfunction)


def collatz_wielandt_lower(op: DiscreteOperator, u: np.ndarray) -> float:
    """``min over interior nodes of -(T u)/u`` (values off the interior are treated as 0)."""
    u = np.asarray(u, dtype=float)
    ui = u[op.interior] if len(u) == op.n else u
    if ui.shape != (int(op.interior.sum()),):
        raise BadParams("test function does not match the operator")
    if np.any(ui <= 0) or not np.all(np.isfinite(ui)):
        raise NonPositiveTestFunction("test function must be positive on interior nodes")
    W, M = op.reduced()
    return float(np.min(-(W @ ui) / (M * ui)))


def quadratic_form(op: DiscreteOperator, f: np.ndarray, g: Optional[np.ndarray] = None) -> float:
    """``I(f, g) = -int f T g`` on the interior unknowns."""
    f = np.asarray(f, dtype=float)
    g = f if g is None else np.asarray(g, dtype=float)
    W, _ = op.reduced()
    fi = f[op.interior] if len(f) == op.n else f
    gi = g[op.interior] if len(g) == op.n else g
    return float(-fi @ (W @ gi))


def discretization_tolerance(lam_coarse: float, lam_fine: float, floor: float = 1e-8) -> float:
    """``10 x`` the two-level change of an eigenvalue, never below ``floor (1 + |lambda|)``."""
    return max(10.0 * abs(lam_fine - lam_coarse), floor * (1.0 + abs(lam_fine)))


@dataclass(frozen=True)
class StabilityCertificate:
    verdict: str  # stable | unstable | inconclusive
    method: str  # eigen | supersolution
    tol: float
    tolerance_source: str
    lam: Optional[float] = None
    witness: Optional[dict] = None
    grade: str = ""
    marginal: bool = False
    notes: tuple = ()
    spectral: Optional[SpectralResult] = field(default=None, repr=False)

    def summary(self) -> dict:
        out = {"verdict": self.verdict, "method": self.method, "tol": self.tol,
               "tolerance_source": self.tolerance_source, "grade": self.grade,
               "marginal": self.marginal, "notes": list(self.notes)}
        if self.lam is not None:
            out["lambda"] = self.lam
        if self.witness is not None:
            out["witness"] = {k: v for k, v in self.witness.items() if k != "u"}
        return out


def _witness(op: DiscreteOperator, u: np.ndarray, kind: str, tol: float) -> dict:
    Tu = op.apply(u)[op.interior]
    variant = "strict" if np.min(Tu) < -tol else "weak"
    return {"kind": kind, "u": u, "max_Tu": float(np.max(Tu)),
            "min_u": float(np.min(u[op.interior])), "variant": variant}


def verify_witness(op: DiscreteOperator, witness: dict, tol: float = 1e-9) -> bool:
    """Independent check: ``u > 0`` inside and ``T u <= 0`` there."""
    u = np.asarray(witness["u"], dtype=float)
    Tu = op.apply(u)[op.interior]
    scale = 1.0 + float(np.max(np.abs(u)))
    return bool(np.all(u[op.interior] > 0) and np.all(Tu <= tol * scale))


def stability_certificate(op: DiscreteOperator, mode: str = "eigen", tol: Optional[float] = None,
                          eps: float = 1e-3, mask=None) -> StabilityCertificate:
    """Certify stability of ``op``.

    ``eigen``: stable when ``lambda > tol``, unstable when ``lambda < -tol``,
    otherwise inconclusive (marginal). ``supersolution``: solve ``T u = -eps``
    with Dirichlet data 1; a positive ``u`` is a direct witness.
    """
    if mask is not None:
        op = op.restrict(mask)
    source = "caller"
    if mode == "eigen":
        res = principal_eigen(op)
        if tol is None:
            tol = max(1e-8 * (1.0 + abs(res.lam)), 10 * res.residual)
            source = "solver"
        grade = "self-adjoint" if op.symmetric else "principal-eigenfunction"
        notes = []
        if res.lam > tol:
            verdict = "stable"
            witness = _witness(op, res.eigenfunction, "principal_eigenfunction", tol)
        elif res.lam < -tol:
            verdict, witness = "unstable", None
        else:
            verdict, witness = "inconclusive", None
            notes.append("marginal: |lambda| within tolerance")
        if verdict == "stable" and res.positivity_margin <= 0:
            verdict, witness = "inconclusive", None
            notes.append("eigenfunction not positive")
        return StabilityCertificate(verdict, "eigen", float(tol), source, res.lam, witness, grade,
                                    verdict == "inconclusive" and abs(res.lam) <= tol,
                                    tuple(notes), res)
    if mode != "supersolution":
        raise BadParams(f"unknown certificate mode {mode!r}")
    if tol is None:
        tol = 1e-10
        source = "solver"
    W = op.W
    I = np.flatnonzero(op.interior)
    Bn = np.flatnonzero(~op.interior)
    rhs = -eps * op.M[I] - (W[I][:, Bn] @ np.ones(len(Bn)) if len(Bn) else 0.0)
    try:
        uI = spla.spsolve(W[I][:, I].tocsc(), rhs)
    except RuntimeError:
        uI = np.full(len(I), np.nan)
    u = np.ones(op.n)
    u[I] = uI
    ok = bool(np.all(np.isfinite(uI)) and np.all(uI > 0))
    if ok:
        witness = _witness(op, u, "supersolution", tol)
        ok = verify_witness(op, witness, 1e-8)
    if ok:
        return StabilityCertificate("stable", "supersolution", float(tol), source, None, witness,
                                    "direct-witness")
    return StabilityCertificate("inconclusive", "supersolution", float(tol), source, None, None,
                                "none", notes=("no positive supersolution found",))


def write_eigenfunction_csv(path, result: SpectralResult, coords: np.ndarray) -> None:
    """Rows ``node, coordinates..., value``."""
    coords = np.asarray(coords, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node"] + [f"c{i}" for i in range(coords.shape[1])] + ["value"])
        for i, (c, v) in enumerate(zip(coords, result.eigenfunction)):
            w.writerow([i, *(f"{x:.17g}" for x in c), f"{v:.17g}"])
