"""Geodesic-ball domains, the pinching hypothesis and the principal-eigenvalue lower bound."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import csgraph

from .assembly import DiscreteOperator, assemble_Tr
from .errors import (
    BadParams,
    EmptyBoundary,
    EmptyDomain,
    MissingSecInfimum,
    NotConstantHr1,
    PinchingFails,
)
from .geometry.ambient import Ambient, geodesic_distance
from .geometry.surface import DiscreteHypersurface, ambient_curvature_term
from .newton import elementary_symmetric_all
from .spectral import SpectralResult, collatz_wielandt_lower, principal_eigen

__all__ = [
    "BallDomain",
    "BoundValue",
    "BoundCheck",
    "PinchingResult",
    "ball_domain",
    "eigenvalue_lower_bound",
    "geodesic_distance",
    "pinching_check",
    "preimage_radius",
    "verify_bound",
    "write_sweep_csv",
]


@dataclass(frozen=True, eq=False)
class BallDomain:
    center: np.ndarray
    R: float
    nodes: np.ndarray  # bool mask of the component
    dirichlet: np.ndarray  # bool mask of its boundary nodes
    rho: np.ndarray  # ambient distance of every surface node to the centre

    @property
    def interior(self) -> np.ndarray:
        return self.nodes & ~self.dirichlet

    @property
    def empty_boundary(self) -> bool:
        return not bool(np.any(self.dirichlet))

    @property
    def size(self) -> int:
        return int(self.nodes.sum())


def ball_domain(surface: DiscreteHypersurface, p, R: float) -> BallDomain:
    """The edge-connected component of ``x^{-1}(closed ball(p, R))`` nearest ``p``.

    Its Dirichlet nodes are those with a neighbour outside the component, plus
    any surface-boundary nodes it contains.
    """
    if not R > 0:
        raise BadParams("ball radius must be positive")
    p = np.asarray(p, dtype=float)
    rho = geodesic_distance(surface.ambient, surface.X, p)
    inside = rho <= R * (1 + 1e-12)
    if not np.any(inside):
        raise EmptyDomain(f"no node within distance {R} of the centre")
    idx = np.flatnonzero(inside)
    seed = idx[np.argmin(rho[idx])]
    adj = surface.adjacency
    _, labels = csgraph.connected_components(adj[idx][:, idx], directed=False)
    comp = idx[labels == labels[np.searchsorted(idx, seed)]]
    nodes = np.zeros(surface.n_nodes, dtype=bool)
    nodes[comp] = True
    outside_nb = np.asarray(adj[:, ~nodes].sum(axis=1)).ravel() > 0
    dirichlet = nodes & (outside_nb | surface.boundary)
    return BallDomain(center=p, R=float(R), nodes=nodes, dirichlet=dirichlet, rho=rho)


@dataclass(frozen=True)
class PinchingResult:
    holds: bool
    worst_ratio: float
    min_ratio: float
    sec_infimum: float
    worst_node: int
    max_q: float  # max of trace(P_r A^2) + trace(P_r R_N)


def pinching_check(surface: DiscreteHypersurface, r: int, ambient: Optional[Ambient] = None,
                   nodes: Optional[np.ndarray] = None, tol: float = 1e-9) -> PinchingResult:
    """``0 < trace(P_r A^2) / trace(P_r) <= -inf Sec`` node-wise."""
    amb = surface.ambient if ambient is None else ambient
    if amb.sec_infimum is None:
        raise MissingSecInfimum("the ambient does not declare its sectional-curvature infimum")
    P = surface.newton(r)
    A = surface.shape
    trP = np.trace(P, axis1=1, axis2=2)
    if np.any(trP == 0):
        raise BadParams("trace(P_r) vanishes at some node")
    num = np.einsum("nij,njk,nki->n", P, A, A)
    ratio = num / trP
    sel = np.ones(surface.n_nodes, dtype=bool) if nodes is None else np.asarray(nodes, dtype=bool)
    rs = ratio[sel]
    sec = float(amb.sec_infimum)
    bound = -sec
    holds = bool(np.all(rs > 0) and np.all(rs <= bound + tol * (1 + abs(bound))))
    worst = int(np.flatnonzero(sel)[np.argmax(rs)])
    q = num + ambient_curvature_term(surface, r, P, amb)
    return PinchingResult(holds, float(np.max(rs)), float(np.min(rs)), sec, worst,
                          float(np.max(q[sel])))


@dataclass(frozen=True)
class BoundValue:
    operative: float  # uses |S_{r+1}|
    statement: float  # uses S_{r+1} as signed
    min_Sr: float
    S_r1: float
    R: float

    @property
    def forms_differ(self) -> bool:
        return self.operative != self.statement


def eigenvalue_lower_bound(surface: DiscreteHypersurface, r: int, domain: BallDomain,
                           ambient: Optional[Ambient] = None, tol: float = 1e-6) -> BoundValue:
    """``(2/R^2) ((n - r) min S_r - (r+1) |S_{r+1}| R)`` over the domain's nodes."""
    pin = pinching_check(surface, r, ambient, domain.nodes)
    if not pin.holds:
        raise PinchingFails(
            f"pinching ratio {pin.worst_ratio:.6g} exceeds -inf Sec = {0.0 - pin.sec_infimum:.6g}"
        )
    S = elementary_symmetric_all(surface.principal[domain.nodes], r + 1)
    Sr1 = S[:, r + 1]
    if np.ptp(Sr1) > tol * (1 + np.max(np.abs(Sr1))):
        raise NotConstantHr1(f"S_{r + 1} varies by {np.ptp(Sr1):.3e} on the domain")
    n, R = surface.n, domain.R
    min_Sr = float(np.min(S[:, r]))
    s1 = float(np.mean(Sr1))
    op = 2.0 / R**2 * ((n - r) * min_Sr - (r + 1) * abs(s1) * R)
    st = 2.0 / R**2 * ((n - r) * min_Sr - (r + 1) * s1 * R)
    return BoundValue(op, st, min_Sr, s1, R)


@dataclass(frozen=True)
class BoundCheck:
    lam: float
    bound: BoundValue
    slack: float
    tol: float
    passed: bool
    passed_statement: bool
    cw_value: float
    cw_ok: bool
    test_function_positive: bool
    q_nonpositive: bool
    spectral: SpectralResult = field(repr=False)

    def row(self) -> dict:
        return {"R": self.bound.R, "lambda": self.lam, "bound": self.bound.operative,
                "bound_statement": self.bound.statement, "slack": self.slack, "tol": self.tol,
                "pass": self.passed}


def verify_bound(surface: DiscreteHypersurface, r: int, domain: BallDomain,
                 tol: Optional[float] = None, ambient: Optional[Ambient] = None,
                 op: Optional[DiscreteOperator] = None) -> BoundCheck:
    """Solve the principal eigenvalue on the ball domain and compare with the bound.

    Also evaluates the test function ``R^2 - rho^2`` through the sup-inf
    formula, which must not exceed the computed eigenvalue.
    """
    if domain.empty_boundary:
        raise EmptyBoundary("the domain covers the whole surface; the bound needs a proper domain")
    bound = eigenvalue_lower_bound(surface, r, domain, ambient)
    pin = pinching_check(surface, r, ambient, domain.nodes)
    if op is None:
        op = assemble_Tr(surface, r, ambient)
    op = op.restrict(domain.interior, label=f"{op.label} on ball R={domain.R:g}")
    res = principal_eigen(op)
    if tol is None:
        tol = max(1e-8 * (1 + abs(res.lam)), 10 * res.residual)
    slack = res.lam - bound.operative
    f = domain.R**2 - domain.rho**2
    positive = bool(np.all(f[op.interior] > 0))
    cw = collatz_wielandt_lower(op, np.where(op.interior, f, 0.0)) if positive else -np.inf
    return BoundCheck(
        lam=res.lam,
        bound=bound,
        slack=slack,
        tol=float(tol),
        passed=bool(slack >= -tol),
        passed_statement=bool(res.lam - bound.statement >= -tol),
        cw_value=float(cw),
        cw_ok=bool(cw <= res.lam + tol),
        test_function_positive=positive,
        q_nonpositive=bool(pin.max_q <= 1e-9),
        spectral=res,
    )


def preimage_radius(name: str, R: float, **params) -> float:
    """Chart radius of the ball of radius ``R`` about the chart origin.

    Exact for the horosphere and equidistant charts of the catalog.
    """
    if name == "horosphere":
        return float(2.0 * np.sinh(R / 2.0))
    if name == "equidistant":
        d = float(params.get("distance", 0.5))
        w = (np.cosh(R) + np.sinh(d) ** 2) / np.cosh(d) ** 2
        return float(np.sqrt(max(w * w - 1.0, 0.0)))
    raise BadParams(f"no closed-form preimage radius for {name!r}")


def write_sweep_csv(path, rows) -> None:
    rows = list(rows)
    if not rows:
        raise BadParams("no rows to write")
    keys = list(rows[0])
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for row in rows:
            w.writerow(row)
