"""Acceptance criteria, one test and one summary line each.

Tolerances are pinned as module constants; the summary section printed at
the end of the run lists PASS/FAIL per criterion with the measured numbers.
"""

import itertools
import math

import numpy as np
import pytest

from rstab.assembly import (
    adjoint,
    assemble_operator,
    assemble_Tr,
    drift_field,
    linearization_residual,
    symmetrize,
)
from rstab.bounds import ball_domain, preimage_radius, verify_bound
from rstab.config import parse_config
from rstab.errors import PinchingFails
from rstab.geometry import catalog_surface, discretize
from rstab.newton import newton_tensors
from rstab.runner import drift_decay, suite_second_variation, symmetrization_defect
from rstab.spectral import (
    adjoint_spectrum_check,
    collatz_wielandt_lower,
    discretization_tolerance,
    principal_eigen,
    quadratic_form,
    stability_certificate,
)

from conftest import mesh, record

IDENTITY_TOL = 1e-10
IDENTITY_SAMPLES = 1000
DRIFT_MIN_ORDER = 1.0
LINEARIZATION_REL = 1e-2
ORDER_TWO = (1.8, 2.2)
SPECTRUM_REL = 1e-2
SECOND_VARIATION_REL = 1e-2
ADJOINT_GAP = 1e-8
DUALITY_REL = 1e-10
CW_SAMPLES = 50
QF_SAMPLES = 100
SQUARE_REL = 1e-2
SEED = 20261014


# ---------------------------------------------------------------------------
# fixtures shared by several criteria


def drifted_torus(level=2):
    s = mesh("flat_torus_chart", level)
    u, v = s.params.T
    b = np.column_stack([np.sin(2 * np.pi * v), 1 + 0.5 * np.cos(2 * np.pi * u)])
    return assemble_operator(s, drift=b, q=3 * np.cos(2 * np.pi * u), label="drifted torus")


def drifted_square(level=3):
    s = mesh("flat_square", level)
    return assemble_operator(s, drift=np.tile([2.0, 1.0], (s.n_nodes, 1)), interior=~s.boundary,
                             label="constant-drift square")


def manufactured_P(s):
    """Anisotropic field ``E^t (I + 0.4 S(x)) E`` whose divergence is no gradient."""
    x, y, z = s.X.T
    S = np.zeros((s.n_nodes, 3, 3))
    S[:, 0, 0], S[:, 1, 1] = x, -y
    S[:, 0, 1] = S[:, 1, 0] = y * z
    S[:, 1, 2] = S[:, 2, 1] = x
    S[:, 0, 2] = S[:, 2, 0] = 0.5 * z * z
    J = np.diag(s.ambient.J)
    return np.einsum("nia,i,nij,njb->nab", s.frame, J, np.eye(3) + 0.4 * S, s.frame)


# ---------------------------------------------------------------------------
# 1


def _brute_S(k, r):
    return sum(math.prod(c) for c in itertools.combinations(k, r)) if r <= len(k) else 0.0


def _brute_P(A, r):
    k, Q = np.linalg.eigh(A)
    d = [_brute_S(np.delete(k, i), r) for i in range(len(k))]
    return Q @ np.diag(d) @ Q.T, k


def test_ac1_newton_identities():
    rng = np.random.default_rng(SEED)
    worst = {"trace_P": 0.0, "trace_AP": 0.0, "trace_A2P": 0.0, "restricted_sum": 0.0,
             "P_vs_oracle": 0.0}
    for _ in range(IDENTITY_SAMPLES):
        n = int(rng.integers(2, 9))
        B = rng.standard_normal((n, n))
        A = 0.5 * (B + B.T)
        Ps = newton_tensors(A, n - 1)
        for r in range(n):
            P = Ps[r]
            P_ref, k = _brute_P(A, r)
            S = [_brute_S(k, j) for j in range(r + 3)]
            restricted = sum(_brute_S(np.delete(k, i), r) for i in range(n))
            res = {
                "trace_P": abs(np.trace(P) - (n - r) * S[r]),
                "trace_AP": abs(np.trace(A @ P) - (r + 1) * S[r + 1]),
                "trace_A2P": abs(np.trace(A @ A @ P) - (S[1] * S[r + 1] - (r + 2) * S[r + 2])),
                "restricted_sum": abs(restricted - (n - r) * S[r]),
                "P_vs_oracle": float(np.max(np.abs(P - P_ref))),
            }
            for key, val in res.items():
                worst[key] = max(worst[key], val)
    ok = max(worst.values()) <= IDENTITY_TOL
    record("AC1", "Newton identities", ok,
           f"{IDENTITY_SAMPLES} samples, n in 2..8, max residuals "
           + ", ".join(f"{k}={v:.2e}" for k, v in worst.items()) + f" (tol {IDENTITY_TOL:g})")
    assert ok, worst


# ---------------------------------------------------------------------------
# 2


def test_ac2_drift_vanishing():
    ok, parts = True, []
    for name in ("sphere", "geodesic_sphere"):
        for r in (0, 1):
            levels = (3, 4, 5)
            norms = [float(np.max(np.linalg.norm(drift_field(mesh(name, L), r), axis=1)))
                     for L in levels]
            hs = [mesh(name, L).h for L in levels]
            steps, good = drift_decay(norms, hs)
            ok &= good
            tags = ["floor" if st["at_floor"] else f"{st['order']:.2f}" for st in steps]
            parts.append(f"{name} r={r} max={norms[-1]:.1e} steps={'/'.join(tags)}")
    record("AC2", "space-form drift vanishing", ok,
           "; ".join(parts) + f" (order >= {DRIFT_MIN_ORDER:g} or round-off floor)")
    assert ok, parts


# ---------------------------------------------------------------------------
# 3


def test_ac3_linearization():
    s = mesh("sphere", 3)

    def f(X):
        return X[:, 0] * X[:, 1] / np.sum(X * X, axis=1)

    ts = (2e-2, 1e-2, 5e-3)
    ok, parts = True, []
    for r in (0, 1):
        res = [linearization_residual(s, r, f, t) for t in ts]
        order = np.log(res[-2].residual / res[-1].residual) / np.log(ts[-2] / ts[-1])
        good = res[-1].relative <= LINEARIZATION_REL and ORDER_TWO[0] <= order <= ORDER_TWO[1]
        ok &= good
        parts.append(f"r={r} rel={res[-1].relative:.2e} order={order:.2f}")
    record("AC3", "linearization", ok,
           "; ".join(parts) + f" (rel <= {LINEARIZATION_REL:g}, order in {ORDER_TWO})")
    assert ok, parts


# ---------------------------------------------------------------------------
# 4


def test_ac4_spectra_oracle():
    ok, parts = True, []
    for r in (0, 1):
        lam = principal_eigen(assemble_Tr(mesh("sphere", 3), r)).lam
        good = abs(lam + 2.0) <= SPECTRUM_REL * 2.0
        ok &= good
        parts.append(f"sphere r={r} lambda={lam:.6f}")
    lams = []
    for L in (3, 4):
        s = mesh("hemisphere", L)
        lams.append(principal_eigen(assemble_Tr(s, 0).restrict(~s.boundary)).lam)
    tol = discretization_tolerance(*lams)
    s = mesh("hemisphere", 4)
    cert = stability_certificate(assemble_Tr(s, 0).restrict(~s.boundary), tol=tol)
    good = abs(lams[-1]) <= tol and cert.marginal
    ok &= good
    parts.append(f"hemisphere lambda={lams[-1]:.2e} tol={tol:.2e} verdict={cert.verdict}")
    record("AC4", "spectra oracle", ok, "; ".join(parts) + f" (-2 within {SPECTRUM_REL:.0%})")
    assert ok, parts


# ---------------------------------------------------------------------------
# 5


SECOND_VARIATION_CONFIG = """
surface: {catalog: sphere, level: 3}
r: 0
verify: {r: [0, 1], t: 0.01, levels: [3, 4, 5]}
"""


@pytest.fixture(scope="module")
def second_variation():
    return suite_second_variation(parse_config(SECOND_VARIATION_CONFIG))


def _sv_parts(res, key, order_key):
    return "; ".join(f"r={c['r']} f={c['f']} rel={c[key][-1]['value']:.2e} "
                     f"order={c[order_key]['value']:.2f}" for c in res["cases"])


def test_ac5_second_variation(second_variation):
    ok = second_variation["status"] == "PASS"
    record("AC5", "second variation (identity as stated)", ok,
           _sv_parts(second_variation, "relative", "order")
           + f" (rel <= {SECOND_VARIATION_REL:g}, order ~ 2)")
    assert ok, "identity as stated does not hold on the sphere; see the decisions ledger"


def test_ac5b_second_variation_balanced(second_variation):
    ok = second_variation["status_balanced"] == "PASS"
    record("AC5b", "second variation (sign-balanced form, informational)", ok,
           _sv_parts(second_variation, "relative_balanced", "order_balanced"))
    assert ok


# ---------------------------------------------------------------------------
# 6


def test_ac6_symmetrization():
    ok, parts = True, []
    for name in ("sphere", "geodesic_sphere"):
        for r in (0, 1):
            levels = (2, 3, 4)
            errs = [symmetrization_defect(mesh(name, L), r) for L in levels]
            hs = [mesh(name, L).h for L in levels]
            steps, good = drift_decay(errs, hs)
            ok &= good
            tags = ["floor" if st["at_floor"] else f"{st['order']:.2f}" for st in steps]
            parts.append(f"{name} r={r} defect={errs[-1]:.1e} steps={'/'.join(tags)}")

    lam_sym = []
    for L in (3, 4):
        s = discretize(catalog_surface("hemisphere", angle=1.0), L)
        P = manufactured_P(s)
        T = assemble_Tr(s, 0, P=P, drift="include").restrict(~s.boundary)
        Tsym, _ = symmetrize(s, 0, P=P)
        Tsym = Tsym.restrict(~s.boundary)
        lam_sym.append(principal_eigen(Tsym).lam)
    tol = discretization_tolerance(*lam_sym)
    cert = stability_certificate(T)
    rng = np.random.default_rng(SEED)
    worst_qf = np.inf
    for _ in range(QF_SAMPLES):
        f = np.where(Tsym.interior, rng.standard_normal(Tsym.n), 0.0)
        worst_qf = min(worst_qf, quadratic_form(Tsym, f) / float(np.sum(Tsym.M * f * f)))
    implied = cert.verdict != "stable" or (lam_sym[-1] >= -tol and worst_qf >= -tol)
    good = cert.verdict == "stable" and not T.symmetric and implied
    ok &= good
    parts.append(f"manufactured: T {cert.verdict} (lambda={cert.lam:.4f}), "
                 f"lambda1(sym)={lam_sym[-1]:.4f}, min quadratic form={worst_qf:.4f}, tol={tol:.1e}")
    record("AC6", "symmetrization", ok, "; ".join(parts))
    assert ok, parts


# ---------------------------------------------------------------------------
# 7


def test_ac7_adjoint():
    op = drifted_torus()
    chk = adjoint_spectrum_check(op)
    W, M = op.reduced()
    Wt, _ = adjoint(op).reduced()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(20):
        f, g = rng.standard_normal((2, len(M)))
        lhs, rhs = g @ (W @ f), f @ (Wt @ g)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    ok = chk.gap <= ADJOINT_GAP and worst <= DUALITY_REL
    record("AC7", "adjoint", ok,
           f"lambda={chk.lam:.10f} lambda*={chk.lam_adjoint:.10f} gap={chk.gap:.1e} "
           f"(tol {ADJOINT_GAP:g}); duality max rel={worst:.1e} over 20 pairs (tol {DUALITY_REL:g})")
    assert ok


# ---------------------------------------------------------------------------
# 8


def _cw_fixtures():
    hemi = mesh("hemisphere", 3, angle=1.2)
    yield "sphere T_0", assemble_Tr(mesh("sphere", 2), 0)
    yield "cap T_0", assemble_Tr(hemi, 0).restrict(~hemi.boundary)
    yield "drifted torus", drifted_torus()
    yield "drift square", drifted_square(2)


def test_ac8_collatz_wielandt():
    rng = np.random.default_rng(SEED)
    ok, parts = True, []
    for name, op in _cw_fixtures():
        res = principal_eigen(op)
        tol = max(1e-8 * (1 + abs(res.lam)), 10 * res.residual)
        worst = -np.inf
        for _ in range(CW_SAMPLES):
            u = np.where(op.interior, np.exp(rng.standard_normal(op.n)), 0.0)
            worst = max(worst, collatz_wielandt_lower(op, u))
        eq = collatz_wielandt_lower(op, res.eigenfunction)
        good = worst <= res.lam + tol and abs(eq - res.lam) <= tol
        ok &= good
        parts.append(f"{name}: lambda={res.lam:.6f} max inf={worst:.4f} |eq-lambda|={abs(eq - res.lam):.1e}")
    record("AC8", "Collatz-Wielandt", ok, "; ".join(parts) + f" ({CW_SAMPLES} samples each)")
    assert ok, parts


# ---------------------------------------------------------------------------
# 9


def _ball_case(name, R, d=None):
    params = {} if d is None else {"distance": d}
    w = 1.25 * preimage_radius(name, R, **params)
    imm = catalog_surface(name, half_width=w, **params)
    centre = imm.position(np.zeros((1, 2)))[0]
    out = []
    for L in (2, 3):
        s = discretize(imm, L)
        out.append((s, ball_domain(s, centre, R)))
    return out


def test_ac9_theorem_bound():
    ok, parts, count = True, [], 0
    cases = [("horosphere", None)] + [("equidistant", d) for d in (0.3, 0.5, 1.0)]
    for name, d in cases:
        for R in (0.3, 0.5, 0.8):
            (sc, dc), (sf, df) = _ball_case(name, R, d)
            coarse = verify_bound(sc, 0, dc)
            tol = discretization_tolerance(coarse.lam, verify_bound(sf, 0, df).lam)
            chk = verify_bound(sf, 0, df, tol=tol)
            ok &= chk.passed
            count += 1
            tagname = name if d is None else f"{name}(d={d})"
            parts.append(f"{tagname} R={R} slack={chk.slack:.3f}")
    s = mesh("sphere", 2)
    try:
        verify_bound(s, 0, ball_domain(s, np.array([0.0, 0.0, 1.0]), 1.0))
        gate = False
    except PinchingFails:
        gate = True
    ok &= gate and count == 12
    record("AC9", "geodesic-ball bound", ok,
           f"{count} cases, min slack {min(float(p.split('slack=')[1]) for p in parts):.3f}; "
           f"sphere pinching gate {'rejects' if gate else 'ACCEPTS'}")
    assert ok, parts


# ---------------------------------------------------------------------------
# 10


def test_ac10_constant_drift_square():
    exact = 2 * np.pi**2 + (2.0**2 + 1.0**2) / 4
    lam = principal_eigen(drifted_square(3)).lam
    rel = abs(lam - exact) / exact
    ok = rel <= SQUARE_REL
    record("AC10", "constant-drift square", ok,
           f"lambda={lam:.6f} exact={exact:.6f} rel={rel:.2e} (tol {SQUARE_REL:g})")
    assert ok
