"""Run orchestration behind the command line: build, analyze, verify and sweep.

Every numeric report field is a ``{"value": v, "tol": t}`` pair. For
discretised quantities ``t`` is taken from a second, one-level-coarser solve.
"""

from __future__ import annotations

import os
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import scipy

from . import __version__
from .assembly import (
    adjoint,
    assemble_Tr,
    drift_field,
    linearization_residual,
    second_variation_r_area,
    symmetrize,
)
from .bounds import ball_domain, eigenvalue_lower_bound, preimage_radius, verify_bound, write_sweep_csv
from .config import RunConfig
from .errors import (
    AmbientMismatch,
    ConfigError,
    EmptyDomain,
    MeshNotFound,
    RStabError,
)
from .geometry import Ambient, Immersion, catalog_surface, discretize, read_off, surface_from_mesh
from .geometry.surface import DiscreteHypersurface
from .newton import admissibility, trace_identities_report
from .spectral import (
    discretization_tolerance,
    principal_eigen,
    stability_certificate,
    write_eigenfunction_csv,
)

_SAFE = {name: getattr(np, name) for name in
         ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh", "arctan", "abs")}
_SAFE["pi"] = np.pi

BALL_MARGIN = 1.25  # chart half-width as a multiple of the ball's preimage radius


def num(value, tol) -> dict:
    return {"value": float(value), "tol": float(tol)}


def _compile(expr: str, names: tuple, what: str):
    try:
        code = compile(str(expr), f"<{what}>", "eval")
    except SyntaxError as exc:
        raise ConfigError(f"{what}: cannot parse {expr!r}: {exc.msg}") from None
    unknown = set(code.co_names) - set(_SAFE) - set(names)
    if unknown:
        raise ConfigError(f"{what}: unknown names {sorted(unknown)} in {expr!r}")
    return code


def ambient_function(expr: str) -> Callable[[np.ndarray], np.ndarray]:
    """``f(X)`` from an expression in the ambient coordinates ``x, y, z, w``."""
    code = _compile(expr, ("x", "y", "z", "w"), "function")

    def f(X):
        X = np.asarray(X, dtype=float)
        ns = dict(_SAFE)
        for i, name in enumerate("xyzw"[:X.shape[-1]]):
            ns[name] = X[..., i]
        return np.broadcast_to(eval(code, {"__builtins__": {}}, ns), X.shape[:-1]).astype(float)

    f.expression = expr
    return f


def chart_immersion(chart: dict) -> Immersion:
    """Euclidean graph ``(u, v, h(u, v))`` with the upward normal."""
    code = _compile(chart["height"], ("u", "v"), "surface.chart.height")
    try:
        (u0, u1), (v0, v1) = [tuple(float(t) for t in b) for b in chart["box"]]
    except (TypeError, ValueError):
        raise ConfigError("surface.chart.box: expected [[u0, u1], [v0, v1]]") from None
    if not (u1 > u0 and v1 > v0):
        raise ConfigError("surface.chart.box: empty box")

    def position(p):
        p = np.asarray(p, dtype=float)
        ns = dict(_SAFE, u=p[..., 0], v=p[..., 1])
        z = np.broadcast_to(eval(code, {"__builtins__": {}}, ns), p.shape[:-1]).astype(float)
        return np.concatenate([p, z[..., None]], axis=-1)

    def orientation(p):
        out = np.zeros(np.shape(p)[:-1] + (3,))
        out[..., 2] = 1.0
        return out

    return Immersion(name="chart", ambient=Ambient.euclidean(), param="plane", position=position,
                     orientation=orientation, box=((u0, u1), (v0, v1)),
                     periodic=tuple(bool(b) for b in chart.get("periodic", (False, False))),
                     params={"height": chart["height"]})


@dataclass
class Built:
    surface: DiscreteHypersurface
    immersion: Optional[Immersion]
    ambient: Ambient


def resolve_ambient(cfg: RunConfig, base: Ambient) -> Ambient:
    amb_cfg = cfg.ambient
    if "c" in amb_cfg and float(amb_cfg["c"]) != float(base.c):
        raise AmbientMismatch(f"surface lives in curvature {base.c:g}, config asks for c = {amb_cfg['c']}")
    amb = base.as_general() if amb_cfg.get("kind") == "general" else base
    if "sec_infimum" in amb_cfg:
        amb = replace(amb, sec_infimum=amb_cfg["sec_infimum"])
    return amb


def _mesh_path(cfg: RunConfig) -> Path:
    p = Path(cfg.surface["mesh"])
    if not p.is_absolute() and cfg.source:
        cand = Path(cfg.source).parent / p
        if cand.exists() or not p.exists():
            p = cand
    return p


def catalog_params(cfg: RunConfig) -> dict:
    name = cfg.surface["catalog"]
    params = dict(cfg.surface.get("params", {}))
    if cfg.domain.get("kind") == "ball" and name in ("horosphere", "equidistant"):
        if "half_width" not in params:
            rho = preimage_radius(name, cfg.domain["R"], **params)
            params["half_width"] = BALL_MARGIN * rho
    return params


def build(cfg: RunConfig, level: Optional[int] = None) -> Built:
    level = cfg.surface.get("level", 3) if level is None else level
    if "mesh" in cfg.surface:
        path = _mesh_path(cfg)
        if not path.exists():
            raise MeshNotFound(f"mesh file not found: {path}")
        V, F = read_off(path)
        surf = surface_from_mesh(V, F, name=path.stem)
        amb = resolve_ambient(cfg, surf.ambient)
        return Built(surf.with_ambient(amb), None, amb)
    if "catalog" in cfg.surface:
        imm = catalog_surface(cfg.surface["catalog"], **catalog_params(cfg))
    else:
        imm = chart_immersion(cfg.surface["chart"])
    amb = resolve_ambient(cfg, imm.ambient)
    imm = imm.with_ambient(amb)
    surf = discretize(imm, level)
    return Built(surf, imm, amb)


def default_center(built: Built) -> np.ndarray:
    imm = built.immersion
    if imm is None:
        raise ConfigError("domain.center: mesh surfaces need an explicit ball centre")
    if imm.param == "sphere":
        return imm.position(np.array([[0.0, 0.0, 1.0]]))[0]
    (u0, u1), (v0, v1) = imm.box
    return imm.position(np.array([[(u0 + u1) / 2, (v0 + v1) / 2]]))[0]


def build_domain(cfg: RunConfig, built: Built):
    """The interior mask and, for balls, the ``BallDomain``."""
    surf = built.surface
    kind = cfg.domain.get("kind", "whole")
    if kind == "whole":
        return ~surf.boundary, None
    if kind == "ball":
        c = cfg.domain.get("center")
        p = default_center(built) if c is None else np.asarray(c, dtype=float)
        if p.shape != (surf.X.shape[1],):
            raise ConfigError(f"domain.center: expected {surf.X.shape[1]} ambient coordinates")
        dom = ball_domain(surf, p, cfg.domain["R"])
        return dom.interior, dom
    if surf.params is None or surf.params.shape[1] != 2:
        raise ConfigError("domain: chart_rectangle needs a plane chart surface")
    (a0, a1), (b0, b1) = [tuple(float(t) for t in b) for b in cfg.domain["rect"]]
    u, v = surf.params[:, 0], surf.params[:, 1]
    eps = 1e-9 * max(a1 - a0, b1 - b0)
    closed = (u >= a0 - eps) & (u <= a1 + eps) & (v >= b0 - eps) & (v <= b1 + eps)
    # Dirichlet on the outermost nodes of the closed rectangle, as for balls
    rim = np.asarray(surf.adjacency[:, ~closed].sum(axis=1)).ravel() > 0
    inside = closed & ~rim & ~surf.boundary
    if not np.any(inside):
        raise EmptyDomain("the chart rectangle contains no interior node")
    return inside, None


# ---------------------------------------------------------------------------
# analyze


@dataclass
class LevelSolve:
    built: Built
    interior: np.ndarray
    ball: object
    op: object
    spectral: object
    drift_max: float


def solve_level(cfg: RunConfig, level: Optional[int] = None) -> LevelSolve:
    built = build(cfg, level)
    interior, ball = build_domain(cfg, built)
    surf = built.surface
    op = assemble_Tr(surf, cfg.r, built.ambient).restrict(interior)
    res = principal_eigen(op, tol=cfg.solver["eigen_tol"], maxiter=cfg.solver["max_iterations"])
    drift = float(np.max(np.linalg.norm(drift_field(surf, cfg.r), axis=1)))
    return LevelSolve(built, interior, ball, op, res, drift)


def _coarse_level(cfg: RunConfig, fine: LevelSolve) -> Optional[int]:
    level = cfg.surface.get("level", 3)
    if fine.built.immersion is None or level == 0:
        return None
    return level - 1


def analyze(cfg: RunConfig, two_level: bool = True, write: bool = True) -> dict:
    fine = solve_level(cfg)
    surf, r = fine.built.surface, cfg.r
    amb = fine.built.ambient
    coarse = None
    lvl = _coarse_level(cfg, fine) if two_level else None
    if lvl is not None:
        coarse = solve_level(cfg, lvl)

    lam = fine.spectral.lam
    solver_tol = max(1e-8 * (1 + abs(lam)), 10 * fine.spectral.residual)
    if coarse is not None:
        lam_tol = max(discretization_tolerance(coarse.spectral.lam, lam), solver_tol)
        source = f"10 x |lambda(level {lvl + 1}) - lambda(level {lvl})|"
        drift_tol = abs(coarse.drift_max - fine.drift_max)
    else:
        lam_tol = solver_tol
        source = "solver residual (single mesh)"
        drift_tol = fine.drift_max if surf.accuracy == "quadratic-fit" else surf.h

    st = cfg.solver["stability_tol"]
    tol = lam_tol if st == "auto" else float(st)
    if st != "auto":
        source = "configured"
    cert = stability_certificate(fine.op, cfg.solver["mode"], tol=tol)
    cert = replace(cert, tolerance_source=source)

    adm = admissibility(surf.shape[fine.interior] if np.any(fine.interior) else surf.shape, r)
    ids = trace_identities_report(surf.shape, r)
    S = surf.S(r + 1)
    report = {
        "command": "analyze",
        "admissibility": {
            "admissible": adm.admissible,
            "sign": adm.sign,
            "definiteness": adm.definiteness.tag,
            "margin": num(adm.definiteness.margin, adm.definiteness.tol),
            "criteria": list(adm.criteria),
        },
        "operator": {
            "label": fine.op.label,
            "r": r,
            "drift_included": bool(fine.op.meta.get("drift")),
            "drift_norm_max": num(fine.drift_max, drift_tol),
            "identity_residual_max": num(ids.max(), 1e-10),
            "S_r1_range": [num(S.min(), drift_tol), num(S.max(), drift_tol)],
            "interior_nodes": int(fine.interior.sum()),
        },
        "spectral": {
            "lambda": num(lam, lam_tol),
            "convention": fine.spectral.convention,
            "residual": num(fine.spectral.residual, 1e-8),
            "positivity_margin": num(fine.spectral.positivity_margin, 1e-12),
            "method": fine.spectral.method,
            "iterations": fine.spectral.iterations,
        },
        "stability": _stability_block(cert),
        "bounds": _bounds_block(fine, amb, r, lam, lam_tol),
        "provenance": provenance(cfg, fine, coarse),
    }
    if coarse is not None:
        report["spectral"]["lambda_coarse"] = num(coarse.spectral.lam, lam_tol)
    if write:
        emit_outputs(cfg, fine)
    return report


def _stability_block(cert) -> dict:
    out = {"verdict": cert.verdict, "method": cert.method, "grade": cert.grade,
           "marginal": cert.marginal, "tol": num(cert.tol, 0.0),
           "tolerance_source": cert.tolerance_source, "notes": list(cert.notes)}
    if cert.witness is not None:
        w = cert.witness
        out["witness"] = {"kind": w["kind"], "variant": w["variant"],
                          "max_Tu": num(w["max_Tu"], cert.tol), "min_u": num(w["min_u"], 1e-12)}
    return out


def _bounds_block(fine: LevelSolve, amb: Ambient, r: int, lam: float, tol: float) -> dict:
    if fine.ball is None:
        return {"applicable": False, "reason": "domain is not a ball"}
    try:
        b = eigenvalue_lower_bound(fine.built.surface, r, fine.ball, amb)
    except RStabError as exc:
        return {"applicable": False, "reason": f"{exc.code}: {exc}"}
    return {"applicable": True, "R": num(b.R, 0.0), "bound": num(b.operative, tol),
            "bound_statement": num(b.statement, tol), "slack": num(lam - b.operative, tol),
            "pass": bool(lam - b.operative >= -tol),
            "pass_statement": bool(lam - b.statement >= -tol)}


def provenance(cfg: RunConfig, fine: LevelSolve, coarse: Optional[LevelSolve]) -> dict:
    def stats(s: LevelSolve):
        d = s.built.surface.stats()
        return {k: (num(v, 0.0) if isinstance(v, float) else v) for k, v in d.items()}

    return {
        "config_sha256": cfg.digest(),
        "config_source": cfg.source,
        "mesh": stats(fine),
        "mesh_coarse": stats(coarse) if coarse is not None else None,
        "ambient": fine.built.ambient.name or fine.built.ambient.model,
        "versions": {"rstab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
    }


def emit_outputs(cfg: RunConfig, fine: LevelSolve) -> None:
    out = cfg.outputs
    if out.get("eigenfunction_csv"):
        surf = fine.built.surface
        coords = surf.params if surf.params is not None else surf.X
        write_eigenfunction_csv(out["eigenfunction_csv"], fine.spectral, coords)
    if out.get("operator_mtx"):
        fine.op.to_mtx(out["operator_mtx"])


# ---------------------------------------------------------------------------
# verify suites

SPHERE_HARMONIC = "x*y/(x*x + y*y + z*z)"
SECOND_VARIATION_F = ("3*z*z/(x*x + y*y + z*z) - 1", "1 + x*y/(x*x + y*y + z*z)")


def _order(errors, scales) -> Optional[float]:
    """Observed order from the last two entries."""
    e0, e1 = errors[-2], errors[-1]
    if not (e0 > 0 and e1 > 0):
        return None
    return float(np.log(e0 / e1) / np.log(scales[-2] / scales[-1]))


def _levels(cfg: RunConfig, key: str = "levels") -> list:
    L = cfg.surface.get("level", 3)
    return list(cfg.verify.get(key, [L, L + 1, L + 2]))


def _status(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def suite_identities(cfg: RunConfig) -> dict:
    v = cfg.verify
    rng = np.random.default_rng(v.get("seed", 0))
    samples = int(v.get("samples", 100))
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(2, 9))
        B = rng.standard_normal((n, n))
        A = 0.5 * (B + B.T)
        for r in range(n):
            worst = max(worst, trace_identities_report(A, r).max())
    return {"status": _status(worst <= 1e-10), "samples": samples,
            "max_residual": num(worst, 1e-10)}


def suite_linearization(cfg: RunConfig) -> dict:
    v = cfg.verify
    built = build(cfg)
    f = ambient_function(v.get("f", SPHERE_HARMONIC))
    ts = [float(t) for t in v.get("t", [2e-2, 1e-2, 5e-3])]
    rows, ok = [], True
    for r in v.get("r", [cfg.r]):
        res = [linearization_residual(built.surface, r, f, t) for t in ts]
        rel = [x.relative for x in res]
        order = _order([x.residual for x in res], ts)
        good = rel[-1] <= 1e-2 and (res[-1].residual <= 1e-12 or (order is not None and 1.5 <= order <= 2.5))
        ok &= good
        rows.append({"r": r, "t": ts, "relative": [num(x, 0.0) for x in rel],
                     "order": num(order if order is not None else 0.0, 0.5), "pass": good})
    return {"status": _status(ok), "f": f.expression, "cases": rows}


def suite_second_variation(cfg: RunConfig) -> dict:
    v = cfg.verify
    t = float(v.get("t", 1e-2))
    levels = _levels(cfg)
    fs = [ambient_function(e) for e in v.get("f_list", SECOND_VARIATION_F)]
    cases, ok_lit, ok_bal = [], True, True
    for r in v.get("r", [cfg.r]):
        for f in fs:
            lit, bal, hs = [], [], []
            for L in levels:
                built = build(cfg, L)
                sv = second_variation_r_area(built.surface, r, f, t)
                lit.append(sv.relative)
                bal.append(sv.relative_balanced)
                hs.append(built.surface.h)
            o_lit, o_bal = _order(lit, hs), _order(bal, hs)
            g_lit = lit[-1] <= 1e-2 and o_lit is not None and 1.5 <= o_lit <= 2.5
            g_bal = bal[-1] <= 1e-2 and (bal[-1] <= 1e-10 or (o_bal is not None and 1.5 <= o_bal <= 2.5))
            ok_lit &= g_lit
            ok_bal &= g_bal
            cases.append({"r": r, "f": f.expression, "levels": levels,
                          "relative": [num(x, 0.0) for x in lit],
                          "order": num(o_lit or 0.0, 0.5), "pass": g_lit,
                          "relative_balanced": [num(x, 0.0) for x in bal],
                          "order_balanced": num(o_bal or 0.0, 0.5), "pass_balanced": g_bal})
    return {"status": _status(ok_lit), "status_balanced": _status(ok_bal), "t": t, "cases": cases}


DRIFT_FLOOR = 1e-8  # below this the recovered field is differentiated round-off


def drift_decay(norms, hs, floor: float = DRIFT_FLOOR):
    """Per-refinement orders and the verdict: each step decays at order >= 1
    or both norms already sit at the round-off floor."""
    steps = []
    for i in range(len(norms) - 1):
        order = _order(norms[i:i + 2], hs[i:i + 2])
        at_floor = max(norms[i], norms[i + 1]) <= floor
        steps.append({"order": order, "at_floor": at_floor,
                      "pass": at_floor or (order is not None and order >= 1.0)})
    return steps, bool(steps) and all(st["pass"] for st in steps)


def suite_drift(cfg: RunConfig) -> dict:
    levels = _levels(cfg)
    cases, ok = [], True
    for r in cfg.verify.get("r", [cfg.r]):
        norms, avg, hs = [], [], []
        for L in levels:
            s = build(cfg, L).surface
            norms.append(float(np.max(np.linalg.norm(drift_field(s, r), axis=1))))
            avg.append(float(np.max(np.linalg.norm(drift_field(s, r, method="average"), axis=1))))
            hs.append(s.h)
        steps, good = drift_decay(norms, hs)
        ok &= good
        cases.append({"r": r, "levels": levels, "max_norm": [num(x, 0.0) for x in norms],
                      "h": [num(x, 0.0) for x in hs],
                      "orders": [num(st["order"] or 0.0, 0.0) for st in steps],
                      "at_floor": [st["at_floor"] for st in steps],
                      "max_norm_averaged": [num(x, 0.0) for x in avg],
                      "order_averaged": num(_order(avg[-2:], hs[-2:]) or 0.0, 0.0),
                      "pass": good})
    return {"status": _status(ok), "floor": DRIFT_FLOOR, "cases": cases}


def probe_functions(X: np.ndarray) -> list:
    x = X[:, 0]
    y = X[:, 1]
    z = X[:, 2]
    return [np.ones_like(x), x, x * y, np.exp(0.5 * z) + y, np.cos(x + 2 * y)]


def symmetrization_defect(surface: DiscreteHypersurface, r: int, ambient=None) -> float:
    """``max ||(sym T_r - T_r) f||_M / ||f||_M`` over smooth probe functions."""
    T = assemble_Tr(surface, r, ambient, drift="include")
    Tsym, _ = symmetrize(surface, r, ambient)
    M = surface.mass
    worst = 0.0
    for f in probe_functions(surface.X):
        d = Tsym.apply(f) - T.apply(f)
        worst = max(worst, float(np.sqrt(d @ (M * d)) / np.sqrt(f @ (M * f))))
    return worst


def suite_symmetrization(cfg: RunConfig) -> dict:
    levels = _levels(cfg)
    cases, ok = [], True
    for r in cfg.verify.get("r", [cfg.r]):
        errs, hs = [], []
        for L in levels:
            b = build(cfg, L)
            errs.append(symmetrization_defect(b.surface, r, b.ambient))
            hs.append(b.surface.h)
        steps, good = drift_decay(errs, hs)
        ok &= good
        cases.append({"r": r, "levels": levels, "defect": [num(x, 0.0) for x in errs],
                      "h": [num(x, 0.0) for x in hs],
                      "orders": [num(st["order"] or 0.0, 0.0) for st in steps],
                      "at_floor": [st["at_floor"] for st in steps], "pass": good})
    return {"status": _status(ok), "floor": DRIFT_FLOOR, "cases": cases}


def suite_adjoint(cfg: RunConfig) -> dict:
    from .spectral import adjoint_spectrum_check

    fine = solve_level(cfg)
    op = fine.op
    opT = adjoint(op)
    rng = np.random.default_rng(cfg.verify.get("seed", 0))
    W, M = op.reduced()
    Wt, _ = opT.reduced()
    worst = 0.0
    for _ in range(int(cfg.verify.get("pairs", 20))):
        f = rng.standard_normal(len(M))
        g = rng.standard_normal(len(M))
        lhs, rhs = g @ (W @ f), f @ (Wt @ g)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
    chk = adjoint_spectrum_check(op)
    good = worst <= 1e-10 and chk.gap <= 1e-8
    return {"status": _status(good), "duality_relative": num(worst, 1e-10),
            "lambda": num(chk.lam, 1e-8), "lambda_adjoint": num(chk.lam_adjoint, 1e-8),
            "gap": num(chk.gap, 1e-8)}


def suite_bound(cfg: RunConfig) -> dict:
    if cfg.domain.get("kind") != "ball":
        base = replace(cfg, domain={"kind": "ball", "R": 0.5})
    else:
        base = cfg
    rows, ok = [], True
    for R in cfg.verify.get("R", [0.3, 0.5, 0.8]):
        c = base.with_param("R", R)
        fine = solve_level(c)
        lvl = _coarse_level(c, fine)
        tol = None
        if lvl is not None:
            tol = discretization_tolerance(solve_level(c, lvl).spectral.lam, fine.spectral.lam)
        chk = verify_bound(fine.built.surface, c.r, fine.ball, tol, fine.built.ambient)
        ok &= chk.passed
        row = chk.row()
        row["cw"] = chk.cw_value
        row["cw_ok"] = chk.cw_ok
        rows.append(row)
    path = cfg.outputs.get("sweep_csv") or cfg.verify.get("csv", "bound.csv")
    write_sweep_csv(path, rows)
    return {"status": _status(ok), "csv": str(path),
            "rows": [{k: (num(v, row["tol"]) if isinstance(v, float) and k not in ("tol",) else v)
                      for k, v in row.items()} for row in rows]}


SUITE_FUNCS = {
    "identities": suite_identities,
    "linearization": suite_linearization,
    "second_variation": suite_second_variation,
    "drift": suite_drift,
    "symmetrization": suite_symmetrization,
    "adjoint": suite_adjoint,
    "bound": suite_bound,
}


def verify(cfg: RunConfig, suites: Optional[list] = None) -> dict:
    names = suites or cfg.checks or list(SUITE_FUNCS)
    results = {}
    for name in names:
        if name not in SUITE_FUNCS:
            raise ConfigError(f"unknown suite {name!r} (known: {', '.join(SUITE_FUNCS)})")
        try:
            results[name] = SUITE_FUNCS[name](cfg)
        except RStabError as exc:
            results[name] = {"status": "FAIL", "error": exc.code, "message": str(exc)}
    return {"command": "verify", "suites": results,
            "passed": all(r["status"] == "PASS" for r in results.values()),
            "provenance": {"config_sha256": cfg.digest(), "config_source": cfg.source,
                           "versions": {"rstab": __version__, "numpy": np.__version__,
                                        "scipy": scipy.__version__}}}


# ---------------------------------------------------------------------------
# sweep


def workers() -> int:
    raw = os.environ.get("RSTAB_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"RSTAB_WORKERS must be an integer, got {raw!r}") from None
    return max(1, n)


def sweep_point(cfg: RunConfig, two_level: bool = True) -> dict:
    rep = analyze(cfg, two_level=two_level, write=False)
    lam = rep["spectral"]["lambda"]
    row = {"lambda": lam["value"], "tol": lam["tol"], "verdict": rep["stability"]["verdict"]}
    b = rep["bounds"]
    row["bound"] = b["bound"]["value"] if b.get("applicable") else ""
    row["slack"] = b["slack"]["value"] if b.get("applicable") else ""
    return row


def _point(args):
    cfg, name, value = args
    row = sweep_point(cfg.with_param(name, value))
    return {"param": value, **row}


def sweep_values(start: float, stop: float, steps: int) -> np.ndarray:
    if not (np.isfinite(start) and np.isfinite(stop)):
        raise ConfigError("sweep range must be finite")
    if steps < 1 or stop < start:
        raise ConfigError(f"empty sweep range: from={start} to={stop} steps={steps}")
    if steps == 1:
        return np.array([float(start)])
    return np.linspace(float(start), float(stop), int(steps))


def bisect_marginal(cfg: RunConfig, name: str, a: float, b: float, la: float, tol: float,
                    maxit: int = 60) -> dict:
    """Bisect a sign change of lambda between parameters ``a`` and ``b``."""
    it = 0
    while abs(b - a) > tol and it < maxit:
        m = 0.5 * (a + b)
        lm = sweep_point(cfg.with_param(name, m), two_level=False)["lambda"]
        if np.sign(lm) == np.sign(la):
            a, la = m, lm
        else:
            b = m
        it += 1
    return {"bracket": [a, b], "marginal_param": 0.5 * (a + b), "iterations": it}


def sweep(cfg: RunConfig, name: str, start: float, stop: float, steps: int,
          bisect_tol: Optional[float] = None) -> dict:
    values = sweep_values(start, stop, steps)
    if name not in ("radius", "distance", "a", "R"):
        raise ConfigError(f"sweep parameter must be radius, distance, a or R; got {name!r}")
    if name == "R" and cfg.domain.get("kind") != "ball":
        raise ConfigError("sweeping R needs a ball domain")
    jobs = [(cfg, name, float(v)) for v in values]
    n = workers()
    if n == 1 or len(jobs) == 1:
        rows = [_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            rows = list(pool.map(_point, jobs))
    tol = float(bisect_tol if bisect_tol is not None else cfg.sweep.get("bisect_tol", 1e-3))
    marginal = []
    for lo, hi in zip(rows, rows[1:]):
        if lo["lambda"] * hi["lambda"] < 0:
            marginal.append(bisect_marginal(cfg, name, lo["param"], hi["param"], lo["lambda"], tol))
    path = cfg.outputs.get("sweep_csv", "sweep.csv")
    write_sweep_csv(path, rows)
    return {"command": "sweep", "param": name, "csv": str(path),
            "rows": [{k: (num(v, r["tol"]) if k in ("lambda", "bound", "slack") and v != "" else v)
                      for k, v in r.items() if k != "tol"} for r in rows],
            "sign_changes": marginal, "workers": n,
            "provenance": {"config_sha256": cfg.digest(), "config_source": cfg.source,
                           "versions": {"rstab": __version__, "numpy": np.__version__,
                                        "scipy": scipy.__version__}}}


__all__ = [
    "analyze", "ambient_function", "build", "build_domain", "chart_immersion", "num",
    "probe_functions", "solve_level", "sweep", "sweep_values", "symmetrization_defect", "verify",
]

