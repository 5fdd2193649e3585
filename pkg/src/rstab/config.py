"""Run configuration: a YAML document with fixed sections.

```
surface:   {catalog: <name>, params: {...}, level: 3}   # or mesh: <file.off>, or chart: {...}
ambient:   {kind: space_form | general, c: <c>, oracle: model, sec_infimum: <float>}
r: 0
domain:    {kind: whole | ball | chart_rectangle, R: <float>, center: [...], rect: [[u0, u1], [v0, v1]]}
solver:    {eigen_tol: 1e-10, max_iterations: 500, mode: eigen | supersolution, stability_tol: auto | <float>}
outputs:   {report: <path>, eigenfunction_csv: <path>, operator_mtx: <path>, sweep_csv: <path>}
checks:    [identities, linearization, ...]
verify:    {...suite settings}
sweep:     {param: <name>, from: <float>, to: <float>, steps: <int>, bisect_tol: 1e-3}
```
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import ConfigError

SECTIONS = ("surface", "ambient", "r", "domain", "solver", "outputs", "checks", "verify", "sweep")
SUITES = ("identities", "linearization", "second_variation", "drift", "symmetrization",
          "adjoint", "bound")
SWEEP_PARAMS = ("radius", "distance", "a", "R")

SOLVER_DEFAULTS = {"eigen_tol": 1e-10, "max_iterations": 500, "mode": "eigen",
                   "stability_tol": "auto"}
OUTPUT_KEYS = ("report", "eigenfunction_csv", "operator_mtx", "sweep_csv")


@dataclass
class RunConfig:
    surface: dict
    ambient: dict = field(default_factory=dict)
    r: int = 0
    domain: dict = field(default_factory=lambda: {"kind": "whole"})
    solver: dict = field(default_factory=lambda: dict(SOLVER_DEFAULTS))
    outputs: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    verify: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    source: Optional[str] = field(default=None, compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("source")
        return d

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True, default_flow_style=False)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()

    def with_param(self, name: str, value: float) -> "RunConfig":
        cfg = copy.deepcopy(self)
        if name == "R":
            cfg.domain["R"] = float(value)
        else:
            cfg.surface.setdefault("params", {})[name] = float(value)
        return cfg


class _Lines:
    """Line numbers of mapping keys, for diagnostics."""

    def __init__(self, text: str):
        self.lines: dict[tuple, int] = {}
        try:
            node = yaml.compose(text)
        except yaml.YAMLError:
            node = None
        if node is not None:
            self._walk(node, ())

    def _walk(self, node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                p = path + (k.value,)
                self.lines[p] = k.start_mark.line + 1
                self._walk(v, p)

    def at(self, *path) -> str:
        while path:
            if path in self.lines:
                return f"line {self.lines[path]}"
            path = path[:-1]
        return "top level"


def _fail(lines: _Lines, path: tuple, msg: str):
    raise ConfigError(f"{lines.at(*path)}: {'.'.join(map(str, path)) or '<root>'}: {msg}")


def parse_config(text: str, source: Optional[str] = None) -> RunConfig:
    lines = _Lines(text)
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark is not None else "unknown line"
        ctx = getattr(exc, "context_mark", None)
        if ctx is not None and (mark is None or ctx.line != mark.line):
            where += f" (construct opened at line {ctx.line + 1})"
        raise ConfigError(f"{where}: YAML syntax error: {getattr(exc, 'problem', exc)}") from None
    if not isinstance(raw, dict):
        raise ConfigError("top level: the configuration must be a mapping")
    unknown = set(raw) - set(SECTIONS)
    if unknown:
        key = sorted(unknown)[0]
        _fail(lines, (key,), f"unknown section (known: {', '.join(SECTIONS)})")

    surface = raw.get("surface")
    if not isinstance(surface, dict):
        _fail(lines, ("surface",), "a surface mapping is required")
    sources = [k for k in ("catalog", "mesh", "chart") if k in surface]
    if len(sources) != 1:
        _fail(lines, ("surface",), "exactly one of catalog, mesh or chart is required")
    surface = dict(surface)
    surface.setdefault("params", {})
    if not isinstance(surface["params"], dict):
        _fail(lines, ("surface", "params"), "must be a mapping")
    level = surface.setdefault("level", 3)
    if not isinstance(level, int) or level < 0 or level > 7:
        _fail(lines, ("surface", "level"), "must be an integer in 0..7")
    if "chart" in surface:
        ch = surface["chart"]
        if not isinstance(ch, dict) or "height" not in ch or "box" not in ch:
            _fail(lines, ("surface", "chart"), "needs 'height' (expression in u, v) and 'box'")

    ambient = raw.get("ambient") or {}
    if not isinstance(ambient, dict):
        _fail(lines, ("ambient",), "must be a mapping")
    ambient = dict(ambient)
    kind = ambient.setdefault("kind", "space_form")
    if kind not in ("space_form", "general"):
        _fail(lines, ("ambient", "kind"), "must be space_form or general")
    if kind == "general":
        ambient.setdefault("oracle", "model")
        if ambient["oracle"] != "model":
            _fail(lines, ("ambient", "oracle"), "known oracles: model")

    r = raw.get("r", 0)
    if not isinstance(r, int) or isinstance(r, bool) or not 0 <= r <= 1:
        _fail(lines, ("r",), "must be 0 or 1 (r <= n - 1 with n = 2)")

    domain = dict(raw.get("domain") or {"kind": "whole"})
    dk = domain.setdefault("kind", "whole")
    if dk not in ("whole", "ball", "chart_rectangle"):
        _fail(lines, ("domain", "kind"), "must be whole, ball or chart_rectangle")
    if dk == "ball":
        R = domain.get("R")
        if not isinstance(R, (int, float)) or R <= 0:
            _fail(lines, ("domain", "R"), "ball domains need a positive radius R")
        domain["R"] = float(R)
        if kind == "general":
            _fail(lines, ("domain",), "ball domains require a model-space ambient")
    if dk == "chart_rectangle" and "rect" not in domain:
        _fail(lines, ("domain", "rect"), "chart rectangles need rect: [[u0, u1], [v0, v1]]")

    solver = dict(SOLVER_DEFAULTS)
    solver.update(raw.get("solver") or {})
    if solver["mode"] not in ("eigen", "supersolution"):
        _fail(lines, ("solver", "mode"), "must be eigen or supersolution")
    st = solver["stability_tol"]
    if st != "auto" and not (isinstance(st, (int, float)) and st > 0):
        _fail(lines, ("solver", "stability_tol"), "must be 'auto' or a positive number")

    outputs = dict(raw.get("outputs") or {})
    for key in outputs:
        if key not in OUTPUT_KEYS:
            _fail(lines, ("outputs", key), f"unknown output (known: {', '.join(OUTPUT_KEYS)})")

    checks = raw.get("checks") or []
    if not isinstance(checks, list) or any(c not in SUITES for c in checks):
        _fail(lines, ("checks",), f"must be a list drawn from {', '.join(SUITES)}")

    verify = dict(raw.get("verify") or {})

    sweep = dict(raw.get("sweep") or {})
    if sweep:
        if sweep.get("param") not in SWEEP_PARAMS:
            _fail(lines, ("sweep", "param"), f"must be one of {', '.join(SWEEP_PARAMS)}")
        sweep.setdefault("bisect_tol", 1e-3)

    return RunConfig(surface=surface, ambient=ambient, r=r, domain=domain, solver=solver,
                     outputs=outputs, checks=list(checks), verify=verify, sweep=sweep,
                     source=source)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    return parse_config(text, str(path))


def as_plain(obj: Any) -> Any:
    """JSON-friendly copy (numpy scalars and arrays become Python values)."""
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): as_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [as_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj
