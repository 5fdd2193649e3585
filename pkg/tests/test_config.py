import pytest
from hypothesis import given
from hypothesis import strategies as st

from rstab.config import load_config, parse_config
from rstab.errors import ConfigError

BASE = """surface:
  catalog: sphere
  params: {radius: 2.0}
  level: 2
r: 1
"""


def test_defaults():
    cfg = parse_config(BASE)
    assert cfg.domain == {"kind": "whole"}
    assert cfg.solver["mode"] == "eigen" and cfg.solver["stability_tol"] == "auto"
    assert cfg.ambient["kind"] == "space_form"


def test_round_trip_idempotent():
    cfg = parse_config(BASE + "domain: {kind: ball, R: 0.5}\nchecks: [identities, bound]\n")
    again = parse_config(cfg.dump())
    assert again == cfg
    assert again.dump() == cfg.dump()
    assert again.digest() == cfg.digest()


@given(st.floats(0.1, 10.0), st.integers(0, 7), st.sampled_from([0, 1]),
       st.sampled_from(["eigen", "supersolution"]))
def test_round_trip_property(radius, level, r, mode):
    text = (f"surface: {{catalog: sphere, params: {{radius: {radius!r}}}, level: {level}}}\n"
            f"r: {r}\nsolver: {{mode: {mode}}}\n")
    cfg = parse_config(text)
    assert parse_config(cfg.dump()) == cfg


def test_with_param():
    cfg = parse_config(BASE + "domain: {kind: ball, R: 0.5}\n")
    assert cfg.with_param("R", 0.8).domain["R"] == 0.8
    assert cfg.with_param("radius", 3.0).surface["params"]["radius"] == 3.0
    assert cfg.surface["params"]["radius"] == 2.0


@pytest.mark.parametrize("text,line,field", [
    ("surface: {catalog: sphere, mesh: a.off}\n", "line 1", "surface"),
    ("surface: {catalog: sphere}\nr: 2\n", "line 2", "r"),
    ("surface: {catalog: sphere}\ncolour: red\n", "line 2", "colour"),
    ("surface:\n  catalog: sphere\n  level: 9\n", "line 3", "surface.level"),
    ("surface: {catalog: sphere}\ndomain:\n  kind: ball\n", "line 2", "domain.R"),
    ("surface: {catalog: sphere}\nambient: {kind: general}\ndomain: {kind: ball, R: 1}\n",
     "line 3", "domain"),
    ("surface: {catalog: sphere}\noutputs:\n  plot: x.png\n", "line 3", "outputs.plot"),
    ("surface: {catalog: sphere}\nchecks: [magic]\n", "line 2", "checks"),
    ("surface: {catalog: sphere}\nsweep: {param: colour}\n", "line 2", "sweep.param"),
    ("surface: {chart: {height: u}}\n", "line 1", "surface.chart"),
    ("- a\n- b\n", "top level", ""),
])
def test_diagnostics(text, line, field):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert line in str(err.value) and field in str(err.value)


def test_syntax_error_line():
    with pytest.raises(ConfigError, match="line 3"):
        parse_config("surface:\n  catalog: sphere\n  level: [1\n")


def test_load_missing(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "none.yaml")
