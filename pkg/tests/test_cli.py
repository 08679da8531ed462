import json
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from disperse1d.cli import (default_config, emit, main, parse_config, parse_ladder,
                            parse_potential_arg)
from disperse1d.errors import ParseError

SMALL = """\
potential: {family: sech2, coupling: 1.0}
L: 10.0
N_x: 81
K: 10.0
N_k: 257
"""


def test_parse_config_roundtrip():
    cfg = parse_config(SMALL)
    assert cfg.N_k == 257 and cfg.potential["family"] == "sech2"
    again = parse_config(cfg.to_yaml())
    assert again == cfg


@pytest.mark.parametrize("text,fragment", [
    ("L: 10\n", "missing required key"),
    (SMALL + "bogus: 1\n", "unknown keys: bogus"),
    (SMALL.replace("257", "300"), r"2\^j \+ 1"),
    (SMALL.replace("81", "80"), "odd"),
    (SMALL.replace("K: 10.0", "K: 1000.0"), "outside"),
    ("potential: {family: sech2}\n", "potential:"),
    ("potential: {coupling: 1}\n", "'family'"),
    ("- 1\n- 2\n", "mapping"),
])
def test_parse_config_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_config(text)


def test_parse_error_location():
    with pytest.raises(ParseError) as info:
        parse_config("potential: {family: sech2\nL: [1, 2\n")
    assert info.value.line is not None and "line" in str(info.value)


def test_parse_ladder():
    assert_allclose(parse_ladder("10:1000:3"), [10, 100, 1000])
    assert_allclose(parse_ladder([1, 100, 3]), [1, 10, 100])
    for bad in ("10:5:3", "1:2", "a:b:c", [1, 2, 1]):
        with pytest.raises(ParseError):
            parse_ladder(bad)


def test_parse_potential_arg():
    assert parse_potential_arg("sech2") == {"family": "sech2", "coupling": 1.0}
    assert parse_potential_arg("gaussian_well:depth=3,width=0.5") == \
        {"family": "gaussian_well", "depth": 3.0, "width": 0.5}
    with pytest.raises(ParseError):
        parse_potential_arg("exp_decay")
    with pytest.raises(ParseError):
        parse_potential_arg("sech2:coupling")


def test_emit_schema(tmp_path):
    p = emit({"a": np.float64(1.5), "b": np.array([1, 2]), "c": float("inf")}, tmp_path / "x.json")
    data = json.loads(p.read_text())
    assert data == {"schema_version": 1, "a": 1.5, "b": [1, 2], "c": "inf"}
    with pytest.raises(TypeError):
        emit(object(), tmp_path / "y")


def test_default_config_is_valid():
    assert default_config().validate().potential["family"] == "sech2"


def test_main_bad_config_exits_2(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("L: 10\n")
    assert main(["scatter", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "configuration error" in capsys.readouterr().err
    assert main(["scatter", "--potential", "sech2:depth=1", "--out", str(tmp_path)]) == 2
    assert main(["scatter", "--tladder", "10:100", "--out", str(tmp_path)]) == 2


def test_scatter_run(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(SMALL)
    assert main(["scatter", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    res = json.loads((tmp_path / "resonance.json").read_text())
    assert res["schema_version"] == 1
    assert (tmp_path / "scattering.csv").exists() and (tmp_path / "bound_states.csv").exists()
    assert (tmp_path / "config.yaml").exists()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "disperse1d", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "scatter" in proc.stdout
