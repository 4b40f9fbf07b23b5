import io
import json
import re
import subprocess
import sys
from pathlib import Path
from xml.etree import ElementTree

import numpy as np
import pytest

from engelkit.cli import Report, parse_curve_spec, run, UsageError
from engelkit.degree import s2_grid, suspension_s2

ROOT = Path(__file__).resolve().parent.parent
EXAMPLES = ROOT / "examples"


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out=out)
    return code, out.getvalue()


def values(text):
    """name=value pairs of a text report."""
    return dict(re.findall(r"^(\w+)=(\S+)", text, re.M))


def test_invariants_example():
    code, text = call("invariants", "--curve", "unknot_front")
    assert code == 0
    v = values(text)
    assert (v["rot"], v["tb"]) == ("0", "-1")


def test_disk_area_example():
    code, text = call("disk", "area", "--file", str(EXAMPLES / "area_twist.disk"))
    assert code == 0 and values(text)["Area"] == "1"


def test_kalman_example():
    code, text = call("kalman", "--p", "5", "--q", "2", "--alpha", "1")
    assert code == 0
    assert values(text)["degree"] == "2"


def test_domain_error_exit_code(capsys):
    code, _ = call("invariants", "--curve", "torus_knot(2,4)")
    assert code == 1
    assert "BadParameters" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["invariants", "--curve", "no_such_curve"],
                                  ["frobnicate"],
                                  ["invariants"],
                                  ["render", "--curve", "unknot_front"],
                                  ["invariants", "--curve", "unknot_front", "--resolution", "8"],
                                  ["selftest", "--only", "99"]])
def test_usage_error_exit_code(argv, capsys):
    assert call(*argv)[0] == 2
    assert "usage" in capsys.readouterr().err


def test_missing_file_is_a_domain_error():
    assert call("disk", "area", "--file", "/nonexistent.disk")[0] == 1


def test_json_round_trip():
    code, text = call("invariants", "--curve", "torus_knot(2,3)", "--json")
    rep = Report.from_json(text)
    assert rep.to_json() + "\n" == text
    body = json.loads(text)
    assert body["results"]["tb"]["value"] == 1
    for entry in body["results"].values():
        if isinstance(entry["value"], (int, float)) and not isinstance(entry["value"], bool):
            assert len(entry) > 1  # every number carries provenance


def test_reports_are_deterministic():
    argv = ["tangencies", "--curve", "figure_eight", "--json"]
    assert call(*argv) == call(*argv)


def test_cli_entry_point():
    r = subprocess.run([sys.executable, "-m", "engelkit.cli", "area", "--curve", "unknot_front"],
                       capture_output=True, text=True, check=True)
    assert float(values(r.stdout)["total_area"]) == pytest.approx(-0.75 * np.pi * 0.5)


def test_degree_command(tmp_path):
    assert values(call("degree", "--map", "antipodal_s3")[1])["degree"] == "1"
    assert values(call("degree", "--map", "suspension(3)", "--oracle")[1])[
        "regular_value_degree"] == "3"
    F = suspension_s2(-2)(s2_grid(32).reshape(-1, 3)).reshape(33, 65, 3)
    np.save(tmp_path / "m.npy", F)
    assert values(call("degree", "--map", str(tmp_path / "m.npy"))[1])["degree"] == "-2"


def test_table_file_curve():
    code, text = call("invariants", "--file", str(EXAMPLES / "unknot_table.txt"),
                      "--tol-leg", "1e-3")
    assert code == 0 and values(text)["tb"] == "-1"


def test_curve_spec_parsing():
    s = parse_curve_spec("stabilized(torus_knot(2,3),+,-)")
    assert s.family == "stabilized"
    assert s.params[0] == "torus_knot(2,3)"
    with pytest.raises(UsageError):
        parse_curve_spec("torus_knot(2")


def render(tmp_path, *argv):
    out = tmp_path / "x.svg"
    assert call("render", *argv, "--svg-out", str(out))[0] == 0
    return ElementTree.parse(out).getroot()


NS = "{http://www.w3.org/2000/svg}"


def test_render_disk(tmp_path):
    root = render(tmp_path, "--builtin", "area_twist")
    strata = [e for e in root.iter() if e.get("class") == "stratum"]
    assert len(strata) == 1 and strata[0].get("stroke") == "#c0392b"
    signs = sorted(e.text for e in root.iter(NS + "text") if e.get("class") == "sign")
    assert signs == ["+", "−"]


def test_render_unknot(tmp_path):
    root = render(tmp_path, "--curve", "unknot_front")
    assert len([e for e in root.iter() if e.get("class") == "cusp"]) == 2
    assert len(list(root.iter(NS + "path"))) == 1


def test_render_double_stabilization(tmp_path):
    root = render(tmp_path, "--curve", "double_stabilized(unknot_front,0.35)")
    assert len([e for e in root.iter() if e.get("class") == "cusp"]) == 4
    # one crossing: the front splits into two pieces at the under-strand
    assert len(list(root.iter(NS + "path"))) == 2


def test_render_trefoil_breaks(tmp_path):
    root = render(tmp_path, "--curve", "torus_knot(2,3)")
    assert len(list(root.iter(NS + "path"))) == 4
