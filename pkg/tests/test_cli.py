import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from ctpmaps import reproduce
from ctpmaps.algebra import INF, RationalMap
from ctpmaps.cli import main, render_text
from ctpmaps.documents import bundled_path, dump, from_map


def doc(name):
    return str(bundled_path(name))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def cubic_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("docs") / "cubic.json"
    dump(from_map(RationalMap([0, 0, 3, -2]), [0, 1, INF, -0.5], name="cubic"), path)
    return str(path)


def fields(text):
    """Top-level ``key: value`` pairs of a text report."""
    out = {}
    for line in text.splitlines():
        if line and not line.startswith(" ") and ": " in line:
            key, _, value = line.partition(": ")
            out[key] = value
    return out


def test_ctp_mixing_document_is_ctp(capsys):
    code, out, _ = run(capsys, "ctp", doc("r"))
    assert code == 0
    assert fields(out)["verdict"] == "CTP"
    assert fields(out)["orbit_size"] == "8"


def test_ctp_counterexample_reports_witness(capsys):
    code, out, _ = run(capsys, "ctp", doc("notctp"))
    assert code == 0
    f = fields(out)
    assert f["verdict"] == "NOT_CTP" and f["recount"] == "2"
    assert "witness:" in out and "  count: 2" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["ctp", "notctp"],
        ["ctp", "r"],
        ["stab", "r"],
        ["factor", "mcmullen"],
        ["map", "show", "s"],
        ["monodromy", "r"],
        ["orbit", "r", "--set", "1,2"],
    ],
    ids=lambda a: "-".join(a[:2]),
)
def test_json_and_text_carry_the_same_data(capsys, argv):
    argv = [doc(a) if a in ("notctp", "r", "mcmullen", "s") else a for a in argv]
    _, text, _ = run(capsys, *argv)
    code, raw, _ = run(capsys, *argv, "--json")
    assert code == 0
    data = json.loads(raw)
    assert render_text(data) == text
    for key, value in fields(text).items():
        expected = data[key]
        if isinstance(expected, bool):
            expected = str(expected).lower()
        elif expected is None:
            expected = "none"
        elif isinstance(expected, list):
            expected = ",".join(str(x) for x in expected)
        assert value == str(expected)


def test_stab_reports_predicates(capsys):
    code, raw, _ = run(capsys, "stab", doc("r"), "--json")
    data = json.loads(raw)
    assert code == 0
    assert data["nonempty_difference"] and data["intersection_identity"] and data["k_star"] == 2


def test_factor_finds_power_map(capsys):
    code, raw, _ = run(capsys, "factor", doc("mcmullen"), "--json")
    assert code == 0
    assert "satisfied-via-power-map" in raw


def test_verify_closed_form_case_prints_twenty_residuals(capsys):
    code, out, _ = run(capsys, "verify-paper", "--case", "appendix")
    assert code == 0
    rows = [line for line in out.splitlines() if "residual k" in line]
    assert len(rows) == 20
    assert all(line.startswith("PASS") for line in rows)
    assert all(float(line.rsplit("residual ", 1)[1]) < 1e-9 for line in rows)


def test_verify_all_cases_pass(capsys, tmp_path):
    tsv = tmp_path / "table.tsv"
    code, out, _ = run(capsys, "verify-paper", "--tsv", str(tsv))
    assert code == 0 and "FAIL" not in out
    lines = tsv.read_text().splitlines()
    assert lines[0].split("\t")[:3] == ["case", "check", "result"]
    rows = [line for line in out.splitlines() if line.startswith("PASS")]
    assert len(lines) == len(rows) + 1
    assert out.splitlines()[-1] == f"{len(rows)}/{len(rows)} checks passed"


def test_verify_mismatch_exits_one(capsys, monkeypatch):
    failing = [reproduce.Check("r", "stub", False, "forced")]
    monkeypatch.setattr(reproduce, "run", lambda *a, **k: failing)
    code, out, _ = run(capsys, "verify-paper", "--case", "r")
    assert code == 1 and "FAIL" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["ctp", "/nonexistent.json"],
        ["ctp"],
        ["nosuch"],
        ["ctp", "R", "--tol", "membership"],
        ["ctp", "R", "--tol", "speed=1"],
        ["orbit", "R", "--set", "1,99"],
    ],
    ids=["missing-file", "missing-arg", "unknown-command", "tol-format", "tol-name", "bad-label"],
)
def test_input_errors_exit_two(capsys, argv):
    argv = [doc("r") if a == "R" else a for a in argv]
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_schema_error_exits_two(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"name": "x", "numerator": [[1, 0]], "denominator": [[1, 0]], "marked_points": [], "extra": 1}')
    code, _, err = run(capsys, "ctp", str(bad))
    assert code == 2 and "$" in err


def test_numerical_failure_exits_three(capsys):
    code, _, err = run(capsys, "monodromy", doc("r"), "--base", "0,0")
    assert code == 3 and "numerical failure" in err
    code, _, _ = run(capsys, "stab", doc("r"), "--tol", "group_order_bound=3")
    assert code == 3


def test_trace_csv(capsys, tmp_path):
    code, _, _ = run(capsys, "monodromy", doc("r"), "--trace", str(tmp_path))
    assert code == 0
    files = sorted(tmp_path.glob("loop*.csv"))
    # one loop per finite critical value
    assert len(files) == 2
    lines = files[0].read_text().splitlines()
    assert lines[0] == "label,t,re,im"
    labels = {int(line.split(",")[0]) for line in lines[1:]}
    assert labels == set(range(1, 13))


def test_tree_svg_and_text(capsys, cubic_file, tmp_path):
    svg = tmp_path / "tree.svg"
    code, out, _ = run(capsys, "tree", cubic_file, "--svg", str(svg))
    assert code == 0
    root = ET.fromstring(svg.read_bytes())
    assert root.get("version") == "1.1"
    assert "vertices" in out or "edges" in out


def test_tree_rejects_non_belyi(capsys):
    code, _, _ = run(capsys, "tree", doc("s"))
    assert code == 2


def test_plot_preimage_circle(capsys, tmp_path):
    svg = tmp_path / "circle.svg"
    code, out, _ = run(capsys, "plot", doc("r"), "--preimage-circle", "--svg", str(svg), "--resolution", "401")
    assert code == 0 and fields(out)["curves"] == "2"
    root = ET.fromstring(svg.read_bytes())
    ns = "{http://www.w3.org/2000/svg}"
    curves = root.findall(f".//{ns}polygon") + root.findall(f".//{ns}polyline")
    assert len(curves) == 2


def _cli(*argv):
    return subprocess.run(
        [sys.executable, "-m", "ctpmaps", *argv], capture_output=True, check=False
    )


def test_outputs_are_byte_identical_across_processes(tmp_path, cubic_file):
    runs = []
    for n in range(2):
        svg = tmp_path / f"t{n}.svg"
        a = _cli("ctp", doc("notctp"), "--json")
        b = _cli("monodromy", doc("r"), "--seed", "3")
        c = _cli("tree", cubic_file, "--svg", str(svg))
        runs.append((a.stdout, b.stdout, c.stdout, svg.read_bytes()))
        assert a.returncode == b.returncode == c.returncode == 0
    assert runs[0] == runs[1]


def test_version_flag(capsys):
    assert main(["--version"]) == 0
