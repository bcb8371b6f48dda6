import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from toridiv.catalog import cube_fan, projective_plane, quadric_cone
from toridiv.cli import decimal_string, parse_a_values, run
from toridiv.errors import UsageError
from toridiv.mld import acc_family_fan


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


@pytest.fixture
def plane(tmp_path):
    fan = write(tmp_path, "p2.json", projective_plane().to_dict())
    h = write(tmp_path, "h.json", {"coeffs": [0, 0, 1]})
    minus_h = write(tmp_path, "mh.json", {"coeffs": [0, 0, -1]})
    return fan, h, minus_h


def test_check_reports_cartier_status(tmp_path):
    fan = write(tmp_path, "q.json", quadric_cone().to_dict())
    d = write(tmp_path, "d.json", {"coeffs": [1, 0, 0, 0]})
    code, out, _ = invoke("check", fan, d)
    assert code == 0
    assert "NotQCartier (witness cone 0)" in out
    code, out, _ = invoke("check", fan, d, "--format", "json")
    assert json.loads(out)["cartier_status"]["kind"] == "NotQCartier"


def test_check_invalid_fan_exits_one(tmp_path):
    fan = write(tmp_path, "bad.json", {"rays": [[1, 0], [0, 1], [1, 1]], "max_cones": [[0, 1], [0, 2]]})
    code, out, _ = invoke("check", fan)
    assert code == 1
    assert "Invalid" in out


def test_usage_errors_exit_two(tmp_path, plane):
    fan, h, _ = plane
    assert invoke("sections", tmp_path / "missing.json", h)[0] == 2
    bad = write(tmp_path, "bad.json", {"coeffs": ["1/0", 0, 0]})
    assert invoke("sections", fan, bad)[0] == 2
    short = write(tmp_path, "short.json", {"coeffs": [1, 0]})
    assert invoke("sections", fan, short)[0] == 2
    (tmp_path / "broken.json").write_text("{")
    assert invoke("sections", fan, tmp_path / "broken.json")[0] == 2
    assert invoke("qnt", fan, h)[0] == 2
    assert invoke("acc-family", "--a", "0..3")[0] == 2
    assert invoke("nonsense")[0] == 2


def test_domain_errors_exit_one(tmp_path):
    fan = write(tmp_path, "q.json", quadric_cone().to_dict())
    d = write(tmp_path, "d.json", {"coeffs": [1, 0, 0, 0]})
    code, _, err = invoke("gg", fan, d)
    assert code == 1
    assert "not complete" in err


def test_sections_and_hilbert(plane):
    fan, h, _ = plane
    code, out, _ = invoke("sections", fan, h)
    assert code == 0 and "global sections: 3" in out
    code, out, _ = invoke("hilbert", fan, h, "--m-max", 10, "--format", "json")
    assert json.loads(out)["counts"] == [(m + 1) * (m + 2) // 2 for m in range(11)]


def test_gg_and_qnef(plane):
    fan, h, minus_h = plane
    assert "globally generated: Yes" in invoke("gg", fan, h)[1]
    assert "globally generated: No" in invoke("gg", fan, minus_h)[1]
    assert "q-nef: Yes" in invoke("qnef", fan, h)[1]
    out = json.loads(invoke("qnef", fan, minus_h, "--format", "json")[1])
    assert out["qnef"] is False and "witness" in out


def test_qnt(plane):
    fan, h, minus_h = plane
    code, out, _ = invoke("qnt", fan, minus_h, "--ample", h, "--format", "json")
    assert code == 0
    assert json.loads(out)["qnt"] == "1"
    assert invoke("qnt", fan, h, "--ample", minus_h)[0] == 1


def test_qcartierize_cube_corner(tmp_path):
    f = cube_fan()
    fan = write(tmp_path, "cube.json", f.to_dict())
    d = write(tmp_path, "d.json", {"coeffs": [2 if r == (1, 1, 1) else 1 for r in f.rays]})
    for construction in ("polar", "relative"):
        code, out, _ = invoke("qcartierize", fan, d, "--construction", construction, "--format", "json")
        assert code == 0
        payload = json.loads(out)
        assert payload["small"] is True
        assert len(payload["fan_prime"]["max_cones"]) == 9
    gg = write(tmp_path, "k.json", {"coeffs": [1] * 8})
    code, out, _ = invoke("qcartierize", fan, gg)
    assert code == 0 and "globally generated" in out


def test_pullback_csv(tmp_path, plane):
    fan, h, _ = plane
    q = write(tmp_path, "q.json", [[1, 1], [-1, -1], [2, -1]])
    code, out, _ = invoke("pullback", fan, h, "--queries", q, "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["coefficient"] for r in rows] == ["0", "1", "1"]
    zero = write(tmp_path, "z.json", [[0, 0]])
    assert invoke("pullback", fan, h, "--queries", zero)[0] == 1


def test_mld_command(tmp_path):
    fan = write(tmp_path, "fam.json", acc_family_fan(3).to_dict())
    code, out, _ = invoke("mld", fan, "--bound", 3, "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["which"] == "plus" and payload["rows"]


def test_acc_family_csv_and_out_file(tmp_path):
    target = tmp_path / "acc.csv"
    code, out, _ = invoke("acc-family", "--a", "1..5", "--out", target)
    assert code == 0 and out == ""
    rows = list(csv.DictReader(io.StringIO(target.read_text())))
    assert [r["closed_form"] for r in rows] == ["3", "13/4", "17/5", "7/2", "25/7"]
    assert all(r["agree_flags"] == "boundary_lp_pairing=closed_form" for r in rows)
    assert rows[1]["closed_form_decimal"] == "3.25"


def test_gg_conjecture_command(plane, tmp_path):
    fan, h, minus_h = plane
    code, out, _ = invoke("gg-conjecture", fan, minus_h, "--ample", h, "--m-max", 3, "--format", "json")
    assert code == 0 and json.loads(out)["all_generated"] is True
    assert invoke("gg", fan, h, "--format", "csv")[0] == 2


def test_helpers():
    assert decimal_string(Fraction(1, 3), 5) == "0.33333"
    assert parse_a_values("2..4") == [2, 3, 4]
    assert parse_a_values("1,5") == [1, 5]
    with pytest.raises(UsageError):
        parse_a_values("x")


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "toridiv.cli", "acc-family", "--a", "1"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1].split(",")[7] == "3"
