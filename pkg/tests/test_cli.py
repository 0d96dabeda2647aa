import csv
import json

import pytest

from bellgroth.bell_core import build_inequality, import_matrix
from bellgroth.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_construct_i54(capsys, tmp_path):
    out = tmp_path / "i54.txt"
    code, cap = run(capsys, "construct", "--na", 5, "--nb", 4, "--out", out)
    assert code == 0 and "mA=11 mB=14 nnz=52" in cap.out
    assert import_matrix(out.read_bytes()).coeffs == build_inequality(5, 4).coeffs


def test_construct_i3322_structured(capsys, tmp_path):
    out = tmp_path / "i3322.json"
    code, cap = run(capsys, "construct", "--na", 2, "--nb", 2, "--marginals",
                    "--format", "structured-text", "--out", out)
    assert code == 0 and "I'(2,2)" in cap.out
    assert json.loads(out.read_text())["label"] == "I'(2,2)"


def test_construct_invalid(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["construct", "--na", "0", "--nb", "1"])
    assert exc.value.code == 2


def test_marginals_need_square(capsys):
    with pytest.raises(SystemExit):
        main(["construct", "--na", "3", "--nb", "2", "--marginals"])


def test_local_bound(capsys, tmp_path):
    out = tmp_path / "lb.json"
    code, cap = run(capsys, "local-bound", "--na", 5, "--nb", 4, "--out", out)
    assert code == 0
    res = json.loads(out.read_text())["results"]
    assert res == {"closed_form": 20, "kl_enumeration": 20, "brute_force": 20}


def test_seesaw_trivial(capsys, tmp_path):
    out = tmp_path / "s.json"
    code, cap = run(capsys, "seesaw", "--n", 1, "--d", 3, "--out", out)
    report = json.loads(out.read_text())
    assert code == 0 and abs(report["results"]["ratio"] - 1) < 1e-12
    assert report["results"]["visibility"] is None
    assert report["schema_version"] == 1


def test_seesaw_i54(capsys, tmp_path):
    out = tmp_path / "s.json"
    code, _ = run(capsys, "seesaw", "--na", 5, "--nb", 4, "--d", 5, "--iters", 5000, "--out", out)
    assert code == 0
    assert abs(json.loads(out.read_text())["results"]["value"] - 28.390139) < 1e-5


def test_seesaw_deterministic(capsys, tmp_path):
    docs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        run(capsys, "seesaw", "--n", 6, "--d", 3, "--seed", 4, "--out", out)
        doc = json.loads(out.read_text())
        doc.pop("wall_time_s")
        docs.append(json.dumps(doc, sort_keys=True))
    assert docs[0] == docs[1]


def test_degenerate_exit_code(capsys):
    code, cap = run(capsys, "seesaw", "--n", 4, "--d", 3, "--init", "paper_angles", "--restarts", 1)
    assert code == 3 and "aborted" in cap.err


def test_certify_chsh(capsys, tmp_path):
    out = tmp_path / "c.json"
    code, _ = run(capsys, "certify", "--chsh", "--d", 2, "--out", out)
    cert = json.loads(out.read_text())["results"]["certificate"]
    assert code == 0 and cert["verified"] and abs(cert["bound"] - 2 * 2 ** 0.5) < 1e-8


def test_tightness_cmd(capsys, tmp_path):
    sat = tmp_path / "sat.csv"
    code, cap = run(capsys, "tightness", "--n", 2, "--marginals", "--csv", sat)
    assert code == 0 and "I'(2,2): tight (rank 15 of D=15" in cap.out
    assert len(sat.read_text().splitlines()) == 21


def test_reduce(capsys):
    code, cap = run(capsys, "reduce", "--n", 4)
    assert code == 0
    assert "I'(4,4) -> I'(3,3)" in cap.out and "I'(3,3) -> I'(2,2)" in cap.out
    with pytest.raises(SystemExit):
        main(["reduce", "--n", "2"])


def test_figure(capsys, tmp_path):
    code, _ = run(capsys, "figure", "--out", tmp_path / "fig")
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "fig" / "three_circles.csv")))
    assert len(rows) == 30
    assert abs(float(rows[4]["x"])) < 1e-12 and abs(float(rows[4]["y"]) - 0.52) < 1e-12
    radii = {round((float(r["x"]) ** 2 + float(r["y"]) ** 2) ** 0.5, 12) for r in rows}
    assert radii == {0.22, 0.52, 0.77}
    svg = (tmp_path / "fig" / "three_circles.svg").read_text()
    assert svg.lstrip().startswith("<?xml") and "<svg" in svg


def test_figure_reproducible(capsys, tmp_path):
    run(capsys, "figure", "--out", tmp_path / "a" / "c.svg")
    run(capsys, "figure", "--out", tmp_path / "b" / "c.svg")
    assert (tmp_path / "a" / "c.svg").read_bytes() == (tmp_path / "b" / "c.svg").read_bytes()


def test_reproduce_circles(capsys, tmp_path):
    out = tmp_path / "c.json"
    code, _ = run(capsys, "reproduce", "circles30", "--out", out)
    assert code == 0
    assert abs(json.loads(out.read_text())["results"]["ratio"] - 1.415199) < 1e-4


def test_reproduce_tightness(capsys, tmp_path):
    out = tmp_path / "t.json"
    code, _ = run(capsys, "reproduce", "tightness", "--out", out)
    verdicts = [c["tight"] for c in json.loads(out.read_text())["results"]["cases"]]
    assert code == 0 and verdicts == [True] * 3 + [False] * 3 + [True] * 3
