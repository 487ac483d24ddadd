import json
import subprocess
import sys

import pytest
from conftest import F1_DOC, f2_doc

from evacsched.cli import departure_profile, gap_percent, report_departure_profile, run
from evacsched.model import parse_instance


@pytest.fixture
def files(tmp_path):
    def write(name, doc):
        p = tmp_path / name
        p.write_text(json.dumps(doc))
        return str(p)

    return tmp_path, write


def test_profile_f1():
    inst = parse_instance(json.dumps(F1_DOC))
    text = report_departure_profile({"a": (0, 3, 3, 2, 6)}, inst)
    assert text.splitlines() == ["areaId,minute,vehiclesDeparting", "a,0,2", "a,1,2", "a,2,2"]


def test_profile_flow_zero():
    assert departure_profile({"a": (0, 0, 0, 2, 0)}) == []


def test_profile_f2_h6():
    rows = departure_profile({"a": (0, 2, 2, 2, 4), "b": (1, 1, 2, 2, 2)})
    assert rows == [("a", 0, 2), ("a", 1, 2), ("b", 1, 2)]


def test_profile_last_batch():
    assert departure_profile({"a": (4, 3, 7, 2, 5)}) == [("a", 4, 2), ("a", 5, 2), ("a", 6, 1)]


def test_gap_percent():
    assert gap_percent("maxflow", 6, 8) == 25.0
    assert gap_percent("maxflow", 0, 0) == 0.0
    assert gap_percent("clearance", 8, 7) == pytest.approx(14.286)
    assert gap_percent("maxflow", None, 8) is None


def test_solve_validate_report(files):
    tmp, write = files
    inst = write("inst.json", f2_doc())
    sol = str(tmp / "sol.json")
    assert run(["solve", "--mode", "sim", "--objective", "maxflow", "--horizon", "6",
                "--time-limit", "5", "--strategy", "auto", "-i", inst, "-o", sol]) == 0
    doc = json.loads(open(sol).read())
    assert doc["objective"] == 6 and doc["bound"] == 6 and doc["gapPercent"] == 0.0
    assert doc["percentEvacuated"] == 75.0
    assert set(doc) >= {"perArea", "objective", "bound", "gapPercent", "status", "stats", "search"}
    out = str(tmp / "rep.json")
    assert run(["validate", "-i", inst, "-s", sol, "-o", out]) == 0
    assert json.loads(open(out).read())["ok"] is True
    csv_path = str(tmp / "profile.csv")
    assert run(["report", "--profile", "-i", inst, "-s", sol, "-o", csv_path]) == 0
    lines = open(csv_path).read().splitlines()
    assert lines[0] == "areaId,minute,vehiclesDeparting"
    assert sum(int(x.split(",")[2]) for x in lines[1:]) == 6


def test_validate_rejects_overlap(files):
    tmp, write = files
    inst = write("inst.json", f2_doc())
    bad = write("bad.json", {"mode": "simultaneous", "horizon": 6, "perArea": {
        "a": {"start": 0, "dur": 2, "end": 2, "rate": 2, "flow": 4},
        "b": {"start": 0, "dur": 1, "end": 1, "rate": 2, "flow": 2}}})
    assert run(["validate", "-i", inst, "-s", bad, "-o", str(tmp / "r.json")]) == 1
    assert run(["report", "--profile", "-i", inst, "-s", bad, "-o", str(tmp / "p.csv")]) == 1


def test_phased_mode_and_rates(files):
    tmp, write = files
    inst = write("inst.json", F1_DOC)
    sol = str(tmp / "sol.json")
    assert run(["solve", "--mode", "phased", "--horizon", "10", "--rates", "2,6,10,15,20", "-i", inst, "-o", sol]) == 0
    doc = json.loads(open(sol).read())
    assert doc["mode"] == "phased" and doc["perArea"]["a"]["rate"] == 2
    assert run(["validate", "-i", inst, "-s", sol, "-o", str(tmp / "r.json")]) == 0


def test_sat_infeasible_exit(files):
    tmp, write = files
    inst = write("inst.json", f2_doc())
    assert run(["solve", "--objective", "sat", "--horizon", "6", "-i", inst, "-o", str(tmp / "s.json")]) == 1


def test_clearance(files):
    tmp, write = files
    inst = write("inst.json", F1_DOC)
    sol = str(tmp / "s.json")
    assert run(["solve", "--objective", "clearance", "-i", inst, "-o", sol]) == 0
    assert json.loads(open(sol).read())["objective"] == 5


def test_bound(files, capsys):
    tmp, write = files
    inst = write("inst.json", f2_doc())
    assert run(["bound", "--horizon", "6", "-i", inst]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["bound"] == 6 and doc["perComponent"][0]["areas"] == ["a", "b"]


def test_partition(files, capsys):
    tmp, write = files
    inst = write("inst.json", f2_doc())
    assert run(["report", "--partition", "-i", inst]) == 0
    assert json.loads(capsys.readouterr().out)["components"][0]["dominatingEdges"] == ["s"]


def test_gen_deterministic(files, capsys):
    tmp, _ = files
    a, b = str(tmp / "a.json"), str(tmp / "b.json")
    for p in (a, b):
        assert run(["gen", "--areas", "4", "--seed", "7", "--tree-shape", "randomPaths", "-o", p]) == 0
    assert open(a).read() == open(b).read()
    parse_instance(open(a).read())


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--bogus"],
        ["solve", "-i", "/nonexistent.json", "--horizon", "4"],
        ["solve", "--strategy", "9Z", "-i", "x"],
        ["solve", "--rates", "a,b", "-i", "x"],
        [],
    ],
)
def test_usage_errors(argv):
    assert run(argv) == 2


def test_missing_horizon(files):
    _, write = files
    inst = write("inst.json", F1_DOC)
    assert run(["solve", "-i", inst]) == 2


def test_schema_error(files):
    _, write = files
    doc = dict(F1_DOC, extra=1)
    assert run(["bound", "--horizon", "3", "-i", write("bad.json", doc)]) == 2


def test_module_entry_point(files):
    _, write = files
    inst = write("inst.json", F1_DOC)
    proc = subprocess.run([sys.executable, "-m", "evacsched", "bound", "--horizon", "10", "-i", inst],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["bound"] == 6
