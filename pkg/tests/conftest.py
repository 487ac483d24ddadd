import json

import pytest

from evacsched.model import parse_instance

F1_DOC = {
    "name": "F1",
    "nodes": [{"id": "a", "kind": "evacuation"}, {"id": "z", "kind": "safe"}],
    "arcs": [{"id": "e1", "tail": "a", "head": "z", "travelTime": 2.0, "capacity": 2.0, "cutoff": None}],
    "areas": [{"node": "a", "demand": 6, "path": ["e1"]}],
}


def f2_doc(cap_s=2.0, cutoff_s=None, demands=(4, 4)):
    return {
        "name": "F2",
        "nodes": [
            {"id": "a", "kind": "evacuation"},
            {"id": "b", "kind": "evacuation"},
            {"id": "m", "kind": "transit"},
            {"id": "z", "kind": "safe"},
        ],
        "arcs": [
            {"id": "ea", "tail": "a", "head": "m", "travelTime": 1.0, "capacity": 3.0, "cutoff": None},
            {"id": "eb", "tail": "b", "head": "m", "travelTime": 2.0, "capacity": 3.0, "cutoff": None},
            {"id": "s", "tail": "m", "head": "z", "travelTime": 2.0, "capacity": cap_s, "cutoff": cutoff_s},
        ],
        "areas": [
            {"node": "a", "demand": demands[0], "path": ["ea", "s"]},
            {"node": "b", "demand": demands[1], "path": ["eb", "s"]},
        ],
    }


F3_DOC = {
    "name": "F3",
    "nodes": [
        {"id": "x", "kind": "evacuation"},
        {"id": "y", "kind": "evacuation"},
        {"id": "p", "kind": "transit"},
        {"id": "q", "kind": "transit"},
        {"id": "z1", "kind": "safe"},
        {"id": "z2", "kind": "safe"},
    ],
    "arcs": [
        {"id": "x1", "tail": "x", "head": "p", "travelTime": 1.0, "capacity": 2.0},
        {"id": "x2", "tail": "p", "head": "z1", "travelTime": 1.5, "capacity": 3.0},
        {"id": "y1", "tail": "y", "head": "q", "travelTime": 2.0, "capacity": 1.0},
        {"id": "y2", "tail": "q", "head": "z2", "travelTime": 1.0, "capacity": 2.0},
    ],
    "areas": [
        {"node": "x", "demand": 5, "path": ["x1", "x2"]},
        {"node": "y", "demand": 3, "path": ["y1", "y2"]},
    ],
}

# x-y share arc pq, y-z share arc qs2, x and z are arc-disjoint
CHAIN_DOC = {
    "name": "chain",
    "nodes": [
        {"id": "x", "kind": "evacuation"},
        {"id": "y", "kind": "evacuation"},
        {"id": "z", "kind": "evacuation"},
        {"id": "p", "kind": "transit"},
        {"id": "q", "kind": "transit"},
        {"id": "s1", "kind": "safe"},
        {"id": "s2", "kind": "safe"},
    ],
    "arcs": [
        {"id": "xp", "tail": "x", "head": "p", "travelTime": 1, "capacity": 2},
        {"id": "yp", "tail": "y", "head": "p", "travelTime": 1, "capacity": 2},
        {"id": "pq", "tail": "p", "head": "q", "travelTime": 1, "capacity": 2},
        {"id": "qs1", "tail": "q", "head": "s1", "travelTime": 1, "capacity": 2},
        {"id": "qs2", "tail": "q", "head": "s2", "travelTime": 1, "capacity": 2},
        {"id": "zq", "tail": "z", "head": "q", "travelTime": 1, "capacity": 2},
    ],
    "areas": [
        {"node": "x", "demand": 2, "path": ["xp", "pq", "qs1"]},
        {"node": "y", "demand": 2, "path": ["yp", "pq", "qs2"]},
        {"node": "z", "demand": 2, "path": ["zq", "qs2"]},
    ],
}


def load(doc):
    return parse_instance(json.dumps(doc))


@pytest.fixture
def f1():
    return load(F1_DOC)


@pytest.fixture
def f2():
    return load(f2_doc())


@pytest.fixture
def f3():
    return load(F3_DOC)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
