import io
import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from pyxflow import (
    Misuse, PolicyError, check_initial_environment, dump_policy, load_policy, loads_policy,
    parse_source, policy_from_dict, sources_of, targets_of, vars_of,
)
from pyxflow.varsets import calls_in

from progen import GenConfig, random_program

PROG = parse_source(
    "def f(a):\n"
    "    g1 = a + k\n"
    "    return g1\n"
    "def h(b):\n"
    "    g2 = b\n"
    "x = f(y)\n"
    "if c == 1:\n"
    "    z = 2\n"
    "else:\n"
    "    h(w)\n"
    "while n > 0:\n"
    "    n = n - m\n"
)
F = PROG.functions


def stmt(i):
    return PROG.statements[i]


def test_sources():
    assert sources_of(stmt(0), F) == {"y", "a", "k", "g1"}
    assert sources_of(stmt(1), F) == {"c", "w", "b"}
    assert sources_of(stmt(2), F) == {"n", "m"}
    assert sources_of(PROG.functions["f"].body.body[1]) == {"g1"}


def test_targets():
    assert targets_of(stmt(0), F) == {"x", "g1"}
    assert targets_of(stmt(1), F) == {"z", "g2"}
    assert targets_of(stmt(2), F) == {"n"}
    assert targets_of(PROG.functions["f"].body.body[1]) == set()


def test_callee_parameters_are_not_caller_targets():
    prog = parse_source("def f(a):\n    a = 1\n    q = a\nf(x)\n")
    assert targets_of(prog.statements[0], prog.functions) == {"q"}


def test_vars_of_program_includes_called_bodies():
    assert vars_of(PROG) >= {"x", "y", "a", "k", "g1", "c", "z", "w", "b", "g2", "n", "m"}


def test_calls_in_finds_nested_calls():
    assert [c.name for c in calls_in(stmt(0))] == ["f"]


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_source_and_target_sets_are_program_variables(seed):
    prog = random_program(random.Random(seed), GenConfig(nested=True))
    every = vars_of(prog)
    for s in prog.statements:
        assert sources_of(s, prog.functions) <= every
        assert targets_of(s, prog.functions) <= every


POLICY = {
    "principals": ["A", "B", "S"],
    "executor": "S",
    "clearance": {"owner": "S", "readers": ["S"], "writers": "*"},
    "globals": {
        "x": {"owner": "A", "readers": ["*"], "writers": ["A"]},
        "y": {"owner": "B", "readers": ["B", "S"], "writers": ["B"]},
    },
}


def test_load_expands_wildcards():
    spec = policy_from_dict(POLICY)
    u = spec.universe
    assert spec.globals["x"] == u.label("A", ["A", "B", "S"], ["A"])
    assert spec.clearance == u.label("S", ["S"], ["A", "B", "S"])
    assert spec.functions == {}


def test_password_policy_loads():
    from pyxflow import golden
    spec = golden.entry("password_plain").spec()
    u = spec.universe
    assert spec.globals == {
        "guess_pwd": u.label("A", ["A", "B"], ["A"]),
        "new_pwd": u.label("A", ["A", "B"], ["A"]),
        "pwd_db": u.label("B", ["B"], ["A", "B"]),
    }
    assert spec.clearance == u.label("A", ["A"], ["A", "B"])
    fp = spec.functions["Password_Update"]
    assert fp.executor == "B" and fp.clearance == u.label("B", ["B"], ["A", "B"])


def test_round_trip_through_json(tmp_path):
    spec = policy_from_dict(POLICY)
    text = dump_policy(spec)
    assert loads_policy(text) == spec
    path = tmp_path / "p.json"
    path.write_text(text)
    assert load_policy(str(path)) == spec
    assert load_policy(io.StringIO(text)) == spec
    assert load_policy(json.loads(text)) == spec


def bad(**changes):
    d = json.loads(json.dumps(POLICY))
    for key, value in changes.items():
        if value is None:
            del d[key]
        else:
            d[key] = value
    return d


@pytest.mark.parametrize("data", [
    bad(executor=None),
    bad(clearance=None),
    bad(principals=None),
    bad(executor="Z"),
    bad(globals={"x": {"owner": "Z", "readers": [], "writers": []}}),
    bad(globals={"x": {"owner": "A", "readers": ["Q"], "writers": []}}),
    bad(globals={"x": {"owner": "A", "readers": []}}),
    bad(globals=[]),
    bad(functions={"f": {"executor": "A"}}),
    bad(functions={"f": {"executor": "Q", "clearance": POLICY["clearance"]}}),
    "not an object",
])
def test_bad_policies(data):
    with pytest.raises(PolicyError):
        policy_from_dict(data)


def test_duplicate_global_is_rejected():
    text = '{"principals":["A"],"executor":"A","clearance":{"owner":"A","readers":[],"writers":[]},' \
           '"globals":{"x":{"owner":"A","readers":[],"writers":[]},"x":{"owner":"A","readers":[],"writers":[]}}}'
    with pytest.raises(PolicyError, match="duplicate"):
        loads_policy(text)


def test_invalid_json_is_a_policy_error():
    with pytest.raises(PolicyError):
        loads_policy("{")


def test_initial_environment():
    spec = policy_from_dict(POLICY)
    prog = parse_source("z = x\nw = 1\ny = w\n")
    env = check_initial_environment(spec, prog)
    u = spec.universe
    start = u.label("S", ["A", "B", "S"], [])
    assert env.pc == start
    assert env.locals == {"z", "w"}
    assert env.labels["z"] == start and env.labels["w"] == start
    assert env.lookup("x") == spec.globals["x"]


def test_password_function_starts_at_its_executor_bottom():
    from pyxflow import analyze_program, golden
    e = golden.entry("password_downgrade")
    report = analyze_program(e.spec(), e.program(), trace=True)
    enter = next(t for t in report.trace if t.kind == "enter")
    assert str(enter.pc) == "(B,{A,B,S},{})"
    assert enter.pc.render(star=True) == "(B,{*},{})"


def test_global_missing_from_program_is_misuse():
    with pytest.raises(Misuse) as info:
        check_initial_environment(policy_from_dict(POLICY), parse_source("z = x\n"))
    assert info.value.diagnostic.rule == "INIT" and info.value.diagnostic.variable == "y"


def test_unreadable_source_is_misuse():
    d = bad(globals={"x": {"owner": "A", "readers": ["A"], "writers": ["A"]}})
    with pytest.raises(Misuse) as info:
        check_initial_environment(policy_from_dict(d), parse_source("z = x\n"))
    assert info.value.diagnostic.variable == "x"


def test_source_above_clearance_is_misuse():
    d = bad(clearance={"owner": "S", "readers": ["S"], "writers": ["S"]})
    with pytest.raises(Misuse):
        check_initial_environment(policy_from_dict(d), parse_source("z = x\nq = y\n"))


def test_written_only_global_is_not_a_source():
    d = bad(globals={"x": {"owner": "A", "readers": ["A"], "writers": ["A"]}})
    env = check_initial_environment(policy_from_dict(d), parse_source("x = 1\n"))
    assert env.locals == set()
