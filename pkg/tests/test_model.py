from collections import deque

import pytest

from pdrc import expr as ex
from pdrc.benchmarks import gen_cmt, gen_edp, gen_fig1, generate
from pdrc.model import (
    Automaton, EventDecl, InvalidModel, System, Transition, VarDecl,
    check, enabled, initial_state, successors, validate,
)


def test_guard_roundtrip():
    g = ex.parse_guard("y == 2 && (x <= 2 || !A@l1)")
    assert ex.parse_guard(ex.to_text(g)) == g
    assert ex.evaluate(g, {"x": 3, "y": 2}, {"A": "l0"})
    assert not ex.evaluate(g, {"x": 3, "y": 2}, {"A": "l1"})


@pytest.mark.parametrize("bad", ["x ==", "x == y", "(x > 1", "x > 1 &&", "x ? 1"])
def test_guard_syntax_errors(bad):
    with pytest.raises(ex.ExprSyntaxError):
        ex.parse_guard(bad)


def test_update_parsing():
    assert ex.parse_update("x", "x+1") == ex.Update("x", "x", 1)
    assert ex.parse_update("x", "x - 2").apply({"x": 5}) == 3
    assert ex.parse_update("y", "3") == ex.Update("y", None, 3)
    assert ex.parse_update("y", "x").apply({"x": 2}) == 2
    with pytest.raises(ex.ExprSyntaxError):
        ex.parse_update("x", "x*2")


def test_negate_is_complement():
    g = ex.parse_guard("x >= 2 && (y != 1 || x < 3)")
    n = ex.negate(g)
    for x in range(4):
        for y in range(4):
            v = {"x": x, "y": y}
            assert ex.evaluate(n, v) == (not ex.evaluate(g, v))


def test_fig1_validates():
    sys = gen_fig1()
    assert validate(sys) == []
    assert sys.state_count == 6 * 16


def test_fig1_step_examples():
    sys = gen_fig1()
    s0 = initial_state(sys)
    assert enabled(sys, s0, "b") == sys.state({"A": "l1"}, x=0, y=1)
    s = sys.state({"A": "l3"}, x=3, y=2)
    assert enabled(sys, s, "alpha") == sys.state({"A": "l5"}, x=3, y=2)
    assert enabled(sys, s, "omega") is None
    # domain guard: x = 3 cannot be incremented
    assert enabled(sys, s, "c") is None
    assert enabled(sys, sys.state({"A": "l3"}, x=2, y=2), "c") == sys.state({"A": "l1"}, x=3, y=2)


def _fig1_reachable_by_hand():
    # independent re-statement of the example's semantics
    def succ(s):
        loc, x, y = s
        out = []
        if loc == "l0":
            out += [("l1", x, 1), ("l2", x, 2)]
        elif loc == "l1":
            out.append(("l3", x, y))
        elif loc == "l2":
            out.append(("l3", x, y))
        elif loc == "l3":
            if x + 1 <= 3:
                out.append(("l1", x + 1, y))
            if y == 2 and x <= 2:
                out.append(("l4", x, y))
            if y == 2 and x > 2:
                out.append(("l5", x, y))
        elif loc == "l4":
            out.append(("l4", x, y))
        return out

    seen, todo = {("l0", 0, 0)}, deque([("l0", 0, 0)])
    while todo:
        for t in succ(todo.popleft()):
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return seen


def test_fig1_reachable_count():
    sys = gen_fig1()
    seen, todo = {initial_state(sys)}, deque([initial_state(sys)])
    while todo:
        for _, t in successors(sys, todo.popleft()):
            if t not in seen:
                seen.add(t)
                todo.append(t)
    flat = {(s.locations[0],) + s.values for s in seen}
    assert flat == _fig1_reachable_by_hand()
    assert len(flat) == 21


def _one(transitions, variables=(VarDecl("x", 0, 3, 0),), events=(EventDecl("a"),), initial="l0"):
    return System(variables, events, (Automaton("A", ("l0", "l1"), initial, frozenset(), tuple(transitions)),))


def test_nondeterminism_detected():
    sys = _one([
        Transition("l0", "a", "l1", ex.parse_guard("x < 2")),
        Transition("l0", "a", "l0", ex.parse_guard("x > 0")),
    ])
    diags = validate(sys)
    assert [d.kind for d in diags] == ["nondeterministic"]


def test_disjoint_guards_are_deterministic():
    sys = _one([
        Transition("l0", "a", "l1", ex.parse_guard("x < 2")),
        Transition("l0", "a", "l0", ex.parse_guard("x >= 2")),
    ])
    assert validate(sys) == []


def test_missing_initial_location():
    sys = _one([], initial="l9")
    diags = validate(sys)
    assert len(diags) == 1 and diags[0].kind == "invalid"
    with pytest.raises(InvalidModel):
        check(sys)


def test_undeclared_names():
    sys = _one([Transition("l0", "b", "l1", ex.parse_guard("z > 0"))])
    msgs = " ".join(d.message for d in validate(sys))
    assert "undeclared event" in msgs and "undeclared variable" in msgs


def test_conflicting_update():
    a = Automaton("A", ("p",), "p", frozenset(), (Transition("p", "e", "p", ex.TRUE, (ex.Update("x", None, 1),)),))
    b = Automaton("B", ("q",), "q", frozenset(), (Transition("q", "e", "q", ex.TRUE, (ex.Update("x", None, 2),)),))
    sys = System((VarDecl("x", 0, 3, 0),), (EventDecl("e"),), (a, b))
    assert [d.kind for d in validate(sys)] == ["conflicting-update"]


def test_synchronisation_needs_all_declaring():
    a = Automaton("A", ("p", "p2"), "p", frozenset(), (Transition("p", "e", "p2"),))
    b = Automaton("B", ("q", "q2"), "q", frozenset(), (Transition("q2", "e", "q"), Transition("q", "f", "q2")))
    sys = System((), (EventDecl("e"), EventDecl("f")), (a, b))
    s = initial_state(sys)
    assert enabled(sys, s, "e") is None
    s2 = enabled(sys, s, "f")
    assert enabled(sys, s2, "e").locations == ("p2", "q")


@pytest.mark.parametrize("n,k", [(2, 1), (3, 2), (5, 10)])
def test_edp_shape(n, k):
    sys = gen_edp(n, k)
    assert validate(sys) == []
    assert len(sys.automata) == 2 * n
    assert len(sys.variables) == n


def test_cmt_shape():
    sys = gen_cmt(2, 2)
    assert validate(sys) == []
    assert len(sys.variables) == 2 * 5 * 2
    assert not sys.is_forbidden(initial_state(sys))


def test_generate_dispatch():
    assert generate("fig1").name == "fig1"
    with pytest.raises(ValueError):
        generate("nope")
    with pytest.raises(ValueError):
        gen_edp(1, 1)
