import io
import itertools
import json

import pytest

from pdrc import expr as ex
from pdrc.benchmarks import gen_cmt, gen_edp, gen_fig1
from pdrc.core import PDRC, Limits, supervised_enabled
from pdrc.model import Automaton, EventDecl, System, Transition, VarDecl, all_states, enabled, initial_state
from pdrc.oracle import compare, replay, rw_synthesize
from pdrc.randgen import random_systems
from pdrc.sat import available_backends


def atoms(bm, cube):
    return sorted(bm.atom(l) for l in cube)


ALPHA_CUBE = ["A@l3", "event:alpha", "x>=3", "y>=2", "!y>=3"]


class Recording(PDRC):
    """Snapshots F_1.. after every iteration and keeps every generalised cube."""

    def __init__(self, *a, **kw):
        super().__init__(*a, **kw)
        self.snapshots, self.bad_cubes, self.c_cubes, self.u_cubes = [], [], [], []

    def propagate(self):
        super().propagate()
        self.snapshots.append([sorted(atoms(self.bm, c) for c in self.trace.cubes(i)) for i in range(1, self.trace.N + 1)])

    def generalize_bad_state(self, model):
        s = super().generalize_bad_state(model)
        self.bad_cubes.append(s)
        return s

    def generalize_preimage_c(self, model, s):
        t = super().generalize_preimage_c(model, s)
        self.c_cubes.append((t, s))
        return t

    def generalize_preimage_u(self, model, s, event):
        t = super().generalize_preimage_u(model, s, event)
        self.u_cubes.append((t, s, event))
        return t


@pytest.mark.parametrize("backend", available_backends())
def test_fig1_golden_trace(backend):
    p = Recording(gen_fig1(), backend=backend, inductive_generalization=False)
    r = p.synthesize()
    assert r.verdict == "controlled"
    assert r.stats.iterations == 3
    l5 = ["A@l5"]
    alpha = sorted(ALPHA_CUBE)
    # iteration 1: !l5 in F_1
    assert p.snapshots[0][0] == [l5]
    # iteration 2: the alpha clause joins F_1 and !l5 reaches F_2
    assert alpha in p.snapshots[1][0] and l5 in p.snapshots[1][1]
    # iteration 3: F_1 = F_2 holds the invariant
    assert p.snapshots[2][0] == p.snapshots[2][1] == sorted([alpha, l5])
    assert sorted(atoms(p.bm, c) for c in r.invariant) == sorted([alpha, l5])
    sup = sorted(atoms(p.bm, fc.cube) for fc in r.supervisor.cubes)
    assert sup == [sorted(["A@l1", "x>=3", "y>=2", "!y>=3"]), sorted(["A@l2", "x>=3", "y>=2", "!y>=3"])]


def test_fig1_with_inductive_generalisation():
    r = PDRC(gen_fig1()).synthesize()
    assert r.verdict == "controlled" and r.stats.iterations <= 5
    assert len(r.supervisor) == 2


def _model_of(p, state, event, extra=()):
    r = p.h.solve(list(p.bm.encode_state(state, event)) + [p.acts.act_inv, p.acts.act_inv_next] + list(extra))
    assert r.sat
    return r.model


def test_generalize_bad_state_fig1():
    sys = gen_fig1()
    p = PDRC(sys)
    m = _model_of(p, sys.state({"A": "l5"}, x=3, y=2), "omega")
    assert atoms(p.bm, p.generalize_bad_state(m)) == ["A@l5"]


def test_generalize_bad_state_everything_bad():
    a = Automaton("A", ("p",), "p", frozenset({"p"}), ())
    sys = System((VarDecl("x", 0, 2, 0),), (EventDecl("e"),), (a,))
    p = PDRC(sys)
    m = _model_of(p, initial_state(sys), "e")
    assert p.generalize_bad_state(m) == ()


def test_generalize_preimage_u_fig1():
    sys = gen_fig1()
    p = PDRC(sys)
    s = (p.bm.loc_lit("A", "l5"),)
    m = _model_of(p, sys.state({"A": "l3"}, x=3, y=2), "alpha", [p.sym.ind_u])
    assert atoms(p.bm, p.generalize_preimage_u(m, s, "alpha")) == sorted(ALPHA_CUBE)


def test_generalize_preimage_c_fig1():
    sys = gen_fig1()
    p = PDRC(sys)
    bm = p.bm
    s = tuple(bm.lit(a) for a in ALPHA_CUBE)
    m = _model_of(p, sys.state({"A": "l2"}, x=3, y=2), "b", [p.sym.ind_c])
    t = p.generalize_preimage_c(m, s)
    # b is the only event enabled at l2, so the event literal may go; compare
    # the enabled controllable (state, event) pairs with the cube {l2, b, y=2, x>2}
    expected = {(q, "b") for q in all_states(sys) if q.locations == ("l2",) and q.values[1] == 2 and q.values[0] > 2}
    got = {(q, e) for q in all_states(sys) for e in sys.controllable
           if bm.cube_holds(t, bm.true_lits(q, e)) and enabled(sys, q, e) is not None}
    assert got == expected


def test_forbidden_initial_state():
    a = Automaton("A", ("bad", "ok"), "bad", frozenset({"bad"}), (Transition("bad", "e", "ok"),))
    sys = System((), (EventDecl("e"),), (a,))
    r = PDRC(sys).synthesize()
    assert r.verdict == "uncontrollable"
    assert len(r.path) == 0 and r.path.states == [initial_state(sys)]


def _fig1_variant(uncontrollable, drop=()):
    sys = gen_fig1()
    events = tuple(EventDecl(e.name, e.name not in uncontrollable) for e in sys.events if e.name not in drop)
    a = sys.automata[0]
    a = Automaton(a.name, a.locations, a.initial, a.forbidden, tuple(t for t in a.transitions if t.event not in drop))
    return System(sys.variables, events, (a,), name="fig1-variant")


def test_fig1_fully_uncontrollable():
    sys = _fig1_variant({"a", "b", "c", "alpha", "omega"})
    r = PDRC(sys, debug=True).synthesize()
    o = rw_synthesize(sys)
    assert r.verdict == o.verdict == "uncontrollable"
    assert replay(sys, r.path.states, r.path.events)
    assert sys.is_forbidden(r.path.states[-1])


@pytest.mark.parametrize("unc,drop", [({"a", "alpha", "omega"}, {"b"}), ({"a", "b", "alpha", "omega"}, ()),
                                      ({"c", "alpha", "omega"}, ())])
def test_fig1_variants_match_oracle(unc, drop):
    sys = _fig1_variant(unc, drop)
    r = PDRC(sys, debug=True).synthesize()
    assert compare(sys, r, rw_synthesize(sys)).agree


def test_budgets_are_inconclusive():
    assert PDRC(gen_fig1(), limits=Limits(max_frames=1), inductive_generalization=False).synthesize().verdict == "inconclusive"
    assert PDRC(gen_cmt(2, 2), limits=Limits(max_seconds=0)).synthesize().verdict == "inconclusive"
    r = PDRC(gen_cmt(2, 2), limits=Limits(max_conflicts=1)).synthesize()
    assert r.verdict == "inconclusive" and "conflict" in r.reason


def test_run_log_records():
    buf = io.StringIO()
    PDRC(gen_fig1(), run_log=buf).synthesize()
    recs = [json.loads(l) for l in buf.getvalue().splitlines()]
    assert recs and {r["verdict"] for r in recs} == {"sat", "unsat"}
    assert {r["cone"] for r in recs} >= {"bad", "c", "u", "T"}
    assert recs[0] == {"frame": 0, "cone": "bad", "verdict": "unsat", "cube": None}


def _uncontrollable_clauses(p):
    ind_u = p.sym.ind_u
    return sorted(tuple(c) for c in p.h.clauses if ind_u in c or -ind_u in c)


@pytest.mark.parametrize("make", [gen_fig1, lambda: gen_edp(3, 2), lambda: gen_cmt(1, 2)])
def test_uncontrollable_cone_untouched(make):
    p = PDRC(make())
    before = _uncontrollable_clauses(p)
    p.synthesize()
    assert _uncontrollable_clauses(p) == before


def _full_bstar(sys):
    bad = {q for q in all_states(sys) if sys.is_forbidden(q)}
    changed = True
    while changed:
        changed = False
        for q in all_states(sys):
            if q in bad:
                continue
            if any(enabled(sys, q, e) in bad for e in sys.uncontrollable):
                bad.add(q)
                changed = True
    return bad


def test_random_generalisations_are_sound():
    """Every generalised cube, checked by brute force over (state, event) pairs."""
    for sys in random_systems(5, 60):
        p = Recording(sys)
        r = p.synthesize()
        bm = p.bm
        pairs = [(q, e.name) for q in all_states(sys) for e in sys.events]
        lits = {pr: bm.true_lits(*pr) for pr in pairs}
        state_lits = {q: set(bm.encode_state(q)) for q in all_states(sys)}

        def in_s(q, s):
            return bm.cube_holds([l for l in s if abs(l) not in bm.event_bits.values()], state_lits[q])

        for s in p.bad_cubes:
            assert all(sys.is_forbidden(q) for (q, e) in pairs if bm.cube_holds(s, lits[q, e]))
        # each supervisor cube is checked against T_c as supervised by the cubes before it
        for i, (t, s) in enumerate(p.c_cubes):
            earlier = [c for c, _ in p.c_cubes[:i]]
            for q, e in pairs:
                if e in sys.controllable and bm.cube_holds(t, lits[q, e]):
                    if any(bm.cube_holds(c, lits[q, e]) for c in earlier):
                        continue
                    q2 = enabled(sys, q, e)
                    assert q2 is None or in_s(q2, s)
        # hence the supervisor only ever disables moves into the full B*
        bstar = _full_bstar(sys)
        for q, e in pairs:
            if e in sys.controllable and r.verdict == "controlled" and r.supervisor.forbids(bm, q, e):
                q2 = enabled(sys, q, e)
                assert q2 is None or q2 in bstar
        for t, s, ev in p.u_cubes:
            for q, e in pairs:
                if bm.cube_holds(t, lits[q, e]):
                    q2 = enabled(sys, q, ev)
                    assert e == ev and q2 is not None and in_s(q2, s)
        if r.verdict == "uncontrollable":
            assert replay(sys, r.path.states, r.path.events)


def test_random_debug_audit_and_theorems():
    for sys in random_systems(17, 80):
        r = PDRC(sys, debug=True).synthesize()
        o = rw_synthesize(sys)
        c = compare(sys, r, o)
        assert c.agree, c.lines()


def test_supervised_step_never_blocks_uncontrollable():
    r = PDRC(gen_edp(2, 1)).synthesize()
    sys, bm = r.sym.system, r.sym.bitmap
    for q in all_states(sys):
        for e in sys.uncontrollable:
            assert supervised_enabled(sys, bm, r.supervisor, q, e) == enabled(sys, q, e)


def test_builtin_backend_matches():
    if "pysat" not in available_backends():
        pytest.skip("single backend")
    for sys in random_systems(8, 30):
        a = PDRC(sys, backend="builtin").synthesize()
        b = PDRC(sys, backend="pysat").synthesize()
        assert a.verdict == b.verdict
