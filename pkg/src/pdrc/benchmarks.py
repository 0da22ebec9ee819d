"""Benchmark families: the running example, extended dining philosophers and
the cat-and-mouse tower.

The EDP and CMT constructions are this package's own interpretation of the
families; only their qualitative structure is fixed externally.
"""

from . import expr as ex
from .model import Automaton, EventDecl, System, Transition, VarDecl


def _t(src, ev, dst, guard="", **updates):
    return Transition(
        src, ev, dst, ex.parse_guard(guard),
        tuple(ex.parse_update(v, u) for v, u in updates.items()),
    )


def gen_fig1():
    """Six-location example with variables x, y in [0, 3]; l5 is forbidden."""
    transitions = (
        _t("l0", "b", "l1", y="1"),
        _t("l0", "a", "l2", y="2"),
        _t("l1", "a", "l3"),
        _t("l3", "c", "l1", x="x+1"),
        _t("l2", "b", "l3"),
        _t("l3", "alpha", "l4", "y == 2 && x <= 2"),
        _t("l3", "alpha", "l5", "y == 2 && x > 2"),
        _t("l4", "omega", "l4"),
    )
    return System(
        variables=(VarDecl("x", 0, 3, 0), VarDecl("y", 0, 3, 0)),
        events=(
            EventDecl("a", True), EventDecl("b", True), EventDecl("c", True),
            EventDecl("alpha", False), EventDecl("omega", False),
        ),
        automata=(Automaton(
            "A", tuple(f"l{i}" for i in range(6)), "l0", frozenset({"l5"}), transitions,
        ),),
        name="fig1",
    )


def gen_edp(n, k):
    """n philosophers P0..P{n-1} and n forks F0..F{n-1}.

    Philosopher i uses fork i on the left and fork i+1 (mod n) on the right.
    Each one goes think -> wait (left fork taken) -> k counting steps ->
    eat (right fork taken) -> think (both released). Fork automata make the
    take events synchronise with fork occupancy. Even philosophers take the
    left fork uncontrollably and, if it is held by their neighbour, run into
    the forbidden location ``collide``.
    """
    if n < 2 or k < 1:
        raise ValueError("EDP needs n >= 2 and k >= 1")
    events, phils, forks = [], [], []
    fork_trans = {i: [] for i in range(n)}
    for i in range(n):
        even = i % 2 == 0
        left, right = i, (i + 1) % n
        c = f"c{i}"
        take_l, step, take_r, rel, clash = (f"takeL{i}", f"step{i}", f"takeR{i}", f"release{i}", f"clashL{i}")
        events += [EventDecl(take_l, not even), EventDecl(step, True), EventDecl(take_r, True), EventDecl(rel, True)]
        ts = [
            _t("think", take_l, "wait"),
            _t("wait", step, "wait", f"{c} < {k}", **{c: f"{c}+1"}),
            _t("wait", take_r, "eat", f"{c} == {k}", **{c: "0"}),
            _t("eat", rel, "think"),
        ]
        locs = ["think", "wait", "eat"]
        forbidden = frozenset()
        if even:
            events.append(EventDecl(clash, False))
            ts.append(_t("think", clash, "collide"))
            locs.append("collide")
            forbidden = frozenset({"collide"})
            fork_trans[left].append(_t("held", clash, "held"))
        fork_trans[left] += [_t("free", take_l, "held"), _t("held", rel, "free")]
        fork_trans[right] += [_t("free", take_r, "held"), _t("held", rel, "free")]
        phils.append(Automaton(f"P{i}", tuple(locs), "think", forbidden, tuple(ts)))
    for i in range(n):
        forks.append(Automaton(f"F{i}", ("free", "held"), "free", frozenset(), tuple(fork_trans[i])))
    return System(
        variables=tuple(VarDecl(f"c{i}", 0, k, 0) for i in range(n)),
        events=tuple(events),
        automata=tuple(phils + forks),
        name=f"EDP({n},{k})",
    )


# Fixed floor layout: a ring of five rooms. Both animals move both ways along
# the ring. One uncontrollable pathway per animal and floor: cats 1 -> 3,
# mice 3 -> 1. Floors are linked from room 4 to room 0 of the next floor.
_RING = [(r, (r + 1) % 5) for r in range(5)]
_CAT_PATH = (1, 3)
_MOUSE_PATH = (3, 1)


def gen_cmt(n, k):
    """Tower of n floors, k cats and k mice as per-room occupancy counters.

    Cats start in room 0 of floor 0, mice in room 4 of the top floor.
    Controllable moves never enter a room holding the other species; the
    two uncontrollable pathways per floor are unguarded. A room holding both
    species is forbidden.
    """
    if n < 1 or k < 1:
        raise ValueError("CMT needs n >= 1 and k >= 1")
    variables, events, automata = [], [], []
    for f in range(n):
        for r in range(5):
            variables.append(VarDecl(f"cat_{f}_{r}", 0, k, k if (f, r) == (0, 0) else 0))
            variables.append(VarDecl(f"mouse_{f}_{r}", 0, k, k if (f, r) == (n - 1, 4) else 0))

    def move(animal, other, a, b, name, controllable):
        src, dst = f"{animal}_{a[0]}_{a[1]}", f"{animal}_{b[0]}_{b[1]}"
        guard = f"{src} >= 1"
        if controllable:
            guard += f" && {other}_{b[0]}_{b[1]} == 0"
        events.append(EventDecl(name, controllable))
        return _t("floor", name, "floor", guard, **{src: f"{src}-1", dst: f"{dst}+1"})

    for f in range(n):
        ts = []
        for animal, other in (("cat", "mouse"), ("mouse", "cat")):
            for a, b in _RING:
                for x, y in ((a, b), (b, a)):
                    ts.append(move(animal, other, (f, x), (f, y), f"{animal}_{f}_{x}to{y}", True))
            path = _CAT_PATH if animal == "cat" else _MOUSE_PATH
            ts.append(move(animal, other, (f, path[0]), (f, path[1]), f"{animal}_{f}_u{path[0]}to{path[1]}", False))
            if f + 1 < n:
                ts.append(move(animal, other, (f, 4), (f + 1, 0), f"{animal}_{f}_up", True))
                ts.append(move(animal, other, (f + 1, 0), (f, 4), f"{animal}_{f}_down", True))
        automata.append(Automaton(f"Floor{f}", ("floor",), "floor", frozenset(), tuple(ts)))
    rooms = [ex.And((ex.Cmp(f"cat_{f}_{r}", ">=", 1), ex.Cmp(f"mouse_{f}_{r}", ">=", 1)))
             for f in range(n) for r in range(5)]
    return System(
        variables=tuple(variables),
        events=tuple(events),
        automata=tuple(automata),
        forbidden=ex.disj(*rooms),
        name=f"CMT({n},{k})",
    )


FAMILIES = {"fig1": lambda: gen_fig1(), "edp": gen_edp, "cmt": gen_cmt}


def generate(family, params=()):
    family = family.lower()
    if family not in FAMILIES:
        raise ValueError(f"unknown benchmark family {family!r}")
    return FAMILIES[family](*params)
