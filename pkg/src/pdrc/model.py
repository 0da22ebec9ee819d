"""Networks of extended finite state machines over bounded integers."""

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional

from . import expr as ex


@dataclass(frozen=True)
class VarDecl:
    name: str
    min: int
    max: int
    init: int

    @property
    def size(self):
        return self.max - self.min + 1


@dataclass(frozen=True)
class EventDecl:
    name: str
    controllable: bool = True


@dataclass(frozen=True)
class Transition:
    source: str
    event: str
    target: str
    guard: ex.Expr = ex.TRUE
    updates: tuple = ()

    def update_for(self, var):
        for u in self.updates:
            if u.var == var:
                return u
        return None


@dataclass(frozen=True)
class Automaton:
    name: str
    locations: tuple
    initial: str
    forbidden: frozenset = frozenset()
    transitions: tuple = ()

    @cached_property
    def alphabet(self):
        return frozenset(t.event for t in self.transitions)

    @cached_property
    def table(self):
        out = {}
        for t in self.transitions:
            out.setdefault((t.source, t.event), []).append(t)
        return out


class State(NamedTuple):
    """One location per automaton and one value per variable, in declaration order."""

    locations: tuple
    values: tuple


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # "invalid", "nondeterministic" or "conflicting-update"
    where: str
    message: str

    def __str__(self):
        return f"{self.kind}: {self.where}: {self.message}"


@dataclass(frozen=True)
class System:
    variables: tuple = ()
    events: tuple = ()
    automata: tuple = ()
    forbidden: Optional[ex.Expr] = None
    name: str = field(default="model", compare=False)

    @cached_property
    def var_index(self):
        return {v.name: i for i, v in enumerate(self.variables)}

    @cached_property
    def automaton_index(self):
        return {a.name: i for i, a in enumerate(self.automata)}

    @cached_property
    def event_map(self):
        return {e.name: e for e in self.events}

    @cached_property
    def controllable(self):
        return frozenset(e.name for e in self.events if e.controllable)

    @cached_property
    def uncontrollable(self):
        return frozenset(e.name for e in self.events if not e.controllable)

    @cached_property
    def declaring(self):
        """event -> indices of the automata whose alphabet contains it."""
        return {
            e.name: tuple(i for i, a in enumerate(self.automata) if e.name in a.alphabet)
            for e in self.events
        }

    def automaton(self, name):
        return self.automata[self.automaton_index[name]]

    def var(self, name):
        return self.variables[self.var_index[name]]

    def state(self, locations=None, **values):
        """Build a State from names; unspecified parts take initial values."""
        init = initial_state(self)
        locs = list(init.locations)
        for a, l in (locations or {}).items():
            locs[self.automaton_index[a]] = l
        vals = list(init.values)
        for v, x in values.items():
            vals[self.var_index[v]] = x
        return State(tuple(locs), tuple(vals))

    def values_of(self, state):
        return {v.name: x for v, x in zip(self.variables, state.values)}

    def locations_of(self, state):
        return {a.name: l for a, l in zip(self.automata, state.locations)}

    def is_forbidden(self, state):
        for a, loc in zip(self.automata, state.locations):
            if loc in a.forbidden:
                return True
        if self.forbidden is not None:
            return ex.evaluate(self.forbidden, self.values_of(state), self.locations_of(state))
        return False

    @cached_property
    def state_count(self):
        n = 1
        for a in self.automata:
            n *= len(a.locations)
        for v in self.variables:
            n *= v.size
        return n

    def format_state(self, state):
        locs = ",".join(f"{a.name}@{l}" for a, l in zip(self.automata, state.locations))
        vals = ",".join(f"{v.name}={x}" for v, x in zip(self.variables, state.values))
        return f"({locs}{';' if vals else ''}{vals})"


def initial_state(sys):
    return State(tuple(a.initial for a in sys.automata), tuple(v.init for v in sys.variables))


def all_states(sys):
    locs = [a.locations for a in sys.automata]
    vals = [range(v.min, v.max + 1) for v in sys.variables]
    for ls in itertools.product(*locs):
        for vs in itertools.product(*vals):
            yield State(ls, vs)


def in_domain(sys, t, values):
    """The implicit domain guard: every update result stays inside its variable's range."""
    for u in t.updates:
        v = sys.var(u.var)
        if not v.min <= u.apply(values) <= v.max:
            return False
    return True


def transition_enabled(sys, t, values, locations):
    return ex.evaluate(t.guard, values, locations) and in_domain(sys, t, values)


def enabled(sys, state, event):
    """Successor of ``state`` under ``event`` or None when the event is blocked."""
    decl = sys.declaring.get(event)
    if not decl:
        return None
    values = sys.values_of(state)
    locations = sys.locations_of(state)
    new_locs = list(state.locations)
    new_vals = list(state.values)
    for i in decl:
        a = sys.automata[i]
        chosen = None
        for t in a.table.get((state.locations[i], event), ()):
            if transition_enabled(sys, t, values, locations):
                chosen = t
                break
        if chosen is None:
            return None
        new_locs[i] = chosen.target
        for u in chosen.updates:
            new_vals[sys.var_index[u.var]] = u.apply(values)
    return State(tuple(new_locs), tuple(new_vals))


def successors(sys, state):
    out = []
    for e in sys.events:
        nxt = enabled(sys, state, e.name)
        if nxt is not None:
            out.append((e.name, nxt))
    return out


# -- validation -------------------------------------------------------------

def _check_expr(sys, e, where, diags, own=None, allow_locations=True):
    for atom in ex.atoms(e):
        if isinstance(atom, ex.Cmp):
            if atom.var not in sys.var_index:
                diags.append(Diagnostic("invalid", where, f"undeclared variable {atom.var!r}"))
        else:
            if not allow_locations:
                diags.append(Diagnostic("invalid", where, "location atoms not allowed here"))
            elif atom.automaton not in sys.automaton_index:
                diags.append(Diagnostic("invalid", where, f"unknown automaton {atom.automaton!r}"))
            elif atom.location not in sys.automaton(atom.automaton).locations:
                diags.append(Diagnostic("invalid", where, f"unknown location {atom.automaton}@{atom.location}"))


def _overlap(sys, a, t1, t2):
    """Whether both transitions can be enabled together, by enumeration."""
    names = set()
    for t in (t1, t2):
        names |= ex.variables(t.guard)
        names |= {u.source for u in t.updates if u.source is not None}
        names |= {u.var for u in t.updates}
    names = sorted(names)
    others = sorted((ex.automata(t1.guard) | ex.automata(t2.guard)) - {a.name})
    base_vals = {v.name: v.init for v in sys.variables}
    domains = [range(sys.var(n).min, sys.var(n).max + 1) for n in names]
    loc_domains = [sys.automaton(n).locations for n in others]
    for vs in itertools.product(*domains):
        values = dict(base_vals, **dict(zip(names, vs)))
        for ls in itertools.product(*loc_domains):
            locations = dict(zip(others, ls))
            locations[a.name] = t1.source
            if transition_enabled(sys, t1, values, locations) and transition_enabled(sys, t2, values, locations):
                return values
    return None


def validate(sys):
    """All violated well-formedness conditions; empty when the system is usable."""
    diags = []

    def dup(names, what):
        seen = set()
        for n in names:
            if n in seen:
                diags.append(Diagnostic("invalid", what, f"duplicate name {n!r}"))
            seen.add(n)

    dup([v.name for v in sys.variables], "variables")
    dup([e.name for e in sys.events], "events")
    dup([a.name for a in sys.automata], "automata")
    for v in sys.variables:
        if v.max < v.min:
            diags.append(Diagnostic("invalid", f"variable {v.name}", "empty domain"))
        elif not v.min <= v.init <= v.max:
            diags.append(Diagnostic("invalid", f"variable {v.name}", f"init {v.init} outside [{v.min},{v.max}]"))
    if not sys.automata:
        diags.append(Diagnostic("invalid", "automata", "system has no automata"))
    if any(a.transitions for a in sys.automata) and not sys.events:
        diags.append(Diagnostic("invalid", "events", "transitions present but no events declared"))
    for a in sys.automata:
        dup(list(a.locations), f"automaton {a.name} locations")
        if a.initial not in a.locations:
            diags.append(Diagnostic("invalid", f"automaton {a.name}", f"initial location {a.initial!r} not declared"))
        for l in sorted(a.forbidden - set(a.locations)):
            diags.append(Diagnostic("invalid", f"automaton {a.name}", f"forbidden location {l!r} not declared"))
        for k, t in enumerate(a.transitions):
            where = f"automaton {a.name} transition {k} ({t.source} -{t.event}-> {t.target})"
            if t.source not in a.locations:
                diags.append(Diagnostic("invalid", where, f"unknown source {t.source!r}"))
            if t.target not in a.locations:
                diags.append(Diagnostic("invalid", where, f"unknown target {t.target!r}"))
            if t.event not in sys.event_map:
                diags.append(Diagnostic("invalid", where, f"undeclared event {t.event!r}"))
            _check_expr(sys, t.guard, where, diags)
            assigned = set()
            for u in t.updates:
                if u.var not in sys.var_index:
                    diags.append(Diagnostic("invalid", where, f"update of undeclared variable {u.var!r}"))
                if u.source is not None and u.source not in sys.var_index:
                    diags.append(Diagnostic("invalid", where, f"update reads undeclared variable {u.source!r}"))
                if u.var in assigned:
                    diags.append(Diagnostic("invalid", where, f"variable {u.var!r} assigned twice"))
                assigned.add(u.var)
    if sys.forbidden is not None:
        _check_expr(sys, sys.forbidden, "forbidden", diags)
    if diags:
        return diags

    for a in sys.automata:
        for (src, ev), ts in a.table.items():
            for t1, t2 in itertools.combinations(ts, 2):
                witness = _overlap(sys, a, t1, t2)
                if witness is not None:
                    diags.append(Diagnostic(
                        "nondeterministic",
                        f"automaton {a.name} location {src} event {ev}",
                        f"guards {ex.to_text(t1.guard)!r} and {ex.to_text(t2.guard)!r} overlap at {witness}",
                    ))
    for e in sys.events:
        decl = sys.declaring[e.name]
        writers = {}
        for i in decl:
            for t in sys.automata[i].transitions:
                if t.event != e.name:
                    continue
                for u in t.updates:
                    writers.setdefault(u.var, set()).add(sys.automata[i].name)
        for var, names in sorted(writers.items()):
            if len(names) > 1:
                diags.append(Diagnostic(
                    "conflicting-update",
                    f"event {e.name}",
                    f"variable {var!r} written by synchronising automata {sorted(names)}",
                ))
    return diags


class InvalidModel(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


def check(sys):
    diags = validate(sys)
    if diags:
        raise InvalidModel(diags)
    return sys
