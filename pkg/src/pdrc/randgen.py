"""Seeded random systems for differential testing.

Bounds: at most 3 automata with at most 4 locations each, at most 2
variables with domain size at most 4, at most 8 events (each uncontrollable
with probability 0.3) and at most 2 forbidden locations.
"""

import random

from . import expr as ex
from .model import Automaton, EventDecl, System, Transition, VarDecl, validate

OPS = ("==", "!=", "<", "<=", ">", ">=")


def _guard(rng, variables):
    if not variables or rng.random() < 0.4:
        return ex.TRUE
    v = rng.choice(variables)
    atom = ex.Cmp(v.name, rng.choice(OPS), rng.randint(v.min, v.max))
    if rng.random() < 0.25:
        w = rng.choice(variables)
        other = ex.Cmp(w.name, rng.choice(OPS), rng.randint(w.min, w.max))
        return ex.And((atom, other)) if rng.random() < 0.5 else ex.Or((atom, other))
    return atom


def _updates(rng, variables):
    out = []
    for v in variables:
        if rng.random() < 0.35:
            kind = rng.random()
            if kind < 0.4:
                out.append(ex.Update(v.name, None, rng.randint(v.min, v.max)))
            else:
                out.append(ex.Update(v.name, v.name, rng.choice((-1, 1))))
    return tuple(out)


def random_system(rng, max_automata=3, max_locations=4, max_variables=2,
                  max_domain=4, max_events=8, p_uncontrollable=0.3, max_forbidden=2):
    """Draw one valid system; resamples until validation passes."""
    while True:
        sys = _draw(rng, max_automata, max_locations, max_variables, max_domain,
                    max_events, p_uncontrollable, max_forbidden)
        if not validate(sys):
            return sys


def _draw(rng, max_automata, max_locations, max_variables, max_domain, max_events, p_u, max_forbidden):
    variables = []
    for i in range(rng.randint(0, max_variables)):
        lo = rng.randint(0, 1)
        hi = lo + rng.randint(1, max_domain - 1)
        variables.append(VarDecl(f"v{i}", lo, hi, rng.randint(lo, hi)))
    events = [EventDecl(f"e{i}", rng.random() >= p_u) for i in range(rng.randint(1, max_events))]
    n_aut = rng.randint(1, max_automata)
    # each variable is written by one owner automaton so synchronised writes never clash
    owner = {v.name: rng.randrange(n_aut) for v in variables}
    forbidden_budget = max_forbidden if rng.random() < 0.9 else 0
    automata = []
    for ai in range(n_aut):
        locs = tuple(f"q{j}" for j in range(rng.randint(1, max_locations)))
        mine = [v for v in variables if owner[v.name] == ai]
        ts = []
        for src in locs:
            for ev in rng.sample(events, rng.randint(0, min(3, len(events)))):
                g = _guard(rng, variables)
                if rng.random() < 0.3:
                    # a guarded split on one variable keeps the automaton deterministic
                    if variables:
                        v = rng.choice(variables)
                        cut = rng.randint(v.min, v.max)
                        ts.append(Transition(src, ev.name, rng.choice(locs), ex.Cmp(v.name, "<", cut), _updates(rng, mine)))
                        ts.append(Transition(src, ev.name, rng.choice(locs), ex.Cmp(v.name, ">=", cut), _updates(rng, mine)))
                        continue
                ts.append(Transition(src, ev.name, rng.choice(locs), g, _updates(rng, mine)))
        forb = set()
        if forbidden_budget and len(locs) > 1 and rng.random() < 0.8:
            k = rng.randint(1, forbidden_budget)
            forb = set(rng.sample(locs[1:], min(k, len(locs) - 1)))
            forbidden_budget -= len(forb)
        automata.append(Automaton(f"A{ai}", locs, locs[0], frozenset(forb), tuple(ts)))
    return System(tuple(variables), tuple(events), tuple(automata), name="random")


def random_systems(seed, count, **bounds):
    rng = random.Random(seed)
    return [random_system(rng, **bounds) for _ in range(count)]
