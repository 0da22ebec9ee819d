"""Propositional encoding of a System.

Bit layout (current-state block, then its primed copy, then gate bits):

* variables: unary, width ``max - min``; bit ``i`` means ``x >= min + i + 1``
* event: one-hot over all declared events (part of the current state; the
  primed event block is left free by the transition relation)
* locations: one-hot per automaton

The transition relation is split into a controllable and an uncontrollable
cone, each hanging off a root indicator: assuming ``ind_c`` imposes ``T_c``,
assuming ``ind_u`` imposes ``T_u``, assuming ``ind_t`` imposes ``T_c or T_u``.
Per-transition enabling conditions and the forbidden-state predicate are
full Tseitin definitions, so their literals can be used in both polarities.
"""

import itertools
from dataclasses import dataclass, field

from . import expr as ex
from .model import State


class CapacityError(ValueError):
    pass


class MalformedAssignment(ValueError):
    pass


def var_of(lit):
    return abs(lit)


def canonical(lits):
    """Sorted, duplicate-free literal tuple; rejects complementary pairs."""
    out = tuple(sorted(set(lits), key=lambda l: (abs(l), l)))
    for a, b in zip(out, out[1:]):
        if a == -b:
            raise ValueError(f"complementary literals {a} and {b}")
    return out


@dataclass
class BitMap:
    automata: tuple
    locations: dict          # automaton -> tuple of location names
    loc_bits: dict           # automaton -> tuple of current bits
    variables: dict          # name -> VarDecl, in declaration order
    var_bits: dict           # name -> tuple of current bits
    events: tuple
    event_bits: dict         # event -> current bit
    width: int               # number of current-state bits
    describe: dict = field(default_factory=dict)  # current bit -> ("loc"|"var"|"event", ...)

    def prime(self, lit):
        v = abs(lit)
        if v > self.width:
            raise ValueError(f"literal {lit} is not a current-state bit")
        return lit + self.width if lit > 0 else lit - self.width

    def unprime(self, lit):
        v = abs(lit)
        if not self.width < v <= 2 * self.width:
            raise ValueError(f"literal {lit} is not a next-state bit")
        return lit - self.width if lit > 0 else lit + self.width

    def is_current(self, lit):
        return 0 < abs(lit) <= self.width

    def loc_lit(self, automaton, location):
        return self.loc_bits[automaton][self.locations[automaton].index(location)]

    def event_lit(self, event):
        return self.event_bits[event]

    def ge(self, var, k):
        """Literal for ``var >= k`` or a boolean when it is constant."""
        d = self.variables[var]
        if k <= d.min:
            return True
        if k > d.max:
            return False
        return self.var_bits[var][k - d.min - 1]

    def current_bits(self):
        return range(1, self.width + 1)

    def state_bits(self):
        """Current bits excluding the event block."""
        ev = set(self.event_bits.values())
        return [b for b in self.current_bits() if b not in ev]

    def encode_state(self, state, event=None):
        """Full current-state minterm for ``state`` (and ``event`` if given)."""
        lits = []
        for name, x in zip(self.variables, state.values):
            d = self.variables[name]
            for i, b in enumerate(self.var_bits[name]):
                lits.append(b if x >= d.min + i + 1 else -b)
        if event is not None:
            for e, b in self.event_bits.items():
                lits.append(b if e == event else -b)
        for a, loc in zip(self.automata, state.locations):
            for l, b in zip(self.locations[a], self.loc_bits[a]):
                lits.append(b if l == loc else -b)
        return canonical(lits)

    def true_lits(self, state, event):
        """Set of current literals true at the pair (state, event)."""
        return set(self.encode_state(state, event))

    def decode_state(self, assignment, primed=False):
        """Return (State, event) from a model; ``event`` is None if undecidable."""
        off = self.width if primed else 0

        def val(b):
            if (b + off) in assignment:
                return True
            if -(b + off) in assignment:
                return False
            raise MalformedAssignment(f"bit {b + off} unassigned")

        locs = []
        for a in self.automata:
            on = [l for l, b in zip(self.locations[a], self.loc_bits[a]) if val(b)]
            if len(on) != 1:
                raise MalformedAssignment(f"automaton {a}: {len(on)} locations set")
            locs.append(on[0])
        vals = []
        for name, d in self.variables.items():
            bits = [val(b) for b in self.var_bits[name]]
            if any(later and not earlier for earlier, later in zip(bits, bits[1:])):
                raise MalformedAssignment(f"variable {name}: non-monotone unary bits {bits}")
            vals.append(d.min + sum(bits))
        event = None
        if not primed:
            on = [e for e, b in self.event_bits.items() if val(b)]
            if len(on) != 1:
                raise MalformedAssignment(f"{len(on)} event bits set")
            event = on[0]
        return State(tuple(locs), tuple(vals)), event

    def project(self, model, primed=False):
        """Compact current-state cube of a model: the positive one-hot bits
        plus every unary bit. Other one-hot bits follow from the encoding
        invariant."""
        off = self.width if primed else 0
        lits = []
        for name in self.variables:
            for b in self.var_bits[name]:
                lits.append(b if (b + off) in model else -b)
        if not primed:
            for b in self.event_bits.values():
                if b in model:
                    lits.append(b)
        for a in self.automata:
            for b in self.loc_bits[a]:
                if (b + off) in model:
                    lits.append(b)
        return canonical(lits)

    def cube_holds(self, cube, true_lits):
        return all(l in true_lits for l in cube)

    def clause_holds(self, clause, true_lits):
        return any(l in true_lits for l in clause)

    # model-level atoms for certificates and logs

    def atom(self, lit):
        kind, *rest = self.describe[abs(lit)]
        if kind == "loc":
            text = f"{rest[0]}@{rest[1]}"
        elif kind == "event":
            text = f"event:{rest[0]}"
        else:
            text = f"{rest[0]}>={rest[1]}"
        return text if lit > 0 else "!" + text

    def lit(self, atom):
        neg = atom.startswith("!")
        body = atom[1:] if neg else atom
        if body.startswith("event:"):
            e = body[len("event:"):]
            if e not in self.event_bits:
                raise KeyError(f"unknown event {e!r}")
            b = self.event_bits[e]
        elif "@" in body:
            a, l = body.split("@", 1)
            if a not in self.locations or l not in self.locations[a]:
                raise KeyError(f"unknown location {body!r}")
            b = self.loc_lit(a, l)
        elif ">=" in body:
            v, k = body.split(">=", 1)
            if v not in self.variables:
                raise KeyError(f"unknown variable {v!r}")
            b = self.ge(v, int(k))
            if isinstance(b, bool):
                raise KeyError(f"threshold {body!r} is constant over the domain")
        else:
            raise KeyError(f"unparseable atom {atom!r}")
        return -b if neg else b


class Gates:
    """Tseitin builder with structural hashing; constants are Python bools."""

    def __init__(self, alloc):
        self.alloc = alloc
        self.clauses = []
        self._cache = {}

    def and_(self, lits):
        out = set()
        for l in lits:
            if l is False:
                return False
            if l is True:
                continue
            if -l in out:
                return False
            out.add(l)
        if not out:
            return True
        if len(out) == 1:
            return next(iter(out))
        key = frozenset(out)
        if key in self._cache:
            return self._cache[key]
        g = self.alloc()
        for l in sorted(out, key=abs):
            self.clauses.append((-g, l))
        self.clauses.append(tuple([g] + [-l for l in sorted(out, key=abs)]))
        self._cache[key] = g
        return g

    def or_(self, lits):
        r = self.and_([neg(l) for l in lits])
        return neg(r)

    def expr(self, e, bitmap):
        if isinstance(e, ex.Const):
            return e.value
        if isinstance(e, ex.Cmp):
            ge = bitmap.ge
            v, k = e.var, e.value
            if e.op == ">=":
                return ge(v, k)
            if e.op == ">":
                return ge(v, k + 1)
            if e.op == "<=":
                return neg(ge(v, k + 1))
            if e.op == "<":
                return neg(ge(v, k))
            eq = self.and_([ge(v, k), neg(ge(v, k + 1))])
            return eq if e.op == "==" else neg(eq)
        if isinstance(e, ex.At):
            return bitmap.loc_lit(e.automaton, e.location)
        if isinstance(e, ex.Not):
            return neg(self.expr(e.arg, bitmap))
        if isinstance(e, ex.And):
            return self.and_([self.expr(a, bitmap) for a in e.args])
        if isinstance(e, ex.Or):
            return self.or_([self.expr(a, bitmap) for a in e.args])
        raise TypeError(e)


def neg(l):
    if isinstance(l, bool):
        return not l
    return -l


@dataclass
class SymbolicSystem:
    system: object
    bitmap: BitMap
    num_vars: int
    init: tuple             # unit clauses over current bits
    invariant: tuple        # one-hot / unary well-formedness, current bits
    invariant_next: tuple   # the same over primed bits
    defs: tuple             # Tseitin definitions (guards, enabling, bad)
    trans_c: tuple
    trans_u: tuple
    ind_c: int
    ind_u: int
    ind_t: int
    bad: int                # bad <-> not P
    fire: dict              # event -> literal <-> (event bit and event enabled)
    cond: dict              # (automaton index, transition index) -> enabling literal

    @property
    def safe(self):
        """P as a clause set (together with the definitions in ``defs``)."""
        return ((-self.bad,),)

    def clauses(self):
        """Everything except the well-formedness invariants and I."""
        return self.defs + self.trans_c + self.trans_u


def _exactly_one(bits):
    out = [tuple(bits)]
    out += [(-a, -b) for a, b in itertools.combinations(bits, 2)]
    return out


def encode(sys, max_bits=200_000):
    """Encode a validated System."""
    automata = tuple(a.name for a in sys.automata)
    next_bit = itertools.count(1)
    describe = {}
    var_bits = {}
    for v in sys.variables:
        bits = []
        for i in range(v.max - v.min):
            b = next(next_bit)
            describe[b] = ("var", v.name, v.min + i + 1)
            bits.append(b)
        var_bits[v.name] = tuple(bits)
    event_bits = {}
    for e in sys.events:
        b = next(next_bit)
        describe[b] = ("event", e.name)
        event_bits[e.name] = b
    loc_bits = {}
    for a in sys.automata:
        bits = []
        for l in a.locations:
            b = next(next_bit)
            describe[b] = ("loc", a.name, l)
            bits.append(b)
        loc_bits[a.name] = tuple(bits)
    width = next(next_bit) - 1
    if 2 * width > max_bits:
        raise CapacityError(f"{2 * width} state bits exceed the limit of {max_bits}")
    bm = BitMap(
        automata=automata,
        locations={a.name: tuple(a.locations) for a in sys.automata},
        loc_bits=loc_bits,
        variables={v.name: v for v in sys.variables},
        var_bits=var_bits,
        events=tuple(e.name for e in sys.events),
        event_bits=event_bits,
        width=width,
        describe=describe,
    )
    top = [2 * width]

    def alloc():
        top[0] += 1
        if top[0] > max_bits:
            raise CapacityError(f"encoding needs more than {max_bits} bits")
        return top[0]

    P = bm.prime

    # well-formedness
    inv = []
    for a in automata:
        inv += _exactly_one(loc_bits[a])
    if event_bits:
        inv += _exactly_one(list(event_bits.values()))
    for name in var_bits:
        bits = var_bits[name]
        inv += [(-bits[i + 1], bits[i]) for i in range(len(bits) - 1)]
    inv_next = [tuple(P(l) for l in c) for c in inv]

    # initial states; the event is free
    init = []
    for a in sys.automata:
        for l, b in zip(a.locations, loc_bits[a.name]):
            init.append((b if l == a.initial else -b,))
    for v in sys.variables:
        for i, b in enumerate(var_bits[v.name]):
            init.append((b if v.init >= v.min + i + 1 else -b,))

    g = Gates(alloc)

    # enabling condition of every transition: source location, guard, domain
    cond = {}
    for ai, a in enumerate(sys.automata):
        for ti, t in enumerate(a.transitions):
            parts = [bm.loc_lit(a.name, t.source), g.expr(t.guard, bm)]
            for u in t.updates:
                d = sys.var(u.var)
                if u.source is None:
                    parts.append(d.min <= u.offset <= d.max)
                else:
                    parts.append(bm.ge(u.source, d.min - u.offset))
                    parts.append(neg(bm.ge(u.source, d.max - u.offset + 1)))
            cond[ai, ti] = g.and_(parts)

    fire = {}
    trans = {True: [], False: []}
    ind_c, ind_u, ind_t = alloc(), alloc(), alloc()
    for e in sys.events:
        ind = ind_c if e.controllable else ind_u
        out = trans[e.controllable]
        eb = event_bits[e.name]
        decl = sys.declaring[e.name]
        pre = (-ind, -eb)
        if not decl:
            out.append(pre)
            fire[e.name] = g.and_([eb, False])
            continue
        per_automaton = []
        for ai in decl:
            a = sys.automata[ai]
            conds = [cond[ai, ti] for ti, t in enumerate(a.transitions) if t.event == e.name]
            per_automaton.append(g.or_(conds))
            live = [c for c in conds if c is not False]
            if True not in live:
                out.append(pre + tuple(live))
            for ti, t in enumerate(a.transitions):
                if t.event != e.name or cond[ai, ti] is False:
                    continue
                c = cond[ai, ti]
                tp = pre if c is True else pre + (-c,)
                for l, b in zip(a.locations, loc_bits[a.name]):
                    out.append(tp + ((P(b) if l == t.target else -P(b)),))
                for u in t.updates:
                    d = sys.var(u.var)
                    for i, b in enumerate(var_bits[u.var]):
                        k = d.min + i + 1
                        src = (k <= u.offset) if u.source is None else bm.ge(u.source, k - u.offset)
                        if src is True:
                            out.append(tp + (P(b),))
                        elif src is False:
                            out.append(tp + (-P(b),))
                        else:
                            out.append(tp + (-P(b), src))
                            out.append(tp + (P(b), -src))
        fire[e.name] = g.and_([eb] + per_automaton)
        for ai, a in enumerate(sys.automata):
            if ai in decl:
                continue
            for b in loc_bits[a.name]:
                out.append(pre + (-b, P(b)))
                out.append(pre + (b, -P(b)))
        for v in sys.variables:
            writers = []
            for ai in decl:
                for ti, t in enumerate(sys.automata[ai].transitions):
                    if t.event == e.name and t.update_for(v.name) is not None and cond[ai, ti] is not False:
                        writers.append(cond[ai, ti])
            if True in writers:
                continue
            for b in var_bits[v.name]:
                out.append(pre + tuple(writers) + (-b, P(b)))
                out.append(pre + tuple(writers) + (b, -P(b)))
    trans[True].append((-ind_c,) + tuple(event_bits[e.name] for e in sys.events if e.controllable))
    trans[False].append((-ind_u,) + tuple(event_bits[e.name] for e in sys.events if not e.controllable))
    t_root = [(-ind_t, ind_c, ind_u)]

    bad_parts = []
    for a in sys.automata:
        for l in sorted(a.forbidden):
            bad_parts.append(bm.loc_lit(a.name, l))
    if sys.forbidden is not None:
        bad_parts.append(g.expr(sys.forbidden, bm))
    bad = g.or_(bad_parts)
    if isinstance(bad, bool) or abs(bad) <= 2 * width:
        # give the bad predicate its own defined literal
        lit = bad
        bad = alloc()
        if lit is True:
            g.clauses.append((bad,))
        elif lit is False:
            g.clauses.append((-bad,))
        else:
            g.clauses += [(-bad, lit), (bad, -lit)]
    for name, f in list(fire.items()):
        if isinstance(f, bool):
            lit = alloc()
            g.clauses.append((lit,) if f else (-lit,))
            fire[name] = lit

    return SymbolicSystem(
        system=sys,
        bitmap=bm,
        num_vars=top[0],
        init=tuple(init),
        invariant=tuple(inv),
        invariant_next=tuple(inv_next),
        defs=tuple(g.clauses),
        trans_c=tuple(trans[True]) + tuple(t_root),
        trans_u=tuple(trans[False]),
        ind_c=ind_c,
        ind_u=ind_u,
        ind_t=ind_t,
        bad=bad,
        fire=fire,
        cond=cond,
    )


def cube_to_predicate(bitmap, cube):
    """Split a current-state cube into a selector and a variable guard.

    Returns ``(selector, guard)`` where ``selector`` is a dict with keys
    ``locations`` (automaton -> location for positive location literals),
    ``excluded`` (automaton -> set of locations for negative ones),
    ``event`` (positive event literal or None) and ``excluded_events``.
    Unary literals become threshold atoms, merged per variable.
    """
    sel = {"locations": {}, "excluded": {}, "event": None, "excluded_events": set()}
    lo, hi = {}, {}
    for lit in cube:
        if not bitmap.is_current(lit):
            raise ValueError(f"cube literal {lit} is not a current-state bit")
        kind, *rest = bitmap.describe[abs(lit)]
        if kind == "loc":
            if lit > 0:
                sel["locations"][rest[0]] = rest[1]
            else:
                sel["excluded"].setdefault(rest[0], set()).add(rest[1])
        elif kind == "event":
            if lit > 0:
                sel["event"] = rest[0]
            else:
                sel["excluded_events"].add(rest[0])
        else:
            var, k = rest
            if lit > 0:
                lo[var] = max(lo.get(var, k), k)
            else:
                hi[var] = min(hi.get(var, k - 1), k - 1)
    parts = []
    for var, d in bitmap.variables.items():
        low, high = lo.get(var, d.min), hi.get(var, d.max)
        if low > high:
            return sel, ex.FALSE
        if low == high and (low > d.min or high < d.max):
            parts.append(ex.Cmp(var, "==", low))
            continue
        if low > d.min:
            parts.append(ex.Cmp(var, ">=", low))
        if high < d.max:
            parts.append(ex.Cmp(var, "<=", high))
    return sel, ex.conj(*parts)


@dataclass
class Loaded:
    """Activation literals of an encoding placed into a solver handle."""

    act_inv: int       # current-state well-formedness
    act_inv_next: int  # primed well-formedness
    act_init: int      # initial-state units


def load(sym, handle):
    """Add the encoding to ``handle``; I and the invariants sit behind activation literals."""
    handle.reserve(sym.num_vars)
    handle.add_clauses(sym.clauses())
    acts = Loaded(handle.new_var(), handle.new_var(), handle.new_var())
    handle.add_clauses((-acts.act_inv,) + c for c in sym.invariant)
    handle.add_clauses((-acts.act_inv_next,) + c for c in sym.invariant_next)
    handle.add_clauses((-acts.act_init,) + c for c in sym.init)
    return acts
