"""Turn a bit-level supervisor into strengthened EFSM guards, and check
inductive-invariant certificates."""

from dataclasses import dataclass, field, replace

from . import expr as ex
from .encoding import cube_to_predicate, encode, load
from .model import all_states, check, enabled, initial_state
from .sat import SolverHandle


class ExtractionError(RuntimeError):
    pass


@dataclass(frozen=True)
class GuardStrengthening:
    automaton: str
    source: str
    event: str
    added_guard: ex.Expr
    frame: int

    def line(self):
        return f"{self.automaton}: {self.source} -{self.event}-> : {ex.to_text(self.added_guard)}  (frame {self.frame})"


def negated_threshold_guard(bitmap, cube):
    """The negation of the variable part of ``cube`` in disjunctive threshold form."""
    _, guard = cube_to_predicate(bitmap, cube)
    if guard == ex.FALSE:
        return ex.TRUE
    parts = []
    for c in (guard.args if isinstance(guard, ex.And) else (guard,) if guard != ex.TRUE else ()):
        d = bitmap.variables[c.var]
        if c.op == ">=":
            parts.append(ex.Cmp(c.var, "<=", c.value - 1))
        elif c.op == "<=":
            parts.append(ex.Cmp(c.var, ">=", c.value + 1))
        else:  # "=="
            if c.value > d.min:
                parts.append(ex.Cmp(c.var, "<=", c.value - 1))
            if c.value < d.max:
                parts.append(ex.Cmp(c.var, ">=", c.value + 1))
    return ex.disj(*parts)


def extract_guards(supervisor, bitmap, sys):
    """Controlled System plus the list of strengthenings, in supervisor order."""
    new_guards = {}     # (automaton index, transition index) -> list of added guards
    report = []
    for fc in supervisor.cubes:
        sel, var_guard = cube_to_predicate(bitmap, fc.cube)
        if var_guard == ex.FALSE:
            continue  # empty cube, nothing to forbid
        if sel["event"] is not None:
            events = [sel["event"]] if sel["event"] in sys.controllable else []
        else:
            events = [e.name for e in sys.events if e.controllable and e.name not in sel["excluded_events"]]
        matched = False
        for ev in events:
            decl = sys.declaring[ev]
            if not decl:
                continue
            constrained = [i for i in decl if sys.automata[i].name in sel["locations"]]
            host = constrained[0] if constrained else decl[0]
            a = sys.automata[host]
            others = []
            for name, loc in sel["locations"].items():
                if name != a.name:
                    others.append(ex.At(name, loc))
            for name, locs in sel["excluded"].items():
                for loc in sorted(locs):
                    if name != a.name:
                        others.append(ex.Not(ex.At(name, loc)))
            added = ex.disj(*(ex.negate(o) for o in others), negated_threshold_guard(bitmap, fc.cube))
            for ti, t in enumerate(a.transitions):
                if t.event != ev:
                    continue
                if a.name in sel["locations"] and t.source != sel["locations"][a.name]:
                    continue
                if t.source in sel["excluded"].get(a.name, ()):
                    continue
                matched = True
                new_guards.setdefault((host, ti), []).append(added)
                report.append(GuardStrengthening(a.name, t.source, ev, added, fc.frame))
        if not matched:
            raise ExtractionError(f"supervisor cube {[bitmap.atom(l) for l in fc.cube]} matches no transition")
    automata = []
    for ai, a in enumerate(sys.automata):
        ts = []
        for ti, t in enumerate(a.transitions):
            if (ai, ti) in new_guards:
                t = replace(t, guard=ex.conj(t.guard, *new_guards[ai, ti]))
            ts.append(t)
        automata.append(replace(a, transitions=tuple(ts)))
    controlled = replace(sys, automata=tuple(automata))
    controlled = check(controlled)
    return controlled, report


# -- certificates -----------------------------------------------------------

@dataclass
class Certificate:
    """An invariant as clauses of model-level atoms (see BitMap.atom)."""

    clauses: list
    model: str = ""

    def to_bits(self, bitmap):
        return [tuple(bitmap.lit(a) for a in c) for c in self.clauses]

    @classmethod
    def from_bits(cls, bitmap, clauses, model=""):
        return cls([[bitmap.atom(l) for l in c] for c in clauses], model)


@dataclass
class CertificateVerdict:
    checks: dict = field(default_factory=dict)   # name -> passed
    witness: dict = field(default_factory=dict)  # name -> text of a counterexample
    ok: bool = False

    def lines(self):
        out = []
        for name, passed in self.checks.items():
            extra = f"  ({self.witness[name]})" if name in self.witness else ""
            out.append(f"{name}: {'pass' if passed else 'FAIL'}{extra}")
        return out


CHECKS = ("initiation", "consecution", "safety")


def check_certificate(clauses, sym, supervisor_cubes=(), backend=None):
    """Check I -> Inv, Inv and T^S -> Inv', Inv -> P on a fresh solver.

    ``clauses`` are bit-level clauses over ``sym``'s current bits. The
    supervised relation is ``sym``'s own transition relation, strengthened by
    ``supervisor_cubes`` when given.
    """
    bm = sym.bitmap
    h = SolverHandle(backend, keep_log=False)
    acts = load(sym, h)
    for t in supervisor_cubes:
        h.add_clause([-sym.ind_c] + [-l for l in t])
    act_inv = h.new_var()
    for c in clauses:
        h.add_clause([-act_inv] + list(c))

    def violated(primed):
        # act -> some clause is false
        act = h.new_var()
        ds = []
        for c in clauses:
            d = h.new_var()
            for l in c:
                h.add_clause([-d, -(bm.prime(l) if primed else l)])
            ds.append(d)
        h.add_clause([-act] + ds)
        return act

    v = CertificateVerdict()
    queries = {
        "initiation": [acts.act_init, acts.act_inv, violated(False)],
        "consecution": [act_inv, sym.ind_t, acts.act_inv, acts.act_inv_next, violated(True)],
        "safety": [act_inv, acts.act_inv, sym.bad],
    }
    for name in CHECKS:
        r = h.solve(queries[name])
        v.checks[name] = not r.sat
        if r.sat:
            q, e = bm.decode_state(r.model)
            text = f"{sym.system.format_state(q)} event {e}"
            if name == "consecution":
                q2, _ = bm.decode_state(r.model, primed=True)
                text += f" -> {sym.system.format_state(q2)}"
            v.witness[name] = text
    v.ok = all(v.checks.values())
    return v


def verify(sys, certificate, backend=None):
    """Re-encode ``sys`` (a controlled model) and check a model-level certificate."""
    sym = encode(sys)
    try:
        clauses = certificate.to_bits(sym.bitmap)
    except KeyError as e:
        v = CertificateVerdict({n: False for n in CHECKS}, {"initiation": f"unknown atom: {e}"})
        return v
    return check_certificate(clauses, sym, backend=backend)


def explicit_certificate_check(sys, clauses, bitmap, step=None):
    """Brute-force version of check_certificate over all (state, event) pairs."""
    step = step or (lambda q, e: enabled(sys, q, e))
    events = [e.name for e in sys.events]

    def holds(q, e):
        lits = bitmap.true_lits(q, e)
        return all(bitmap.clause_holds(c, lits) for c in clauses)

    out = {n: True for n in CHECKS}
    q0 = initial_state(sys)
    if not all(holds(q0, e) for e in events):
        out["initiation"] = False
    for q in all_states(sys):
        for e in events:
            if not holds(q, e):
                continue
            if sys.is_forbidden(q):
                out["safety"] = False
            q2 = step(q, e)
            if q2 is not None and not all(holds(q2, e2) for e2 in events):
                out["consecution"] = False
    return out
