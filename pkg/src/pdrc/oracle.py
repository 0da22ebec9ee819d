"""Explicit-state ground truth: reachability and the classical fixpoint controller."""

from collections import deque
from dataclasses import dataclass, field

from .model import enabled, initial_state, successors


class StateLimitExceeded(RuntimeError):
    pass


DEFAULT_LIMIT = 10 ** 6


def reachable(sys, ctrl=None, limit=DEFAULT_LIMIT):
    """BFS from the initial state. ``ctrl`` is either a ControllerMap (state ->
    set of allowed events) or a callable ``(state, event) -> successor or None``."""
    if sys.state_count > limit:
        raise StateLimitExceeded(f"{sys.state_count} states exceed the limit of {limit}")
    step = _stepper(sys, ctrl)
    q0 = initial_state(sys)
    seen, todo = {q0}, deque([q0])
    while todo:
        q = todo.popleft()
        for e in sys.events:
            q2 = step(q, e.name)
            if q2 is not None and q2 not in seen:
                seen.add(q2)
                todo.append(q2)
    return seen


def _stepper(sys, ctrl):
    if ctrl is None:
        return lambda q, e: enabled(sys, q, e)
    if callable(ctrl):
        return ctrl
    return lambda q, e: enabled(sys, q, e) if e in ctrl.get(q, ()) else None


@dataclass
class OracleControlled:
    controller: dict         # reachable state -> set of allowed events
    bad: frozenset           # B*, restricted to uncontrolled-reachable states
    verdict = "controlled"


@dataclass
class OracleUncontrollable:
    states: list
    events: list
    bad: frozenset
    verdict = "uncontrollable"


def rw_synthesize(sys, limit=DEFAULT_LIMIT):
    """Maximally permissive safe controller by backward closure under
    uncontrollable transitions."""
    reach = reachable(sys, limit=limit)
    succ = {q: successors(sys, q) for q in reach}
    pred_u = {q: [] for q in reach}
    for q, out in succ.items():
        for e, q2 in out:
            if e in sys.uncontrollable:
                pred_u[q2].append(q)
    bad = {q for q in reach if sys.is_forbidden(q)}
    todo = deque(bad)
    while todo:
        q = todo.popleft()
        for p in pred_u[q]:
            if p not in bad:
                bad.add(p)
                todo.append(p)
    bad = frozenset(bad)
    q0 = initial_state(sys)
    if q0 in bad:
        states, events = _shortest_uncontrollable_path(sys, q0, succ)
        return OracleUncontrollable(states, events, bad)
    controller = {}
    for q in reach:
        controller[q] = {
            e for e, q2 in succ[q]
            if e in sys.uncontrollable or q2 not in bad
        }
    return OracleControlled(controller, bad)


def _shortest_uncontrollable_path(sys, q0, succ):
    parent = {q0: None}
    todo = deque([q0])
    while todo:
        q = todo.popleft()
        if sys.is_forbidden(q):
            states, events = [q], []
            while parent[q] is not None:
                q, e = parent[q]
                states.append(q)
                events.append(e)
            return states[::-1], events[::-1]
        for e, q2 in succ[q]:
            if e in sys.uncontrollable and q2 not in parent:
                parent[q2] = (q, e)
                todo.append(q2)
    raise AssertionError("initial state in B* but no uncontrollable path found")


def controlled_step(result):
    """Supervised step function of a PDRC Controlled result."""
    from .core import supervised_enabled
    sys, bm, sup = result.sym.system, result.sym.bitmap, result.supervisor
    return lambda q, e: supervised_enabled(sys, bm, sup, q, e)


def replay(sys, states, events):
    """Whether a path is a run of uncontrollable steps from the initial state into a forbidden state."""
    if not states or states[0] != initial_state(sys) or not sys.is_forbidden(states[-1]):
        return False
    if len(events) != len(states) - 1:
        return False
    for q, e, q2 in zip(states, events, states[1:]):
        if e not in sys.uncontrollable or enabled(sys, q, e) != q2:
            return False
    return True


@dataclass
class Comparison:
    pdrc_verdict: str
    oracle_verdict: str
    findings: list = field(default_factory=list)
    pdrc_reachable: int = 0
    oracle_reachable: int = 0

    @property
    def agree(self):
        return not self.findings

    def lines(self):
        out = [f"verdict: pdrc={self.pdrc_verdict} oracle={self.oracle_verdict}"]
        if self.pdrc_verdict == self.oracle_verdict == "controlled":
            out.append(f"reachable: pdrc={self.pdrc_reachable} oracle={self.oracle_reachable}")
        out += [f"MISMATCH {f}" for f in self.findings]
        out.append("agreement" if self.agree else "disagreement")
        return out


def compare(sys, pdrc_result, oracle_result, limit=DEFAULT_LIMIT):
    c = Comparison(pdrc_result.verdict, oracle_result.verdict)
    if c.pdrc_verdict != c.oracle_verdict:
        c.findings.append(f"verdicts differ: pdrc={c.pdrc_verdict} oracle={c.oracle_verdict}")
        return c
    if c.pdrc_verdict == "uncontrollable":
        p = pdrc_result.path
        if not replay(sys, p.states, p.events):
            c.findings.append("pdrc counterexample does not replay")
        return c
    if c.pdrc_verdict != "controlled":
        return c
    mine = reachable(sys, controlled_step(pdrc_result), limit=limit)
    theirs = reachable(sys, oracle_result.controller, limit=limit)
    c.pdrc_reachable, c.oracle_reachable = len(mine), len(theirs)
    if mine != theirs:
        extra, missing = len(mine - theirs), len(theirs - mine)
        c.findings.append(f"controlled reachable sets differ: {extra} extra, {missing} missing")
    for name, states in (("pdrc", mine), ("oracle", theirs)):
        if any(sys.is_forbidden(q) for q in states):
            c.findings.append(f"{name} controlled system reaches a forbidden state")
    return c


def dump_graph(sys, ctrl=None, limit=DEFAULT_LIMIT):
    """Reachable graph as "state TAB event TAB state" lines, deterministic order."""
    step = _stepper(sys, ctrl)
    lines = []
    for q in sorted(reachable(sys, ctrl, limit=limit)):
        for e in sys.events:
            q2 = step(q, e.name)
            if q2 is not None:
                lines.append(f"{sys.format_state(q)}\t{e.name}\t{sys.format_state(q2)}")
    return "\n".join(lines) + ("\n" if lines else "")
