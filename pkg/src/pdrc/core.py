"""PDRC: property-directed reachability with supervisor updates.

Frames are stored as deltas: ``trace.delta[i]`` holds the blocked cubes whose
highest level is ``i``; ``R_k`` is the conjunction of the negations of every
cube in ``delta[j]`` for ``j >= k``. Each level owns an activation literal,
so ``R_k`` is selected by assuming the activation literals of levels ``>= k``.
``R_0`` is the initial predicate and never receives clauses.

States are (location, valuation, event) triples; the successor's event is a
free choice, so primed cubes only ever mention state bits.
"""

import json
import time
from dataclasses import dataclass, field
from typing import Optional

from .encoding import canonical, cube_to_predicate, encode, load
from .model import System, all_states, check, enabled, initial_state
from .sat import BudgetExhausted, SolverHandle


class InvariantViolation(AssertionError):
    """A trace invariant failed during a debug audit."""


class InternalError(RuntimeError):
    pass


@dataclass(frozen=True)
class Limits:
    max_frames: Optional[int] = None
    max_conflicts: Optional[int] = None
    max_seconds: Optional[float] = None


@dataclass(frozen=True)
class ForbiddenCube:
    cube: tuple      # current-state cube whose controllable moves are disabled
    frame: int       # level of the block call that produced it
    target: tuple    # the bad cube it steers away from
    selector: dict


@dataclass
class Supervisor:
    cubes: list = field(default_factory=list)

    def __len__(self):
        return len(self.cubes)

    def forbids(self, bitmap, state, event):
        """Whether the supervisor disables ``event`` in ``state``."""
        lits = bitmap.true_lits(state, event)
        return any(bitmap.cube_holds(fc.cube, lits) for fc in self.cubes)


def supervised_enabled(sys, bitmap, supervisor, state, event):
    """``enabled`` restricted by a supervisor; uncontrollable events are never touched."""
    if event in sys.controllable and supervisor.forbids(bitmap, state, event):
        return None
    return enabled(sys, state, event)


@dataclass
class CounterexamplePath:
    states: list        # states[0] is initial, states[-1] violates P
    events: list        # events[i] moves states[i] to states[i + 1]
    cubes: list         # the generalised cube each state was found in

    def __len__(self):
        return len(self.events)


@dataclass
class Stats:
    iterations: int = 0
    frames: int = 0
    clauses: int = 0
    supervisor_cubes: int = 0
    solver_calls: int = 0
    conflicts: int = 0
    propagated: int = 0
    seconds: float = 0.0

    def as_dict(self):
        return dict(self.__dict__)


@dataclass
class Controlled:
    supervisor: Supervisor
    invariant: list     # blocked cubes; the invariant is the conjunction of their negations
    level: int
    stats: Stats
    sym: object

    verdict = "controlled"

    def invariant_clauses(self):
        return [tuple(-l for l in c) for c in self.invariant]


@dataclass
class Uncontrollable:
    path: CounterexamplePath
    stats: Stats
    sym: object

    verdict = "uncontrollable"


@dataclass
class Inconclusive:
    reason: str
    supervisor: Supervisor  # partial, not certified
    stats: Stats
    sym: object

    verdict = "inconclusive"


class _Uncontrollable(Exception):
    def __init__(self, path):
        self.path = path


class Trace:
    def __init__(self, handle):
        self.h = handle
        self.delta = [set(), set()]        # index 0 unused (R_0 is I)
        self.acts = [None, handle.new_var()]

    @property
    def N(self):
        return len(self.delta) - 1

    def new_frame(self):
        self.delta.append(set())
        self.acts.append(self.h.new_var())

    def assumptions(self, k, act_init):
        if k == 0:
            return [act_init]
        return self.acts[k:]

    def cubes(self, k):
        """Blocked cubes of F_k (levels >= k)."""
        out = set()
        for j in range(max(k, 1), len(self.delta)):
            out |= self.delta[j]
        return out

    def level_of(self, cube):
        for j in range(len(self.delta) - 1, 0, -1):
            if cube in self.delta[j]:
                return j
        return 0

    def add(self, cube, k):
        if self.level_of(cube) >= k:
            return False
        for j in range(1, k):
            self.delta[j].discard(cube)
        self.delta[k].add(cube)
        self.h.add_clause([-self.acts[k]] + [-l for l in cube])
        return True


class PDRC:
    def __init__(self, system, backend=None, inductive_generalization=True,
                 debug=False, limits=None, run_log=None, audit_states=1000):
        if isinstance(system, System):
            check(system)
            self.sym = encode(system)
        else:
            self.sym = system
        self.sys = self.sym.system
        self.bm = self.sym.bitmap
        self.h = SolverHandle(backend)
        self.acts = load(self.sym, self.h)
        self.ind_gen = inductive_generalization
        self.debug = debug
        self.limits = limits or Limits()
        self.run_log = run_log
        self.audit_states = audit_states
        self.supervisor = Supervisor()
        self.trace = Trace(self.h)
        self.stats = Stats()
        self._deadline = None
        self._conflicts0 = 0
        self._ev_bits = set(self.bm.event_bits.values())
        # frames are bounded by the number of distinct (state, event) pairs
        self.hard_bound = self.sys.state_count * max(1, len(self.sys.events)) + 2

    # -- solver plumbing ----------------------------------------------------

    def _solve(self, assumptions, frame=None, cone=None, cube=None):
        if self._deadline is not None and time.monotonic() > self._deadline:
            raise BudgetExhausted("time budget exhausted")
        limit = None
        if self.limits.max_conflicts is not None:
            limit = self.limits.max_conflicts - (self.h.conflicts - self._conflicts0)
            if limit <= 0:
                raise BudgetExhausted("conflict budget exhausted")
        r = self.h.solve(assumptions, conflict_limit=limit)
        if self.run_log is not None:
            rec = {"frame": frame, "cone": cone, "verdict": "sat" if r.sat else "unsat",
                   "cube": [self.bm.atom(l) for l in cube] if cube is not None else None}
            self.run_log.write(json.dumps(rec) + "\n")
        return r

    def _temp(self, clause):
        a = self.h.new_var()
        self.h.add_clause([-a] + list(clause))
        return a

    def _retire(self, a):
        self.h.add_clause([-a])

    def _inv(self):
        return [self.acts.act_inv, self.acts.act_inv_next]

    def _primed_state(self, cube):
        return [self.bm.prime(l) for l in cube if abs(l) not in self._ev_bits]

    def _unprime_core(self, core):
        out = set()
        for l in core:
            if self.bm.width < abs(l) <= 2 * self.bm.width:
                out.add(self.bm.unprime(l))
        return out

    def _minimize(self, cube, check):
        """Drop literals in ascending index order while ``check`` holds.

        ``check(lits)`` returns None when the property fails, otherwise the
        subset of ``lits`` that the proof used (an unsat core).
        """
        needed = check(cube)
        if needed is None:
            return cube
        cube = [l for l in cube if l in needed]
        for l in list(cube):
            if l not in cube:
                continue
            cand = [x for x in cube if x != l]
            needed = check(cand)
            if needed is not None:
                cube = [x for x in cand if x in needed]
        return canonical(cube)

    # -- generalisation -----------------------------------------------------

    def generalize_bad_state(self, model):
        m = self.bm.project(model)

        def holds(lits):
            r = self._solve(list(lits) + [-self.sym.bad, self.acts.act_inv], cone="bad", cube=lits)
            return None if r.sat else set(r.core)
        return self._minimize(list(m), holds)

    def generalize_preimage_c(self, model, s):
        m = self.bm.project(model)
        neg_s = self._temp([-l for l in self._primed_state(s)])

        def holds(lits):
            r = self._solve(list(lits) + [self.sym.ind_c, neg_s] + self._inv(), cone="c", cube=lits)
            return None if r.sat else set(r.core)
        try:
            return self._minimize(list(m), holds)
        finally:
            self._retire(neg_s)

    def generalize_preimage_u(self, model, s, event):
        m = self.bm.project(model)
        neg_s = self._temp([-l for l in self._primed_state(s)])
        fire = self.sym.fire[event]

        def holds(lits):
            r = self._solve(list(lits) + [self.sym.ind_u, neg_s] + self._inv(), cone="u", cube=lits)
            if r.sat:
                return None
            r2 = self._solve(list(lits) + [-fire, self.acts.act_inv], cone="fire", cube=lits)
            if r2.sat:
                return None
            return set(r.core) | set(r2.core)
        try:
            return self._minimize(list(m), holds)
        finally:
            self._retire(neg_s)

    def _intersects_init(self, cube):
        r = self._solve(list(cube) + [self.acts.act_init, self.acts.act_inv], frame=0, cone="init", cube=cube)
        return r

    def generalize_inductive(self, s, k):
        """Shrink s while ¬s stays initiated and inductive relative to R_{k-1}."""

        def holds(lits):
            if not lits:
                return None
            if self._intersects_init(lits).sat:
                return None
            neg = self._temp([-l for l in lits])
            try:
                primed = self._primed_state(lits)
                r = self._solve(
                    self.trace.assumptions(k - 1, self.acts.act_init)
                    + [neg, self.sym.ind_t] + self._inv() + primed,
                    frame=k - 1, cone="T", cube=lits,
                )
            finally:
                self._retire(neg)
            if r.sat:
                return None
            used = self._unprime_core(r.core)
            shrunk = [l for l in lits if l in used or abs(l) in self._ev_bits]
            if len(shrunk) < len(lits) and shrunk and not self._intersects_init(shrunk).sat:
                return set(shrunk)
            return set(lits)
        return self._minimize(list(s), holds)

    # -- blocking -----------------------------------------------------------

    def _preimage_query(self, s, k, ind, cone):
        neg_s = self._temp([-l for l in s])
        try:
            return self._solve(
                self.trace.assumptions(k - 1, self.acts.act_init)
                + [neg_s, ind] + self._inv() + self._primed_state(s),
                frame=k - 1, cone=cone, cube=s,
            )
        finally:
            self._retire(neg_s)

    def block(self, s, k, chain):
        """Block cube s at level k; ``chain`` leads from s to a bad cube."""
        while True:
            r = self._preimage_query(s, k, self.sym.ind_c, "c")
            if not r.sat:
                break
            t = self.generalize_preimage_c(r.model, s)
            self.supervisor.cubes.append(ForbiddenCube(t, k, s, cube_to_predicate(self.bm, t)[0]))
            self.h.add_clause([-self.sym.ind_c] + [-l for l in t])
        while True:
            r = self._preimage_query(s, k, self.sym.ind_u, "u")
            if not r.sat:
                break
            state, event = self.bm.decode_state(r.model)
            if k == 1:
                raise _Uncontrollable(self._path(state, [(self.bm.project(r.model), event)] + chain[::-1]))
            t = self.generalize_preimage_u(r.model, s, event)
            ri = self._intersects_init(t)
            if ri.sat:
                q0, _ = self.bm.decode_state(ri.model)
                raise _Uncontrollable(self._path(q0, [(t, event)] + chain[::-1]))
            self.block(t, k - 1, chain + [(t, event)])
        if self.ind_gen:
            s = self.generalize_inductive(s, k)
        if self.trace.add(s, k):
            self.stats.clauses += 1

    def _path(self, q0, links):
        """Replay ``links`` (cube, event) from q0; the last cube is bad and has no event."""
        states, events, cubes = [q0], [], []
        q = q0
        for cube, event in links:
            state_part = [l for l in cube if abs(l) not in self._ev_bits]
            if not self.bm.cube_holds(state_part, set(self.bm.encode_state(q))):
                raise InternalError(f"counterexample replay left its cube at {self.sys.format_state(q)}")
            cubes.append(cube)
            if event is None:
                break
            q = enabled(self.sys, q, event)
            if q is None:
                raise InternalError(f"counterexample replay blocked on {event}")
            states.append(q)
            events.append(event)
        if not self.sys.is_forbidden(states[-1]):
            raise InternalError("counterexample does not end in a forbidden state")
        return CounterexamplePath(states, events, cubes)

    def blocking_phase(self):
        N = self.trace.N
        while True:
            r = self._solve(self.trace.assumptions(N, self.acts.act_init) + [self.sym.bad, self.acts.act_inv],
                            frame=N, cone="bad")
            if not r.sat:
                return
            s = self.generalize_bad_state(r.model)
            self.block(s, N, [(s, None)])

    def propagate(self):
        self.trace.new_frame()
        N = self.trace.N - 1
        for k in range(1, N + 1):
            for cube in sorted(self.trace.delta[k]):
                r = self._solve(
                    self.trace.assumptions(k, self.acts.act_init)
                    + [self.sym.ind_t] + self._inv() + self._primed_state(cube),
                    frame=k, cone="T", cube=cube,
                )
                if not r.sat:
                    self.trace.add(cube, k + 1)
                    self.stats.propagated += 1

    def check_fixpoint(self):
        for k in range(1, self.trace.N):
            if not self.trace.delta[k]:
                return k
        return None

    # -- debug audit --------------------------------------------------------

    def audit(self):
        tr = self.trace
        for i in range(1, tr.N):
            if not tr.cubes(i + 1) <= tr.cubes(i):
                raise InvariantViolation(f"frame monotonicity: F_{i + 1} is not a subset of F_{i}")
        for i in range(0, tr.N):
            r = self.h.solve(tr.assumptions(i, self.acts.act_init) + [self.sym.bad, self.acts.act_inv])
            if r.sat:
                raise InvariantViolation(f"frame safety: R_{i} intersects the forbidden states")
        if self.sys.state_count <= self.audit_states:
            self._audit_image()

    def _audit_image(self):
        sys, bm, tr = self.sys, self.bm, self.trace
        events = [e.name for e in sys.events]
        pairs = [(q, e) for q in all_states(sys) for e in events]
        lits = {p: bm.true_lits(*p) for p in pairs}

        def in_frame(i, p):
            if i == 0:
                return p[0] == initial_state(sys)
            return not any(bm.cube_holds(c, lits[p]) for c in tr.cubes(i))

        for i in range(0, tr.N):
            for p in pairs:
                if not in_frame(i, p):
                    continue
                q2 = supervised_enabled(sys, bm, self.supervisor, *p)
                if q2 is None:
                    continue
                for e2 in events:
                    if not in_frame(i + 1, (q2, e2)):
                        raise InvariantViolation(
                            f"image inclusion: image of R_{i} not inside R_{i + 1}: "
                            f"{sys.format_state(p[0])} -{p[1]}-> {sys.format_state(q2)} with {e2}"
                        )

    # -- main loop ----------------------------------------------------------

    def synthesize(self):
        t0 = time.monotonic()
        if self.limits.max_seconds is not None:
            self._deadline = t0 + self.limits.max_seconds
        self._conflicts0 = self.h.conflicts
        try:
            result = self._run()
        except BudgetExhausted as e:
            result = Inconclusive(str(e), self.supervisor, self.stats, self.sym)
        except _Uncontrollable as e:
            result = Uncontrollable(e.path, self.stats, self.sym)
        self.stats.frames = self.trace.N
        self.stats.supervisor_cubes = len(self.supervisor)
        self.stats.solver_calls = self.h.calls
        self.stats.conflicts = self.h.conflicts - self._conflicts0
        self.stats.seconds = time.monotonic() - t0
        return result

    def _run(self):
        if self._deadline is not None and self.limits.max_seconds <= 0:
            raise BudgetExhausted("time budget exhausted")
        r = self._solve([self.acts.act_init, self.acts.act_inv, self.sym.bad], frame=0, cone="bad")
        if r.sat:
            q0, _ = self.bm.decode_state(r.model)
            raise _Uncontrollable(CounterexamplePath([q0], [], [self.bm.project(r.model)]))
        while True:
            N = self.trace.N
            if self.limits.max_frames is not None and N > self.limits.max_frames:
                raise BudgetExhausted("frame budget exhausted")
            if N > self.hard_bound:
                raise InternalError(f"iteration bound {self.hard_bound} exceeded")
            self.stats.iterations = N
            self.blocking_phase()
            if self.debug:
                self.audit()
            self.propagate()
            if self.debug:
                self.audit()
            k = self.check_fixpoint()
            if k is not None:
                inv = sorted(self.trace.cubes(k))
                return Controlled(self.supervisor, inv, k, self.stats, self.sym)


def synthesize(system, **kwargs):
    return PDRC(system, **kwargs).synthesize()
