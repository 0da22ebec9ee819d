"""Pure-Python incremental CDCL solver.

Literals are DIMACS-style signed ints on the outside. Internally a literal is
``2 * var + sign`` so that negation is ``lit ^ 1`` and value lookups index a
flat list. Two watched literals, 1UIP learning with local minimisation,
VSIDS-style activity with phase saving, Luby restarts, and MiniSat-style
assumption handling with final-conflict analysis for cores.
"""

import heapq


class ConflictBudgetExceeded(Exception):
    pass


def _luby(y, x):
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    return y ** seq


def _to_int(lit):
    return (lit << 1) if lit > 0 else ((-lit) << 1) | 1


def _to_ext(ilit):
    return -(ilit >> 1) if ilit & 1 else ilit >> 1


class CDCLSolver:
    def __init__(self):
        self.nvars = 0
        self._vals = [0, 0]
        self._level = [0]
        self._reason = [None]
        self._activity = [0.0]
        self._phase = [False]
        self._seen = bytearray(1)
        self._watches = [[], []]
        self._trail = []
        self._trail_lim = []
        self._qhead = 0
        self._ok = True
        self._heap = []
        self._var_inc = 1.0
        self._clauses = []
        self._learnts = []
        self._max_learnts = 4000
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0
        self.model = None
        self.core = None

    # -- variables and clauses -------------------------------------------

    def ensure_vars(self, n):
        while self.nvars < n:
            self.nvars += 1
            self._vals += [0, 0]
            self._level.append(0)
            self._reason.append(None)
            self._activity.append(0.0)
            self._phase.append(False)
            self._seen.append(0)
            self._watches += [[], []]
            heapq.heappush(self._heap, (0.0, self.nvars))

    def add_clause(self, lits):
        if not self._ok:
            return
        self._cancel_until(0)
        if lits:
            self.ensure_vars(max(abs(x) for x in lits))
        vals = self._vals
        seen = set()
        clause = []
        for x in lits:
            il = _to_int(x)
            if il ^ 1 in seen or vals[il] == 1:
                return
            if il in seen or vals[il] == -1:
                continue
            seen.add(il)
            clause.append(il)
        if not clause:
            self._ok = False
        elif len(clause) == 1:
            self._enqueue(clause[0], None)
            if self._propagate() is not None:
                self._ok = False
        else:
            self._clauses.append(clause)
            self._watches[clause[0]].append(clause)
            self._watches[clause[1]].append(clause)

    # -- core machinery ----------------------------------------------------

    def _enqueue(self, ilit, reason):
        self._vals[ilit] = 1
        self._vals[ilit ^ 1] = -1
        v = ilit >> 1
        self._level[v] = len(self._trail_lim)
        self._reason[v] = reason
        self._trail.append(ilit)

    def _cancel_until(self, level):
        if len(self._trail_lim) <= level:
            return
        trail, vals, phase, heap, act = self._trail, self._vals, self._phase, self._heap, self._activity
        stop = self._trail_lim[level]
        for i in range(len(trail) - 1, stop - 1, -1):
            il = trail[i]
            v = il >> 1
            vals[il] = 0
            vals[il ^ 1] = 0
            self._reason[v] = None
            phase[v] = not (il & 1)
            heapq.heappush(heap, (-act[v], v))
        del trail[stop:]
        del self._trail_lim[level:]
        self._qhead = len(trail)
        if len(heap) > 8 * self.nvars + 64:
            self._heap = [(-act[v], v) for v in range(1, self.nvars + 1) if vals[2 * v] == 0]
            heapq.heapify(self._heap)

    def _propagate(self):
        vals, watches, trail = self._vals, self._watches, self._trail
        while self._qhead < len(trail):
            p = trail[self._qhead]
            self._qhead += 1
            self.propagations += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            kept = []
            watches[false_lit] = kept
            i, n = 0, len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0] = c[1]
                    c[1] = false_lit
                first = c[0]
                if vals[first] == 1:
                    kept.append(c)
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    if vals[lk] != -1:
                        c[1] = lk
                        c[k] = false_lit
                        watches[lk].append(c)
                        break
                else:
                    kept.append(c)
                    if vals[first] == -1:
                        kept.extend(ws[i:])
                        self._qhead = len(trail)
                        return c
                    self._enqueue(first, c)
        return None

    def _bump(self, v):
        act = self._activity
        act[v] += self._var_inc
        if act[v] > 1e100:
            for j in range(1, self.nvars + 1):
                act[j] *= 1e-100
            self._var_inc *= 1e-100
            self._heap = [(-act[j], j) for j in range(1, self.nvars + 1) if self._vals[2 * j] == 0]
            heapq.heapify(self._heap)
        elif self._vals[2 * v] == 0:
            heapq.heappush(self._heap, (-act[v], v))

    def _analyze(self, confl):
        seen, level, reason, trail = self._seen, self._level, self._reason, self._trail
        cur = len(self._trail_lim)
        learnt = [0]
        pathc = 0
        p = None
        idx = len(trail) - 1
        while True:
            for q in (confl if p is None else confl[1:]):
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = 1
                    self._bump(v)
                    if level[v] >= cur:
                        pathc += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            confl = reason[p >> 1]
            seen[p >> 1] = 0
            pathc -= 1
            if pathc == 0:
                break
        learnt[0] = p ^ 1
        # local minimisation: drop literals implied by other learnt literals
        out = [learnt[0]]
        for q in learnt[1:]:
            r = reason[q >> 1]
            if r is None or not all(seen[x >> 1] or level[x >> 1] == 0 for x in r[1:]):
                out.append(q)
        for q in learnt[1:]:
            seen[q >> 1] = 0
        bt = 0
        if len(out) > 1:
            best = 1
            for j in range(2, len(out)):
                if level[out[j] >> 1] > level[out[best] >> 1]:
                    best = j
            out[1], out[best] = out[best], out[1]
            bt = level[out[1] >> 1]
        return out, bt

    def _analyze_final(self, a):
        core = [a]
        v = a >> 1
        if self._level[v] == 0 or not self._trail_lim:
            return core
        seen = {v}
        trail, reason, level = self._trail, self._reason, self._level
        for i in range(len(trail) - 1, self._trail_lim[0] - 1, -1):
            x = trail[i] >> 1
            if x in seen:
                r = reason[x]
                if r is None:
                    if trail[i] != a:
                        core.append(trail[i])
                else:
                    for q in r[1:]:
                        if level[q >> 1] > 0:
                            seen.add(q >> 1)
        return core

    def _pick_branch(self):
        heap, vals = self._heap, self._vals
        while heap:
            _, v = heapq.heappop(heap)
            if vals[2 * v] == 0:
                return 2 * v if self._phase[v] else 2 * v + 1
        return None

    def _reduce_db(self):
        locked = set()
        for il in self._trail:
            r = self._reason[il >> 1]
            if r is not None:
                locked.add(id(r))
        self._learnts.sort(key=len)
        half = len(self._learnts) // 2
        keep = self._learnts[:half] + [c for c in self._learnts[half:] if id(c) in locked or len(c) <= 2]
        self._learnts = keep
        watches = [[] for _ in range(len(self._watches))]
        for c in self._clauses:
            watches[c[0]].append(c)
            watches[c[1]].append(c)
        for c in keep:
            watches[c[0]].append(c)
            watches[c[1]].append(c)
        self._watches = watches
        self._max_learnts = int(self._max_learnts * 1.1)

    def _search(self, budget, assumps, limit):
        conflicts_here = 0
        vals = self._vals
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                conflicts_here += 1
                if not self._trail_lim:
                    self._ok = False
                    self.core = []
                    return False
                learnt, bt = self._analyze(confl)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self._learnts.append(learnt)
                    self._watches[learnt[0]].append(learnt)
                    self._watches[learnt[1]].append(learnt)
                    self._enqueue(learnt[0], learnt)
                self._var_inc *= 1.0 / 0.95
                continue
            if limit is not None and self.conflicts >= limit:
                self._cancel_until(0)
                raise ConflictBudgetExceeded()
            if conflicts_here >= budget:
                self._cancel_until(0)
                return None
            if len(self._learnts) - len(self._trail) >= self._max_learnts:
                self._reduce_db()
            nxt = None
            while len(self._trail_lim) < len(assumps):
                p = assumps[len(self._trail_lim)]
                if vals[p] == 1:
                    self._trail_lim.append(len(self._trail))
                elif vals[p] == -1:
                    self.core = [_to_ext(x) for x in self._analyze_final(p)]
                    return False
                else:
                    nxt = p
                    break
            if nxt is None:
                self.decisions += 1
                nxt = self._pick_branch()
                if nxt is None:
                    self.model = frozenset(_to_ext(x) for x in self._trail)
                    return True
            self._trail_lim.append(len(self._trail))
            self._enqueue(nxt, None)

    def solve(self, assumptions=(), conflict_limit=None):
        """Return True/False; sets ``model`` or ``core`` accordingly."""
        self.model = None
        self.core = None
        if not self._ok:
            self.core = []
            return False
        self._cancel_until(0)
        if assumptions:
            self.ensure_vars(max(abs(x) for x in assumptions))
        assumps = [_to_int(x) for x in assumptions]
        limit = None if conflict_limit is None else self.conflicts + conflict_limit
        i = 0
        try:
            while True:
                status = self._search(100 * _luby(2, i), assumps, limit)
                i += 1
                if status is not None:
                    return status
        finally:
            self._cancel_until(0)
