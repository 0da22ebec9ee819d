"""Incremental satisfiability oracle.

A :class:`SolverHandle` owns one clause database. Clauses are permanent; all
per-query context goes in through assumption literals. Two engines sit behind
the handle: the built-in CDCL solver (always available) and PySAT's MiniSat
when ``python-sat`` is installed.
"""

from dataclasses import dataclass
from typing import Optional

from .cdcl import CDCLSolver, ConflictBudgetExceeded

try:  # optional speed-up
    from pysat.solvers import Solver as _PysatSolver
except ImportError:  # pragma: no cover - depends on environment
    _PysatSolver = None


class BudgetExhausted(Exception):
    """A conflict budget ran out before the query was decided."""


@dataclass(frozen=True)
class QueryResult:
    sat: bool
    model: Optional[frozenset] = None
    core: Optional[tuple] = None

    def value(self, lit):
        return lit in self.model


class _Builtin:
    name = "builtin"

    def __init__(self):
        self._s = CDCLSolver()

    def reserve(self, n):
        self._s.ensure_vars(n)

    def add(self, clause):
        self._s.add_clause(clause)

    def solve(self, assumptions, conflict_limit):
        try:
            ok = self._s.solve(assumptions, conflict_limit)
        except ConflictBudgetExceeded:
            raise BudgetExhausted("conflict budget exhausted") from None
        if ok:
            return QueryResult(True, model=self._s.model)
        return QueryResult(False, core=tuple(self._s.core))

    def conflicts(self):
        return self._s.conflicts


class _Pysat:
    name = "pysat"

    def __init__(self):
        self._s = _PysatSolver(name="minisat22")
        self._top = 0

    def reserve(self, n):
        self._top = max(self._top, n)

    def add(self, clause):
        self._s.add_clause(list(clause))

    def solve(self, assumptions, conflict_limit):
        if conflict_limit is None:
            ok = self._s.solve(assumptions=list(assumptions))
        else:
            self._s.conf_budget(conflict_limit)
            ok = self._s.solve_limited(assumptions=list(assumptions))
            if ok is None:
                raise BudgetExhausted("conflict budget exhausted")
        if ok:
            model = set(self._s.get_model() or ())
            # variables never mentioned in a clause are absent from the model
            for v in range(1, self._top + 1):
                if v not in model and -v not in model:
                    model.add(-v)
            return QueryResult(True, model=frozenset(model))
        return QueryResult(False, core=tuple(self._s.get_core() or ()))

    def conflicts(self):
        return self._s.accum_stats().get("conflicts", 0)


def available_backends():
    return ["builtin"] + (["pysat"] if _PysatSolver is not None else [])


def default_backend():
    return "pysat" if _PysatSolver is not None else "builtin"


class SolverHandle:
    """One clause database plus call statistics."""

    def __init__(self, backend=None, keep_log=True):
        backend = backend or default_backend()
        if backend == "auto":
            backend = default_backend()
        if backend == "pysat":
            if _PysatSolver is None:
                raise ValueError("python-sat is not installed")
            self._engine = _Pysat()
        elif backend == "builtin":
            self._engine = _Builtin()
        else:
            raise ValueError(f"unknown SAT backend {backend!r}")
        self.backend = backend
        self.top = 0
        self.calls = 0
        self.clauses = [] if keep_log else None

    def new_var(self):
        self.top += 1
        self._engine.reserve(self.top)
        return self.top

    def reserve(self, n):
        if n > self.top:
            self.top = n
            self._engine.reserve(n)

    def _check(self, lits):
        for lit in lits:
            if lit == 0 or abs(lit) > self.top:
                raise ValueError(f"literal {lit} out of range 1..{self.top}")

    def add_clause(self, clause):
        clause = tuple(clause)
        self._check(clause)
        if self.clauses is not None:
            self.clauses.append(clause)
        self._engine.add(clause)

    def add_clauses(self, clauses):
        for c in clauses:
            self.add_clause(c)

    def solve(self, assumptions=(), conflict_limit=None):
        assumptions = tuple(assumptions)
        self._check(assumptions)
        self.calls += 1
        return self._engine.solve(assumptions, conflict_limit)

    @property
    def conflicts(self):
        return self._engine.conflicts()

    def dimacs(self):
        if self.clauses is None:
            raise ValueError("clause log disabled for this handle")
        lines = [f"p cnf {self.top} {len(self.clauses)}"]
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


__all__ = [
    "BudgetExhausted",
    "QueryResult",
    "SolverHandle",
    "available_backends",
    "default_backend",
]
