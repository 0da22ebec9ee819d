import itertools
import random

import pytest

from pdrc.sat import BudgetExhausted, SolverHandle, available_backends

BACKENDS = available_backends()


def brute_force_sat(nvars, clauses):
    for bits in itertools.product([False, True], repeat=nvars):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return True
    return False


def handle_with(backend, nvars, clauses=()):
    h = SolverHandle(backend)
    h.reserve(nvars)
    h.add_clauses(clauses)
    return h


@pytest.mark.parametrize("backend", BACKENDS)
def test_unit_contradiction_core(backend):
    h = handle_with(backend, 2, [[-2]])
    r = h.solve([2])
    assert not r.sat
    assert set(r.core) <= {2}


@pytest.mark.parametrize("backend", BACKENDS)
def test_forced_assignment(backend):
    h = handle_with(backend, 2, [[1, 2]])
    r = h.solve([-1])
    assert r.sat and r.value(2)


@pytest.mark.parametrize("backend", BACKENDS)
def test_empty_database_sat(backend):
    assert SolverHandle(backend).solve([]).sat


@pytest.mark.parametrize("backend", BACKENDS)
def test_inconsistent_database_empty_core(backend):
    h = handle_with(backend, 1, [[1], [-1]])
    r = h.solve([])
    assert not r.sat and r.core == ()


@pytest.mark.parametrize("backend", BACKENDS)
def test_out_of_range_literal(backend):
    h = handle_with(backend, 2)
    with pytest.raises(ValueError):
        h.add_clause([3])
    with pytest.raises(ValueError):
        h.solve([0])


@pytest.mark.parametrize("backend", BACKENDS)
def test_random_3cnf_against_truth_table(backend):
    rng = random.Random(1234)
    for _ in range(1000):
        n = rng.randint(3, 12)
        m = int(round(2.0 * n))
        clauses = [
            [v * rng.choice([-1, 1]) for v in rng.sample(range(1, n + 1), 3)] for _ in range(m)
        ]
        h = handle_with(backend, n, clauses)
        r = h.solve()
        assert r.sat == brute_force_sat(n, clauses)
        if r.sat:
            assert all(any(r.value(l) for l in c) for c in clauses)


@pytest.mark.parametrize("backend", BACKENDS)
def test_assumption_cores_are_valid_and_monotone(backend):
    rng = random.Random(99)
    for _ in range(300):
        n = rng.randint(4, 10)
        clauses = [
            [v * rng.choice([-1, 1]) for v in rng.sample(range(1, n + 1), 3)]
            for _ in range(rng.randint(n, 4 * n))
        ]
        h = handle_with(backend, n, clauses)
        assumps = [v * rng.choice([-1, 1]) for v in rng.sample(range(1, n + 1), rng.randint(1, n))]
        r = h.solve(assumps)
        expected = brute_force_sat(n, clauses + [[a] for a in assumps])
        assert r.sat == expected
        if r.sat:
            assert all(r.value(a) for a in assumps)
            continue
        assert set(r.core) <= set(assumps)
        assert not h.solve(list(r.core)).sat
        # monotone: more assumptions or more clauses keep it unsat
        extra = rng.randint(1, n)
        assert not h.solve(assumps + [extra]).sat
        h.add_clause([rng.randint(1, n)])
        assert not h.solve(assumps).sat


@pytest.mark.parametrize("backend", BACKENDS)
def test_incremental_use(backend):
    h = handle_with(backend, 3)
    h.add_clause([1, 2])
    assert h.solve([-1, -2]).sat is False
    h.add_clause([-2, 3])
    r = h.solve([-1])
    assert r.sat and r.value(2) and r.value(3)
    a = h.new_var()
    h.add_clause([-a, -3])
    assert not h.solve([-1, a]).sat
    h.add_clause([-a])
    assert h.solve([-1]).sat
    assert h.calls == 4


def _pigeonhole(h, holes):
    pigeons = holes + 1
    var = {}
    for p in range(pigeons):
        for q in range(holes):
            var[p, q] = h.new_var()
    for p in range(pigeons):
        h.add_clause([var[p, q] for q in range(holes)])
    for q in range(holes):
        for p1, p2 in itertools.combinations(range(pigeons), 2):
            h.add_clause([-var[p1, q], -var[p2, q]])


@pytest.mark.parametrize("backend", BACKENDS)
def test_conflict_budget(backend):
    h = SolverHandle(backend)
    _pigeonhole(h, 7)
    with pytest.raises(BudgetExhausted):
        h.solve(conflict_limit=5)


def test_dimacs_dump():
    h = handle_with("builtin", 2, [[1, -2], [2]])
    assert h.dimacs() == "p cnf 2 2\n1 -2 0\n2 0\n"
