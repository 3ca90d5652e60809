import itertools
import json
import math
import signal
import subprocess
import sys
import time

import numpy as np
import pytest
from conftest import brute_beta_float, extended_enabled
from hypothesis import given, settings
from hypothesis import strategies as st

from badsci.constructions import known_matrix, random_unit_matrix, tree_matrix
from badsci.errors import BudgetExceeded, CheckpointError
from badsci.evaluate import beta_exact
from badsci.matrix import Matrix
from badsci.search import (
    CandidateRowSet,
    SearchState,
    candidate_rows,
    check_structure,
    exhaustive_search,
    structure_iterate,
    subset_norm_max,
)
from badsci.surd import SurdValue

R2, R3 = SurdValue.sqrt(2), SurdValue.sqrt(3)


def direction_oracle(n):
    """Candidate directions via plain sets and math.gcd."""
    verts = list(itertools.product((-1, 1), repeat=n))
    nonzero, unique, final = 0, set(), set()
    for mask in range(1 << len(verts)):
        s = [0] * n
        for k, x in enumerate(verts):
            if (mask >> k) & 1:
                s = [a + b for a, b in zip(s, x)]
        if not any(s):
            continue
        nonzero += 1
        g = math.gcd(*s)
        p = tuple(v // g for v in s)
        unique.add(p)
        lead = next(v for v in p if v)
        final.add(p if lead > 0 else tuple(-v for v in p))
    return nonzero, unique, final


@pytest.mark.parametrize("n", [2, 3])
def test_candidate_rows_match_oracle(n):
    nonzero, unique, final = direction_oracle(n)
    c = candidate_rows(n)
    assert (c.raw, c.nonzero, c.unique, c.final) == (2 ** 2**n, nonzero, len(unique), len(final))
    assert {r.p for r in c.rows} == final


def test_candidate_counts():
    assert candidate_rows(2).counts() == {"raw": 16, "nonzero": 12, "unique": 8, "final": 4}
    assert candidate_rows(3).counts() == {"raw": 256, "nonzero": 238, "unique": 50, "final": 25}
    assert candidate_rows(4).final == 680
    for n in (2, 3, 4):
        af = candidate_rows(n, antipode_free=True)
        assert af.raw == 3 ** 2 ** (n - 1)
        assert af.rows == candidate_rows(n).rows
        assert af.digest() == candidate_rows(n).digest()


def test_candidate_rows_bounds():
    with pytest.raises(ValueError):
        candidate_rows(5)
    with pytest.raises(ValueError):
        CandidateRowSet.from_rows(2, [(1, 1), (-2, -2)])


def float_search_oracle(m, n):
    rows = [np.array(r.p) / math.sqrt(r.N) for r in candidate_rows(n).rows]
    vals = {c: brute_beta_float(np.array([rows[i] for i in c])) for c in itertools.combinations(range(len(rows)), m)}
    best = max(vals.values())
    return best, sorted(c for c, v in vals.items() if v >= best - 1e-12)


@pytest.mark.parametrize("m,n,expected", [(2, 2, R2), (3, 3, (R2 + R3) / 2), (2, 3, R2)])
def test_search_matches_float_oracle(m, n, expected):
    state = exhaustive_search(m, n)
    best, winners = float_search_oracle(m, n)
    assert state.complete and state.checked == state.total == math.comb(candidate_rows(n).final, m)
    assert state.best_beta == expected
    assert abs(float(state.best_beta) - best) <= 1e-12
    assert sorted(state.best_tuples) == winners
    assert state.maximizer_count == len(winners)


def test_search_explicit_candidates():
    cands = CandidateRowSet.from_rows(3, [(1, 1, 0), (1, -1, 0), (0, 0, 1), (1, 1, 1)])
    state = exhaustive_search(2, 3, cands)
    best = max(
        beta_exact(cands.matrix(c)).exact for c in itertools.combinations(range(4), 2)
    )
    assert state.best_beta == best


def test_search_threads_and_resume_agree(tmp_path):
    full = exhaustive_search(3, 4, threads=1)
    threaded = exhaustive_search(3, 4, threads=3)
    assert threaded.key() == full.key()
    ck = tmp_path / "s.ckpt"
    partial = exhaustive_search(3, 4, checkpoint_path=ck, max_blocks=5)
    assert not partial.complete and partial.next_block == 5
    saved = SearchState.from_json(json.loads(ck.read_text()))
    assert saved.key() == partial.key()
    resumed = exhaustive_search(3, 4, checkpoint_path=ck, resume=True)
    assert resumed.key() == full.key()
    assert resumed.best_beta == (R2 + R3) / 2 and resumed.maximizer_count == 24


def test_resume_complete_is_noop(tmp_path):
    ck = tmp_path / "s.ckpt"
    first = exhaustive_search(2, 3, checkpoint_path=ck)
    again = exhaustive_search(2, 3, checkpoint_path=ck, resume=True)
    assert again.key() == first.key()


def test_checkpoint_errors(tmp_path):
    ck = tmp_path / "s.ckpt"
    exhaustive_search(2, 3, checkpoint_path=ck, max_blocks=2)
    with pytest.raises(CheckpointError):
        exhaustive_search(3, 3, checkpoint_path=ck, resume=True)
    obj = json.loads(ck.read_text())
    obj["cursor"] += 1
    ck.write_text(json.dumps(obj))
    with pytest.raises(CheckpointError):
        exhaustive_search(2, 3, checkpoint_path=ck, resume=True)
    ck.write_text("{not json")
    with pytest.raises(CheckpointError):
        exhaustive_search(2, 3, checkpoint_path=ck, resume=True)


def test_budget():
    with pytest.raises(BudgetExceeded):
        exhaustive_search(3, 4, budget=1000)
    assert exhaustive_search(2, 2, budget=6).complete


def run_cli(*args, **kw):
    return subprocess.run([sys.executable, "-m", "badsci", *args], capture_output=True, text=True, **kw)


def test_kill_and_resume_subprocess(tmp_path):
    ck = tmp_path / "k.ckpt"
    args = ["search", "--m", "3", "--n", "4", "--checkpoint", str(ck), "--checkpoint-every", "0"]
    proc = subprocess.Popen([sys.executable, "-m", "badsci", *args], stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    deadline = time.time() + 120
    while not ck.exists() and time.time() < deadline and proc.poll() is None:
        time.sleep(0.01)
    if proc.poll() is None:
        proc.send_signal(signal.SIGKILL)
    proc.wait()
    killed_at = SearchState.from_json(json.loads(ck.read_text()))
    out = tmp_path / "r.json"
    done = run_cli(*args, "--resume", "--output", str(out))
    assert done.returncode == 0, done.stderr
    resumed = SearchState.from_json(json.loads(out.read_text()))
    assert resumed.key() == exhaustive_search(3, 4).key()
    assert not killed_at.complete and killed_at.cursor < resumed.cursor


@pytest.mark.extended
@pytest.mark.skipif(not extended_enabled(), reason="set BADSCI_EXTENDED=1")
def test_extended_4x4_kill_resume(tmp_path):
    ck = tmp_path / "e.ckpt"
    partial = exhaustive_search(4, 4, checkpoint_path=ck, force=True, max_blocks=40)
    assert not partial.complete
    state = exhaustive_search(4, 4, checkpoint_path=ck, resume=True, force=True)
    assert state.complete and state.checked == 8830510430
    assert state.best_beta == R3


@pytest.mark.parametrize("m,n", [(2, 2), (3, 3), (2, 3), (2, 4)])
def test_optima_have_structure(m, n):
    state = exhaustive_search(m, n)
    cands = candidate_rows(n)
    for combo in state.best_tuples:
        assert all(r.passes for r in check_structure(cands.matrix(combo)))


def test_check_structure_reports_failures():
    # two copies of the same direction: the second row's W is empty
    A = Matrix.from_int([[1, 1], [1, 1]])
    rows = check_structure(A)
    assert rows[1].w_size == 0 and rows[1].passes
    B = Matrix.from_int([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert all(r.passes for r in check_structure(B))
    C = Matrix.from_int([[3, 1, 0], [0, 1, 2], [1, 0, 1]])
    assert not all(r.passes for r in check_structure(C))


def as_float(v):
    return float(v)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_structure_iterate_monotone(m, n, seed):
    res = structure_iterate(random_unit_matrix(m, n, seed=seed), max_iters=30)
    trace = [as_float(v) for v in res.trace]
    assert all(b >= a - 1e-12 for a, b in zip(trace, trace[1:]))
    if res.converged and res.matrix.is_int:
        assert all(r.passes for r in check_structure(res.matrix))


def test_structure_iterate_fixed_point():
    res = structure_iterate(tree_matrix(4))
    assert res.converged and res.iterations == 0
    assert res.beta == R3
    res = structure_iterate(known_matrix("opt3"))
    assert as_float(res.beta) >= 1.3838834764831844


@pytest.mark.parametrize("n", [2, 3, 4])
def test_subset_norm(n):
    r = subset_norm_max(n)
    assert r.max_norm_sq == 4 ** (n - 1) and r.max_norm == 2 ** (n - 1)
    assert r.half_cubes_attain and r.maximizers_half_size and r.maximizers_antipode_free
    assert r.subsets_checked == 2 ** 2**n
