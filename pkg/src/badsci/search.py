"""Candidate rows, exhaustive search, structure iteration and the subset-norm oracle.

An optimal matrix has every row proportional to a sum of hypercube vertices,
so for small ``n`` the search space is the set of such sums up to scaling and
sign (the candidate rows).  :func:`exhaustive_search` scans every
``m``-combination of candidates with a compiled float kernel, keeps every
combination within ``eps`` of the running float maximum, and settles the
shortlist with exact surd arithmetic.  Float error on the scores is around
1e-14, far below ``eps``, so no exact maximizer can be dropped.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .errors import BudgetExceeded, CheckpointError
from .evaluate import _beta_from_row_sums, beta, partition
from .matrix import (
    CanonicalRow,
    FloatRow,
    IntRow,
    Matrix,
    all_vertices,
    canonical_row,
)
from .surd import SurdValue, compare

log = logging.getLogger(__name__)

__all__ = [
    "CandidateRowSet",
    "candidate_rows",
    "SearchState",
    "exhaustive_search",
    "DEFAULT_BUDGET",
    "structure_iterate",
    "IterationResult",
    "check_structure",
    "RowCheck",
    "subset_norm_max",
    "SubsetNormResult",
]

DEFAULT_BUDGET = 10**8
MAX_STORED_MAXIMIZERS = 10**6
SCORE_EPS = 1e-9


# candidate rows


@dataclass(frozen=True)
class CandidateRowSet:
    n: int
    rows: tuple[CanonicalRow, ...]
    raw: int
    nonzero: int
    unique: int
    method: str = "full"

    @property
    def final(self) -> int:
        return len(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def digest(self) -> str:
        payload = json.dumps([self.n, [list(r.p) for r in self.rows]], separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def counts(self) -> dict:
        return {"raw": self.raw, "nonzero": self.nonzero, "unique": self.unique, "final": self.final}

    def matrix(self, indices: Sequence[int], label: str | None = None) -> Matrix:
        return Matrix(tuple(IntRow(self.rows[i].p) for i in indices), label)

    @classmethod
    def from_rows(cls, n: int, rows: Sequence) -> CandidateRowSet:
        """Wrap an explicit row list, kept in the given order."""
        canon = tuple(r if isinstance(r, CanonicalRow) else canonical_row(r) for r in rows)
        if len(set(canon)) != len(canon):
            raise ValueError("candidate rows must be distinct up to sign and scaling")
        return cls(n=n, rows=canon, raw=len(canon), nonzero=len(canon), unique=len(canon), method="explicit")


def _primitive(S: np.ndarray) -> np.ndarray:
    g = np.gcd.reduce(np.abs(S), axis=1)
    return S // g[:, None]


def _sign_fixed(P: np.ndarray) -> np.ndarray:
    first = np.argmax(P != 0, axis=1)
    lead = P[np.arange(len(P)), first]
    return P * np.where(lead < 0, -1, 1)[:, None]


def _summarize(n: int, sums: np.ndarray, raw: int, method: str) -> CandidateRowSet:
    nz = sums[np.any(sums != 0, axis=1)]
    directions = np.unique(_primitive(nz), axis=0)
    final = np.unique(_sign_fixed(directions), axis=0)
    rows = tuple(sorted(CanonicalRow(tuple(int(v) for v in r)) for r in final))
    return CandidateRowSet(n=n, rows=rows, raw=raw, nonzero=len(nz), unique=len(directions), method=method)


@lru_cache(maxsize=8)
def candidate_rows(n: int, antipode_free: bool = False) -> CandidateRowSet:
    """Directions of all nonzero vertex-subset sums, deduplicated up to sign.

    ``antipode_free`` enumerates subsets holding at most one of each pair
    ``{x, -x}``; a pair inside a subset cancels, so both paths yield the same
    directions.  Their raw/nonzero/unique counts differ.
    """
    if n < 1 or n > 4:
        raise ValueError("candidate rows are enumerable only for 1 <= n <= 4")
    if not antipode_free:
        X = all_vertices(n)
        V = 1 << n
        sums = []
        step = 1 << 14
        for start in range(0, 1 << V, step):
            masks = np.arange(start, min(1 << V, start + step), dtype=np.int64)
            bits = (masks[:, None] >> np.arange(V, dtype=np.int64)) & 1
            sums.append(bits @ X)
        return _summarize(n, np.vstack(sums), 1 << V, "full")
    H = all_vertices(n)[: 1 << (n - 1)]  # x[n-1] = -1
    h = len(H)
    codes = np.arange(3**h, dtype=np.int64)
    coef = np.empty((len(codes), h), dtype=np.int64)
    for j in range(h):
        coef[:, j] = (codes // 3**j) % 3 - 1  # -1, 0, +1: take -x, skip, take x
    return _summarize(n, coef @ H, 3**h, "antipode-free")


# exhaustive search


@dataclass
class SearchState:
    m: int
    n: int
    candidate_hash: str
    total: int
    cursor: int = 0
    next_block: int = 0
    best_beta: SurdValue | None = None
    best_float: float = -math.inf
    best_tuples: list[tuple[int, ...]] = field(default_factory=list)
    maximizer_count: int = 0
    checked: int = 0
    complete: bool = False
    elapsed: float = 0.0

    def key(self) -> tuple:
        """Everything but wall-clock time."""
        return (
            self.m, self.n, self.candidate_hash, self.total, self.cursor, self.next_block,
            self.best_beta, self.best_tuples, self.maximizer_count, self.checked, self.complete,
        )

    def to_json(self) -> dict:
        return {
            "candidate_hash": self.candidate_hash,
            "m": self.m,
            "n": self.n,
            "cursor": self.cursor,
            "next_block": self.next_block,
            "total": self.total,
            "best_beta_terms": None if self.best_beta is None else self.best_beta.to_json()["terms"],
            "best_beta_approx": None if self.best_beta is None else float(self.best_beta),
            "best_float": self.best_float if math.isfinite(self.best_float) else None,
            "best_tuples": [list(t) for t in self.best_tuples],
            "maximizer_count": self.maximizer_count,
            "checked": self.checked,
            "complete": self.complete,
            "elapsed": self.elapsed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> SearchState:
        try:
            terms = obj["best_beta_terms"]
            bf = obj.get("best_float")
            return cls(
                m=int(obj["m"]),
                n=int(obj["n"]),
                candidate_hash=str(obj["candidate_hash"]),
                total=int(obj["total"]),
                cursor=int(obj["cursor"]),
                next_block=int(obj["next_block"]),
                best_beta=None if terms is None else SurdValue.from_json({"terms": terms}),
                best_float=-math.inf if bf is None else float(bf),
                best_tuples=[tuple(int(i) for i in t) for t in obj["best_tuples"]],
                maximizer_count=int(obj["maximizer_count"]),
                checked=int(obj["checked"]),
                complete=bool(obj["complete"]),
                elapsed=float(obj.get("elapsed", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"corrupt checkpoint: {exc}") from None


def _write_checkpoint(path, state: SearchState) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(state.to_json(), fh)
    os.replace(tmp, path)


def _read_checkpoint(path) -> SearchState:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from None
    return SearchState.from_json(obj)


class _Scorer:
    """Integer dot table and float score table over the half cube."""

    def __init__(self, cands: CandidateRowSet):
        n = cands.n
        X = all_vertices(n)[: 1 << (n - 1)]
        Pm = np.array([r.p for r in cands.rows], dtype=np.int64)
        self.P = np.abs(Pm @ X.T)
        self.N = [r.N for r in cands.rows]
        self.V = np.ascontiguousarray(self.P / np.sqrt(np.asarray(self.N, dtype=float))[:, None])
        self.Pl = self.P.tolist()
        self.n = n

    def exact(self, combo: Sequence[int]) -> SurdValue:
        rows = [self.Pl[i] for i in combo]
        Ns = [self.N[i] for i in combo]
        S = [0] * len(combo)
        for h in range(len(rows[0])):
            w = 0
            dw = rows[0][h]
            for k in range(1, len(combo)):
                d = rows[k][h]
                if d * d * Ns[w] > dw * dw * Ns[k]:
                    w, dw = k, d
            S[w] += dw
        return _beta_from_row_sums(S, Ns, self.n)


def exhaustive_search(
    m: int,
    n: int,
    candidates: CandidateRowSet | None = None,
    *,
    threads: int = 1,
    checkpoint_path: str | os.PathLike | None = None,
    resume: bool = False,
    budget: int = DEFAULT_BUDGET,
    force: bool = False,
    checkpoint_every: float = 30.0,
    max_blocks: int | None = None,
    eps: float = SCORE_EPS,
    max_stored: int = MAX_STORED_MAXIMIZERS,
    progress: Callable[[SearchState], None] | None = None,
) -> SearchState:
    """Exact maximum of beta over all m-subsets of the candidate rows.

    Work is split into blocks by the smallest row index of a combination, so
    each block is a contiguous run of the lexicographic enumeration and the
    cursor is the rank of the first combination not yet merged.  Blocks are
    merged strictly in order, which makes the result independent of
    ``threads`` and of interruption/resume.  ``max_blocks`` stops after that
    many blocks have been merged in this call (the checkpoint is written).
    """
    cands = candidates if candidates is not None else candidate_rows(n)
    if cands.n != n:
        raise ValueError(f"candidate set is for n={cands.n}, not {n}")
    K = len(cands)
    if m < 1 or m > K:
        raise ValueError(f"need 1 <= m <= {K}")
    total = math.comb(K, m)
    if total > budget and not force:
        raise BudgetExceeded(f"C({K},{m}) = {total} combinations exceeds budget {budget}; use force")
    digest = cands.digest()
    sizes = [math.comb(K - 1 - i, m - 1) for i in range(K - m + 1)]

    state = SearchState(m=m, n=n, candidate_hash=digest, total=total)
    if resume and checkpoint_path is not None and os.path.exists(checkpoint_path):
        state = _read_checkpoint(checkpoint_path)
        if state.candidate_hash != digest or state.m != m or state.n != n:
            raise CheckpointError("checkpoint belongs to a different search")
        if state.next_block > len(sizes) or state.cursor != sum(sizes[: state.next_block]):
            raise CheckpointError("checkpoint cursor is not on a block boundary")
        log.info("resuming at block %d, cursor %d of %d", state.next_block, state.cursor, total)

    scorer = _Scorer(cands)
    t_start = time.perf_counter() - state.elapsed
    last_write = time.perf_counter()

    def merge(block: int, result) -> None:
        _, combos, vals = result
        for combo, val in zip(combos, vals):
            if val < state.best_float - eps:
                continue
            combo_t = tuple(int(i) for i in combo)
            ex = scorer.exact(combo_t)
            c = 1 if state.best_beta is None else compare(ex, state.best_beta)
            if c > 0:
                state.best_beta = ex
                state.best_float = float(val)
                state.best_tuples = [combo_t]
                state.maximizer_count = 1
            elif c == 0:
                state.maximizer_count += 1
                if len(state.best_tuples) < max_stored:
                    state.best_tuples.append(combo_t)
        state.checked += sizes[block]
        state.cursor += sizes[block]
        state.next_block = block + 1

    def run_block(block: int, thr: float):
        return _kernels.scan_block(scorer.V, m, block, thr, eps, 1024)

    todo = list(range(state.next_block, len(sizes)))
    if max_blocks is not None:
        todo = todo[:max_blocks]

    def after_merge(final: bool) -> None:
        nonlocal last_write
        state.elapsed = time.perf_counter() - t_start
        if progress is not None:
            progress(state)
        if checkpoint_path is not None and (final or time.perf_counter() - last_write >= checkpoint_every):
            _write_checkpoint(checkpoint_path, state)
            last_write = time.perf_counter()

    try:
        if threads <= 1:
            for b in todo:
                merge(b, run_block(b, state.best_float - eps))
                after_merge(False)
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                pending = {}
                queue = iter(todo)
                window = 4 * threads
                for b in queue:
                    pending[b] = pool.submit(run_block, b, state.best_float - eps)
                    if len(pending) >= window:
                        break
                for b in todo:
                    merge(b, pending.pop(b).result())
                    after_merge(False)
                    nxt = next(queue, None)
                    if nxt is not None:
                        pending[nxt] = pool.submit(run_block, nxt, state.best_float - eps)
    finally:
        state.complete = state.next_block == len(sizes)
        after_merge(True)
    return state


# structure iteration


def _positive_half_sum(A: Matrix, W: np.ndarray, i: int) -> np.ndarray:
    """Sum over one representative per antipodal pair of W_i, taking a_i.x >= 0."""
    n = A.n
    X = all_vertices(n)[W]
    if A.is_int:
        d = X @ np.asarray(A.rows[i].c, dtype=np.int64)
    else:
        d = X @ A.rows[i].entries()
    full = (1 << n) - 1
    keep = (d > 0) | ((d == 0) & (W > (W ^ full)))
    return X[keep].sum(axis=0)


@dataclass(frozen=True)
class RowCheck:
    index: int
    w_size: int
    u_sum: tuple[int, ...]
    passes: bool
    residual: float

    def to_json(self) -> dict:
        return {
            "row": self.index,
            "w_size": self.w_size,
            "u_sum": list(self.u_sum),
            "passes": self.passes,
            "residual": self.residual,
        }


def check_structure(A: Matrix, tol: float = 1e-9) -> list[RowCheck]:
    """For each row, whether it equals the normalized positive-half sum of its W_i.

    Exact direction comparison for integer rows, ``tol`` otherwise.  Rows with
    empty W_i are reported as passing with zero residual.
    """
    report = partition(A)
    out = []
    for i, W in enumerate(report.sets):
        if len(W) == 0:
            out.append(RowCheck(i, 0, (0,) * A.n, True, 0.0))
            continue
        s = _positive_half_sum(A, W, i)
        u = tuple(int(v) for v in s)
        a = A.rows[i].entries()
        if not any(u):
            out.append(RowCheck(i, len(W), u, False, float(np.linalg.norm(a))))
            continue
        target = s / np.linalg.norm(s)
        residual = float(min(np.linalg.norm(a - target), np.linalg.norm(a + target)))
        if A.is_int:
            passes = canonical_row(A.rows[i]) == canonical_row(u)
        else:
            passes = residual <= tol
        out.append(RowCheck(i, len(W), u, bool(passes), residual))
    return out


@dataclass
class IterationResult:
    matrix: Matrix
    trace: list
    iterations: int
    converged: bool

    @property
    def beta(self):
        return self.trace[-1]


def _objective(A: Matrix):
    r = beta(A)
    return r.exact if r.exact is not None else r.approx


def structure_iterate(A: Matrix, max_iters: int = 100) -> IterationResult:
    """Replace every row by its normalized positive-half sum until nothing changes.

    The objective never decreases.  Rows whose W_i is empty (or whose
    positive-half sum vanishes) are kept.
    """
    trace = [_objective(A)]
    current = A
    for it in range(1, max_iters + 1):
        report = partition(current)
        sums = []
        for i, W in enumerate(report.sets):
            s = _positive_half_sum(current, W, i) if len(W) else None
            sums.append(s if s is not None and np.any(s != 0) else None)
        all_replaced = all(s is not None for s in sums)
        rows = []
        for r, s in zip(current.rows, sums):
            if current.is_int or all_replaced:
                rows.append(IntRow(tuple(int(v) for v in s)) if s is not None else r)
            else:
                rows.append(FloatRow.normalized(s) if s is not None else r)
        nxt = Matrix(tuple(rows), current.label)
        if _same_directions(current, nxt):
            return IterationResult(current, trace, it - 1, True)
        current = nxt
        trace.append(_objective(current))
    return IterationResult(current, trace, max_iters, False)


def _same_directions(A: Matrix, B: Matrix) -> bool:
    if A.is_int and B.is_int:
        return all(canonical_row(a) == canonical_row(b) and _same_sign(a, b) for a, b in zip(A.rows, B.rows))
    return bool(np.array_equal(A.to_array(), B.to_array()))


def _same_sign(a: IntRow, b: IntRow) -> bool:
    return sum(x * y for x, y in zip(a.c, b.c)) > 0


# subset-norm oracle


@dataclass(frozen=True)
class SubsetNormResult:
    n: int
    max_norm_sq: int
    maximizer_count: int
    subsets_checked: int
    half_cubes_attain: bool
    maximizers_half_size: bool
    maximizers_antipode_free: bool

    @property
    def max_norm(self) -> float:
        return math.sqrt(self.max_norm_sq)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "max_norm_sq": self.max_norm_sq,
            "max_norm": self.max_norm,
            "maximizer_count": self.maximizer_count,
            "subsets_checked": self.subsets_checked,
            "half_cubes_attain": self.half_cubes_attain,
            "maximizers_half_size": self.maximizers_half_size,
            "maximizers_antipode_free": self.maximizers_antipode_free,
        }


def subset_norm_max(n: int) -> SubsetNormResult:
    """Brute-force maximum of ``||sum_{x in S} x||^2`` over all subsets S of the n-cube."""
    if n < 1 or n > 4:
        raise ValueError("subset-norm brute force needs 1 <= n <= 4")
    V = 1 << n
    X = all_vertices(n)
    masks = np.arange(1 << V, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(V, dtype=np.int64)) & 1
    S = bits @ X
    q = (S * S).sum(axis=1)
    best = int(q.max())
    winners = masks[q == best]
    # vertex v and its antipode v ^ (V-1) occupy bits v and V-1-v
    full = V - 1
    anti = np.array([v ^ full for v in range(V)])
    has_pair = np.zeros(len(winners), dtype=bool)
    wbits = bits[winners]
    for v in range(V):
        has_pair |= (wbits[:, v] == 1) & (wbits[:, anti[v]] == 1)
    sizes = wbits.sum(axis=1)
    winner_set = set(int(w) for w in winners)
    half_cubes = []
    for i in range(n):
        for sign in (1, 0):
            half_cubes.append(sum(1 << v for v in range(V) if ((v >> i) & 1) == sign))
    return SubsetNormResult(
        n=n,
        max_norm_sq=best,
        maximizer_count=len(winners),
        subsets_checked=1 << V,
        half_cubes_attain=all(h in winner_set for h in half_cubes),
        maximizers_half_size=bool(np.all(sizes == V // 2)),
        maximizers_antipode_free=not bool(has_pair.any()),
    )
