"""Named invariant suites used by ``badsci verify``.

Each suite yields ``Check`` records; a suite fails if any check fails.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .constructions import (
    hadamard_power,
    known_matrix,
    random_pm_matrix,
    random_unit_matrix,
    tree_beta_formula,
    tree_matrix,
)
from .evaluate import beta_exact, beta_float, beta_naive, khintchine_bound, lp_beta
from .matrix import Matrix
from .search import candidate_rows, check_structure, exhaustive_search, structure_iterate, subset_norm_max
from .surd import SurdValue

__all__ = ["Check", "SUITES", "run_suite"]


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "ok": self.ok, "detail": self.detail}


def suite_golden(max_n: int) -> Iterator[Check]:
    sqrt = SurdValue.sqrt
    for name, expected in [
        ("opt2", sqrt(2)),
        ("opt4", sqrt(3)),
        ("best5", SurdValue({1: "1/2", 3: "3/4"})),
    ]:
        got = beta_exact(known_matrix(name)).exact
        yield Check(f"beta({name}) = {expected}", got == expected, f"got {got}")
    target = (sqrt(2) + sqrt(3)) / 2
    got = beta_float(known_matrix("opt3")).approx
    yield Check("beta(opt3, float form) = (sqrt2+sqrt3)/2", abs(got - float(target)) <= 1e-9, f"got {got!r}")


def suite_tree(max_n: int) -> Iterator[Check]:
    for n in range(2, max_n + 1):
        formula = tree_beta_formula(n)
        got = beta_exact(tree_matrix(n)).exact
        yield Check(f"tree n={n}", got == formula, f"formula {formula}, enumeration {got}")


def suite_hadamard(max_n: int) -> Iterator[Check]:
    k = 1
    while (1 << k) <= max(2, max_n):
        got = beta_exact(hadamard_power(k)).exact
        yield Check(f"hadamard-power k={k}", got == SurdValue.sqrt(k + 1), f"got {got}")
        k += 1


def suite_subset_norm(max_n: int) -> Iterator[Check]:
    for n in range(2, min(max_n, 4) + 1):
        r = subset_norm_max(n)
        ok = (
            r.max_norm_sq == 4 ** (n - 1)
            and r.half_cubes_attain
            and r.maximizers_half_size
            and r.maximizers_antipode_free
        )
        yield Check(
            f"subset-norm n={n}",
            ok,
            f"max norm {r.max_norm:g}, {r.maximizer_count} maximizers",
        )


def suite_engines(max_n: int, trials: int = 20, seed: int = 0) -> Iterator[Check]:
    rng = np.random.default_rng(seed)
    for t in range(trials):
        n = int(rng.integers(2, min(max_n, 12) + 1))
        A = random_unit_matrix(int(rng.integers(1, n + 1)), n, seed=int(rng.integers(2**31)))
        g, v = beta_float(A).approx, beta_naive(A).approx
        yield Check(f"gray == naive (float) #{t}", g == v, f"{g!r} vs {v!r}")
        B = random_pm_matrix(n, seed=int(rng.integers(2**31)))
        e, f = beta_exact(B), beta_float(B)
        yield Check(f"exact ~ float #{t}", abs(e.approx - f.approx) <= 1e-9, f"{e.approx!r} vs {f.approx!r}")


def suite_invariance(max_n: int, trials: int = 20, seed: int = 1) -> Iterator[Check]:
    rng = np.random.default_rng(seed)
    for t in range(trials):
        n = int(rng.integers(2, min(max_n, 8) + 1))
        A = random_pm_matrix(n, seed=int(rng.integers(2**31)))
        base = beta_exact(A).exact
        B = A.transform(
            row_perm=rng.permutation(n),
            row_signs=rng.choice([-1, 1], size=n),
            col_perm=rng.permutation(n),
            col_signs=rng.choice([-1, 1], size=n),
        )
        yield Check(f"symmetry #{t}", beta_exact(B).exact == base)


def suite_lp(max_n: int) -> Iterator[Check]:
    for n in (2, 4, 8):
        if n > max_n:
            break
        I = Matrix.from_int(np.eye(n, dtype=int).tolist())
        yield Check(f"l1 identity n={n}", abs(lp_beta(I, 1) - n) <= 1e-12)
        H = hadamard_sylvester(n)
        yield Check(f"l2 orthogonal n={n}", abs(lp_beta(H, 2) - math.sqrt(n)) <= 1e-12)
    rng = np.random.default_rng(2)
    for t in range(10):
        n = int(rng.integers(2, min(max_n, 8) + 1))
        A = random_unit_matrix(n, n, seed=int(rng.integers(2**31)))
        for p in (3, 4, 8):
            yield Check(f"khintchine #{t} p={p}", lp_beta(A, p) <= khintchine_bound(n, p))


def suite_structure(max_n: int) -> Iterator[Check]:
    for seed in range(10):
        A = random_unit_matrix(4, 4, seed=seed)
        trace = [float(v) for v in structure_iterate(A, max_iters=50).trace]
        ok = all(b >= a - 1e-12 for a, b in zip(trace, trace[1:]))
        yield Check(f"structure_iterate monotone seed={seed}", ok, f"trace {trace}")
    for m, n in [(2, 2), (3, 3)]:
        state = exhaustive_search(m, n)
        cands = candidate_rows(n)
        for combo in state.best_tuples:
            rows = check_structure(cands.matrix(combo))
            yield Check(f"optimum {m}x{n} {combo} has structure", all(r.passes for r in rows))


def hadamard_sylvester(n: int) -> Matrix:
    H = np.array([[1]])
    while H.shape[0] < n:
        H = np.block([[H, H], [H, -H]])
    return Matrix.from_int(H.tolist(), label=f"sylvester({n})")


SUITES: dict[str, Callable[[int], Iterator[Check]]] = {
    "golden": suite_golden,
    "tree": suite_tree,
    "hadamard": suite_hadamard,
    "subset-norm": suite_subset_norm,
    "engines": suite_engines,
    "invariance": suite_invariance,
    "lp": suite_lp,
    "structure": suite_structure,
}


def run_suite(name: str, max_n: int) -> list[Check]:
    if name == "all":
        return list(itertools.chain.from_iterable(fn(max_n) for fn in SUITES.values()))
    try:
        fn = SUITES[name]
    except KeyError:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all") from None
    return list(fn(max_n))
