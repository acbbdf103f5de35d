"""Signed subgraph statistics: triangle and cycle counts, wedge sums, scans.

A signed count replaces each edge indicator G_ij by the centered value
G_ij - p, so every statistic here has mean zero under the Erdos-Renyi null.
Two independent kernels are kept for the signed triangle count (an explicit
pair loop and the trace of the cubed centered adjacency); they must agree to
float-summation accuracy and are cross-checked in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, islice, permutations

import numpy as np

from .graphs import Graph

__all__ = [
    "CenteredAdjacency",
    "ScanConfig",
    "centered_adjacency",
    "signed_triangle_count",
    "signed_triangle_count_direct",
    "signed_triangle_count_trace",
    "signed_cycle_count",
    "cycle_vertex_orders",
    "wedge_sums",
    "wedge_sums_symmetric",
    "subset_signed_triangles",
    "scan_statistic",
    "constrained_scan_statistic",
    "signed_embedding_product",
]


_ENUM_MAX_N = 64
_ENUM_MAX_ELL = 7


@dataclass(frozen=True)
class CenteredAdjacency:
    """Symmetric matrix with entries G_ij - p off the diagonal and 0 on it."""

    n: int
    entries: np.ndarray


def centered_adjacency(graph: Graph, p: float) -> CenteredAdjacency:
    a = graph.adjacency_matrix(dtype=float)
    iu = np.triu_indices(graph.n, k=1)
    a[iu] -= p
    a[(iu[1], iu[0])] -= p
    return CenteredAdjacency(n=graph.n, entries=a)


def _signed_matrix(graph: Graph, p: float) -> np.ndarray:
    return centered_adjacency(graph, p).entries


def signed_triangle_count_direct(graph: Graph, p: float) -> float:
    """Sum over i < j < l of (G_ij-p)(G_jl-p)(G_il-p), explicit pair loop."""
    a = _signed_matrix(graph, p)
    n = graph.n
    total = 0.0
    for i in range(n - 2):
        row_i = a[i]
        for j in range(i + 1, n - 1):
            total += row_i[j] * float(row_i[j + 1 :] @ a[j, j + 1 :])
    return total


def signed_triangle_count_trace(graph: Graph, p: float) -> float:
    """Trace kernel: Tr(Abar^3) counts each triangle 6 times."""
    a = _signed_matrix(graph, p)
    return float(((a @ a) * a).sum()) / 6.0


def signed_triangle_count(graph: Graph, p: float, kernel: str = "auto") -> float:
    """Global signed triangle count; kernel is 'auto', 'direct', or 'trace'.

    The matrix trace kernel dominates the explicit pair loop at every size
    here, so 'auto' always takes it; the direct loop is kept as an
    independently coded cross-check.
    """
    if kernel == "direct":
        return signed_triangle_count_direct(graph, p)
    if kernel in ("trace", "auto"):
        return signed_triangle_count_trace(graph, p)
    raise ValueError(f"unknown kernel {kernel!r}")


def cycle_vertex_orders(ell: int) -> list[tuple[int, ...]]:
    """Distinct cyclic orders of ell labeled vertices, each unordered cycle once.

    Fixing position 0 and requiring the second entry to be smaller than the
    last kills the 2*ell symmetries, leaving (ell-1)!/2 orders.
    """
    orders = []
    for perm in permutations(range(1, ell)):
        if perm[0] < perm[-1]:
            orders.append((0,) + perm)
    return orders


@lru_cache(maxsize=32)
def _cycle_pair_slots(ell: int) -> np.ndarray:
    """For each cyclic order, the ell consecutive position pairs (as sorted slots)."""
    orders = cycle_vertex_orders(ell)
    slots = np.empty((len(orders), ell, 2), dtype=np.int64)
    for r, order in enumerate(orders):
        for e in range(ell):
            u, v = order[e], order[(e + 1) % ell]
            slots[r, e] = (min(u, v), max(u, v))
    return slots


_CYCLE_CACHE_ELEMENTS = 4_000_000


@lru_cache(maxsize=8)
def _cycle_gather_arrays(n: int, ell: int):
    """Vertex-pair gather indices for every cycle, cached when small enough."""
    slots = _cycle_pair_slots(ell)
    n_cycles = math.comb(n, ell) * slots.shape[0]
    if n_cycles * ell > _CYCLE_CACHE_ELEMENTS:
        return None
    subsets = np.fromiter(
        (v for combo in combinations(range(n), ell) for v in combo), dtype=np.int64
    ).reshape(-1, ell)
    verts_u = subsets[:, slots[:, :, 0]].reshape(-1, ell)
    verts_v = subsets[:, slots[:, :, 1]].reshape(-1, ell)
    return verts_u, verts_v


def signed_cycle_count(graph: Graph, p: float, ell: int) -> float:
    """Sum of the signed edge product over all distinct length-ell cycles.

    Enumerates all C(n, ell) * (ell-1)!/2 cycles; refuses n > 64 or ell > 7
    (ell = 3 falls back to the triangle kernels for any n).
    """
    ell = int(ell)
    if ell == 3:
        return signed_triangle_count(graph, p)
    if not 3 <= ell <= _ENUM_MAX_ELL:
        raise ValueError(f"cycle length must lie in [3, {_ENUM_MAX_ELL}], got {ell}")
    n = graph.n
    if n > _ENUM_MAX_N:
        raise ValueError(
            f"cycle enumeration is limited to n <= {_ENUM_MAX_N}, got n = {n}"
        )
    if n < ell:
        return 0.0
    a = _signed_matrix(graph, p)
    cached = _cycle_gather_arrays(n, ell)
    if cached is not None:
        verts_u, verts_v = cached
        return float(a[verts_u, verts_v].prod(axis=1).sum())
    slots = _cycle_pair_slots(ell)
    total = 0.0
    chunk = max(1, 2_000_000 // (slots.shape[0] * ell))
    combos = combinations(range(n), ell)
    while True:
        block = np.fromiter(
            (v for combo in islice(combos, chunk) for v in combo), dtype=np.int64
        )
        if block.size == 0:
            break
        sub = block.reshape(-1, ell)
        vals = a[sub[:, slots[:, :, 0]], sub[:, slots[:, :, 1]]]
        total += float(vals.prod(axis=2).sum())
    return total


def _wedge_matrix(sub_signed: np.ndarray) -> np.ndarray:
    """W[a, b] = sum over c < a of M[c, a] * M[c, b] for positions a < b."""
    size = sub_signed.shape[0]
    w = np.zeros((size, size))
    for a in range(1, size - 1):
        w[a, a + 1 :] = sub_signed[:a, a] @ sub_signed[:a, a + 1 :]
    return w


def _subset_signed(graph: Graph, p: float, subset) -> tuple[np.ndarray, np.ndarray]:
    verts = np.asarray(sorted(int(v) for v in subset), dtype=int)
    if verts.size and (verts[0] < 0 or verts[-1] >= graph.n):
        raise ValueError("subset vertices must lie in [0, n)")
    if np.unique(verts).size != verts.size:
        raise ValueError("subset contains duplicate vertices")
    a = _signed_matrix(graph, p)
    return verts, a[np.ix_(verts, verts)]


def wedge_sums(graph: Graph, p: float, subset) -> dict[tuple[int, int], float]:
    """Signed wedge sums W_ij = sum over l in A, l < i of (G_li-p)(G_lj-p).

    The inner range l < i is intentionally asymmetric (an ordering-dependent
    quantity); see wedge_sums_symmetric for the order-free diagnostic variant.
    Keys are vertex pairs (i, j) with i < j, both in the subset.
    """
    verts, sub = _subset_signed(graph, p, subset)
    w = _wedge_matrix(sub)
    return {
        (int(verts[a]), int(verts[b])): float(w[a, b])
        for a in range(len(verts))
        for b in range(a + 1, len(verts))
    }


def wedge_sums_symmetric(graph: Graph, p: float, subset) -> dict[tuple[int, int], float]:
    """Symmetric wedge variant: the inner sum runs over all l in A, l not in {i, j}."""
    verts, sub = _subset_signed(graph, p, subset)
    out = {}
    size = len(verts)
    for a in range(size):
        for b in range(a + 1, size):
            col = sub[:, a] * sub[:, b]
            out[(int(verts[a]), int(verts[b]))] = float(col.sum() - col[a] - col[b])
    return out


def subset_signed_triangles(graph: Graph, p: float, subset) -> float:
    """Signed triangle count of the induced subgraph on the given vertex set."""
    verts, sub = _subset_signed(graph, p, subset)
    if verts.size < 3:
        return 0.0
    return float(((sub @ sub) * sub).sum()) / 6.0


def _feasible(sub_signed: np.ndarray, sigma_sq: float, bound: float) -> bool:
    w = _wedge_matrix(sub_signed)
    iu = np.triu_indices(w.shape[0], k=1)
    vals = w[iu]
    return float(vals @ vals) <= sigma_sq and float(np.abs(vals).max(initial=0.0)) <= bound


@dataclass(frozen=True)
class ScanConfig:
    """Scan test configuration.

    mode is one of 'exhaustive', 'planted-oracle', 'local-search'; sigma_sq
    and B activate the wedge-sum constraints of the constrained scan.
    """

    k_minus: int
    mode: str = "exhaustive"
    restarts: int = 8
    sigma_sq: float | None = None
    B: float | None = None

    _MODES = ("exhaustive", "planted-oracle", "local-search")
    _EXHAUSTIVE_LIMIT = 10_000_000

    def __post_init__(self):
        if self.k_minus < 0:
            raise ValueError(f"k_minus must be >= 0, got {self.k_minus}")
        if self.mode not in self._MODES:
            raise ValueError(f"mode must be one of {self._MODES}, got {self.mode!r}")

    def check_exhaustive(self, n: int):
        if math.comb(n, self.k_minus) > self._EXHAUSTIVE_LIMIT:
            raise ValueError(
                f"exhaustive scan over C({n}, {self.k_minus}) subsets exceeds "
                f"the {self._EXHAUSTIVE_LIMIT} limit"
            )


def _triangle_sum(sub: np.ndarray) -> float:
    return float(((sub @ sub) * sub).sum()) / 6.0


def _local_search(
    a: np.ndarray,
    n: int,
    k_minus: int,
    restarts: int,
    rng: np.random.Generator,
    constraint=None,
):
    best_val, best_set = -math.inf, None
    for _ in range(max(1, restarts)):
        current = np.sort(rng.permutation(n)[:k_minus])
        val = _triangle_sum(a[np.ix_(current, current)])
        improved = True
        while improved:
            improved = False
            inside = a[np.ix_(current, current)]
            # triangle contribution of each member
            contrib = np.einsum("ij,jk,ki->i", inside, inside, inside) / 2.0
            order = np.argsort(contrib)
            outside = np.setdiff1d(np.arange(n), current, assume_unique=False)
            for pos in order:  # remove worst contributor first
                for cand in outside:
                    trial = current.copy()
                    trial[pos] = cand
                    trial.sort()
                    sub = a[np.ix_(trial, trial)]
                    tval = _triangle_sum(sub)
                    if tval > val and (constraint is None or constraint(sub)):
                        current, val = trial, tval
                        improved = True
                        break
                if improved:
                    break
        if constraint is not None:
            sub = a[np.ix_(current, current)]
            if not constraint(sub):
                continue
        if val > best_val:
            best_val, best_set = val, current
    return best_val, best_set


def _scan_impl(
    graph: Graph,
    p: float,
    cfg: ScanConfig,
    oracle_subset,
    rng,
    constraint,
):
    n = graph.n
    a = _signed_matrix(graph, p)
    if cfg.mode == "planted-oracle":
        if oracle_subset is None:
            raise ValueError("planted-oracle mode requires an oracle subset")
        verts = np.asarray(sorted(int(v) for v in oracle_subset), dtype=int)
        if verts.size != cfg.k_minus:
            raise ValueError(
                f"oracle subset has size {verts.size}, expected k_minus = {cfg.k_minus}"
            )
        sub = a[np.ix_(verts, verts)]
        if constraint is not None and not constraint(sub):
            return None, None
        return _triangle_sum(sub), verts
    if cfg.mode == "local-search":
        if rng is None:
            rng = np.random.default_rng(0)
        val, subset = _local_search(a, n, cfg.k_minus, cfg.restarts, rng, constraint)
        if subset is None:
            return None, None
        return val, subset
    # exhaustive
    cfg.check_exhaustive(n)
    best_val, best_set = -math.inf, None
    for combo in combinations(range(n), cfg.k_minus):
        idx = np.asarray(combo, dtype=int)
        sub = a[np.ix_(idx, idx)]
        if constraint is not None and not constraint(sub):
            continue
        val = _triangle_sum(sub)
        if val > best_val:
            best_val, best_set = val, idx
    if best_set is None:
        return None, None
    return best_val, best_set


def scan_statistic(
    graph: Graph,
    p: float,
    cfg: ScanConfig,
    oracle_subset=None,
    rng: np.random.Generator | None = None,
):
    """Maximum signed triangle count over size-k_minus subsets.

    exhaustive: exact maximum.  planted-oracle: the value on the supplied
    subset (the type-II surrogate).  local-search: best of greedy swap
    hill-climbing restarts, always <= the exact maximum.
    Returns (value, subset).
    """
    return _scan_impl(graph, p, cfg, oracle_subset, rng, constraint=None)


def constrained_scan_statistic(
    graph: Graph,
    p: float,
    cfg: ScanConfig,
    oracle_subset=None,
    rng: np.random.Generator | None = None,
):
    """Scan restricted to subsets with controlled signed wedge sums.

    A subset is feasible when sum of W_ij^2 <= sigma_sq and max |W_ij| <= B.
    Returns (None, None) when the feasible set is empty (or, in oracle mode,
    when the supplied subset is infeasible); the decision rule then reads
    'null'.
    """
    if cfg.sigma_sq is None or cfg.B is None:
        raise ValueError("constrained scan requires sigma_sq and B in the config")
    constraint = lambda sub: _feasible(sub, cfg.sigma_sq, cfg.B)  # noqa: E731
    return _scan_impl(graph, p, cfg, oracle_subset, rng, constraint=constraint)


def signed_embedding_product(graph: Graph, p: float, edges) -> float:
    """Product of (G_ij - p) over an explicit list of distinct vertex pairs."""
    seen = set()
    total = 1.0
    for i, j in edges:
        i, j = int(i), int(j)
        if i == j:
            raise ValueError(f"self-loop ({i}, {j}) is not a valid edge")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ValueError(f"duplicate edge {key}")
        seen.add(key)
        total *= (1.0 if graph.has_edge(*key) else 0.0) - p
    return total
