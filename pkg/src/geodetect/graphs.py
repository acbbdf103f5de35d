"""Graph representation and the null / full-geometric / planted samplers.

The planted model on n vertices: each vertex independently joins a hidden
community with probability k/n; community vertices receive i.i.d. uniform
latent vectors on S^{d-1}; an edge inside the community is present exactly
when the latent inner product reaches the cap threshold tau(p, d), and every
other edge is an independent Bernoulli(p).  Every edge marginally has
probability p, so the signal lives purely in edge dependencies.

Graphs are stored as a flat upper-triangular indicator field in canonical
(i < j) pair order, which keeps the counting kernels cache friendly and makes
serialization trivial.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .sphere import sample_uniform_sphere, solve_threshold

__all__ = [
    "ModelParams",
    "Graph",
    "PlantedSample",
    "Seed",
    "pair_index",
    "sample_null",
    "sample_full_geometric",
    "sample_planted",
    "sample_planted_fixed_community",
    "sample_planted_fixed_size",
]

# Above this many latent matrix entries (|S| * d) the samplers switch to the
# exact Gram-matrix route (Bartlett decomposition of the Wishart ensemble)
# instead of materializing latent vectors.  Distributionally identical.
LATENT_ELEMENT_LIMIT = 20_000_000


@dataclass(frozen=True)
class ModelParams:
    """Planted-model parameter tuple (n, p, d, k); k is the *expected* community size."""

    n: int
    p: float
    d: int
    k: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        if self.d < 3:
            raise ValueError(f"d must be >= 3, got {self.d}")
        if not 0.0 < self.k <= self.n:
            raise ValueError(f"k must lie in (0, n], got {self.k}")

    # 1e-9 guards absorb float noise like 1.1 * 50 = 55.000000000000007
    @property
    def k_minus(self) -> int:
        return math.floor(0.9 * self.k + 1e-9)

    @property
    def k_plus(self) -> int:
        return math.ceil(1.1 * self.k - 1e-9)


def pair_index(i: int, j: int, n: int) -> int:
    """Canonical flat index of pair (i, j), i < j, in row-major upper-triangle order."""
    if not 0 <= i < j < n:
        raise ValueError(f"need 0 <= i < j < n, got i={i}, j={j}, n={n}")
    return i * n - (i * (i + 1)) // 2 + (j - i - 1)


class Graph:
    """Immutable simple graph on n labeled vertices.

    Edges live in a flat boolean field indexed by pair_index; the full
    adjacency or centered adjacency matrix is materialized on demand.
    """

    __slots__ = ("n", "_edges")

    def __init__(self, n: int, edges: np.ndarray):
        n = int(n)
        m = n * (n - 1) // 2
        edges = np.asarray(edges, dtype=bool)
        if edges.shape != (m,):
            raise ValueError(f"edge field must have shape ({m},), got {edges.shape}")
        edges = edges.copy()
        edges.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_edges", edges)

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    @property
    def edges(self) -> np.ndarray:
        """Read-only flat edge indicator field."""
        return self._edges

    @property
    def edge_count(self) -> int:
        return int(self._edges.sum())

    def has_edge(self, i: int, j: int) -> bool:
        if i == j:
            return False
        if i > j:
            i, j = j, i
        return bool(self._edges[pair_index(i, j, self.n)])

    def adjacency_matrix(self, dtype=float) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=dtype)
        iu = np.triu_indices(self.n, k=1)
        a[iu] = self._edges
        a[(iu[1], iu[0])] = self._edges
        return a

    def __eq__(self, other):
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and np.array_equal(self._edges, other._edges)
        )

    def __hash__(self):
        return hash((self.n, self._edges.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.edge_count})"

    # -- serialization ------------------------------------------------------

    def to_edgelist_text(self) -> str:
        """Text format: first line n, second line m, then one '<i> <j>' per edge."""
        iu, ju = np.triu_indices(self.n, k=1)
        sel = self._edges
        buf = io.StringIO()
        buf.write(f"{self.n}\n{int(sel.sum())}\n")
        for i, j in zip(iu[sel], ju[sel]):
            buf.write(f"{i} {j}\n")
        return buf.getvalue()

    @classmethod
    def from_edgelist_text(cls, text: str) -> "Graph":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        n = int(lines[0])
        m = int(lines[1])
        if len(lines) != 2 + m:
            raise ValueError(f"expected {m} edge lines, found {len(lines) - 2}")
        edges = np.zeros(n * (n - 1) // 2, dtype=bool)
        for ln in lines[2:]:
            i, j = map(int, ln.split())
            edges[pair_index(i, j, n)] = True
        return cls(n, edges)

    def to_bitfield_bytes(self) -> bytes:
        """Binary format: 8-byte little-endian n, then the packed edge bits."""
        header = int(self.n).to_bytes(8, "little")
        return header + np.packbits(self._edges, bitorder="little").tobytes()

    @classmethod
    def from_bitfield_bytes(cls, blob: bytes) -> "Graph":
        n = int.from_bytes(blob[:8], "little")
        m = n * (n - 1) // 2
        bits = np.unpackbits(
            np.frombuffer(blob[8:], dtype=np.uint8), count=m, bitorder="little"
        )
        return cls(n, bits.astype(bool))


@dataclass(frozen=True)
class PlantedSample:
    """A planted draw: graph, hidden community mask, latents for community vertices.

    `latents` has one row per community vertex in ascending vertex order; it is
    None when the sampler used the Gram-matrix route for very large d.
    """

    graph: Graph
    community: np.ndarray
    latents: np.ndarray | None = field(repr=False, default=None)

    @property
    def members(self) -> np.ndarray:
        return np.flatnonzero(self.community)

    def latent_of(self, vertex: int) -> np.ndarray:
        if self.latents is None:
            raise ValueError("latents were not materialized for this sample")
        if not self.community[vertex]:
            raise KeyError(f"vertex {vertex} is not in the community")
        row = int(np.searchsorted(self.members, vertex))
        return self.latents[row]


@dataclass(frozen=True)
class Seed:
    """Master seed with a stable per-trial stream derivation rule.

    Identical (master, arm, trial) always yields a bit-identical sample within
    this implementation, no matter how trials are scheduled.
    """

    master: int

    def stream(self, trial: int, arm: int = 0) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence([int(self.master), int(arm), int(trial)])
        )


_tau_cache: dict[tuple[float, int], float] = {}


def _cached_tau(p: float, d: int) -> float:
    key = (float(p), int(d))
    if key not in _tau_cache:
        _tau_cache[key] = solve_threshold(p, d).tau if p < 1.0 else -1.0
    return _tau_cache[key]


def sample_null(n: int, p: float, rng: np.random.Generator) -> Graph:
    """Erdos-Renyi draw: each of the n(n-1)/2 edges present independently w.p. p."""
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    m = n * (n - 1) // 2
    if p <= 0.0:
        return Graph(n, np.zeros(m, dtype=bool))
    if p >= 1.0:
        return Graph(n, np.ones(m, dtype=bool))
    return Graph(n, rng.random(m) < p)


def _unit_gram(s: int, d: int, rng: np.random.Generator):
    """Gram matrix of s i.i.d. uniform unit vectors on S^{d-1}.

    Direct route materializes the latents.  For s*d beyond the memory limit
    (and d >= s), the Wishart Bartlett decomposition gives the same Gram law
    exactly: W = L L^T with L_ii^2 ~ chi^2_{d-i+1}, L_ij ~ N(0,1), and the
    normalized W_ij / sqrt(W_ii W_jj) equals <Z_i, Z_j>/(|Z_i||Z_j|) in law.
    """
    if s == 0:
        return np.zeros((0, 0)), np.zeros((0, d))
    if s * d <= LATENT_ELEMENT_LIMIT or d < s:
        u = sample_uniform_sphere(d, rng, size=s)
        return u @ u.T, u
    dof = d - np.arange(s)
    diag = np.sqrt(rng.chisquare(dof))
    low = np.tril(rng.standard_normal((s, s)), k=-1)
    low[np.diag_indices(s)] = diag
    w = low @ low.T
    norms = np.sqrt(np.diag(w))
    gram = w / np.outer(norms, norms)
    np.fill_diagonal(gram, 1.0)
    return gram, None


def sample_full_geometric(
    n: int, p: float, d: int, rng: np.random.Generator
) -> tuple[Graph, np.ndarray | None]:
    """Full geometric model: n latents, edge iff inner product >= tau(p, d).

    Returns (graph, latents); latents is None when the sampler used the
    Gram route for very large d.
    """
    n = int(n)
    tau = _cached_tau(p, d)
    gram, latents = _unit_gram(n, d, rng)
    iu = np.triu_indices(n, k=1)
    return Graph(n, gram[iu] >= tau), latents


def sample_planted_fixed_community(
    community, params: ModelParams, rng: np.random.Generator
) -> PlantedSample:
    """Planted draw conditioned on the community being exactly the given set."""
    n = params.n
    mask = np.zeros(n, dtype=bool)
    members = np.asarray(sorted(set(int(v) for v in np.asarray(community).ravel())), dtype=int)
    if members.size and (members[0] < 0 or members[-1] >= n):
        raise ValueError("community vertices must lie in [0, n)")
    mask[members] = True

    edges = rng.random(n * (n - 1) // 2) < params.p
    latents = None
    if members.size >= 1:
        tau = _cached_tau(params.p, params.d)
        gram, latents = _unit_gram(members.size, params.d, rng)
        if members.size >= 2:
            su, sv = np.triu_indices(members.size, k=1)
            gi, gj = members[su], members[sv]
            flat = gi * n - (gi * (gi + 1)) // 2 + (gj - gi - 1)
            edges[flat] = gram[su, sv] >= tau
    return PlantedSample(graph=Graph(n, edges), community=mask, latents=latents)


def sample_planted(params: ModelParams, rng: np.random.Generator) -> PlantedSample:
    """Planted model draw: Bernoulli(k/n) membership, then the fixed-community rule."""
    mask = rng.random(params.n) < params.k / params.n
    return sample_planted_fixed_community(np.flatnonzero(mask), params, rng)


def sample_planted_fixed_size(
    s: int, params: ModelParams, rng: np.random.Generator
) -> PlantedSample:
    """Fixed-size variant: community uniform over size-s subsets, then the fixed rule."""
    s = int(s)
    if not 0 <= s <= params.n:
        raise ValueError(f"community size must lie in [0, n], got {s}")
    members = rng.permutation(params.n)[:s]
    return sample_planted_fixed_community(members, params, rng)
