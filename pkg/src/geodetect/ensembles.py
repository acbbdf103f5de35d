"""Random-matrix constructions behind the planted model.

The null graph is the entrywise threshold of a shifted GOE matrix
d I + sqrt(d) GOE, while community edges arise from thresholding the
normalized Gram matrix of Gaussian vectors (a Wishart matrix).  Gluing the
two ensembles on a vertex subset and applying the matching threshold maps
reproduces the planted law exactly, which these constructions let the tests
verify draw by draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .graphs import Graph, ModelParams
from .sphere import sample_uniform_sphere, solve_threshold

__all__ = [
    "EnsembleDraw",
    "sample_goe_shifted",
    "sample_wishart",
    "sample_spherical_wishart",
    "threshold_map_alpha",
    "threshold_map_beta",
    "composite_planted_graph",
    "spectral_deviation",
    "lkj_log_kernel",
]

ENSEMBLE_KINDS = ("goe-shifted", "wishart", "spherical-wishart")


@dataclass(frozen=True)
class EnsembleDraw:
    """One symmetric matrix draw, with latent Gaussians retained for Wishart."""

    kind: str
    matrix: np.ndarray
    d: int
    latents: np.ndarray | None = field(repr=False, default=None)

    @property
    def order(self) -> int:
        return self.matrix.shape[0]


def sample_goe_shifted(n: int, d: float, rng: np.random.Generator) -> EnsembleDraw:
    """d I_n + sqrt(d) GOE(n): off-diagonals N(0, d), diagonals d + N(0, 2d)."""
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if d <= 0:
        raise ValueError(f"d must be > 0, got {d}")
    z = rng.standard_normal((n, n))
    goe = (z + z.T) / math.sqrt(2.0)  # N(0,1) off-diagonal, N(0,2) diagonal
    m = math.sqrt(d) * goe
    m[np.diag_indices(n)] += d
    return EnsembleDraw(kind="goe-shifted", matrix=m, d=d)


def sample_wishart(k: int, d: int, rng: np.random.Generator) -> EnsembleDraw:
    """Gram matrix of k i.i.d. standard Gaussian d-vectors, latents retained."""
    k, d = int(k), int(d)
    if k < 1 or d < 1:
        raise ValueError(f"k and d must be >= 1, got k={k}, d={d}")
    z = rng.standard_normal((k, d))
    return EnsembleDraw(kind="wishart", matrix=z @ z.T, d=d, latents=z)


def sample_spherical_wishart(k: int, d: int, rng: np.random.Generator) -> EnsembleDraw:
    """Gram matrix of k i.i.d. uniform unit vectors; unit diagonal exactly."""
    k, d = int(k), int(d)
    if k < 1 or d < 1:
        raise ValueError(f"k and d must be >= 1, got k={k}, d={d}")
    u = sample_uniform_sphere(d, rng, size=k)
    gram = u @ u.T
    np.fill_diagonal(gram, 1.0)
    return EnsembleDraw(kind="spherical-wishart", matrix=gram, d=d, latents=u)


def _as_matrix(m) -> np.ndarray:
    if isinstance(m, EnsembleDraw):
        return m.matrix
    return np.asarray(m, dtype=float)


def threshold_map_alpha(m, p: float, d: float) -> Graph:
    """Entrywise threshold X_ij >= sqrt(d) * quantile(1 - p) of the standard normal.

    Applied to a shifted GOE draw this produces exactly the Erdos-Renyi law.
    """
    x = _as_matrix(m)
    n = x.shape[0]
    cut = math.sqrt(d) * float(ndtri(1.0 - p))
    iu = np.triu_indices(n, k=1)
    return Graph(n, x[iu] >= cut)


def threshold_map_beta(w, tau: float) -> Graph:
    """Normalized threshold X_ij / sqrt(X_ii X_jj) > tau; needs a positive diagonal."""
    x = _as_matrix(w)
    n = x.shape[0]
    diag = np.diag(x)
    if np.any(diag <= 0):
        bad = int(np.argmin(diag))
        raise ValueError(
            f"diagonal entry {bad} is {diag[bad]:.6g}; the normalized threshold "
            "map needs a strictly positive diagonal"
        )
    scale = np.sqrt(diag)
    iu = np.triu_indices(n, k=1)
    ratio = x[iu] / (scale[iu[0]] * scale[iu[1]])
    return Graph(n, ratio > tau)


def composite_planted_graph(
    community, params: ModelParams, rng: np.random.Generator
) -> Graph:
    """Planted draw through the matrix route.

    A Wishart block on S x S glued into a shifted GOE matrix, with the
    normalized threshold applied inside S and the Gaussian threshold outside,
    has exactly the law of the planted model with community S.
    """
    n = params.n
    members = np.asarray(sorted(set(int(v) for v in np.asarray(community).ravel())), dtype=int)
    if members.size and (members[0] < 0 or members[-1] >= n):
        raise ValueError("community vertices must lie in [0, n)")
    goe = sample_goe_shifted(n, params.d, rng)
    edges_graph = threshold_map_alpha(goe, params.p, params.d)
    edges = np.array(edges_graph.edges)  # writable copy
    if members.size >= 2:
        tau = solve_threshold(params.p, params.d).tau
        wish = sample_wishart(members.size, params.d, rng)
        inner = threshold_map_beta(wish, tau)
        su, sv = np.triu_indices(members.size, k=1)
        gi, gj = members[su], members[sv]
        flat = gi * n - (gi * (gi + 1)) // 2 + (gj - gi - 1)
        edges[flat] = inner.edges
    return Graph(n, edges)


def spectral_deviation(draw) -> float:
    """Operator norm of (Gram - identity) via the symmetric eigensolver."""
    gram = _as_matrix(draw)
    k = gram.shape[0]
    if k == 1:
        return 0.0
    eig = np.linalg.eigvalsh(gram - np.eye(k))
    return float(np.max(np.abs(eig)))


def lkj_log_kernel(y, k: int, d: int) -> float:
    """Unnormalized log-density of the spherical-Wishart off-diagonal vector.

    For the strictly-upper-triangular entries y (length k(k-1)/2), the kernel
    is ((d - k - 1)/2) log det(I_k + ybar) where ybar is the symmetric matrix
    with zero diagonal carrying y.  The normalization constant is out of
    scope.  Rejects inputs whose I + ybar is not positive definite.
    """
    k, d = int(k), int(d)
    y = np.asarray(y, dtype=float).ravel()
    expected = k * (k - 1) // 2
    if y.size != expected:
        raise ValueError(f"expected {expected} strictly-upper entries, got {y.size}")
    ybar = np.zeros((k, k))
    iu = np.triu_indices(k, k=1)
    ybar[iu] = y
    ybar[(iu[1], iu[0])] = y
    eig = np.linalg.eigvalsh(np.eye(k) + ybar)
    if eig[0] <= 0.0:
        raise ValueError(
            f"I + ybar is not positive definite (smallest eigenvalue {eig[0]:.6g})"
        )
    return float((d - k - 1) / 2.0 * np.log(eig).sum())
