"""Experiments around the coupling and the limit theorems: the
Hilbert-Schmidt statistic with its decomposition, the q = 1 limit law, the
concentration of the coupled distance, the Gram-overlap CLT, and the extreme
eigenvalue concentration of tall Wishart matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import RngStream, ks_statistic, normal_cdf, symmetric_eigen
from .parallel import replicate_map
from .sampling import Dims, gram_schmidt_coupling

__all__ = [
    "FIGURE_GRID",
    "HsSample",
    "CltSample",
    "HsExperimentResult",
    "CltGridPoint",
    "EigenConcentrationResult",
    "hs_sample",
    "run_hs_experiment",
    "clt_w_statistic",
    "clt_w_statistic_p1",
    "clt_figure_grid",
    "eigen_concentration",
    "half_normal_cdf",
]

# (p, q) pairs of the standard-normal comparison grid for the overlap CLT
FIGURE_GRID: tuple[tuple[int, int], ...] = (
    (165, 30),
    (900, 30),
    (1600, 40),
    (355, 50),
    (2500, 50),
    (10000, 100),
)


@dataclass(frozen=True)
class HsSample:
    """One draw of the coupled Hilbert-Schmidt distance and its split.

    hs_norm^2 = term_ab + term_c + cross up to roundoff, where term_ab sums
    the products of the column shrink factors with the top-block column
    masses, term_c sums the top-block projection masses, and cross collects
    the mixed inner products.
    """

    hs_norm: float
    term_ab: float
    term_c: float
    cross: float


@dataclass(frozen=True)
class CltSample:
    """One draw of the normalized off-diagonal Gram overlap statistic."""

    w: float


def half_normal_cdf(x: float, scale: float = 1.0) -> float:
    """CDF of scale * |N(0,1)|."""
    if x <= 0.0:
        return 0.0
    return 2.0 * normal_cdf(x / scale) - 1.0


def _hs_terms(d: Dims, stream: RngStream) -> tuple[float, float, float, float]:
    n, p, q = d.n, d.p, d.q
    y = stream.standard_normal((n, q))
    gs = gram_schmidt_coupling(y, resample_stream=stream)
    root_n = math.sqrt(n)

    y_top = gs.y[:p, :]
    q_top = gs.q[:p, :]
    proj_top = y_top - gs.w[:p, :]

    shrink = root_n - gs.w_norms
    a = shrink * shrink
    b = np.einsum("ij,ij->j", q_top, q_top)
    c = np.einsum("ij,ij->j", proj_top, proj_top)
    eps = -2.0 * shrink * np.einsum("ij,ij->j", q_top, proj_top)

    # per-column Cauchy-Schwarz bound on the cross term, with roundoff slack
    bound = 2.0 * np.sqrt(a * b * c)
    if np.any(np.abs(eps) > bound * (1.0 + 1e-9) + 1e-12):
        worst = int(np.argmax(np.abs(eps) - bound))
        raise AssertionError(
            f"cross term exceeds its Cauchy-Schwarz bound at column {worst}: "
            f"|{eps[worst]:.6e}| > {bound[worst]:.6e}"
        )

    diff = root_n * q_top - y_top
    hs_sq = float(np.einsum("ij,ij->", diff, diff))
    return math.sqrt(hs_sq), float((a * b).sum()), float(c.sum()), float(eps.sum())


def hs_sample(d: Dims, stream: RngStream) -> HsSample:
    """Draw one coupled pair and return the Hilbert-Schmidt distance between
    the scaled orthogonal block and the Gaussian block, with its
    decomposition terms computed from the Gram-Schmidt intermediates."""
    hs, ab, c, cross = _hs_terms(d, stream)
    return HsSample(hs_norm=hs, term_ab=ab, term_c=c, cross=cross)


@dataclass(frozen=True)
class HsExperimentResult:
    """Replicated coupled-distance draws plus the derived summaries."""

    dims: Dims
    replicates: int
    master_seed: int
    hs_norms: np.ndarray
    term_ab: np.ndarray
    term_c: np.ndarray
    cross: np.ndarray
    mean: float
    mean_sq: float
    hs_sq_bound: float
    sigma: float
    ks_vs_half_normal: float | None


def run_hs_experiment(
    d: Dims,
    replicates: int,
    master_seed: int,
    threads: int | None = None,
) -> HsExperimentResult:
    """Replicate the coupled Hilbert-Schmidt draw.

    Reports the sample mean and mean square against the proven bound
    24 p q^2 / n, and for single-column blocks also the KS distance of the
    draws against the limiting half-normal with scale sqrt(p / (2n))."""
    values = replicate_map(
        lambda stream, _: np.array(_hs_terms(d, stream)),
        replicates,
        master_seed,
        threads=threads,
        width=4,
    )
    hs = values[:, 0]
    ks = None
    if d.q == 1:
        scale = math.sqrt(d.p / d.n / 2.0)
        ks = ks_statistic(hs, lambda x: half_normal_cdf(x, scale))
    return HsExperimentResult(
        dims=d,
        replicates=replicates,
        master_seed=master_seed,
        hs_norms=hs,
        term_ab=values[:, 1],
        term_c=values[:, 2],
        cross=values[:, 3],
        mean=float(np.mean(hs)),
        mean_sq=float(np.mean(hs * hs)),
        hs_sq_bound=24.0 * d.p * d.q * d.q / d.n,
        sigma=d.coupling_sigma,
        ks_vs_half_normal=ks,
    )


def clt_w_statistic(p: int, q: int, stream: RngStream) -> CltSample:
    """One draw of the centered, normalized off-diagonal Gram overlap
    statistic for a p x q standard Gaussian matrix.

    Computed from the q x q Gram matrix in O(pq^2 + q^2) time; the sum of
    squared off-diagonal overlaps is the squared Frobenius norm of the Gram
    matrix minus its squared diagonal."""
    if p < 2 or q < 2:
        raise ValueError(f"need p >= 2 and q >= 2, got p={p}, q={q}")
    x = stream.standard_normal((p, q))
    gram = x.T @ x
    fro_sq = float(np.einsum("ij,ij->", gram, gram))
    diag = np.diagonal(gram)
    off_sq = fro_sq - float(diag @ diag)
    w = (off_sq - q * (q - 1) * p) / (2.0 * p * q)
    return CltSample(w=w)


def clt_w_statistic_p1(q: int, stream: RngStream) -> float:
    """Single-row variant under the q^{3/2} scaling.

    With scalar columns the overlap sum collapses to a chi-square quadratic,
    so the statistic needs the heavier normalization; its limit law has
    variance 8 rather than 1."""
    if q < 2:
        raise ValueError(f"need q >= 2, got q={q}")
    g = stream.standard_normal(q)
    g_sq = g * g
    s2 = float(g_sq.sum())
    s4 = float((g_sq * g_sq).sum())
    return (s2 * s2 - s4 - q * (q - 1)) / q**1.5


@dataclass(frozen=True)
class CltGridPoint:
    p: int
    q: int
    replicates: int
    ks_normal: float
    w_samples: np.ndarray


def clt_figure_grid(
    master_seed: int,
    threads: int | None = None,
    replicates_small: int = 6000,
    replicates_large: int = 2000,
) -> list[CltGridPoint]:
    """Sample the overlap statistic on the comparison grid and score each
    point by its KS distance to the standard normal CDF.

    The largest grid point uses ``replicates_large`` draws, the cheap ones
    ``replicates_small``; both must be at least 2000 for the KS thresholds
    to mean anything."""
    if min(replicates_small, replicates_large) < 2000:
        raise ValueError("the comparison grid needs at least 2000 draws per point")
    points = []
    for offset, (p, q) in enumerate(FIGURE_GRID):
        n_rep = replicates_large if p * q >= 200_000 else replicates_small
        # distinct seed per grid point, derived deterministically
        seed = master_seed + offset
        samples = replicate_map(
            lambda stream, _, p=p, q=q: clt_w_statistic(p, q, stream).w,
            n_rep,
            seed,
            threads=threads,
        )
        ks = ks_statistic(samples, normal_cdf)
        points.append(CltGridPoint(p=p, q=q, replicates=n_rep, ks_normal=ks, w_samples=samples))
    return points


@dataclass(frozen=True)
class EigenConcentrationResult:
    p: int
    q: int
    replicates: int
    master_seed: int
    max_dev_samples: np.ndarray


def eigen_concentration(
    p: int,
    q: int,
    replicates: int,
    master_seed: int,
    threads: int | None = None,
) -> EigenConcentrationResult:
    """Samples of max_i |lambda_i / p - 1| over the Gram spectrum of a
    p x q standard Gaussian matrix (columns as the vectors, q <= p).

    The deviations collapse when q/p is small and stay order one in the
    square regime; the q x q eigenproblem is solved with the full Jacobi
    sweep."""
    if q > p:
        raise ValueError(f"need q <= p, got p={p}, q={q}")
    if p < 1 or q < 1:
        raise ValueError(f"need p >= 1 and q >= 1, got p={p}, q={q}")

    def one(stream: RngStream, _: int) -> float:
        x = stream.standard_normal((p, q))
        if q == 1:
            lam = float(x[:, 0] @ x[:, 0])
            return abs(lam / p - 1.0)
        gram = x.T @ x
        eigen = symmetric_eigen(gram)
        return float(np.max(np.abs(eigen.eigenvalues / p - 1.0)))

    samples = replicate_map(one, replicates, master_seed, threads=threads)
    return EigenConcentrationResult(
        p=p, q=q, replicates=replicates, master_seed=master_seed, max_dev_samples=samples
    )
