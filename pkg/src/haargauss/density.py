"""Log-space evaluation of the density of the scaled orthogonal corner and
of its likelihood ratio against the i.i.d. Gaussian density.

The ratio factors as a deterministic normalizer times an eigenvalue-dependent
term.  Points whose Gram spectrum leaves the support contribute a density of
zero; that case is carried as a -inf log value, not an error, because the
distance estimators integrate over Gaussian samples that can legally land
there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .numerics import cholesky_logdet, log_gamma
from .sampling import Dims

__all__ = [
    "NEG_INFINITY",
    "KnMode",
    "KnParts",
    "PrimedLogParts",
    "UnsupportedRegimeError",
    "log_wishart_constant",
    "log_kn_exact",
    "log_kn_asymptotic",
    "log_ln",
    "log_likelihood_ratio",
    "log_kn_prime_and_ln_prime",
]

NEG_INFINITY = float("-inf")


class UnsupportedRegimeError(ValueError):
    """The density formula needs p + q <= n (after swapping p and q)."""


class KnMode(Enum):
    EXACT = "exact"
    ASYMPTOTIC = "asymptotic"


@dataclass(frozen=True)
class KnParts:
    """Log normalizer together with the spectral exponent c_n."""

    log_kn: float
    c_n: float
    mode: KnMode


@dataclass(frozen=True)
class PrimedLogParts:
    """Rebalanced split of the log ratio; the sum equals log_kn + log_ln."""

    log_kn_prime: float
    log_ln_prime: float


def _canonical_pq(d: Dims) -> tuple[int, int]:
    """Orient the block so the Gram matrix is the smaller of the two; the
    density is symmetric under transposing the corner."""
    return (d.p, d.q) if d.q <= d.p else (d.q, d.p)


def log_wishart_constant(s: float, t: int) -> float:
    """ln of the Wishart normalizing constant w(s, t).

    1/w(s, t) = pi^{t(t-1)/4} * 2^{st/2} * prod_{j=1}^{t} Gamma((s-j+1)/2),
    defined for integer t >= 1 and real s > t - 1.
    """
    if int(t) != t or t < 1:
        raise ValueError(f"t must be a positive integer, got {t}")
    t = int(t)
    if not s > t - 1:
        raise ValueError(f"require s > t - 1, got s={s}, t={t}")
    log_inv = (t * (t - 1) / 4.0) * math.log(math.pi) + (s * t / 2.0) * math.log(2.0)
    for j in range(1, t + 1):
        log_inv += log_gamma((s - j + 1) / 2.0)
    return -log_inv


def _c_n(n: int, p: int, q: int) -> float:
    # integer arithmetic first; n, p, q can be large enough that naive float
    # subtraction of the pieces would round
    return (n - p - q - 1) / 2.0


def _log_kn_exact_raw(n: int, p: int, q: int) -> float:
    """Sum form of the exact log normalizer; q = 0 gives the empty product."""
    if q == 0:
        return 0.0
    total = (p * q / 2.0) * (math.log(2.0) - math.log(n))
    for j in range(q):
        total += log_gamma((n - j) / 2.0) - log_gamma((n - p - j) / 2.0)
    return total


def _log_kn_asymptotic_raw(n: int, p: int, q: int) -> float:
    """Four-term normalizer expansion; q = 0 gives 0 by convention."""
    if q == 0:
        return 0.0
    ratio = p / n
    return (
        -p * q / 2.0
        + (q * (q + 1) / 4.0) * math.log1p(p / (n - p))
        - p * q**3 / (12.0 * n * n)
        - _c_n(n, p, q) * q * math.log1p(-ratio)
    )


def log_kn_exact(d: Dims) -> KnParts:
    """Exact log normalizer of the likelihood ratio, via log-gamma sums."""
    p, q = _canonical_pq(d)
    n = d.n
    if p + q > n:
        raise UnsupportedRegimeError(
            f"density requires p + q <= n, got p={p}, q={q}, n={n}"
        )
    return KnParts(log_kn=_log_kn_exact_raw(n, p, q), c_n=_c_n(n, p, q), mode=KnMode.EXACT)


def log_kn_asymptotic(d: Dims) -> KnParts:
    """Stirling-regime expansion of the log normalizer.

    Valid when the wide side p grows with n while p/n stays away from 1; the
    dropped remainder vanishes along sequences with pq = O(n).
    """
    p, q = _canonical_pq(d)
    n = d.n
    if p >= n:
        raise ValueError(f"asymptotic normalizer needs p < n, got p={p}, n={n}")
    return KnParts(
        log_kn=_log_kn_asymptotic_raw(n, p, q), c_n=_c_n(n, p, q), mode=KnMode.ASYMPTOTIC
    )


def _kn_parts(d: Dims, mode: KnMode) -> KnParts:
    if mode is KnMode.EXACT:
        return log_kn_exact(d)
    if mode is KnMode.ASYMPTOTIC:
        return log_kn_asymptotic(d)
    raise ValueError(f"unknown mode {mode!r}")


def _gram(point: np.ndarray) -> np.ndarray:
    """Gram matrix on the smaller side of the block."""
    p, q = point.shape
    return point.T @ point if q <= p else point @ point.T


def log_ln(z_block: np.ndarray, d: Dims) -> float:
    """ln of the eigenvalue factor at an evaluation point z (a p x q block
    on the Gaussian scale).

    Equals c_n * ln det(I - z'z/n) + tr(z'z)/2 when all Gram eigenvalues of
    z'z/n lie in (0, 1), and -inf otherwise; the Cholesky probe detects the
    out-of-support case as a non-PD matrix.
    """
    z = np.asarray(z_block, dtype=float)
    if z.shape != (d.p, d.q):
        raise ValueError(f"expected a {d.p} x {d.q} block, got shape {z.shape}")
    gram = _gram(z)
    trace = float(np.einsum("ij,ij->", z, z))
    shifted = np.eye(gram.shape[0]) - gram / d.n
    logdet = cholesky_logdet(shifted)
    if logdet is None:
        return NEG_INFINITY
    return _c_n(d.n, d.p, d.q) * logdet + 0.5 * trace


def log_likelihood_ratio(point: np.ndarray, d: Dims, mode: KnMode = KnMode.EXACT) -> float:
    """ln [f(point) / g(point)] where f is the density of the scaled corner
    and g the i.i.d. Gaussian density; -inf outside the support of f."""
    parts = _kn_parts(d, mode)
    return parts.log_kn + log_ln(point, d)


def log_kn_prime_and_ln_prime(
    point: np.ndarray, d: Dims, mode: KnMode = KnMode.EXACT
) -> PrimedLogParts:
    """Rebalanced factorization moving the (1 - p/n)^{c_n q} power from the
    eigenvalue factor into the normalizer; the product is unchanged.

    The primed normalizer converges to a constant in the rectangular regime,
    which makes the pair convenient for studying the law of the log ratio.
    """
    p, q = _canonical_pq(d)
    parts = _kn_parts(d, mode)
    shift = parts.c_n * q * math.log1p(-p / d.n)
    ll = log_ln(point, d)
    return PrimedLogParts(
        log_kn_prime=parts.log_kn + shift,
        log_ln_prime=ll - shift,
    )
