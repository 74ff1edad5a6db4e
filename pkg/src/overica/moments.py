"""Empirical moment estimators: generalized covariances (Hessians of the
cumulant generating function at probe vectors) and the flattened
fourth-order cumulant.

Both estimators are used only through the span of their outputs, so plain
plug-in moment estimates are used throughout. Weighted moments are
stabilized by subtracting max_i t^T x_i before exponentiation, and the
heavy contractions run in fixed-size sample chunks to keep peak memory at
O(p^2 s) for the generalized covariances and O(p^4) for the cumulant.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

_GENCOV_CHUNK = 8192
_CUM4_CHUNK = 2048

# a probe is degenerate when one sample carries almost all the weight
DEGENERATE_WEIGHT_SHARE = 0.999


@dataclass(frozen=True)
class SampleMatrix:
    """Observed data, p rows (dimension) by n columns (samples)."""

    data: np.ndarray
    centered: bool = False

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            raise InputError(f"sample matrix must be 2-d, got {data.ndim}-d")
        object.__setattr__(self, "data", data)

    @property
    def p(self):
        return self.data.shape[0]

    @property
    def n(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class GenCov:
    """Generalized covariance at probe t: gradient and Hessian of the cgf."""

    t: np.ndarray
    mean: np.ndarray
    hessian: np.ndarray
    degenerate: bool = False


@dataclass(frozen=True)
class Cum4Flattening:
    """p^2 x p^2 flattening of the empirical fourth-order cumulant."""

    p: int
    C: np.ndarray


def center(X):
    """Subtract the row means; returns a new SampleMatrix flagged centered."""
    if not isinstance(X, SampleMatrix):
        X = SampleMatrix(X)
    if X.n < 2:
        raise InputError(f"centering needs n >= 2, got n={X.n}")
    data = X.data - X.data.mean(axis=1, keepdims=True)
    return SampleMatrix(data, centered=True)


def gencov(X, t):
    """Empirical generalized covariance of X at probe vector t.

    mean = sum_i w_i x_i / sum_i w_i and
    hessian = sum_i w_i x_i x_i^T / sum_i w_i - mean mean^T
    with w_i = exp(t^T x_i), shifted by max_i t^T x_i for stability.
    At t = 0 the hessian is exactly the sample covariance.
    """
    if not isinstance(X, SampleMatrix):
        raise InputError("gencov expects a SampleMatrix")
    if not X.centered:
        raise InputError("gencov requires centered data (call center first)")
    t = np.asarray(t, dtype=float)
    if t.shape != (X.p,) or not np.all(np.isfinite(t)):
        raise InputError(f"probe must be a finite vector of length {X.p}")

    data = X.data
    s = t @ data
    s -= s.max()
    w = np.exp(s)
    sw = w.sum()
    degenerate = bool(w.max() / sw > DEGENERATE_WEIGHT_SHARE)

    p, n = data.shape
    mean = np.zeros(p)
    H = np.zeros((p, p))
    for lo in range(0, n, _GENCOV_CHUNK):
        hi = min(lo + _GENCOV_CHUNK, n)
        xw = data[:, lo:hi] * w[lo:hi]
        mean += xw.sum(axis=1)
        H += xw @ data[:, lo:hi].T
    mean /= sw
    H /= sw
    H -= np.outer(mean, mean)
    H = 0.5 * (H + H.T)
    return GenCov(t=t.copy(), mean=mean, hessian=H, degenerate=degenerate)


def default_probe_scale(X):
    """Per-coordinate probe std 1/(sqrt(p) sigma-bar) keeping t^T x = O(1)."""
    sigma = X.data.std(axis=1).mean()
    if sigma <= 0:
        raise InputError("data has zero variance; cannot scale probes")
    return 1.0 / (np.sqrt(X.p) * sigma)


def sample_probes(p, s, scale, rng):
    """s i.i.d. N(0, scale^2 I_p) probe vectors, one per row."""
    if s < 1:
        raise InputError(f"need at least one probe, got s={s}")
    return rng.normal(scale=scale, size=(s, p))


def gencov_batch(X, probes):
    """Generalized covariances for each probe row, in probe order."""
    return [gencov(X, t) for t in probes]


def cum4_flattening(X):
    """Empirical flattened fourth-order cumulant C, shape (p^2, p^2).

    Entry [(i1,i2),(i3,i4)] (row-major pair indices) is the plug-in cumulant
    E[x1 x2 x3 x4] - E[x1 x2]E[x3 x4] - E[x1 x3]E[x2 x4] - E[x1 x4]E[x2 x3].
    The output is symmetrized.
    """
    if not isinstance(X, SampleMatrix):
        raise InputError("cum4_flattening expects a SampleMatrix")
    if not X.centered:
        raise InputError("cum4_flattening requires centered data")
    if X.n < 4:
        raise InputError(f"fourth-order cumulant needs n >= 4, got n={X.n}")

    data = X.data
    p, n = data.shape
    M4 = np.zeros((p * p, p * p))
    for lo in range(0, n, _CUM4_CHUNK):
        hi = min(lo + _CUM4_CHUNK, n)
        chunk = data[:, lo:hi]
        Z = (chunk[:, None, :] * chunk[None, :, :]).reshape(p * p, hi - lo)
        M4 += Z @ Z.T
    M4 /= n

    Sigma = data @ data.T / n
    C = M4
    C -= np.outer(Sigma.reshape(-1), Sigma.reshape(-1))
    C -= np.einsum("ik,jl->ijkl", Sigma, Sigma).reshape(p * p, p * p)
    C -= np.einsum("il,jk->ijkl", Sigma, Sigma).reshape(p * p, p * p)
    C = 0.5 * (C + C.T)
    return Cum4Flattening(p=p, C=C)


def kurtosis(sample):
    """Excess kurtosis E[a^4] - 3 E[a^2]^2 of a univariate sample."""
    a = np.asarray(sample, dtype=float).ravel()
    if a.size < 4:
        raise InputError(f"kurtosis needs n >= 4, got n={a.size}")
    a = a - a.mean()
    m2 = np.mean(a * a)
    m4 = np.mean(a**4)
    return float(m4 - 3.0 * m2 * m2)
