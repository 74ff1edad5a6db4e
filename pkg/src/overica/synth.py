"""Synthetic instance generation: mixing matrices (plain, coherence-pruned,
sparse), observation sampling from the linear model x = D alpha, and exact
population bases.
"""

import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AssumptionError, InputError, SamplingError
from .linalg import sym_dim
from .moments import SampleMatrix
from .subspace import population_basis

PRUNE_BUDGET = 10_000
SPARSE_BUDGET = 10_000
COHERENCE_CALIBRATION_DRAWS = 10_000


@dataclass(frozen=True)
class SamplingSpec:
    p: int
    k: int
    mode: str = "normal"
    coherence_cap: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.p < 1:
            raise InputError(f"p must be positive, got {self.p}")
        if not 1 <= self.k <= sym_dim(self.p):
            raise InputError(
                f"k must lie in [1, p(p+1)/2] = [1, {sym_dim(self.p)}], got {self.k}"
            )
        if self.mode not in ("normal", "prune", "sparse"):
            raise InputError(f"unknown sampling mode: {self.mode}")


def _normal_columns(p, k, rng):
    D = rng.normal(size=(p, k))
    norms = np.linalg.norm(D, axis=0)
    while np.any(norms == 0):  # probability zero, but keep the contract exact
        bad = norms == 0
        D[:, bad] = rng.normal(size=(p, int(bad.sum())))
        norms = np.linalg.norm(D, axis=0)
    return D / norms


def coherence(D):
    """max_{i != j} |<d_i, d_j>| over unit-norm columns; 0 when k < 2."""
    D = np.asarray(D, dtype=float)
    if D.shape[1] < 2:
        return 0.0
    G = np.abs(D.T @ D)
    np.fill_diagonal(G, 0.0)
    return float(G.max())


def _cache_path():
    root = os.environ.get("OVERICA_CACHE_DIR")
    if root is None:
        root = os.path.join(os.path.expanduser("~"), ".cache", "overica")
    return Path(root) / "coherence_caps.json"


def mean_coherence(p, k, rng=None, draws=COHERENCE_CALIBRATION_DRAWS):
    """Mean coherence of plain normalized-Gaussian mixing matrices.

    Computed once per (p, k) and persisted to a small JSON cache; used as
    the default pruning threshold.
    """
    path = _cache_path()
    key = f"{p},{k}"
    cache = {}
    if path.exists():
        try:
            cache = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError):
            cache = {}
    if key in cache:
        return float(cache[key])
    if rng is None:
        rng = np.random.default_rng(123456789 + 1000003 * p + k)
    total = 0.0
    for _ in range(draws):
        total += coherence(_normal_columns(p, k, rng))
    value = total / draws
    cache[key] = value
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(cache, sort_keys=True))
    except OSError:
        pass
    return value


def _atoms_independent(D):
    cols = D.T
    stack = np.stack([np.outer(d, d)[np.triu_indices(D.shape[0])] for d in cols])
    sv = np.linalg.svd(stack, compute_uv=False)
    return sv[-1] >= 1e-10 * sv[0]


def sample_mixing(spec, rng=None):
    """Sample a p x k mixing matrix with unit-norm columns.

    normal: independent normalized Gaussian columns. prune: rejection until
    coherence(D) <= cap (default cap: calibrated mean coherence). sparse:
    zero out half of the entries using an independent Gaussian mask split at
    its median, renormalize, and resample on zero columns or dependent atoms.
    """
    if not isinstance(spec, SamplingSpec):
        raise InputError("sample_mixing expects a SamplingSpec")
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    p, k = spec.p, spec.k

    if spec.mode == "normal":
        return _normal_columns(p, k, rng)

    if spec.mode == "prune":
        cap = spec.coherence_cap
        if cap is None:
            cap = mean_coherence(p, k)
        for _ in range(PRUNE_BUDGET):
            D = _normal_columns(p, k, rng)
            if coherence(D) <= cap:
                return D
        raise SamplingError(
            f"prune mode: no draw with coherence <= {cap:.4f} in {PRUNE_BUDGET} attempts"
        )

    for _ in range(SPARSE_BUDGET):
        D = _normal_columns(p, k, rng)
        mask = rng.normal(size=(p, k))
        D = D.copy()
        D[mask > np.median(mask)] = 0.0
        norms = np.linalg.norm(D, axis=0)
        if np.any(norms == 0):
            continue
        D = D / norms
        if _atoms_independent(D):
            return D
    raise SamplingError(f"sparse mode: resampling budget ({SPARSE_BUDGET}) exhausted")


def sample_ica(D, n, source_law="uniform", rng=None, return_sources=False):
    """Draw n observations X = D A with i.i.d. non-Gaussian sources.

    source_law: "uniform" (on [-0.5, 0.5]), "laplace" (unit variance), or a
    callable (k, n, rng) -> array. Gaussian sources are rejected: the model
    is not identifiable for them.
    """
    D = np.asarray(D, dtype=float)
    if n < 1:
        raise InputError(f"need n >= 1 observations, got {n}")
    if rng is None:
        rng = np.random.default_rng()
    k = D.shape[1]
    if callable(source_law):
        A = np.asarray(source_law(k, n, rng), dtype=float)
        if A.shape != (k, n):
            raise InputError(f"custom source law returned shape {A.shape}")
    elif source_law == "uniform":
        A = rng.uniform(-0.5, 0.5, size=(k, n))
    elif source_law == "laplace":
        A = rng.laplace(scale=1.0 / np.sqrt(2.0), size=(k, n))
    elif source_law in ("gaussian", "normal"):
        raise InputError(
            "Gaussian sources rejected: the mixing matrix is not identifiable "
            "for (near-)Gaussian sources"
        )
    else:
        raise InputError(f"unknown source law: {source_law!r}")
    X = SampleMatrix(D @ A, centered=False)
    return (X, A) if return_sources else X


def population_instance(p, k, seed=None, rng=None):
    """Mixing matrix plus its exact (noiseless) subspace basis."""
    if rng is None:
        rng = np.random.default_rng(seed)
    spec = SamplingSpec(p=p, k=k)
    for _ in range(100):
        D = sample_mixing(spec, rng=rng)
        try:
            return D, population_basis(D)
        except AssumptionError:
            continue
    raise SamplingError("could not sample linearly independent atoms in 100 tries")
