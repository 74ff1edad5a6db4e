"""Estimation of the atom span: an orthonormal basis of
W = Span{d_i d_i^T} inside the symmetric matrices, plus its orthogonal
complement, built from generalized covariances, from the flattened
fourth-order cumulant, or exactly from a known mixing matrix.

All bases live in the isometric coordinates of `linalg`; rows are basis
vectors. Deflation support: found atoms are moved from the effective span
into the complement by an exact orthogonal rotation, so the union of
`basis`, `null_fixed` and `removed` stays orthonormal throughout.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import linalg
from .errors import AssumptionError, DeflationError, InputError
from .moments import Cum4Flattening, GenCov

RANK_GAP_THRESHOLD = 2.0


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal basis of the (remaining) atom span and its complement."""

    p: int
    k: int
    basis: np.ndarray       # (k_eff, m) orthonormal rows, current span
    null_fixed: np.ndarray  # (m - k, m) complement of the full span W
    removed: np.ndarray     # (t, m) directions deflated out of W
    source: str
    singular_values: np.ndarray | None = None
    rank_warning: bool = False

    @property
    def m(self):
        return linalg.sym_dim(self.p)

    @property
    def effective_dim(self):
        return self.basis.shape[0]

    @property
    def null_basis(self):
        """Complement of the effective span: fixed complement + deflated."""
        return np.vstack([self.null_fixed, self.removed])

    def project_span(self, coords):
        """Project coordinate vectors onto the effective span."""
        return (coords @ self.basis.T) @ self.basis

    def span_residual(self, M):
        """Relative distance of a symmetric matrix from the effective span."""
        a = linalg.sym_to_coords(linalg.symmetrize(M))
        nrm = np.linalg.norm(a)
        if nrm == 0:
            return 0.0
        return float(np.linalg.norm(a - self.project_span(a)) / nrm)


def _split_svd(stack, p, k, source, spectrum=None):
    """Orthonormal basis/complement from the rows of `stack` (full SVD)."""
    m = linalg.sym_dim(p)
    if stack.shape[1] != m:
        raise InputError("coordinate stack has wrong width")
    _, sv, Vh = np.linalg.svd(stack, full_matrices=True)
    if spectrum is None:
        spectrum = sv
    rank_warning = False
    if k > sv.size or sv[k - 1] <= 1e-12 * max(sv[0], 1e-300):
        rank_warning = True
    elif k < sv.size and sv[k] > 0 and sv[k - 1] / sv[k] < RANK_GAP_THRESHOLD:
        rank_warning = True
    return SubspaceBasis(
        p=p,
        k=k,
        basis=np.ascontiguousarray(Vh[:k]),
        null_fixed=np.ascontiguousarray(Vh[k:]),
        removed=np.zeros((0, m)),
        source=source,
        singular_values=np.asarray(spectrum, dtype=float),
        rank_warning=rank_warning,
    )


def basis_from_gencovs(hessians, k):
    """Top-k span of generalized covariances (degenerate probes dropped).

    `hessians` may be GenCov results or plain symmetric matrices. The
    returned spectrum diagnoses the effective rank; a small sigma_k /
    sigma_{k+1} gap sets `rank_warning`.
    """
    mats = []
    for H in hessians:
        if isinstance(H, GenCov):
            if H.degenerate:
                continue
            mats.append(H.hessian)
        else:
            mats.append(np.asarray(H, dtype=float))
    if not mats:
        raise InputError("no usable generalized covariances (all degenerate?)")
    p = mats[0].shape[0]
    if len(mats) < k:
        raise InputError(
            f"need at least s >= k usable matrices, got s={len(mats)}, k={k}"
        )
    if k < 1 or k > linalg.sym_dim(p):
        raise InputError(f"k={k} outside [1, {linalg.sym_dim(p)}]")
    stack = np.stack([linalg.sym_to_coords(linalg.symmetrize(M)) for M in mats])
    return _split_svd(stack, p, k, source="gencov")


def basis_from_cum4(C, k):
    """Atom span from the flattened fourth-order cumulant.

    Matricizes the top-k singular vectors of C (top by |eigenvalue|; the
    sources' kurtoses may have mixed signs), symmetrizes, and
    re-orthonormalizes in symmetric coordinates.
    """
    if not isinstance(C, Cum4Flattening):
        raise InputError("basis_from_cum4 expects a Cum4Flattening")
    p = C.p
    m = linalg.sym_dim(p)
    if k < 1 or k > m:
        raise InputError(f"k={k} outside [1, {m}]")
    w, V = np.linalg.eigh(0.5 * (C.C + C.C.T))
    order = np.argsort(np.abs(w))[::-1]
    spectrum = np.abs(w)[order]
    coords = np.empty((k, m))
    for i in range(k):
        u = V[:, order[i]]
        coords[i] = linalg.sym_to_coords(linalg.symmetrize(linalg.mat(u, p, p)))
    return _split_svd(coords, p, k, source="cum4", spectrum=spectrum)


def atom_coords(D):
    """Stack of atom coordinates: row i is the embedding of d_i d_i^T."""
    D = np.asarray(D, dtype=float)
    return np.stack([linalg.sym_to_coords(np.outer(d, d)) for d in D.T])


def population_basis(D):
    """Exact orthonormal basis of Span{d_i d_i^T} for a known mixing matrix.

    Raises AssumptionError when the atoms are (numerically) linearly
    dependent.
    """
    D = np.asarray(D, dtype=float)
    p, k = D.shape
    if k > linalg.sym_dim(p):
        raise InputError(f"k={k} exceeds p(p+1)/2 = {linalg.sym_dim(p)}")
    stack = atom_coords(D)
    sv = np.linalg.svd(stack, compute_uv=False)
    if sv[-1] < 1e-10 * sv[0]:
        raise AssumptionError(
            "atoms d_i d_i^T are linearly dependent (singular value ratio "
            f"{sv[-1] / sv[0]:.2e})"
        )
    return _split_svd(stack, p, k, source="population")


def augment_null(basisW, found_atoms, tol=1e-2):
    """Move found atoms out of the effective span (deflation step).

    Each atom must lie in the full span W up to `tol` (relative norm of its
    component in the fixed complement); atoms whose projection onto the
    current effective span is negligible are treated as already deflated
    and skipped. Returns a new SubspaceBasis.
    """
    basis = basisW.basis
    removed = basisW.removed
    for A in found_atoms:
        a = linalg.sym_to_coords(linalg.symmetrize(A))
        nrm = np.linalg.norm(a)
        if nrm == 0:
            continue
        a = a / nrm
        out = basisW.null_fixed @ a
        res = np.linalg.norm(out)
        if res > tol:
            raise DeflationError(
                f"atom lies outside the estimated span (residual {res:.3e} "
                f"> tol {tol:.1e})"
            )
        c = basis @ a
        cn = np.linalg.norm(c)
        if cn < 1e-8:
            continue
        c_hat = c / cn
        # Householder reflection aligning c_hat with -+e1 in span coefficients
        v = c_hat.copy()
        v[0] += 1.0 if c_hat[0] >= 0 else -1.0
        HB = basis - np.outer(v, (2.0 / (v @ v)) * (v @ basis))
        removed = np.vstack([removed, HB[:1]])
        basis = np.ascontiguousarray(HB[1:])
    return replace(basisW, basis=basis, removed=removed)
