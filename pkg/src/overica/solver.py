"""Single-atom solver: maximize <G,B> - (mu/2) sum_j <B,F_j>^2 over the
spectrahedron {B PSD, Tr B = 1} by projected accelerated gradient with
rank-1 (majorization-minimization) restarts, plus a continuation-based
reference solver for the subspace-constrained program at small scale.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels, linalg
from .errors import AssumptionError, InputError, NumericalError
from .subspace import SubspaceBasis, _split_svd

MU_CONTINUATION = (1e2, 1e3, 1e4)
EXACT_RESIDUAL_TARGET = 1e-6
ATOM_MATCH_TOL = 1e-3


@dataclass(frozen=True)
class SolverConfig:
    mu: float | None = None  # None: 1e3 * ||G||_F at solve time
    max_iter: int = 100
    mm_rounds: int = 50
    tol: float = 1e-9
    seed: int | None = None

    def __post_init__(self):
        if self.mu is not None and not self.mu > 0:
            raise InputError(f"mu must be positive, got {self.mu}")
        if self.max_iter < 1 or self.mm_rounds < 1:
            raise InputError("max_iter and mm_rounds must be >= 1")
        if not self.tol > 0:
            raise InputError("tol must be positive")


@dataclass(frozen=True)
class SolverResult:
    B_star: np.ndarray
    objective_trace: np.ndarray      # minimized composite, per iteration
    round_objectives: np.ndarray     # accepted MM-round end values
    top_eigvec: np.ndarray
    top_eigval: float
    certificate_gap: float           # lambda_1 - lambda_2 of B_star
    converged: bool
    mu: float
    subspace_residual: float | None = None
    success: bool | None = None
    matched_atom: int | None = None


def default_mu(G):
    return 1e3 * float(np.linalg.norm(G, "fro"))


def _null_coords(F, p):
    """Coordinate stack for a null basis given in any accepted form."""
    m = linalg.sym_dim(p)
    if isinstance(F, SubspaceBasis):
        return F.null_basis
    F = np.asarray(F, dtype=float)
    if F.ndim == 2 and F.shape[1] == m:
        return F
    if F.ndim == 3 and F.shape[1:] == (p, p):
        return np.stack([linalg.sym_to_coords(linalg.symmetrize(M)) for M in F])
    raise InputError(f"cannot interpret null basis of shape {F.shape}")


def relax_objective(B, G, F, mu):
    """Value and gradient of f(B) = -<G,B> + (mu/2) sum_j <B,F_j>^2.

    F is the (orthonormal) null basis: a SubspaceBasis, a coordinate stack,
    or an array of symmetric matrices. The gradient is returned as a
    symmetric matrix.
    """
    B = linalg.symmetrize(B)
    G = linalg.symmetrize(G)
    p = B.shape[0]
    b = linalg.sym_to_coords(B)
    g = linalg.sym_to_coords(G)
    Fc = _null_coords(F, p)
    t = Fc @ b
    value = -(g @ b) + 0.5 * mu * (t @ t)
    grad = -g + mu * (t @ Fc)
    return float(value), linalg.coords_to_sym(grad, p)


def _result_from_coords(b, trace, round_objs, converged, mu, p):
    B = linalg.coords_to_sym(b, p)
    v, lam1 = linalg.top_eigvec(B)
    w, _ = linalg.eigh_desc(B)
    gap = float(w[0] - w[1]) if p > 1 else float(w[0])
    return SolverResult(
        B_star=B,
        objective_trace=np.asarray(trace, dtype=float),
        round_objectives=np.asarray(round_objs, dtype=float),
        top_eigvec=v,
        top_eigval=float(lam1),
        certificate_gap=gap,
        converged=bool(converged),
        mu=float(mu),
    )


def fista(G, basisW, config=None, B0=None):
    """Solve the relaxed program on the spectrahedron.

    `basisW` is the SubspaceBasis whose effective span defines the penalty
    (the complement-projector identity makes the penalty equal to the
    explicit sum over the orthonormal null basis). Iterates stay in
    {B PSD, Tr B = 1} after every projection.
    """
    if config is None:
        config = SolverConfig()
    G = linalg.symmetrize(G)
    if not np.all(np.isfinite(G)):
        raise NumericalError("objective matrix G has non-finite entries")
    p = basisW.p
    if G.shape != (p, p):
        raise InputError(f"G has shape {G.shape}, expected ({p}, {p})")
    mu = config.mu if config.mu is not None else default_mu(G)
    if mu <= 0:
        raise InputError("mu must be positive (is G zero?)")
    g = linalg.sym_to_coords(G)
    if B0 is None:
        B0 = np.eye(p) / p
    b0 = linalg.sym_to_coords(linalg.symmetrize(B0))
    try:
        b, trace, round_ends, converged = _kernels.fista_mm(
            g, basisW.basis, mu, config.max_iter, config.mm_rounds,
            config.tol, b0, p,
        )
    except ArithmeticError as exc:
        raise NumericalError(str(exc)) from exc
    if not np.all(np.isfinite(trace)):
        raise NumericalError("objective became non-finite during FISTA")
    return _result_from_coords(b, trace, round_ends, converged, mu, p)


def mm_restart(prev):
    """Rank-1 restart matrix v v^T from the top eigenvector of prev.B_star.

    Warns when the leading eigenvalue is (near-)degenerate; the
    eigenvector is then an arbitrary but deterministic tie-break.
    """
    v = prev.top_eigvec
    if prev.certificate_gap <= 1e-12 * max(abs(prev.top_eigval), 1.0):
        warnings.warn("degenerate top eigenspace in MM restart", RuntimeWarning)
    return np.outer(v, v)


def choose_g(basisW, mode="random", rng=None):
    """Objective matrix G inside the current effective span.

    deterministic: the leading stored basis direction (for gencov/cum4
    bases this is the top singular direction of the generating stack).
    random: a Gaussian unit-norm combination of the basis elements.
    """
    if basisW.effective_dim == 0:
        raise InputError("subspace exhausted: no directions left to search")
    if mode == "deterministic":
        g = basisW.basis[0]
    elif mode == "random":
        if rng is None:
            raise InputError("random mode requires an rng")
        z = rng.normal(size=basisW.effective_dim)
        g = z @ basisW.basis
        nrm = np.linalg.norm(g)
        if nrm < 1e-14:
            raise NumericalError("degenerate random combination")
        g = g / nrm
    else:
        raise InputError(f"unknown choose_g mode: {mode}")
    return linalg.coords_to_sym(g, basisW.p)


def solve_exact_reference(atoms, G, config=None):
    """Reference solver for the subspace-constrained program at small scale.

    Runs the relaxation with a warm-started mu-continuation (1e2, 1e3, 1e4)
    on the exact complement of span{atoms}, then polishes by alternating
    projections onto the span and the spectrahedron until the subspace
    residual is below 1e-6. G is reduced to its component in the span
    (which leaves the program's objective on the feasible set unchanged)
    and normalized. Success means the final iterate is within 1e-3
    Frobenius distance of some atom.
    """
    if config is None:
        config = SolverConfig()
    atoms = np.asarray(atoms, dtype=float)
    if atoms.ndim != 3 or atoms.shape[1] != atoms.shape[2]:
        raise InputError("atoms must be a stack of square matrices")
    k, p, _ = atoms.shape
    stack = np.stack(
        [linalg.sym_to_coords(linalg.symmetrize(A)) for A in atoms]
    )
    sv = np.linalg.svd(stack, compute_uv=False)
    if sv[-1] < 1e-10 * sv[0]:
        raise AssumptionError("atoms are linearly dependent")
    basis = _split_svd(stack, p, k, source="population")
    U = basis.basis

    g = linalg.sym_to_coords(linalg.symmetrize(G))
    g_w = (U.T @ (U @ g))
    nrm = np.linalg.norm(g_w)
    if nrm < 1e-12 * max(np.linalg.norm(g), 1e-300):
        raise NumericalError("G is (numerically) orthogonal to the atom span")
    g_w /= nrm

    b = linalg.sym_to_coords(np.eye(p) / p)
    traces = []
    round_ends_all = []
    converged = True
    for mu in MU_CONTINUATION:
        try:
            b, trace, round_ends, conv = _kernels.fista_mm(
                g_w, U, mu, config.max_iter, config.mm_rounds, config.tol,
                b, p,
            )
        except ArithmeticError as exc:
            raise NumericalError(str(exc)) from exc
        traces.append(trace)
        round_ends_all.append(round_ends)
        converged = converged and conv

    # alternating-projection polish onto span * spectrahedron
    residual = np.inf
    for _ in range(200):
        b = U.T @ (U @ b)
        B = linalg.coords_to_sym(b, p)
        b = linalg.sym_to_coords(_kernels.project_psd_trace1(B))
        residual = float(np.sqrt(max((b @ b) - (U @ b) @ (U @ b), 0.0)))
        if residual <= 0.1 * EXACT_RESIDUAL_TARGET:
            break
    converged = converged and residual < EXACT_RESIDUAL_TARGET

    trace_all = np.concatenate(traces) if traces else np.zeros(0)
    result = _result_from_coords(
        b, trace_all, np.concatenate(round_ends_all),
        converged, MU_CONTINUATION[-1], p,
    )
    # distance to the nearest atom: ||B||^2 + 1 - 2 <B, a_i>
    bb = b @ b
    inner = stack @ b
    d2 = bb + np.einsum("ij,ij->i", stack, stack) - 2.0 * inner
    j = int(np.argmin(d2))
    dist = float(np.sqrt(max(d2[j], 0.0)))
    success = bool(converged and dist < ATOM_MATCH_TOL)
    return SolverResult(
        B_star=result.B_star,
        objective_trace=result.objective_trace,
        round_objectives=result.round_objectives,
        top_eigvec=result.top_eigvec,
        top_eigval=result.top_eigval,
        certificate_gap=result.certificate_gap,
        converged=result.converged,
        mu=result.mu,
        subspace_residual=residual,
        success=success,
        matched_atom=j if success else None,
    )
