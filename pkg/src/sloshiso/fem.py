"""P1 finite elements and the deflated generalized eigensolver.

The stiffness/mass pair discretizes the Rayleigh quotient of the free
membrane problem on a triangle mesh; ``neumann_eigs`` returns the
smallest nonzero eigenvalues with the constant mode removed by keeping
all iterates orthogonal to constants in the mass inner product.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Optional

import numpy as np
from scipy import sparse

from .geometry import TriMesh

DEFAULT_SEED = 0x5EED

#: eigensolver tolerances; discretization error dominates all of these
RITZ_RTOL = 1e-10
CG_RTOL = 1e-12
RESIDUAL_RTOL = 1e-8
CLUSTER_RTOL = 1e-6
MAX_SWEEPS = 500


class DegenerateTriangleError(ValueError):
    """A triangle's area is vanishingly small relative to the mesh."""


class NoConvergenceError(RuntimeError):
    """Eigensolver sweep limit reached; carries the best values seen."""

    def __init__(self, message, values=None, residuals=None, iterations=0):
        super().__init__(message)
        self.values = values
        self.residuals = residuals
        self.iterations = iterations


class ZeroAfterDeflationError(ValueError):
    """The trial vector was (numerically) constant."""


@dataclass
class SparseSym:
    """Symmetric sparse matrix stored as the CSR lower triangle."""

    dim: int
    lower: sparse.csr_matrix

    def __post_init__(self):
        self._full = None

    @property
    def row_offsets(self) -> np.ndarray:
        return self.lower.indptr

    @property
    def col_indices(self) -> np.ndarray:
        return self.lower.indices

    @property
    def values(self) -> np.ndarray:
        return self.lower.data

    @classmethod
    def from_full(cls, matrix: sparse.spmatrix) -> "SparseSym":
        matrix = matrix.tocsr()
        obj = cls(dim=matrix.shape[0], lower=sparse.tril(matrix, format="csr"))
        obj._full = matrix
        return obj

    def full(self) -> sparse.csr_matrix:
        """The full symmetric matrix (cached)."""
        if self._full is None:
            diag = sparse.diags(self.lower.diagonal())
            self._full = (self.lower + self.lower.T - diag).tocsr()
        return self._full

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.full() @ x

    def dump(self, target) -> None:
        """Coordinate-format text dump (row, col, value), full matrix."""
        own = isinstance(target, (str, bytes)) or hasattr(target, "__fspath__")
        fh: IO = open(target, "w", encoding="utf-8", newline="\n") if own else target
        try:
            coo = self.full().tocoo()
            order = np.lexsort((coo.col, coo.row))
            for i, j, v in zip(coo.row[order], coo.col[order], coo.data[order]):
                fh.write(f"{i} {j} {float(v)!r}\n")
        finally:
            if own:
                fh.close()


@dataclass
class Spectrum:
    """Converged eigenpairs, ascending, constant mode deflated.

    ``values`` may be longer than the requested count when the last
    requested eigenvalue sits inside a numerically degenerate cluster:
    clusters are reported in full.
    """

    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    iterations: int
    deflated_constant: bool = True


# ---------------------------------------------------------------------------
# assembly

def assemble(mesh: TriMesh) -> tuple:
    """Exact P1 stiffness and consistent mass matrices.

    Element stiffness is (e_i . e_j) / (4A) for the edge vectors
    opposite each vertex; element mass has diagonal A/6 and off-diagonal
    A/12.  Returns ``(stiffness, mass)`` as SparseSym.
    """
    tris = mesh.triangles
    pts = mesh.nodes[tris]  # (m, 3, 2)
    # edge vector opposite vertex i
    edges = pts[:, [2, 0, 1], :] - pts[:, [1, 2, 0], :]
    d1 = pts[:, 1] - pts[:, 0]
    d2 = pts[:, 2] - pts[:, 0]
    areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    total = float(areas.sum())
    if np.any(areas < 1e-14 * total):
        raise DegenerateTriangleError(
            f"triangle area below 1e-14 of mesh area (min {areas.min():.3e})")

    ke = np.einsum("mik,mjk->mij", edges, edges) / (4.0 * areas)[:, None, None]
    me_pattern = (np.ones((3, 3)) + np.eye(3)) / 12.0
    me = areas[:, None, None] * me_pattern[None, :, :]

    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    n = mesh.num_nodes
    stiffness = sparse.coo_matrix((ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    mass = sparse.coo_matrix((me.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    return SparseSym.from_full(stiffness), SparseSym.from_full(mass)


# ---------------------------------------------------------------------------
# linear algebra kernels

class _LCG:
    """64-bit linear congruential generator; platform-independent."""

    MULT = 6364136223846793005
    INC = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def uniform(self, shape) -> np.ndarray:
        count = int(np.prod(shape))
        out = np.empty(count)
        state = self.state
        for i in range(count):
            state = (self.MULT * state + self.INC) & self.MASK
            out[i] = (state >> 11) * 2.0 ** -53
        self.state = state
        return out.reshape(shape) - 0.5


def _make_preconditioner(K: sparse.csr_matrix, project_constants: bool):
    """Incomplete-LU preconditioner for the stiffness matrix.

    A tiny diagonal shift dodges the zero pivot a singular K would
    produce.  When K has the constant nullspace, the shifted inverse
    amplifies constant-direction roundoff by 1/shift, which stalls CG
    near its residual floor; projecting constants out of the output
    keeps the preconditioner SPD on the complement.  Falls back to
    Jacobi if the incomplete factorization fails.
    """
    n = K.shape[0]
    eps = 1e-8 * float(K.diagonal().mean())
    try:
        ilu = sparse.linalg.spilu((K + eps * sparse.eye(n, format="csr")).tocsc(),
                                  drop_tol=1e-5, fill_factor=20.0)
        raw = ilu.solve
    except RuntimeError:
        dinv = 1.0 / np.maximum(K.diagonal(), eps)
        raw = lambda r: dinv * r
    if not project_constants:
        return raw

    def prec(r):
        z = raw(r)
        return z - z.mean()
    return prec


def _cg(K: sparse.csr_matrix, b: np.ndarray, prec=None,
        x0: Optional[np.ndarray] = None, rtol: float = CG_RTOL,
        maxiter: Optional[int] = None) -> np.ndarray:
    """Preconditioned conjugate gradients for K x = b.

    K must be positive definite on the affine solution space reached
    from ``b`` (and ``x0``).  Stops when the true residual falls below
    ``rtol * ||b||``; the recursively updated residual is refreshed
    periodically.
    """
    n = b.shape[0]
    if maxiter is None:
        maxiter = max(40 * n, 1000)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(n)
    if x0 is None:
        x = np.zeros(n)
        r = b.copy()
    else:
        x = x0.copy()
        r = b - K @ x
    target = rtol * bnorm
    z = prec(r) if prec is not None else r
    p = z.copy()
    rz = float(r @ z)
    best = float(np.linalg.norm(r))
    since_best = 0
    for it in range(maxiter):
        rnorm = float(np.linalg.norm(r))
        if rnorm <= target or rz <= 0.0:
            break
        if rnorm < 0.99 * best:
            best, since_best = rnorm, 0
        else:
            since_best += 1
            if since_best > 100:  # flat at the rounding floor
                break
        Kp = K @ p
        pKp = float(p @ Kp)
        if pKp <= 0.0:
            break
        alpha = rz / pKp
        x += alpha * p
        r -= alpha * Kp
        if (it + 1) % 128 == 0:
            r = b - K @ x
        z = prec(r) if prec is not None else r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x


def solve_smallest(K: sparse.spmatrix, M: sparse.spmatrix, k: int,
                   seed: int = DEFAULT_SEED, deflate_constant: bool = True,
                   max_sweeps: int = MAX_SWEEPS) -> Spectrum:
    """Block inverse subspace iteration for the smallest eigenpairs of
    K v = mu M v.

    Start vectors come from a seeded LCG; when ``deflate_constant`` is
    set, every iterate is M-orthogonalized against the constant vector
    so the zero mode never enters the search space.  Inner solves use
    incomplete-LU preconditioned conjugate gradients warm-started from
    the previous sweep; Rayleigh-Ritz values are accepted when their
    relative drift falls below 1e-10 and the pair residuals are below
    1e-8 * mu.
    """
    K = K.tocsr()
    M = M.tocsr()
    n = K.shape[0]
    free_dim = n - 1 if deflate_constant else n
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > free_dim:
        raise ValueError(f"k={k} exceeds deflated dimension {free_dim}")
    block = min(max(k + 2, 4), free_dim)

    m_row_sum = np.asarray(M.sum(axis=0)).ravel()  # M @ ones, by symmetry
    m_total = float(m_row_sum.sum())

    def deflate(X):
        if deflate_constant:
            X -= m_row_sum @ X / m_total

    def m_orthonormalize(X):
        G = X.T @ (M @ X)
        G = 0.5 * (G + G.T)
        w, V = np.linalg.eigh(G)
        w = np.maximum(w, w[-1] * 1e-15)
        return X @ (V / np.sqrt(w))

    prec = _make_preconditioner(K, project_constants=deflate_constant)
    rng = _LCG(seed)
    X = rng.uniform((n, block))
    deflate(X)
    X = m_orthonormalize(X)

    prev = None
    theta = None
    warm = None
    residuals = None
    for sweep in range(1, max_sweeps + 1):
        B = M @ X
        Z = np.empty_like(X)
        for j in range(block):
            guess = warm[:, j] if warm is not None else None
            Z[:, j] = _cg(K, B[:, j], prec=prec, x0=guess)
        deflate(Z)
        Z = m_orthonormalize(Z)
        KZ = K @ Z
        A_r = Z.T @ KZ
        A_r = 0.5 * (A_r + A_r.T)
        theta, C = np.linalg.eigh(A_r)
        X = Z @ C
        if prev is not None:
            drift = np.abs(theta[:k] - prev[:k]) / np.maximum(np.abs(theta[:k]), 1e-300)
            if drift.max() < RITZ_RTOL:
                m_out = k
                while m_out < block - 1 and theta[m_out] <= theta[k - 1] * (1.0 + CLUSTER_RTOL):
                    m_out += 1
                KX = KZ @ C
                MX = M @ X
                num = np.linalg.norm(KX[:, :m_out] - MX[:, :m_out] * theta[:m_out], axis=0)
                den = np.linalg.norm(MX[:, :m_out], axis=0)
                residuals = num / den
                if np.all(residuals <= RESIDUAL_RTOL * theta[:m_out]):
                    return Spectrum(values=theta[:m_out].copy(),
                                    vectors=X[:, :m_out].copy(),
                                    residuals=residuals,
                                    iterations=sweep,
                                    deflated_constant=deflate_constant)
        prev = theta
        warm = X / theta
    raise NoConvergenceError(
        f"no convergence after {max_sweeps} sweeps",
        values=None if theta is None else theta[:k].copy(),
        residuals=residuals, iterations=max_sweeps)


def neumann_eigs(stiffness: SparseSym, mass: SparseSym, k: int,
                 seed: int = DEFAULT_SEED) -> Spectrum:
    """The k smallest nonzero free-membrane eigenvalues of a mesh.

    Degenerate clusters straddling index k are reported in full, so the
    result can hold more than k pairs.
    """
    if stiffness.dim != mass.dim:
        raise ValueError("stiffness and mass dimensions differ")
    return solve_smallest(stiffness.full(), mass.full(), k, seed=seed,
                          deflate_constant=True)


def rayleigh_quotient(stiffness: SparseSym, mass: SparseSym,
                      nodal: np.ndarray) -> float:
    """(u'Ku) / (u0'Mu0) with the M-weighted mean of u removed.

    By the min-max principle this never falls below the smallest
    discrete nonzero eigenvalue.
    """
    u = np.asarray(nodal, dtype=float)
    K = stiffness.full()
    M = mass.full()
    Mu = M @ u
    total = float(M.sum())
    mean = float(Mu.sum()) / total
    u0 = u - mean
    u0Mu0 = float(u0 @ (M @ u0))
    uMu = float(u @ Mu)
    if u0Mu0 <= (1e-12) ** 2 * max(uMu, 1e-300):
        raise ZeroAfterDeflationError("vector is constant after deflation")
    return float(u @ (K @ u)) / u0Mu0


@dataclass
class ExtrapolationResult:
    """Richardson limit of an O(h^2) eigenvalue sequence."""

    estimate: float
    error_gauge: float
    monotone: bool


def extrapolate(values) -> ExtrapolationResult:
    """Richardson-extrapolate eigenvalues from consecutive mesh levels.

    ``values`` is a sequence of (level, mu) pairs at three or more
    consecutive levels.  Assuming O(h^2) convergence with h halving per
    level, the limit estimate is mu_fine + (mu_fine - mu_coarse) / 3 and
    the error gauge is the magnitude of that correction.  A non-monotone
    sequence marks the estimate unreliable (``monotone=False``).
    """
    pairs = sorted((int(level), float(mu)) for level, mu in values)
    if len(pairs) < 3:
        raise ValueError("need at least 3 consecutive levels")
    levels = [lv for lv, _ in pairs]
    if any(b - a != 1 for a, b in zip(levels, levels[1:])):
        raise ValueError(f"levels must be consecutive, got {levels}")
    mus = [mu for _, mu in pairs]
    diffs = np.diff(mus)
    monotone = bool(np.all(diffs <= 0) or np.all(diffs >= 0))
    correction = (mus[-1] - mus[-2]) / 3.0
    return ExtrapolationResult(estimate=mus[-1] + correction,
                               error_gauge=abs(correction),
                               monotone=monotone)
