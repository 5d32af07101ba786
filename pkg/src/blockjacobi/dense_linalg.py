"""Self-contained dense numerical kernels.

Hermitian eigendecomposition (cyclic Jacobi rotations), matrix absolute
value and spectral functions, block-tridiagonal LU solves, inertia-based
eigenvalue bisection, inverse iteration, and an Aberth-Ehrlich polynomial
root finder.  Everything here is deterministic: fixed sweep orders, fixed
starting configurations, no randomness.  The test suite cross-checks these
kernels against LAPACK oracles, so the library itself avoids np.linalg
solvers and eigensolvers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EigDecomposition",
    "SingularShiftError",
    "RootConvergenceError",
    "hermitian_eig",
    "abs_matrix",
    "spectral_norm",
    "psd_matfunc",
    "vector_norm",
    "BlockTridiagLU",
    "block_tridiag_factor",
    "block_tridiag_solve",
    "tridiag_apply",
    "tridiag_count_below",
    "tridiag_kth_eigenvalue",
    "tridiag_eigs_below",
    "tridiag_inverse_iteration",
    "poly_roots",
]


class SingularShiftError(ArithmeticError):
    """Shift is numerically an eigenvalue: an elimination pivot block is
    singular or ill-conditioned.  Carries the offending 1-based block index."""

    def __init__(self, block_index: int, cond: float):
        self.block_index = block_index
        self.cond = cond
        super().__init__(
            f"singular shift: pivot block {block_index} has condition estimate "
            f"{cond:.3e} (limit 1e12)"
        )


class RootConvergenceError(ArithmeticError):
    """Polynomial root iteration failed to converge; carries residuals."""

    def __init__(self, residuals):
        self.residuals = np.asarray(residuals)
        super().__init__(
            f"root finder did not converge; max residual {self.residuals.max():.3e}"
        )


def vector_norm(x) -> float:
    """Euclidean norm with overflow/underflow-safe scaling (entries can be
    as small as 1e-300 in resolvent tails)."""
    x = np.asarray(x)
    m = float(np.abs(x).max()) if x.size else 0.0
    if m == 0.0 or not np.isfinite(m):
        return m
    y = x / m
    return m * float(np.sqrt((y * y.conj()).real.sum()))


# ---------------------------------------------------------------------------
# Hermitian eigendecomposition: cyclic two-sided Jacobi rotations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EigDecomposition:
    """Eigenvalues ascending; vectors[:, i] is the unit eigenvector of values[i]."""

    values: np.ndarray
    vectors: np.ndarray


def _require_square(M) -> np.ndarray:
    A = np.array(M, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return A


def hermitian_eig(H, off_tol: float = 1e-14, max_sweeps: int = 100) -> EigDecomposition:
    """Full eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Sweeps run in fixed (p, q) lexicographic order until the off-diagonal
    Frobenius mass drops below off_tol * ||H||_F, so results are
    deterministic across runs.  Rejects non-Hermitian input (1e-10 relative).
    """
    A = _require_square(H)
    n = A.shape[0]
    if n == 0:
        return EigDecomposition(np.zeros(0), np.zeros((0, 0), np.complex128))
    amax = float(np.abs(A).max())
    if amax > 0 and float(np.abs(A - A.conj().T).max()) > 1e-10 * amax:
        raise ValueError("matrix is not Hermitian (relative deviation > 1e-10)")
    V = np.eye(n, dtype=np.complex128)
    if amax == 0.0:
        return EigDecomposition(np.zeros(n), V)

    W = (A + A.conj().T) / (2.0 * amax)
    fro = vector_norm(W.ravel())
    target = off_tol * fro
    skip = target / (4.0 * n)

    for _ in range(max_sweeps):
        off = vector_norm((W - np.diag(np.diag(W))).ravel())
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = W[p, q]
                r = abs(apq)
                if r <= skip:
                    continue
                app = W[p, p].real
                aqq = W[q, q].real
                ph = apq / r
                tau = (aqq - app) / (2.0 * r)
                if tau >= 0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # unitary G = [[c, s*ph], [-s*conj(ph), c]] on coordinates (p, q)
                colp = W[:, p].copy()
                colq = W[:, q].copy()
                W[:, p] = c * colp - s * np.conj(ph) * colq
                W[:, q] = s * ph * colp + c * colq
                rowp = W[p, :].copy()
                rowq = W[q, :].copy()
                W[p, :] = c * rowp - s * ph * rowq
                W[q, :] = s * np.conj(ph) * rowp + c * rowq
                W[p, q] = 0.0
                W[q, p] = 0.0
                W[p, p] = W[p, p].real
                W[q, q] = W[q, q].real
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * np.conj(ph) * vq
                V[:, q] = s * ph * vp + c * vq
    else:
        raise ArithmeticError("Jacobi eigensolver did not converge")

    w = np.real(np.diag(W)) * amax
    order = np.argsort(w, kind="stable")
    w = w[order]
    V = V[:, order]
    # fix a deterministic phase: largest-magnitude component real positive
    for i in range(n):
        j = int(np.argmax(np.abs(V[:, i])))
        piv = V[j, i]
        if piv != 0:
            V[:, i] *= np.conj(piv) / abs(piv)
    return EigDecomposition(w, V)


def abs_matrix(A) -> np.ndarray:
    """|A| = (A* A)^(1/2), Hermitian positive semidefinite."""
    A = _require_square(A)
    m = float(np.abs(A).max())
    if m == 0.0:
        return np.zeros_like(A)
    B = A / m
    H = B.conj().T @ B
    dec = hermitian_eig(H)
    w = np.sqrt(np.clip(dec.values, 0.0, None)) * m
    S = (dec.vectors * w) @ dec.vectors.conj().T
    return (S + S.conj().T) / 2.0


def spectral_norm(A) -> float:
    """Largest singular value (operator 2-norm), scale-safe."""
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim == 1:
        A = A[None, :]
    m = float(np.abs(A).max()) if A.size else 0.0
    if m == 0.0:
        return 0.0
    B = A / m
    H = B.conj().T @ B
    dec = hermitian_eig(H)
    return m * float(np.sqrt(max(dec.values[-1], 0.0)))


def psd_matfunc(H, f) -> np.ndarray:
    """Spectral function f(H) of a Hermitian PSD matrix.

    Eigenvalues in [-1e-12*||H||, 0) are clamped to 0 (PSD only up to
    roundoff); genuinely negative spectrum is rejected, as is f undefined
    or non-finite at some eigenvalue.
    """
    dec = hermitian_eig(H)
    w = dec.values
    hnorm = float(np.abs(w).max()) if w.size else 0.0
    if w.size and w[0] < -1e-12 * max(hnorm, 1e-300):
        raise ValueError(f"matrix is not PSD: min eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, None)
    try:
        fw = np.array([f(x) for x in w], dtype=np.complex128)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise ValueError(f"function undefined at an eigenvalue: {exc}") from exc
    if not np.all(np.isfinite(fw)):
        raise ValueError("function not finite at some eigenvalue")
    S = (dec.vectors * fw) @ dec.vectors.conj().T
    return (S + S.conj().T) / 2.0


# ---------------------------------------------------------------------------
# Small dense LU (partial pivoting) for pivot blocks
# ---------------------------------------------------------------------------

def _lu_factor_small(M):
    """Returns (LU, piv) or None if exactly singular."""
    LU = np.array(M, dtype=np.complex128)
    n = LU.shape[0]
    piv = np.arange(n)
    for k in range(n):
        i = k + int(np.argmax(np.abs(LU[k:, k])))
        if LU[i, k] == 0:
            return None
        if i != k:
            LU[[k, i], :] = LU[[i, k], :]
            piv[[k, i]] = piv[[i, k]]
        if k < n - 1:
            LU[k + 1:, k] /= LU[k, k]
            LU[k + 1:, k + 1:] -= np.outer(LU[k + 1:, k], LU[k, k + 1:])
    return LU, piv


def _lu_solve_small(fac, B):
    LU, piv = fac
    n = LU.shape[0]
    X = np.array(B, dtype=np.complex128)
    if X.ndim == 1:
        X = X[:, None]
    X = X[piv, :]
    for k in range(1, n):
        X[k, :] -= LU[k, :k] @ X[:k, :]
    for k in range(n - 1, -1, -1):
        if k < n - 1:
            X[k, :] -= LU[k, k + 1:] @ X[k + 1:, :]
        X[k, :] /= LU[k, k]
    return X


def _inv_small(fac, d):
    return _lu_solve_small(fac, np.eye(d, dtype=np.complex128))


# ---------------------------------------------------------------------------
# Block-tridiagonal LU (no inter-block pivoting)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockTridiagLU:
    """Factorization of (T - shift*I) for Hermitian block tridiagonal T.

    Forward elimination D_1 = B_1 - shift*I,
    D_k = B_k - shift*I - A_{k-1}^* D_{k-1}^{-1} A_{k-1}.
    transform_blocks[k] = D_{k+1}^{-1} A_{k+1} (back substitution),
    forward_blocks[k] = A_{k+1}^* D_{k+1}^{-1} (forward substitution),
    both 0-based over k = 0..N-2.
    """

    shift: complex
    nblocks: int
    dim: int
    pivot_blocks: tuple
    pivot_factors: tuple
    transform_blocks: tuple
    forward_blocks: tuple
    cond_estimates: np.ndarray

    def solve(self, rhs) -> np.ndarray:
        """Solve (T - shift*I) X = rhs for rhs of shape (N*d, m) or (N*d,)."""
        N, d = self.nblocks, self.dim
        R = np.asarray(rhs, dtype=np.complex128)
        squeeze = R.ndim == 1
        if squeeze:
            R = R[:, None]
        if R.shape[0] != N * d:
            raise ValueError(f"rhs has {R.shape[0]} rows, expected {N * d}")
        y = R.reshape(N, d, -1).copy()
        for k in range(1, N):
            y[k] -= self.forward_blocks[k - 1] @ y[k - 1]
        x = np.empty_like(y)
        x[N - 1] = _lu_solve_small(self.pivot_factors[N - 1], y[N - 1])
        for k in range(N - 2, -1, -1):
            x[k] = _lu_solve_small(self.pivot_factors[k], y[k]) - \
                self.transform_blocks[k] @ x[k + 1]
        out = x.reshape(N * d, -1)
        return out[:, 0] if squeeze else out


def _unpack_blocks(trunc):
    """Accept a Truncation-like object (diag_blocks/offdiag_blocks attributes)
    or a plain (diag_blocks, offdiag_blocks) pair."""
    if hasattr(trunc, "diag_blocks"):
        return trunc.diag_blocks, trunc.offdiag_blocks
    diag_blocks, offdiag_blocks = trunc
    return diag_blocks, offdiag_blocks


def block_tridiag_factor(trunc, shift,
                         cond_limit: float = 1e12,
                         check_conditioning: bool = True) -> BlockTridiagLU:
    """Factor (T - shift*I) by block forward elimination.

    With check_conditioning, a pivot block whose condition estimate exceeds
    cond_limit raises SingularShiftError (structure-preserving: no repair is
    attempted).  Without it, singular pivots are nudged by a tiny multiple
    of the problem scale so that shifts arbitrarily close to eigenvalues
    remain usable (inverse iteration relies on this).
    """
    diag_blocks, offdiag_blocks = _unpack_blocks(trunc)
    N = len(diag_blocks)
    if N == 0:
        raise ValueError("empty truncation")
    d = diag_blocks[0].shape[0]
    I = np.eye(d, dtype=np.complex128)
    scale = max(max(float(np.abs(B).max()) for B in diag_blocks),
                max((float(np.abs(A).max()) for A in offdiag_blocks), default=0.0),
                abs(shift), 1e-300)
    bump = 1e-13 * scale

    pivots, factors, transforms, forwards = [], [], [], []
    conds = np.empty(N)
    D = np.array(diag_blocks[0], dtype=np.complex128) - shift * I
    for k in range(N):
        fac = _lu_factor_small(D)
        if fac is None:
            if check_conditioning:
                raise SingularShiftError(k + 1, np.inf)
            D = D + bump * I
            fac = _lu_factor_small(D)
            if fac is None:
                raise SingularShiftError(k + 1, np.inf)
        Dinv = _inv_small(fac, d)
        # singular shifts surface as pivots tiny against the problem scale,
        # so the estimate is scale-relative (a bare sigma_max/sigma_min is
        # blind to them for well-conditioned small blocks, e.g. any d = 1)
        cond = max(spectral_norm(D), scale) * spectral_norm(Dinv)
        conds[k] = cond
        if check_conditioning and cond > cond_limit:
            raise SingularShiftError(k + 1, cond)
        pivots.append(D)
        factors.append(fac)
        if k < N - 1:
            A = np.asarray(offdiag_blocks[k], dtype=np.complex128)
            transforms.append(Dinv @ A)
            forwards.append(A.conj().T @ Dinv)
            D = np.asarray(diag_blocks[k + 1], dtype=np.complex128) - shift * I \
                - A.conj().T @ (Dinv @ A)
    return BlockTridiagLU(shift, N, d, tuple(pivots), tuple(factors),
                          tuple(transforms), tuple(forwards), conds)


def block_tridiag_solve(trunc, shift, rhs) -> np.ndarray:
    """One-shot factor + solve of (T - shift*I) X = rhs."""
    return block_tridiag_factor(trunc, shift).solve(rhs)


def tridiag_apply(trunc, x) -> np.ndarray:
    """Matrix-vector product T @ x for the assembled block tridiagonal."""
    diag_blocks, offdiag_blocks = _unpack_blocks(trunc)
    N = len(diag_blocks)
    d = diag_blocks[0].shape[0]
    X = np.asarray(x, dtype=np.complex128)
    squeeze = X.ndim == 1
    if squeeze:
        X = X[:, None]
    Xb = X.reshape(N, d, -1)
    Y = np.empty_like(Xb)
    for k in range(N):
        Y[k] = diag_blocks[k] @ Xb[k]
        if k > 0:
            Y[k] += offdiag_blocks[k - 1].conj().T @ Xb[k - 1]
        if k < N - 1:
            Y[k] += offdiag_blocks[k] @ Xb[k + 1]
    out = Y.reshape(N * d, -1)
    return out[:, 0] if squeeze else out


# ---------------------------------------------------------------------------
# Inertia counts and eigenvalue bisection (Sturm sequence on blocks)
# ---------------------------------------------------------------------------

def _herm_eigvals_small(D) -> np.ndarray:
    d = D.shape[0]
    if d == 1:
        return np.array([D[0, 0].real])
    if d == 2:
        a = D[0, 0].real
        c = D[1, 1].real
        h = 0.5 * (a - c)
        rad = np.sqrt(h * h + abs(D[0, 1]) ** 2)
        mid = 0.5 * (a + c)
        return np.array([mid - rad, mid + rad])
    return hermitian_eig(D).values


def _block_scale(diag_blocks, offdiag_blocks) -> float:
    return max(max(float(np.abs(B).max()) for B in diag_blocks),
               max((float(np.abs(A).max()) for A in offdiag_blocks), default=0.0),
               1e-300)


def tridiag_count_below(trunc, x: float) -> int:
    """Number of eigenvalues of T strictly below x, via the inertia of the
    block LDL* pivots (Sylvester's law; no inter-block pivoting)."""
    diag_blocks, offdiag_blocks = _unpack_blocks(trunc)
    N = len(diag_blocks)
    d = diag_blocks[0].shape[0]
    I = np.eye(d, dtype=np.complex128)
    bump = 1e-13 * max(_block_scale(diag_blocks, offdiag_blocks), abs(x))
    neg = 0
    D = np.asarray(diag_blocks[0], dtype=np.complex128) - x * I
    for k in range(N):
        D = (D + D.conj().T) / 2.0
        ev = _herm_eigvals_small(D)
        neg += int(np.count_nonzero(ev < 0.0))
        if k == N - 1:
            break
        if np.abs(ev).min() < bump:
            D = D + (2.0 * bump) * I
        fac = _lu_factor_small(D)
        if fac is None:
            D = D + (2.0 * bump) * I
            fac = _lu_factor_small(D)
        A = np.asarray(offdiag_blocks[k], dtype=np.complex128)
        D = np.asarray(diag_blocks[k + 1], dtype=np.complex128) - x * I \
            - A.conj().T @ _lu_solve_small(fac, A)
    return neg


def _gershgorin_bounds(diag_blocks, offdiag_blocks):
    N = len(diag_blocks)
    lo = np.inf
    hi = -np.inf
    for k in range(N):
        ev = _herm_eigvals_small(np.asarray(diag_blocks[k], dtype=np.complex128))
        r = 0.0
        if k > 0:
            r += spectral_norm(offdiag_blocks[k - 1])
        if k < N - 1:
            r += spectral_norm(offdiag_blocks[k])
        lo = min(lo, ev[0] - r)
        hi = max(hi, ev[-1] + r)
    return lo, hi


def tridiag_kth_eigenvalue(trunc, k: int, tol: float | None = None) -> float:
    """k-th smallest eigenvalue (1-based) by inertia bisection."""
    diag_blocks, offdiag_blocks = _unpack_blocks(trunc)
    N = len(diag_blocks)
    d = diag_blocks[0].shape[0]
    if not 1 <= k <= N * d:
        raise ValueError(f"eigenvalue index {k} out of range 1..{N * d}")
    lo, hi = _gershgorin_bounds(diag_blocks, offdiag_blocks)
    if tol is None:
        tol = 1e-13 * max(1.0, abs(lo), abs(hi))
    lo -= tol
    hi += tol
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if tridiag_count_below((diag_blocks, offdiag_blocks), mid) >= k:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def tridiag_eigs_below(trunc, b: float, tol: float | None = None) -> np.ndarray:
    """All eigenvalues of T strictly below b, ascending."""
    blocks = _unpack_blocks(trunc)
    count = tridiag_count_below(blocks, b)
    return np.array([tridiag_kth_eigenvalue(blocks, i, tol)
                     for i in range(1, count + 1)])


def tridiag_inverse_iteration(trunc, lam: float,
                              start=None, n_iter: int = 6,
                              ortho=()) -> tuple[np.ndarray, float]:
    """Unit eigenvector for an eigenvalue estimate lam, plus Rayleigh value.

    Solves against a shift nudged off lam by 1e-11 * scale.  Starting from a
    vector supported on the first block keeps the exponentially small tail
    componentwise accurate (the back substitution propagates relative, not
    absolute, precision).  Vectors in `ortho` are projected out each step,
    which resolves members of a degenerate cluster one at a time.
    """
    blocks = _unpack_blocks(trunc)
    diag_blocks, offdiag_blocks = blocks
    N = len(diag_blocks)
    d = diag_blocks[0].shape[0]
    scale = max(_block_scale(diag_blocks, offdiag_blocks), abs(lam))
    sigma = lam + 1e-11 * scale
    lu = block_tridiag_factor(blocks, sigma, check_conditioning=False)
    if start is None:
        x = np.zeros(N * d, dtype=np.complex128)
        x[:d] = 1.0 / np.sqrt(d)
    else:
        x = np.asarray(start, dtype=np.complex128).copy()
    for _ in range(n_iter):
        x = lu.solve(x)
        for o in ortho:
            x = x - (np.vdot(o, x)) * o
        nrm = vector_norm(x)
        if nrm == 0.0 or not np.isfinite(nrm):
            raise ArithmeticError("inverse iteration produced a null vector")
        x = x / nrm
    rq = float(np.real(np.vdot(x, tridiag_apply(blocks, x))))
    return x, rq


# ---------------------------------------------------------------------------
# Polynomial roots: Aberth-Ehrlich simultaneous iteration
# ---------------------------------------------------------------------------

def _horner(coeffs_desc, z):
    p = np.full_like(z, coeffs_desc[0])
    for c in coeffs_desc[1:]:
        p = p * z + c
    return p


def poly_roots(coeffs, max_iter: int = 300) -> np.ndarray:
    """All complex roots of p(z) = sum_i coeffs[i] * z^i, degree <= 8.

    Aberth-Ehrlich iteration started on a circle of radius
    1 + max|c_i / c_lead| with a fixed 0.4 rad angular offset, so runs are
    deterministic.  Roots come back sorted by (real, imag).  Residuals are
    validated against 1e-10 times a per-root magnitude scale; failure to
    converge raises RootConvergenceError.
    """
    c = np.asarray(coeffs, dtype=np.complex128)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("coefficients must be a nonempty 1-d sequence")
    if c[-1] == 0:
        raise ValueError("leading coefficient must be nonzero")
    deg = c.size - 1
    if deg > 8:
        raise ValueError("degree > 8 not supported")
    if deg == 0:
        return np.zeros(0, dtype=np.complex128)

    radius = 1.0 + float(np.max(np.abs(c[:-1] / c[-1])))
    angles = 2.0 * np.pi * np.arange(deg) / deg + 0.4
    z = radius * np.exp(1j * angles)
    cd = c[::-1]
    dd = (c[1:] * np.arange(1, deg + 1))[::-1]

    converged = False
    for _ in range(max_iter):
        p = _horner(cd, z)
        dp = _horner(dd, z)
        dp = np.where(dp == 0, 1e-300, dp)
        w = p / dp
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv_sum = (1.0 / diff).sum(axis=1) - 1.0  # remove the diagonal 1/1 terms
        corr = w / (1.0 - w * inv_sum)
        z = z - corr
        if np.all(np.abs(corr) <= 1e-14 * (1.0 + np.abs(z))):
            converged = True
            break

    res = np.abs(_horner(cd, z))
    scale = _horner(np.abs(cd), np.abs(z))
    if not converged and np.any(res > 1e-10 * np.maximum(scale, 1e-300)):
        raise RootConvergenceError(res)
    order = np.lexsort((z.imag, z.real))
    return z[order]
