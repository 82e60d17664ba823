"""Complex linear algebra on small tensor-product Hilbert spaces.

Matrices are ``numpy`` complex arrays, or CSR matrices for the large
oscillator pairs. Everything here is a pure function of its inputs.
"""
from __future__ import annotations

from functools import reduce as _fold
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import expm_multiply

HERMITIAN_TOL = 1e-10

# blocks above this size are propagated with a sparse Krylov-type action
# instead of a dense eigendecomposition (cost of eigh grows as n^3)
DENSE_BLOCK_LIMIT = 1100


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


# operators on spaces larger than this are stored as CSR sparse matrices
SPARSE_OPERATOR_DIM = 2048


def as_matrix(x) -> np.ndarray:
    m = getattr(x, "matrix", x)
    if sp.issparse(m):
        return m.toarray().astype(complex)
    return np.asarray(m, dtype=complex)


def as_operand(x):
    """Dense array or CSR matrix, whichever the input already is."""
    m = getattr(x, "matrix", x)
    if sp.issparse(m):
        return m.tocsr().astype(complex)
    return np.asarray(m, dtype=complex)


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(mats: Sequence) -> np.ndarray:
    return _fold(np.kron, [as_matrix(m) for m in mats])


def hermiticity_defect(m) -> float:
    """max |M[i,j] - conj(M[j,i])|."""
    m = as_operand(m)
    if sp.issparse(m):
        diff = m - m.conj().T
        return float(abs(diff).max()) if diff.nnz else 0.0
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"square matrix required, got shape {m.shape}")
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - m.conj().T)))


def check_hermitian(m, tol: float = HERMITIAN_TOL):
    m = as_operand(m)
    d = hermiticity_defect(m)
    if d > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max asymmetry {d:.3e} > {tol:.1e})")
    return m


def evolve_unitary(h, t: float) -> np.ndarray:
    """Return exp(-i t h) for Hermitian ``h`` via eigendecomposition."""
    h = as_matrix(check_hermitian(h))
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def partial_trace(q, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every tensor factor of ``q`` whose index is not in ``keep``.

    ``dims`` lists the factor dimensions in tensor order. The kept factors
    stay in their original order.
    """
    q = as_matrix(q)
    dims = [int(d) for d in dims]
    n = int(np.prod(dims))
    if q.shape != (n, n):
        raise DimensionError(f"operator shape {q.shape} does not match factor dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {len(dims)} factors")
    nf = len(dims)
    t = q.reshape(dims + dims)
    traced = [i for i in range(nf) if i not in keep]
    # trace highest index first so remaining axis numbers stay valid
    for i in sorted(traced, reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + cur)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(dk, dk)


def hs_distance(a, b) -> float:
    """Hilbert-Schmidt (Frobenius) norm of a - b."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def commutator(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    return a @ b - b @ a


def apply_local(q, psi: np.ndarray, dims: Sequence[int], factor: int) -> np.ndarray:
    """Apply a single-factor operator to state vectors without building q⊗I.

    ``psi`` has shape (n,) or (n, k) with n = prod(dims).
    """
    q = as_matrix(q)
    dims = [int(d) for d in dims]
    vec = psi.ndim == 1
    cols = psi.reshape(psi.shape[0], -1)
    k = cols.shape[1]
    t = cols.reshape(dims + [k])
    t = np.moveaxis(np.tensordot(q, t, axes=([1], [factor])), 0, factor)
    out = t.reshape(-1, k)
    return out[:, 0] if vec else out


class Propagator:
    """exp(-i t H) acting on vectors, for a fixed Hermitian H.

    H is split into the connected blocks of its sparsity graph (number or
    parity sectors, typically). Blocks up to ``dense_limit`` are diagonalized
    once; larger ones go through ``scipy.sparse.linalg.expm_multiply``.
    """

    def __init__(self, h, dense_limit: int = DENSE_BLOCK_LIMIT):
        h = check_hermitian(h)
        hs = sp.csr_matrix(h)
        hs.eliminate_zeros()
        self.dim = hs.shape[0]
        ncomp, labels = connected_components(abs(hs), directed=False)
        self.blocks = []
        for c in range(ncomp):
            idx = np.flatnonzero(labels == c)
            hb = hs[idx][:, idx]
            if len(idx) <= dense_limit:
                hb = hb.toarray()
                w, v = np.linalg.eigh(0.5 * (hb + hb.conj().T))
                self.blocks.append(("eig", idx, (w, v)))
            else:
                self.blocks.append(("krylov", idx, hb.tocsr()))

    def apply(self, psi: np.ndarray, t: float) -> np.ndarray:
        return self.apply_grid(psi, [t])[0]

    def apply_grid(self, psi: np.ndarray, times) -> np.ndarray:
        """exp(-i t H) psi for every t; result has shape (len(times),) + psi.shape."""
        psi = np.asarray(psi, dtype=complex)
        times = np.asarray(times, dtype=float).ravel()
        out = np.zeros((len(times),) + psi.shape, dtype=complex)
        zero = times == 0
        out[zero] = psi  # exact identity at t = 0
        for kind, idx, data in self.blocks:
            sub = psi[idx]
            if not np.any(sub):
                continue
            if kind == "eig":
                w, v = data
                c = v.conj().T @ sub
                for n, t in enumerate(times):
                    if zero[n]:
                        continue
                    phase = np.exp(-1j * t * w)
                    out[n][idx] = v @ (c * (phase[:, None] if c.ndim == 2 else phase))
            else:
                res = _krylov_grid(data, sub, times)
                res[zero] = sub
                out[:, idx] = res
        return out

    def unitary(self, t: float) -> np.ndarray:
        return self.apply(np.eye(self.dim, dtype=complex), t)


def _krylov_grid(hb, sub: np.ndarray, times: np.ndarray) -> np.ndarray:
    a = -1j * hb
    if len(times) == 1:
        return expm_multiply(a * times[0], sub)[None]
    steps = np.diff(times)
    if np.allclose(steps, steps[0], rtol=1e-12, atol=1e-14) and steps[0] > 0:
        return expm_multiply(a, sub, start=times[0], stop=times[-1],
                             num=len(times), endpoint=True)
    return np.stack([expm_multiply(a * t, sub) for t in times])
