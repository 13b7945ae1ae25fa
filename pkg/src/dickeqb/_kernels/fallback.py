"""Pure NumPy/SciPy implementation of the exponential-apply kernel.

Mirrors ``_core.expm_taylor_apply`` term by term; used whenever the
compiled extension is unavailable (or explicitly requested).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


class TaylorApplier:
    """exp(M) @ v for CSR matrices sharing one fixed sparsity pattern."""

    def __init__(self, indptr, indices, dim: int):
        self._mat = sp.csr_matrix(
            (np.zeros(len(indices), dtype=np.complex128), indices.copy(), indptr.copy()),
            shape=(dim, dim),
        )

    def apply(self, data, v, segments: int, tol: float, max_terms: int):
        """Return (result, terms_used); terms_used is -1 on non-convergence."""
        mat = self._mat
        mat.data = data
        out = v.astype(np.complex128, copy=True)
        used = -1
        for _ in range(segments):
            term = out.copy()
            converged = False
            for m in range(1, max_terms + 1):
                term = mat.dot(term)
                term *= 1.0 / (segments * m)
                out += term
                if np.linalg.norm(term) <= tol * np.linalg.norm(out):
                    converged = True
                    used = m
                    break
            if not converged:
                return out, -1
        return out, used
