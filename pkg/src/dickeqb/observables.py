"""Figures of merit: stored energy, charging power, fluctuation, magnetization.

All battery observables derive from the diagonal operator J_z, so they are
evaluated from cached diagonals in O(dim) per sample instead of sparse
matvecs.  The ground-state solver for the (eta, g) phase diagram lives here
as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from dickeqb.errors import ContractError, NumericalError, ResourceError
from dickeqb.operators import HilbertDims, SparseOperator, StateVector

VARIANCE_FLOOR = -1e-10
DEGENERACY_GAP = 1e-10
RESIDUAL_LIMIT = 1e-8

# Above this dimension the solver tries ARPACK first; below it dense
# diagonalization is both faster and unconditionally robust.
DENSE_SOLVER_DIM = 32
DENSE_FALLBACK_MAX_DIM = 4096


@lru_cache(maxsize=32)
def _jz_diagonal(dims: HilbertDims) -> np.ndarray:
    """Diagonal of J_z over the joint basis (J_z is diagonal by construction)."""
    n, bdim = dims.n_atoms, dims.boson_dim
    spin_idx = np.arange(dims.spin_dim)
    # popcount of the big-endian site bits = number of excited atoms
    excited = np.array([bin(s).count("1") for s in spin_idx], dtype=float)
    jz_spin = excited - n / 2.0
    out = np.repeat(jz_spin, bdim)
    out.flags.writeable = False
    return out


def jz_mean(state: StateVector) -> float:
    """<J_z> on the joint state."""
    diag = _jz_diagonal(state.dims)
    prob = np.abs(state.amplitudes) ** 2
    return float(diag @ prob)


def _jz_moments(state: StateVector) -> tuple[float, float]:
    diag = _jz_diagonal(state.dims)
    prob = np.abs(state.amplitudes) ** 2
    return float(diag @ prob), float((diag * diag) @ prob)


def stored_energy(state_t: StateVector, params) -> float:
    """Energy gained by the battery relative to the all-ground start.

    Equals omega0 * (<J_z>_t + N/2); bounded by [0, N*omega0] up to rounding.
    """
    return params.omega0 * (jz_mean(state_t) + params.N / 2.0)


def charging_power(E_b: float, t: float) -> float:
    """Average charging power E_b / t, defined as 0 at t = 0."""
    if t < 0:
        raise ContractError(f"charging power needs t >= 0, got {t}")
    if t == 0.0:
        return 0.0
    return E_b / t


def _hb_std(state: StateVector, omega0: float) -> float:
    m1, m2 = _jz_moments(state)
    var = omega0**2 * (m2 - m1 * m1)
    if var < VARIANCE_FLOOR:
        raise NumericalError(f"negative battery-energy variance {var:.3e}")
    return float(np.sqrt(max(var, 0.0)))


def energy_fluctuation(state_t: StateVector, state_0: StateVector, params) -> float:
    """Growth of the battery-energy standard deviation since t = 0.

    Computed as sqrt(Var(H_b))_t - sqrt(Var(H_b))_0 with H_b = omega0 J_z.
    (At omega0 = 1 this coincides with the conventional definition that
    carries an extra overall omega0 factor.)
    """
    return _hb_std(state_t, params.omega0) - _hb_std(state_0, params.omega0)


def magnetization(state: StateVector) -> float:
    """<J_z> / (N/2): -1 all ground, 0 equal population, +1 all excited."""
    return jz_mean(state) / (state.dims.n_atoms / 2.0)


@dataclass(frozen=True)
class GroundStateResult:
    """Lowest eigenpair of the static Hamiltonian plus the order parameter."""

    energy: float
    state: StateVector
    magnetization: float
    gap: float
    degenerate: bool


def _dense_lowest_pair(mat) -> tuple[np.ndarray, np.ndarray]:
    dense = mat.toarray()
    vals, vecs = scipy.linalg.eigh(dense, subset_by_index=[0, min(1, dense.shape[0] - 1)])
    return vals, vecs


def ground_state(H_static: SparseOperator, method: str = "auto") -> GroundStateResult:
    """Lowest eigenpair of the undriven Hamiltonian.

    ``method``: "auto" uses ARPACK above DENSE_SOLVER_DIM with a dense
    fallback (dimensions up to 4096) on non-convergence; "lanczos" and
    "dense" force one path.  The ARPACK start vector is fixed so repeated
    runs are bitwise reproducible.
    """
    if not H_static.hermitian:
        raise ContractError("ground_state requires a Hermitian operator")
    dims = H_static.dims
    n = dims.total_dim

    use_dense = method == "dense" or (method == "auto" and n <= DENSE_SOLVER_DIM)
    vals = vecs = None
    if not use_dense:
        v0 = np.full(n, 1.0 / np.sqrt(n), dtype=complex)
        k = min(2, n - 1)
        try:
            vals, vecs = spla.eigsh(H_static.mat, k=k, which="SA", v0=v0, maxiter=50 * n)
            order = np.argsort(vals)
            vals, vecs = vals[order], vecs[:, order]
        except (spla.ArpackNoConvergence, spla.ArpackError) as exc:
            if method == "lanczos" or n > DENSE_FALLBACK_MAX_DIM:
                raise NumericalError(f"eigensolver did not converge: {exc}") from exc
            use_dense = True
    if use_dense:
        if n > DENSE_FALLBACK_MAX_DIM:
            raise ResourceError(f"dense diagonalization capped at {DENSE_FALLBACK_MAX_DIM}, got {n}")
        vals, vecs = _dense_lowest_pair(H_static.mat)

    energy = float(vals[0])
    vec = np.ascontiguousarray(vecs[:, 0])
    vec = vec / np.linalg.norm(vec)
    residual = float(np.linalg.norm(H_static.mat.dot(vec) - energy * vec))
    if residual > RESIDUAL_LIMIT:
        raise NumericalError(f"ground-state residual {residual:.3e} exceeds {RESIDUAL_LIMIT}")
    gap = float(vals[1] - vals[0]) if len(vals) > 1 else float("inf")
    state = StateVector(dims, vec)
    return GroundStateResult(
        energy=energy,
        state=state,
        magnetization=magnetization(state),
        gap=gap,
        degenerate=gap < DEGENERACY_GAP,
    )
