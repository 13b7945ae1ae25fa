"""Trajectory post-processing: maxima, scaling fits, truncation audits."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from dickeqb.dynamics import PropagationConfig, Trajectory, propagate
from dickeqb.errors import DomainError
from dickeqb.model import ModelParams

CONVERGENCE_THRESHOLD = 1e-5  # documented truncation-error target at N_ph = 4N

SERIES_NAMES = ("E_b", "P_b")


@dataclass(frozen=True)
class MaxRecord:
    """Location and value of a series maximum (parabolically refined)."""

    t_star: float
    value: float
    series_name: str


@dataclass(frozen=True)
class FitResult:
    """Power-law fit P = beta * N^alpha obtained by log-log least squares."""

    alpha: float
    beta: float
    r_squared: float
    n_points: int


def find_max(trajectory: Trajectory, series: str) -> MaxRecord:
    """Maximum of E_b or P_b over the sampled grid.

    The grid argmax is refined by a parabola through the three bracketing
    samples; a maximum on the grid boundary is returned as-is.  Ties break
    toward the earliest time.
    """
    if series not in SERIES_NAMES:
        raise DomainError(f"series must be one of {SERIES_NAMES}, got {series!r}")
    values = getattr(trajectory, series)
    times = trajectory.times
    if len(values) == 0:
        raise DomainError("empty trajectory")
    i = int(np.argmax(values))
    t_star, value = float(times[i]), float(values[i])
    if 0 < i < len(values) - 1 and values[i] > values[i - 1] and values[i] > values[i + 1]:
        tl, tc, tr = times[i - 1], times[i], times[i + 1]
        vl, vc, vr = values[i - 1], values[i], values[i + 1]
        num = (tc - tl) ** 2 * (vc - vr) - (tc - tr) ** 2 * (vc - vl)
        den = (tc - tl) * (vc - vr) - (tc - tr) * (vc - vl)
        if den != 0.0:
            t_star = float(tc - 0.5 * num / den)
            # quadratic through the three samples, evaluated at the vertex
            value = float(
                vl * (t_star - tc) * (t_star - tr) / ((tl - tc) * (tl - tr))
                + vc * (t_star - tl) * (t_star - tr) / ((tc - tl) * (tc - tr))
                + vr * (t_star - tl) * (t_star - tc) / ((tr - tl) * (tr - tc))
            )
    return MaxRecord(t_star=t_star, value=value, series_name=series)


def _least_squares(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) @ (y - y.mean())))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), min(max(r2, 0.0), 1.0)


def fit_power_law(Ns, P_maxes) -> FitResult:
    """Least squares on (log N, log P): alpha = slope, beta = exp(intercept)."""
    n_arr = np.asarray(Ns, dtype=float)
    p_arr = np.asarray(P_maxes, dtype=float)
    if n_arr.shape != p_arr.shape or n_arr.ndim != 1:
        raise DomainError("Ns and P_maxes must be 1-d sequences of equal length")
    if len(n_arr) < 3:
        raise DomainError(f"power-law fit needs at least 3 points, got {len(n_arr)}")
    if np.any(n_arr <= 0) or np.any(p_arr <= 0):
        raise DomainError("power-law fit requires strictly positive values")
    slope, intercept, r2 = _least_squares(np.log(n_arr), np.log(p_arr))
    return FitResult(alpha=slope, beta=float(np.exp(intercept)), r_squared=r2,
                     n_points=len(n_arr))


def fit_linear(Ns, E_maxes) -> tuple[float, float, float]:
    """Ordinary least squares in linear coordinates: (slope, intercept, r^2)."""
    n_arr = np.asarray(Ns, dtype=float)
    e_arr = np.asarray(E_maxes, dtype=float)
    if n_arr.shape != e_arr.shape or n_arr.ndim != 1:
        raise DomainError("Ns and E_maxes must be 1-d sequences of equal length")
    if len(n_arr) < 3:
        raise DomainError(f"linear fit needs at least 3 points, got {len(n_arr)}")
    return _least_squares(n_arr, e_arr)


def convergence_check(params: ModelParams, delta_ph: int,
                      cfg: PropagationConfig | None = None) -> float:
    """Photon-truncation audit: rerun with N_ph + delta_ph on the same grid.

    Returns the worst absolute deviation across the E_b, P_b and dE_b series.
    """
    if delta_ph < 1:
        raise DomainError(f"delta_ph must be >= 1, got {delta_ph}")
    cfg = cfg or PropagationConfig()
    base = replace(params, N_ph=params.photon_cutoff)
    wider = replace(params, N_ph=params.photon_cutoff + delta_ph)
    traj_a = propagate(base, cfg)
    traj_b = propagate(wider, cfg)
    worst = 0.0
    for name in ("E_b", "P_b", "dE_b"):
        dev = np.abs(getattr(traj_a, name) - getattr(traj_b, name)).max()
        worst = max(worst, float(dev))
    return worst
