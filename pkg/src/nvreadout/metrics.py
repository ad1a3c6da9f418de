"""Scalar figures of merit for spin readout.

``snr`` and ``contrast`` operate on window photon totals of the two spin
preparations; the sinusoid fitting utilities quantify how cleanly Rabi data
sit on the expected oscillation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import FitError, UndefinedMetricError


def snr(L0: float, L1: float) -> float:
    """Readout signal-to-noise ratio (L0 - L1) / sqrt(L0 + L1).

    L0 and L1 are total detected photons in the detection window, summed
    over the same number of repetitions for each spin preparation.
    """
    total = L0 + L1
    if total <= 0:
        raise UndefinedMetricError(f"SNR undefined for L0 + L1 = {total}")
    return (L0 - L1) / np.sqrt(total)


def contrast(L0: float, L1: float) -> float:
    """Relative fluorescence difference (L0 - L1) / L0."""
    if L0 <= 0:
        raise UndefinedMetricError(f"contrast undefined for L0 = {L0}")
    return (L0 - L1) / L0


@dataclass(frozen=True)
class SinusoidFit:
    """Least-squares fit of y = offset + amplitude * cos(omega * t + phase)."""

    offset: float
    amplitude: float          # >= 0
    omega: float              # rad/ns
    phase: float              # rad, in [-pi, pi)
    residual_norm: float      # ||y - fit(t)||_2

    def predict(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        return self.offset + self.amplitude * np.cos(self.omega * ts + self.phase)


def _linear_fit_at(omega: float, ts: np.ndarray, ys: np.ndarray):
    """Least-squares (offset, cos, sin) coefficients and residual at fixed omega."""
    design = np.column_stack([np.ones_like(ts), np.cos(omega * ts), np.sin(omega * ts)])
    coef, _, _, _ = np.linalg.lstsq(design, ys, rcond=None)
    residual = float(np.linalg.norm(ys - design @ coef))
    return coef, residual


def fit_sinusoid(ts, ys, omega_bounds: tuple[float, float] | None = None,
                 oversample: int = 24) -> SinusoidFit:
    """Fit a single sinusoid by grid search over frequency.

    For each trial frequency the remaining parameters are solved linearly on
    the basis {1, cos(wt), sin(wt)}; the frequency grid covers
    ``omega_bounds`` densely (``oversample`` points per 2π/span resolution
    element) and the best grid point is polished with a bounded scalar
    minimization of the residual.
    """
    ts = np.asarray(ts, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if ts.size != ys.size:
        raise FitError(f"length mismatch: {ts.size} times vs {ys.size} values")
    if ts.size < 8:
        raise FitError(f"need at least 8 samples, got {ts.size}")
    span = float(ts.max() - ts.min())
    if span <= 0:
        raise FitError("degenerate time axis: all sample times equal")
    if not (np.all(np.isfinite(ts)) and np.all(np.isfinite(ys))):
        raise FitError("non-finite samples")

    if omega_bounds is None:
        dt_min = float(np.min(np.diff(np.sort(ts))))
        if dt_min <= 0:
            dt_min = span / (ts.size - 1)
        omega_bounds = (2.0 * np.pi / span, np.pi / dt_min)
    lo, hi = omega_bounds
    if not (0 < lo < hi):
        raise FitError(f"invalid frequency bounds {omega_bounds}")

    step = 2.0 * np.pi / (span * oversample)
    grid = np.arange(lo, hi + step, step)
    residuals = np.array([_linear_fit_at(w, ts, ys)[1] for w in grid])
    i_best = int(np.argmin(residuals))

    w_lo = grid[max(i_best - 1, 0)]
    w_hi = grid[min(i_best + 1, grid.size - 1)]
    if w_hi > w_lo:
        res = minimize_scalar(
            lambda w: _linear_fit_at(w, ts, ys)[1],
            bounds=(w_lo, w_hi), method="bounded",
            options={"xatol": step * 1e-8},
        )
        omega = float(res.x)
        if res.fun > residuals[i_best]:
            omega = float(grid[i_best])
    else:
        omega = float(grid[i_best])

    coef, residual = _linear_fit_at(omega, ts, ys)
    offset, c, s = coef
    amplitude = float(np.hypot(c, s))
    # y = A + c*cos(wt) + s*sin(wt) = A + B*cos(wt + phi) with c = B cos(phi),
    # s = -B sin(phi)
    phase = float(np.arctan2(-s, c))
    if phase >= np.pi:
        phase -= 2.0 * np.pi
    return SinusoidFit(offset=float(offset), amplitude=amplitude, omega=omega,
                       phase=phase, residual_norm=residual)


def mean_deviation(ys, fit: SinusoidFit, ts) -> float:
    """Mean absolute residual between data and a fitted sinusoid."""
    ys = np.asarray(ys, dtype=float).ravel()
    ts = np.asarray(ts, dtype=float).ravel()
    if ys.size != ts.size:
        raise FitError(f"length mismatch: {ts.size} times vs {ys.size} values")
    return float(np.mean(np.abs(ys - fit.predict(ts))))
