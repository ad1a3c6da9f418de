"""Rabi-oscillation measurements under different readout waveforms.

A resonant microwave drive of duration tau rotates population between the
two ground sublevels before readout; sweeping tau traces out a sinusoid in
the detected counts.  The drive is modeled at the population level
(cos²/sin² transfer), which is all that optical readout of the populations
can see.  Contrast is evaluated on the fitted extrema and the mean absolute
deviation from the fit quantifies readout quality.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, FitError
from .metrics import SinusoidFit, fit_sinusoid, mean_deviation
from .photophysics import Level, RateParams
from .pumpsim import (
    SequenceConfig,
    prepared_states,
    propagate_waveform,
    sample_counts,
    window_expectation,
    _step,
)
from .photophysics import thermal_ground_state

SCHEME_SOURCES = ("olo-snr", "constant-snr", "constant-contrast")


@dataclass(frozen=True)
class RabiConfig:
    """One Rabi sweep using the readout/init pulses carried by ``base``."""

    omega_rad_per_ns: float
    taus_ns: np.ndarray
    base: SequenceConfig
    source: str = "constant-snr"
    stochastic: bool = False
    sample_seed: int = 0

    def __post_init__(self) -> None:
        taus = np.asarray(self.taus_ns, dtype=float).ravel()
        if taus.size == 0 or np.any(taus < 0):
            raise ConfigurationError("tau grid must be non-empty and non-negative")
        if not (np.isfinite(self.omega_rad_per_ns) and self.omega_rad_per_ns > 0):
            raise ConfigurationError(
                f"Rabi frequency must be positive, got {self.omega_rad_per_ns}")
        period = 2.0 * np.pi / self.omega_rad_per_ns
        if taus.max() - taus.min() < period:
            raise ConfigurationError(
                f"tau grid spans {taus.max() - taus.min():.1f} ns, "
                f"less than one Rabi period ({period:.1f} ns)")
        if self.source not in SCHEME_SOURCES:
            raise ConfigurationError(f"unknown waveform source {self.source!r}")
        taus.setflags(write=False)
        object.__setattr__(self, "taus_ns", taus)


@dataclass(frozen=True)
class RabiCurve:
    """Normalized Rabi signals with fit, contrast, and deviation."""

    taus_ns: np.ndarray
    signals: np.ndarray            # normalized to the maximal-count point
    counts: np.ndarray             # raw window totals per tau
    fit: SinusoidFit | None
    contrast: float | None         # from fitted extrema, (max-min)/max
    mean_dev: float | None
    fit_message: str | None = None


def _rotate_ground(p: np.ndarray, angle: float) -> np.ndarray:
    """Population transfer of a resonant MW pulse of rotation angle Ω·tau."""
    q = p.copy()
    c2 = np.cos(0.5 * angle) ** 2
    s2 = 1.0 - c2
    q[Level.G0] = p[Level.G0] * c2 + p[Level.G1] * s2
    q[Level.G1] = p[Level.G0] * s2 + p[Level.G1] * c2
    return q


def rabi_expectations(cfg: RabiConfig, params: RateParams) -> np.ndarray:
    """Expected window totals L(tau) over all repetitions, no sampling.

    The init+wait state is computed once; each tau only applies the ground
    rotation and re-runs the readout integral.
    """
    base = cfg.base
    p_ready = propagate_waveform(thermal_ground_state(), base.init_wf, params)
    p_ready, _ = _step(p_ready, params, 0.0, base.wait_ns)
    offset = base.detection_offset_ns
    width = base.effective_detection_width_ns
    L = np.empty(cfg.taus_ns.size)
    for k, tau in enumerate(cfg.taus_ns):
        p = _rotate_ground(p_ready, cfg.omega_rad_per_ns * float(tau))
        L[k] = base.repetitions * window_expectation(p, base.readout_wf, params,
                                                     offset, width)
    return L


def realize_curve(cfg: RabiConfig, expected: np.ndarray) -> RabiCurve:
    """Turn expected totals into a (possibly sampled) fitted Rabi curve."""
    counts = expected.astype(float).copy()
    if cfg.stochastic:
        counts = np.array([
            float(sample_counts(mu, (cfg.sample_seed << 32) + k))
            for k, mu in enumerate(expected)
        ])
    ref = counts.max()
    if ref <= 0:
        raise ConfigurationError("no photons detected at any tau")
    signals = counts / ref
    try:
        fit = fit_sinusoid(cfg.taus_ns, signals)
    except FitError as exc:
        return RabiCurve(taus_ns=cfg.taus_ns, signals=signals, counts=counts,
                         fit=None, contrast=None, mean_dev=None,
                         fit_message=str(exc))
    y_max = fit.offset + fit.amplitude
    y_min = fit.offset - fit.amplitude
    curve_contrast = (y_max - y_min) / y_max
    dev = mean_deviation(signals, fit, cfg.taus_ns)
    return RabiCurve(taus_ns=cfg.taus_ns, signals=signals, counts=counts,
                     fit=fit, contrast=float(curve_contrast), mean_dev=dev)


def simulate_rabi(cfg: RabiConfig, params: RateParams) -> RabiCurve:
    """Full Rabi sweep: expectations, optional shot noise, fit, metrics."""
    return realize_curve(cfg, rabi_expectations(cfg, params))


@dataclass(frozen=True)
class SchemeComparison:
    """Per-scheme Rabi metrics plus the headline orderings."""

    curves: dict[str, RabiCurve]
    contrasts: dict[str, float]
    mean_devs: dict[str, float]
    orderings: dict[str, bool]


def compare_schemes(cfgs: dict[str, RabiConfig], params: RateParams) -> SchemeComparison:
    """Run one Rabi sweep per readout scheme and compare the outcomes.

    ``cfgs`` maps each of the three scheme names ("olo-snr", "constant-snr",
    "constant-contrast") to a config whose ``base`` carries that scheme's
    init and readout waveforms.
    """
    missing = [s for s in SCHEME_SOURCES if s not in cfgs]
    if missing:
        raise ConfigurationError(f"missing scheme configs: {missing}")
    curves, contrasts, mean_devs = {}, {}, {}
    for name, cfg in cfgs.items():
        curve = simulate_rabi(cfg, params)
        if curve.fit is None:
            raise FitError(f"scheme {name!r}: {curve.fit_message}")
        curves[name] = curve
        contrasts[name] = curve.contrast
        mean_devs[name] = curve.mean_dev
    orderings = {
        "olo_contrast_above_constant_snr":
            contrasts["olo-snr"] > contrasts["constant-snr"],
        "olo_meandev_below_constant_contrast":
            mean_devs["olo-snr"] < mean_devs["constant-contrast"],
        "constant_contrast_above_constant_snr":
            contrasts["constant-contrast"] >= contrasts["constant-snr"],
    }
    return SchemeComparison(curves=curves, contrasts=contrasts,
                            mean_devs=mean_devs, orderings=orderings)
