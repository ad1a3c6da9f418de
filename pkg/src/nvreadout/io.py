"""CSV and JSON serialization of simulation artifacts.

All floats are written with ``repr`` (shortest round-trip form), so files
regenerate byte-identically for identical inputs and parse back bit-exactly.
Files are written atomically (temp file + rename).
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .harness import OloResult, SweepResult
from .optimizer import OptimizerState
from .pumpsim import PumpTrace
from .rabi import RabiCurve
from .waveform import AmplitudeBounds, PiecewiseWaveform


def _fmt(x) -> str:
    return repr(float(x))


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_rows(path: str | Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path: str | Path, payload: dict) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_waveform_csv(wf: PiecewiseWaveform, path: str | Path) -> None:
    width = wf.piece_width_ns
    rows = (
        [str(i), _fmt(i * width), _fmt(width), _fmt(a)]
        for i, a in enumerate(wf.amplitudes)
    )
    _write_rows(path, ["piece_index", "start_ns", "width_ns", "amplitude"], rows)


def read_waveform_csv(path: str | Path,
                      bounds: AmplitudeBounds | None = None) -> PiecewiseWaveform:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "amplitude" not in reader.fieldnames:
            raise ConfigurationError(f"{path}: not a waveform CSV")
        widths, amps = [], []
        for row in reader:
            widths.append(float(row["width_ns"]))
            amps.append(float(row["amplitude"]))
    if not amps:
        raise ConfigurationError(f"{path}: empty waveform CSV")
    if max(widths) - min(widths) > 1e-9 * max(widths):
        raise ConfigurationError(f"{path}: piece widths are not all equal")
    duration = widths[0] * len(amps)
    return PiecewiseWaveform(duration, np.array(amps),
                             bounds if bounds is not None else AmplitudeBounds())


def write_pair_trace_csv(trace0: PumpTrace, trace1: PumpTrace,
                         path: str | Path) -> None:
    rows = (
        [_fmt(t), _fmt(c0), _fmt(c1), _fmt(c0 - c1)]
        for t, c0, c1 in zip(trace0.bin_starts_ns,
                             trace0.expected_counts_per_rep,
                             trace1.expected_counts_per_rep)
    )
    _write_rows(path, ["bin_start_ns", "expected_counts_per_rep_branch0",
                       "expected_counts_per_rep_branch1", "diff"], rows)


def write_sweep_grid_csv(result: SweepResult, path: str | Path) -> None:
    def rows():
        for i, amp in enumerate(result.spec.amplitudes):
            for j, dur in enumerate(result.spec.durations_ns):
                yield [_fmt(amp), _fmt(dur), _fmt(result.grid[i, j])]
    _write_rows(path, ["power", "duration_ns", result.spec.metric], rows())


def write_sweep_projection_csv(result: SweepResult, path: str | Path) -> None:
    metric = result.spec.metric
    rows = (
        [_fmt(a), _fmt(v), _fmt(d)]
        for a, v, d in zip(result.spec.amplitudes, result.best_per_amplitude,
                           result.best_duration_per_amplitude)
    )
    _write_rows(path, ["power", f"best_{metric}", "best_duration_ns"], rows)


def write_optimizer_log(state: OptimizerState, path: str | Path) -> None:
    """One JSON record per objective query, in query order."""
    lines = [json.dumps(rec.as_dict(), sort_keys=True) for rec in state.history]
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_rabi_curve_csv(curve: RabiCurve, path: str | Path) -> None:
    fit_y = curve.fit.predict(curve.taus_ns) if curve.fit is not None \
        else np.full_like(curve.signals, np.nan)
    rows = (
        [_fmt(t), _fmt(y), _fmt(f), _fmt(abs(y - f))]
        for t, y, f in zip(curve.taus_ns, curve.signals, fit_y)
    )
    _write_rows(path, ["tau_ns", "y", "fit_y", "deviation"], rows)


def olo_summary_dict(result: OloResult) -> dict:
    return {
        "init_amplitude": result.init_amplitude,
        "start_snr": result.start_snr,
        "baseline_snr": result.baseline_snr,
        "final_snr": result.final_snr,
        "improvement_ratio": result.improvement_ratio,
        "queries": result.state.queries,
        "cycles": result.state.iterations,
        "final_alpha": result.state.alpha,
        "budget_exhausted": result.state.budget_exhausted,
        "best_value_as_queried": result.state.best_value,
    }
