"""Scratch calibration sweep over candidate default rate sets (not shipped)."""
import time
import numpy as np
import nvreadout as nv
from dataclasses import replace


def assess(k_isc0, k_isc1, eta, seeds=20, verbose=False):
    params = nv.RateParams(k_isc0=k_isc0, k_isc1=k_isc1, eta=eta)
    base = nv.SequenceConfig(
        init_wf=nv.make_constant(1000.0, 0.2), wait_ns=1500.0,
        readout_wf=nv.make_constant(920.0, 0.2, 20), bin_width_ns=46.0,
        repetitions=1e8,
    )
    amps = np.linspace(0.02, 1.0, 20)
    durs = np.linspace(400.0, 2000.0, 20)
    s_snr = nv.run_sweep(nv.SweepSpec(amplitudes=amps, durations_ns=durs,
                                      base=base, mode='global', metric='snr'), params)
    s_con = nv.run_sweep(nv.SweepSpec(amplitudes=amps, durations_ns=durs,
                                      base=base, mode='global', metric='contrast'), params)
    proj = s_snr.best_per_amplitude
    i = int(np.nanargmax(proj))
    shape_ok = (0 < i < len(proj) - 1 and np.all(np.diff(proj[:i + 1]) > 0)
                and np.all(np.diff(proj[i:]) < 0))

    olo = nv.run_olo(nv.OloSpec(base=base, params=params,
        optimizer=nv.OptimizerConfig(alpha0=0.1, rho=0.5, alpha_min=1e-3,
                                     max_queries=5000),
        start_duration_ns=920.0, start_amplitude=0.02, n_read=20),
        baseline=s_snr)

    omega = 2 * np.pi / 200.0
    taus = np.linspace(0.0, 600.0, 61)
    wf_cs = nv.make_constant(s_snr.best_duration_ns, s_snr.best_amplitude)
    wf_cc = nv.make_constant(s_con.best_duration_ns, s_con.best_amplitude)
    init_olo = nv.make_constant(1000.0, olo.init_amplitude)

    def scheme_base(init_wf, readout_wf, N):
        return replace(base, init_wf=init_wf, readout_wf=readout_wf,
                       bin_width_ns=readout_wf.duration_ns, repetitions=N)

    def mk(source, init_wf, readout_wf, N, stochastic, seed):
        return nv.RabiConfig(omega_rad_per_ns=omega, taus_ns=taus,
                             base=scheme_base(init_wf, readout_wf, N),
                             source=source, stochastic=stochastic, sample_seed=seed)

    det = nv.compare_schemes({
        'olo-snr': mk('olo-snr', init_olo, olo.waveform, 1e8, False, 0),
        'constant-snr': mk('constant-snr', wf_cs, wf_cs, 1e8, False, 0),
        'constant-contrast': mk('constant-contrast', wf_cc, wf_cc, 1e8, False, 0),
    }, params)

    ok1 = ok2 = 0
    for seed in range(seeds):
        comp = nv.compare_schemes({
            'olo-snr': mk('olo-snr', init_olo, olo.waveform, 1e6, True, 100 + seed),
            'constant-snr': mk('constant-snr', wf_cs, wf_cs, 1e6, True, 200 + seed),
            'constant-contrast': mk('constant-contrast', wf_cc, wf_cc, 1e6, True, 300 + seed),
        }, params)
        ok1 += comp.orderings['olo_contrast_above_constant_snr']
        ok2 += comp.orderings['olo_meandev_below_constant_contrast']

    L0cs = nv.pair_window_counts(scheme_base(wf_cs, wf_cs, 1e8), params)[0] / 1e8
    L0olo = nv.pair_window_counts(scheme_base(init_olo, olo.waveform, 1e8), params)[0] / 1e8
    L0cc = nv.pair_window_counts(scheme_base(wf_cc, wf_cc, 1e8), params)[0] / 1e8

    print(f"isc0={k_isc0} isc1={k_isc1} eta={eta}: shape_ok={shape_ok} peak_idx={i} "
          f"baseline={s_snr.best_value:.1f} olo={olo.final_snr:.1f} "
          f"improve={olo.improvement_ratio:+.3f}")
    print(f"    counts/rep: c-snr {L0cs:.4f} olo {L0olo:.4f} cc {L0cc:.4f} "
          f"(cc at amp {s_con.best_amplitude:.3f})")
    print(f"    contrasts det: olo {det.contrasts['olo-snr']:.3f} "
          f"c-snr {det.contrasts['constant-snr']:.3f} cc {det.contrasts['constant-contrast']:.3f}")
    print(f"    stochastic: contrast-order {ok1}/{seeds}  meandev-order {ok2}/{seeds}")
    if verbose:
        print('    olo waveform:', np.round(olo.waveform.amplitudes, 3))
        print('    snr proj:', np.round(proj, 1))
    return shape_ok, olo.improvement_ratio, ok1, ok2


if __name__ == '__main__':
    t0 = time.time()
    for isc1 in (0.08, 0.05, 0.04, 0.03):
        assess(0.011, isc1, 0.005, verbose=(isc1 == 0.04))
    print(f'total {time.time() - t0:.1f}s')
