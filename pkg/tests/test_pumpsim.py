import numpy as np
import pytest
from dataclasses import replace

import nvreadout as nv
from nvreadout import Level
from nvreadout.errors import ConfigurationError, ParameterError


class TestSimulatePump:
    def test_dark_waveform_all_bins_zero(self, params):
        wf = nv.make_constant(400.0, 0.0, 20)
        tr = nv.simulate_pump(nv.thermal_ground_state(), wf, params, 20.0)
        assert np.all(tr.expected_counts_per_rep == 0.0)

    def test_g0_first_bin_exceeds_g1(self, params):
        wf = nv.make_constant(500.0, 0.2)
        tr0 = nv.simulate_pump(nv.pure_state(Level.G0), wf, params, 50.0)
        tr1 = nv.simulate_pump(nv.pure_state(Level.G1), wf, params, 50.0)
        assert tr0.expected_counts_per_rep[0] > tr1.expected_counts_per_rep[0]

    def test_long_waveform_reaches_steady_state(self, params):
        wf = nv.make_constant(20_000.0, 0.4)
        tr = nv.simulate_pump(nv.thermal_ground_state(), wf, params, 1000.0)
        ss = nv.steady_state(
            nv.build_rate_matrix(params, params.amp_map.rate(0.4)))
        assert np.max(np.abs(tr.final_populations - ss)) < 1e-6

    def test_bin_refinement_preserves_totals(self, params):
        wf = nv.PiecewiseWaveform(800.0, np.array([0.8, 0.1, 0.4, 0.0]))
        coarse = nv.simulate_pump(nv.thermal_ground_state(), wf, params, 100.0)
        fine = nv.simulate_pump(nv.thermal_ground_state(), wf, params, 50.0)
        total_c = coarse.expected_counts_per_rep.sum()
        total_f = fine.expected_counts_per_rep.sum()
        assert total_f == pytest.approx(total_c, rel=1e-9)
        # per coarse bin as well
        pairs = fine.expected_counts_per_rep.reshape(-1, 2).sum(axis=1)
        assert np.allclose(pairs, coarse.expected_counts_per_rep, rtol=1e-9)

    def test_waveform_refinement_is_identity(self, params):
        # subdividing a constant pulse changes nothing
        t1 = nv.simulate_pump(nv.thermal_ground_state(),
                              nv.make_constant(920.0, 0.3, 1), params, 46.0)
        t20 = nv.simulate_pump(nv.thermal_ground_state(),
                               nv.make_constant(920.0, 0.3, 20), params, 46.0)
        assert np.allclose(t1.expected_counts_per_rep,
                           t20.expected_counts_per_rep, rtol=1e-9, atol=1e-18)
        assert np.allclose(t1.final_populations, t20.final_populations,
                           rtol=0, atol=1e-9)

    def test_inconsistent_binning_rejected(self, params):
        wf = nv.make_constant(100.0, 0.2)
        with pytest.raises(ConfigurationError):
            nv.simulate_pump(nv.thermal_ground_state(), wf, params, 33.0)

    def test_window_expectation_matches_binned_sum(self, params):
        wf = nv.PiecewiseWaveform(600.0, np.array([0.9, 0.2, 0.05]))
        tr = nv.simulate_pump(nv.thermal_ground_state(), wf, params, 50.0)
        full = nv.window_expectation(nv.thermal_ground_state(), wf, params)
        assert full == pytest.approx(tr.expected_counts_per_rep.sum(), rel=1e-12)
        sub = nv.window_expectation(nv.thermal_ground_state(), wf, params,
                                    offset_ns=100.0, width_ns=200.0)
        assert sub == pytest.approx(tr.expected_counts_per_rep[2:6].sum(),
                                    rel=1e-12)


class TestSimulatePair:
    def test_vanishing_init_makes_traces_coincide(self, params, base_seq):
        cfg = replace(base_seq, init_wf=nv.make_constant(1e-6, 0.2))
        tr0, tr1 = nv.simulate_pair(cfg, params)
        assert np.allclose(tr0.expected_counts_per_rep,
                           tr1.expected_counts_per_rep, rtol=1e-6)

    def test_difference_starts_positive_and_fades(self, params, base_seq):
        cfg = replace(base_seq, readout_wf=nv.make_constant(2000.0, 0.2),
                      bin_width_ns=100.0)
        tr0, tr1 = nv.simulate_pair(cfg, params)
        diff = tr0.expected_counts_per_rep - tr1.expected_counts_per_rep
        assert diff[0] > 0
        assert diff[-1] < 0.05 * diff[0]

    def test_repetitions_only_scale_window_totals(self, params, base_seq):
        tr0_a, _ = nv.simulate_pair(base_seq, params)
        tr0_b, _ = nv.simulate_pair(replace(base_seq, repetitions=2e8), params)
        assert np.array_equal(tr0_a.expected_counts_per_rep,
                              tr0_b.expected_counts_per_rep)

    def test_wait_drains_singlet(self, params, base_seq):
        p0, p1 = nv.prepared_states(base_seq, params)
        assert p0[Level.S] < 1e-3
        assert p1[Level.S] < 1e-3
        # the pi pulse swaps exactly the two ground populations
        assert p1[Level.G0] == p0[Level.G1]
        assert p1[Level.G1] == p0[Level.G0]


class TestWindowCounts:
    @staticmethod
    def synthetic_trace():
        return nv.PumpTrace(
            bin_starts_ns=np.arange(10) * 10.0,
            bin_width_ns=10.0,
            expected_counts_per_rep=np.full(10, 2.0e-3),
            final_populations=nv.thermal_ground_state(),
        )

    def test_zero_width(self):
        assert nv.window_counts(self.synthetic_trace(), 0.0, 0.0, 1e8) == 0.0

    def test_full_window_sums_everything(self):
        tr = self.synthetic_trace()
        assert nv.window_counts(tr, 0.0, 100.0, 1.0) == pytest.approx(0.02)

    def test_scaling_in_repetitions(self):
        tr = self.synthetic_trace()
        assert nv.window_counts(tr, 0.0, 100.0, 1e8) == pytest.approx(2.0e6)
        l1 = nv.window_counts(tr, 20.0, 50.0, 1.0)
        assert nv.window_counts(tr, 20.0, 50.0, 3e7) == pytest.approx(3e7 * l1)

    def test_misaligned_window_rejected(self):
        with pytest.raises(ConfigurationError):
            nv.window_counts(self.synthetic_trace(), 5.0, 20.0, 1.0)
        with pytest.raises(ConfigurationError):
            nv.window_counts(self.synthetic_trace(), 0.0, 13.0, 1.0)

    def test_out_of_range_window_rejected(self):
        with pytest.raises(ConfigurationError):
            nv.window_counts(self.synthetic_trace(), 50.0, 60.0, 1.0)


class TestSampleCounts:
    def test_zero_mean_always_zero(self):
        assert all(nv.sample_counts(0.0, seed) == 0 for seed in range(20))

    def test_seed_determinism(self):
        draws = {nv.sample_counts(1e6, 42) for _ in range(5)}
        assert len(draws) == 1

    def test_statistics_at_1e6(self):
        # 4-sigma band on the mean of 100 draws
        draws = np.array([nv.sample_counts(1e6, s) for s in range(100)])
        assert abs(draws.mean() - 1e6) < 4 * np.sqrt(1e6 / 100)

    def test_invalid_mean_rejected(self):
        with pytest.raises(ParameterError):
            nv.sample_counts(-1.0, 0)
        with pytest.raises(ParameterError):
            nv.sample_counts(np.inf, 0)


class TestSequenceConfig:
    def test_bin_width_must_divide_readout(self, base_seq):
        with pytest.raises(ConfigurationError):
            replace(base_seq, bin_width_ns=47.0)

    def test_detection_window_must_fit(self, base_seq):
        with pytest.raises(ConfigurationError):
            replace(base_seq, detection_offset_ns=500.0,
                    detection_width_ns=500.0)

    def test_default_window_covers_readout(self, base_seq):
        assert base_seq.effective_detection_width_ns == 920.0
