import math
import types

import numpy as np
import pytest

import wwitness
from wwitness import experiment
from wwitness.experiment import (
    DetectorModel,
    ExperimentError,
    ExperimentReport,
    MeasurementSetting,
    SourceModel,
    click_distribution,
    click_pattern_probability,
    measure_setting,
    phase_scan,
    prepare_mixed_w,
    resolve_beta,
    run_modified_scheme,
    run_single_setting_scheme,
    sample_clicks,
    settings_plan_modified,
    sweep_critical_efficiency,
)
from wwitness.fock import FockSpace, make_basis_state, photon_number_distribution, vacuum
from wwitness.optics import Network, WStateSpec
from wwitness.witness import WitnessError, bs_state

NEAR_ONE = 1 - 1e-3


class TestModels:
    def test_source(self):
        with pytest.raises(ExperimentError):
            SourceModel(-0.1)

    def test_detector(self):
        with pytest.raises(ExperimentError):
            DetectorModel(1.5)
        with pytest.raises(ExperimentError, match="Dark counts"):
            DetectorModel(0.9, dark_counts=0.1)

    def test_prepare(self, symmetric3):
        assert len(prepare_mixed_w(symmetric3, SourceModel(1.0))) == 1
        rho = prepare_mixed_w(symmetric3, SourceModel(0.7))
        np.testing.assert_allclose(rho.weights, [0.7, 0.3])

    def test_setting_validation(self):
        with pytest.raises(ExperimentError):
            MeasurementSetting("W", Network(3, ()), (1, 0))
        with pytest.raises(ExperimentError):
            MeasurementSetting("W", Network(3, ()), (1, 0, 0), passthrough_modes=(3,))


class TestDetection:
    def test_single_photon(self):
        det = DetectorModel(0.7)
        psi = make_basis_state((1, 0))
        assert click_pattern_probability(psi, det, (1, 0)) == pytest.approx(0.7)
        assert click_pattern_probability(psi, det, (0, 0)) == pytest.approx(0.3)
        assert click_pattern_probability(psi, det, (0, 1)) == 0

    def test_number_resolving(self):
        psi = make_basis_state((2, 0))
        assert click_pattern_probability(psi, DetectorModel(0.7), (1, 0)) == pytest.approx(0.42)
        assert click_pattern_probability(psi, DetectorModel(0.7), (2, 0)) == pytest.approx(0.49)

    def test_click_only(self):
        psi = make_basis_state((2, 0))
        det = DetectorModel(0.7, number_resolving=False)
        assert click_pattern_probability(psi, det, (1, 0)) == pytest.approx(0.91)
        with pytest.raises(ExperimentError, match="click/no-click"):
            click_pattern_probability(psi, det, (2, 0))

    @pytest.mark.parametrize("pattern", [(1, 0, 0), (-1, 0)])
    def test_bad_pattern(self, pattern):
        with pytest.raises(ExperimentError):
            click_pattern_probability(make_basis_state((1, 0)), DetectorModel(0.5), pattern)

    @pytest.mark.parametrize("resolving", [True, False])
    def test_distribution_normalized(self, w_a, resolving):
        rho = prepare_mixed_w(w_a, SourceModel(0.8))
        dist = click_distribution(rho, DetectorModel(0.6, number_resolving=resolving))
        assert sum(dist.values()) == pytest.approx(1, abs=1e-12)
        assert list(dist) == sorted(dist)

    def test_perfect_detectors(self, w_a):
        rho = prepare_mixed_w(w_a, SourceModel(0.8))
        dist = {k: v for k, v in click_distribution(rho, DetectorModel(1.0)).items() if v > 1e-15}
        assert dist == pytest.approx(photon_number_distribution(rho))

    def test_sampling(self, symmetric3):
        rho = prepare_mixed_w(symmetric3, SourceModel(1.0))
        counts = sample_clicks(rho, DetectorModel(0.5), shots=20_000, seed=3)
        assert sum(counts.values()) == 20_000
        assert counts[(0, 0, 0)] / 20_000 == pytest.approx(0.5, abs=0.02)
        assert counts == sample_clicks(rho, DetectorModel(0.5), shots=20_000, seed=3)
        with pytest.raises(ExperimentError):
            sample_clicks(rho, DetectorModel(0.5), shots=0)

    def test_mode_mismatch(self, symmetric3):
        setting = settings_plan_modified(4)[0]
        with pytest.raises(ExperimentError):
            measure_setting(symmetric3.state(), setting, DetectorModel(1.0))


class TestSingleSetting:
    @pytest.mark.parametrize("modes", [2, 3, 5])
    @pytest.mark.parametrize("eta,p", [(1.0, 1.0), (0.8, 0.9), (0.3, 0.5)])
    def test_accept_probability(self, random_spec, modes, eta, p):
        spec = random_spec(np.random.default_rng(modes), modes)
        report = run_single_setting_scheme(spec, SourceModel(p), DetectorModel(eta))
        assert report.fidelities["W"] == pytest.approx(eta * p, abs=1e-12)

    def test_symmetric_examples(self, symmetric3):
        report = run_single_setting_scheme(symmetric3, SourceModel(1.0), DetectorModel(0.7))
        assert report.witness_value == pytest.approx(2 / 3 - 0.7, abs=1e-12)
        assert report.verdict == "detected"
        report = run_single_setting_scheme(symmetric3, SourceModel(1.0), DetectorModel(0.6))
        assert report.verdict == "not-detected"
        assert report.threshold == pytest.approx(2 / 3)

    def test_verdict_flips(self, symmetric3):
        above = run_single_setting_scheme(symmetric3, SourceModel(1.0), DetectorModel(2 / 3 + 1e-6))
        below = run_single_setting_scheme(symmetric3, SourceModel(1.0), DetectorModel(2 / 3 - 1e-6))
        assert above.detected
        assert not below.detected

    def test_tie_is_not_detected(self):
        report = ExperimentReport("single", {}, {}, {}, witness_value=-1e-14, threshold=0.5)
        assert report.witness_value == 0
        assert report.verdict == "not-detected"

    def test_mismatched_reference(self, w_a, symmetric3):
        report = run_single_setting_scheme(w_a, SourceModel(1.0), DetectorModel(0.7), reference=symmetric3)
        assert report.threshold == pytest.approx(12 - 8 * math.sqrt(2), abs=1e-12)
        assert report.fidelities["W"] == pytest.approx(0.7 * (1 + 1 / math.sqrt(2)) ** 2 / 3, abs=1e-12)
        assert report.detected

    def test_reference_errors(self, symmetric3):
        with pytest.raises(ExperimentError, match="zero overlap"):
            run_single_setting_scheme(
                WStateSpec((1.0, 0.0)), SourceModel(1.0), DetectorModel(1.0), reference=WStateSpec((0.0, 1.0))
            )
        with pytest.raises(ExperimentError):
            run_single_setting_scheme(
                symmetric3, SourceModel(1.0), DetectorModel(1.0), reference=WStateSpec.symmetric(4)
            )
        with pytest.raises(ExperimentError):
            run_single_setting_scheme(symmetric3, SourceModel(1.0), DetectorModel(1.0), compensation=[0.0])

    def test_report(self, symmetric3):
        report = run_single_setting_scheme(symmetric3, SourceModel(0.9), DetectorModel(0.9))
        text = report.to_text()
        assert "verdict: detected" in text
        assert "fidelity W: 0.81" in text
        obj = report.to_dict()
        assert obj["verdict"] == "detected"
        assert obj["settings"]["W"]["accept_pattern"] == [1, 0, 0]

    def test_shots(self, symmetric3):
        kwargs = {"shots": 5000, "seed": 12}
        first = run_single_setting_scheme(symmetric3, SourceModel(1.0), DetectorModel(0.8), **kwargs)
        second = run_single_setting_scheme(symmetric3, SourceModel(1.0), DetectorModel(0.8), **kwargs)
        assert first.fidelities == second.fidelities
        assert first.fidelities["W"] == pytest.approx(0.8, abs=0.03)
        assert first.settings["W"]["shots"] == 5000


class TestSettingsPlan:
    def test_layout(self):
        plan = settings_plan_modified(3)
        assert [s.label for s in plan] == ["W", "BS0", "BS1", "BS2"]
        assert plan[0].passthrough_modes == ()
        assert [s.passthrough_modes for s in plan[1:]] == [(0,), (1,), (2,)]
        assert plan[1].accept_pattern == (0, 1, 0)
        assert plan[2].accept_pattern == (1, 0, 0)
        assert plan[2].routing == (0, 2, 1)

    @pytest.mark.parametrize("modes", [3, 4])
    def test_biseparable_references(self, modes):
        plan = settings_plan_modified(modes)
        det = DetectorModel(1.0)
        for i, setting in enumerate(plan[1:]):
            assert measure_setting(bs_state(i, modes), setting, det).probability == pytest.approx(1, abs=1e-12)

    def test_biseparable_mixture(self, rho123):
        accept = measure_setting(rho123, settings_plan_modified(3)[0], DetectorModel(1.0)).probability
        assert accept == pytest.approx(2 / 3, abs=1e-12)
        assert 2 / 3 - accept >= -1e-12

    def test_vacuum(self):
        plan = settings_plan_modified(3)
        assert measure_setting(vacuum(FockSpace(3)), plan[0], DetectorModel(1.0)).probability == 0

    def test_too_few_modes(self):
        with pytest.raises(ExperimentError):
            settings_plan_modified(2)


class TestModifiedScheme:
    @pytest.mark.parametrize("modes", [3, 4, 5])
    def test_closed_form(self, modes):
        spec = WStateSpec.symmetric(modes)
        for product in (0.0, 0.5, NEAR_ONE):
            beta = product / (modes - 1)
            for eta in np.linspace(0, 1, 5):
                for p in np.linspace(0, 1, 5):
                    report = run_modified_scheme(spec, SourceModel(float(p)), DetectorModel(float(eta)), beta, alpha=0.01)
                    assert report.witness_value == pytest.approx(0.01 - eta * p * (1 - product), abs=1e-12)
                    assert report.fidelities["BS1"] == pytest.approx(eta * p * (modes - 1) / modes, abs=1e-12)
                    assert report.fidelities["two_quanta"] == pytest.approx(1)

    def test_examples(self, symmetric3):
        beta = NEAR_ONE / 2
        detected = run_modified_scheme(symmetric3, SourceModel(1.0), DetectorModel(0.6), beta)
        assert detected.verdict == "detected"
        assert detected.threshold == pytest.approx(0.515, abs=5e-3)
        assert detected.witness["type"] == "modified"
        missed = run_modified_scheme(symmetric3, SourceModel(1.0), DetectorModel(0.5), beta)
        assert missed.verdict == "not-detected"

    def test_improves_on_single_setting(self, symmetric3):
        single = run_single_setting_scheme(symmetric3, SourceModel(1.0), DetectorModel(0.6))
        modified = run_modified_scheme(symmetric3, SourceModel(1.0), DetectorModel(0.6), NEAR_ONE / 2, alpha=5.15e-4)
        assert not single.detected
        assert modified.detected

    def test_asymmetric_warns(self, w_a):
        with pytest.warns(UserWarning, match="asymmetric"):
            run_modified_scheme(w_a, SourceModel(1.0), DetectorModel(0.9), 0.2, alpha=0.1)

    def test_invalid_beta(self, symmetric3):
        with pytest.raises(WitnessError):
            run_modified_scheme(symmetric3, SourceModel(1.0), DetectorModel(0.9), 0.5, alpha=0.1)

    def test_lossy_two_quanta(self, symmetric3):
        with wwitness.set_options(lossy_two_quanta=True):
            report = run_modified_scheme(symmetric3, SourceModel(1.0), DetectorModel(0.5), 0.2, alpha=0.1)
        assert report.fidelities["two_quanta"] == pytest.approx(1)

    def test_shots(self, symmetric3):
        args = (symmetric3, SourceModel(1.0), DetectorModel(0.8), 0.3)
        first = run_modified_scheme(*args, alpha=0.05, shots=4000, seed=9)
        second = run_modified_scheme(*args, alpha=0.05, shots=4000, seed=9)
        assert first.fidelities == second.fidelities
        assert first.fidelities["W"] == pytest.approx(0.8, abs=0.04)
        assert first.settings["BS2"]["shots"] == 4000


class TestPhaseScan:
    def test_sign_flip(self, symmetric3):
        spec = WStateSpec(tuple(np.array([1, -1, 1]) / math.sqrt(3)))
        result = phase_scan(spec.state(), symmetric3)
        assert result.landscape.sel(phi_1=0, phi_2=0).item() == pytest.approx(1 / 9, abs=1e-12)
        assert result.phases == pytest.approx((0, math.pi, 0), abs=1e-12)
        assert result.fidelity >= 0.999
        assert result.accept_probability == pytest.approx(result.fidelity, abs=1e-9)
        assert result.landscape.dims == ("phi_1", "phi_2")
        assert result.landscape.shape == (24, 24)

    def test_global_phase(self, symmetric3):
        spec = WStateSpec(tuple(symmetric3.array * np.exp(0.7j)))
        result = phase_scan(spec.state(), symmetric3, grid_points=8)
        assert result.phases == (0.0, 0.0, 0.0)
        assert result.fidelity == pytest.approx(1, abs=1e-12)

    def test_refine(self, symmetric3):
        spec = WStateSpec(tuple(symmetric3.array * np.exp(1j * np.array([0.0, 0.3, 0.0]))))
        result = phase_scan(prepare_mixed_w(spec, SourceModel(0.9)), symmetric3, grid_points=4, refine=True)
        assert result.phases[1] == pytest.approx(0.3, abs=1e-4)
        assert result.fidelity == pytest.approx(0.9, abs=1e-8)

    def test_invalid(self, symmetric3):
        with pytest.raises(ExperimentError):
            phase_scan(symmetric3.state(), symmetric3, grid_points=1)
        with pytest.raises(ExperimentError):
            phase_scan(symmetric3.state(), WStateSpec.symmetric(4))


class TestSweep:
    def test_default_rule(self):
        table = sweep_critical_efficiency(3, 5)
        assert list(table.columns) == ["N", "beta", "alpha", "e_c", "baseline"]
        assert table["N"].tolist() == [3, 4, 5]
        assert table["e_c"].iloc[0] == pytest.approx(0.515, abs=5e-3)
        assert (table["e_c"] < table["baseline"]).all()
        np.testing.assert_allclose(table["beta"] * (table["N"] - 1), NEAR_ONE)

    def test_rules(self):
        zero = sweep_critical_efficiency(3, 4, beta_rule="zero")
        np.testing.assert_allclose(zero["e_c"], zero["baseline"], atol=1e-9)
        half = sweep_critical_efficiency(3, 4, beta_rule=0.5)
        np.testing.assert_allclose(half["beta"], [0.25, 0.5 / 3])
        func = sweep_critical_efficiency(3, 3, beta_rule=lambda n: 0.1)
        assert func["beta"].iloc[0] == pytest.approx(0.1)

    def test_resolve_beta(self):
        assert resolve_beta("near-one", 3) == pytest.approx(NEAR_ONE / 2)
        assert resolve_beta("zero", 5) == 0
        with pytest.raises(ExperimentError):
            resolve_beta(1.2, 3)
        with pytest.raises(ExperimentError, match="Unknown beta rule"):
            resolve_beta("large", 3)

    @pytest.mark.parametrize("bounds", [(2, 4), (5, 3), (3, 99)])
    def test_invalid_range(self, bounds):
        with pytest.raises(ExperimentError, match="Invalid mode range"):
            sweep_critical_efficiency(*bounds)

    def test_row_options_passed_explicitly(self, monkeypatch):
        calls = []

        def fake_alpha(modes, beta, grid_points=None, fatol=None):
            calls.append((modes, grid_points, fatol))
            return types.SimpleNamespace(alpha=0.1)

        monkeypatch.setattr(experiment, "alpha_modified", fake_alpha)
        with wwitness.set_options(ansatz_grid_points=31, ansatz_fatol=1e-6):
            table = sweep_critical_efficiency(3, 4)
        assert calls == [(3, 31, 1e-6), (4, 31, 1e-6)]
        np.testing.assert_allclose(table["alpha"], 0.1)

    @pytest.mark.slow
    def test_full_range(self):
        serial = sweep_critical_efficiency(3, 10)
        parallel = sweep_critical_efficiency(3, 10, workers=2)
        assert (serial["e_c"] < serial["baseline"]).all()
        np.testing.assert_allclose(serial["e_c"], parallel["e_c"], atol=1e-12)
