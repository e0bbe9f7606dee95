"""Unit tests for TTM and MF work statistics and the identities built on them."""

import math

import numpy as np
import pytest

from app.errors import DimensionMismatchError
from app.services.protocol import random_hermitian, run_protocol
from app.services.quantum.hamiltonians import PAULI_X, CustomModel, DriveSchedule, TwoLevelModel
from app.services.quantum.linalg import eig_hermitian, expm_hermitian, max_norm, unitarity_defect
from app.services.quantum.thermo import gibbs
from app.services.quantum.work import (
    Paradigm,
    ProtocolRun,
    bounds_report,
    exp_average,
    mean_work,
    merge_atoms,
    mf_distribution,
    mf_summary,
    mf_work_values,
    modified_jarzynski_report,
    pseudo_gibbs,
    pseudo_log_partition_from_transitions,
    relative_entropy_terms,
    transition_probabilities,
    ttm_distribution,
    ttm_joint,
    ttm_summary,
)


def identity_run(h, beta=1.0) -> ProtocolRun:
    return ProtocolRun.from_unitary(h, h, np.eye(h.shape[0]), beta)


class TestWorkDistribution:
    """Test suite for atom bookkeeping."""

    def test_merge_close_atoms(self):
        d = merge_atoms([1.0, 1.0 + 1e-14, -1.0], [0.25, 0.25, 0.5], Paradigm.TTM)
        np.testing.assert_allclose(d.values, [-1.0, 1.0])
        np.testing.assert_allclose(d.probabilities, [0.5, 0.5])

    def test_zero_probabilities_dropped(self):
        d = merge_atoms([0.0, 2.0], [1.0, 0.0], Paradigm.MF)
        assert len(d) == 1

    def test_tiny_probabilities_kept(self):
        d = merge_atoms([0.0, -30.0], [1.0, 1e-20], Paradigm.MF)
        assert len(d) == 2
        assert exp_average(d, 2.0) == pytest.approx(1.0 + 1e-20 * math.exp(60.0))

    def test_mean_work(self):
        assert mean_work(merge_atoms([0.0], [1.0], Paradigm.TTM)) == 0.0
        assert mean_work(merge_atoms([1.0, -1.0], [0.5, 0.5], Paradigm.TTM)) == 0.0

    def test_exp_average_single_atom(self):
        assert exp_average(merge_atoms([0.0], [1.0], Paradigm.TTM), 3.0) == 1.0

    def test_exp_average_overflow_safe(self):
        d = merge_atoms([-800.0, 0.0], [0.5, 0.5], Paradigm.TTM)
        assert exp_average(d, 1.0) == math.inf
        assert exp_average(merge_atoms([800.0], [1.0], Paradigm.TTM), 1.0) == 0.0

    def test_frame_columns(self):
        frame = merge_atoms([0.5, 1.5], [0.4, 0.6], Paradigm.MF).to_frame()
        assert list(frame.columns) == ["w", "prob"]


class TestTTM:
    """Test suite for the two-time measurement pipeline."""

    def test_identity_joint_is_diagonal(self):
        h = np.diag([0.0, 1.0, 1.0, 3.0])
        ensemble = gibbs(h, 1.0)
        spec = ensemble.spectrum
        joint = ttm_joint(ensemble, np.eye(4), spec, spec)
        mult = np.array(spec.multiplicities)
        np.testing.assert_allclose(joint.probabilities, np.diag(mult * ensemble.occupations), atol=1e-15)

    def test_identity_single_atom(self, rng):
        run = identity_run(random_hermitian(rng, 3))
        assert len(run.ttm) == 1
        assert run.ttm.values[0] == pytest.approx(0.0, abs=1e-12)
        assert run.ttm.probabilities[0] == pytest.approx(1.0)

    @pytest.mark.parametrize("dim", [2, 5, 8])
    def test_identity_single_atom_non_diagonal(self, rng, dim):
        h = random_hermitian(rng, dim)
        assert np.abs(h - np.diag(np.diag(h))).max() > 0.01
        run = identity_run(h, beta=0.8)
        assert len(run.ttm) == 1
        assert ttm_summary(run).atoms == 1
        np.testing.assert_allclose(run.ttm.to_frame()["prob"], [1.0])

    def test_identity_single_atom_low_temperature(self, rng):
        run = identity_run(random_hermitian(rng, 6), beta=12.0)
        assert np.count_nonzero(run.joint.probabilities - np.diag(np.diag(run.joint.probabilities))) == 0
        assert len(run.ttm) == 1

    def test_joint_rejects_mismatched_spectrum(self):
        ensemble = gibbs(np.diag([0.0, 1.0, 1.0]), 1.0)
        other = eig_hermitian(np.diag([0.0, 1.0, 2.0]))
        with pytest.raises(DimensionMismatchError):
            ttm_joint(ensemble, np.eye(3), other, other)

    def test_swap_permutes_diagonal(self):
        h = np.diag([0.0, 1.0])
        ensemble = gibbs(h, 1.0)
        joint = ttm_joint(ensemble, PAULI_X, ensemble.spectrum, ensemble.spectrum)
        p = ensemble.occupations
        np.testing.assert_allclose(joint.probabilities, [[0, p[0]], [p[1], 0]], atol=1e-15)

    def test_relabeled_spectrum(self):
        run = ProtocolRun.from_unitary(np.diag([0.0, 1.0]), np.diag([0.0, 2.0]), np.eye(2), 1.0)
        p = run.initial.occupations
        np.testing.assert_allclose(run.ttm.values, [0.0, 1.0])
        np.testing.assert_allclose(run.ttm.probabilities, p)

    def test_column_sums_match_evolved_state(self, random_run):
        run, _ = random_run
        for level, proj in enumerate(run.spec_tau.projectors):
            expected = np.trace(proj @ run.rho_tau).real
            assert run.joint.column_marginals[level] == pytest.approx(expected, abs=1e-12)
        assert run.joint.probabilities.sum() == pytest.approx(1.0, abs=1e-10)

    def test_row_sums_match_initial_populations(self, random_run):
        run, _ = random_run
        assert unitarity_defect(run.unitary) <= 1e-9
        assert max_norm(run.unitary - np.eye(run.spec_0.dim)) > 0.1
        mult = np.array(run.spec_0.multiplicities)
        np.testing.assert_allclose(run.joint.row_marginals, mult * run.initial.occupations, atol=1e-12)

    def test_distribution_normalized(self, random_run):
        run, _ = random_run
        assert run.ttm.probabilities.sum() == pytest.approx(1.0, abs=1e-10)
        assert len(run.ttm) <= run.spec_0.dim**2

    def test_jarzynski_identity(self, random_run):
        run, _ = random_run
        ratio = run.final.partition_function / run.initial.partition_function
        assert exp_average(run.ttm, run.beta) == pytest.approx(ratio, rel=1e-10)

    def test_first_law(self, random_run):
        run, _ = random_run
        assert mean_work(run.ttm) == pytest.approx(run.first_law_work, abs=1e-10)

    def test_summary(self, random_run):
        run, propagator = random_run
        summary = ttm_summary(run, propagator)
        assert summary.jarzynski_residual <= 1e-10
        assert summary.first_law_residual <= 1e-10
        assert summary.measurement_entropy_change >= -1e-10
        assert summary.dephasing_energy_residual <= 1e-12
        assert summary.steps == 400


class TestMF:
    """Test suite for the measurement-free pipeline."""

    def test_identity_values_zero(self, rng):
        h = random_hermitian(rng, 4)
        spec = eig_hermitian(h)
        np.testing.assert_allclose(mf_work_values(np.eye(4), h, spec), 0.0, atol=1e-12)

    def test_uniform_shift(self, rng):
        h = random_hermitian(rng, 4)
        spec = eig_hermitian(h)
        np.testing.assert_allclose(mf_work_values(np.eye(4), h + 0.3 * np.eye(4), spec), 0.3, atol=1e-12)

    def test_sudden_quench_two_level(self):
        h0 = np.diag([-0.5, 0.5])
        h1 = np.array([[0.2, 0.7], [0.7, -0.4]])
        spec = eig_hermitian(h0)
        np.testing.assert_allclose(mf_work_values(np.eye(2), h1, spec), [0.2 + 0.5, -0.4 - 0.5])
        pseudo = pseudo_gibbs(np.eye(2), h1, spec, 1.0)
        assert pseudo.partition_function == pytest.approx(math.exp(-0.2) + math.exp(0.4))

    def test_distribution_weights(self, random_run):
        run, _ = random_run
        d = mf_distribution(run.mf_values, run.initial.state_occupations)
        assert len(d) <= run.spec_0.dim
        assert d.probabilities.sum() == pytest.approx(1.0, abs=1e-10)

    def test_first_law_agrees_with_ttm(self, random_run):
        run, _ = random_run
        assert mean_work(run.mf) == pytest.approx(mean_work(run.ttm), abs=1e-10)

    def test_pseudo_partition_identity(self, random_run):
        run, _ = random_run
        ratio = run.pseudo.partition_function / run.initial.partition_function
        assert exp_average(run.mf, run.beta) == pytest.approx(ratio, rel=1e-10)

    def test_pseudo_gibbs_state(self, random_run):
        run, _ = random_run
        rho = run.pseudo.rho
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.eigvalsh(rho)[0] >= -1e-12
        assert run.pseudo.weights.sum() == pytest.approx(1.0, abs=1e-10)

    def test_identity_pseudo_gibbs_fixed_point(self, rng):
        run = identity_run(random_hermitian(rng, 3), beta=0.5)
        np.testing.assert_allclose(run.pseudo.rho, run.initial.rho, atol=1e-12)
        assert run.pseudo.partition_function == pytest.approx(run.initial.partition_function)

    def test_transitions_route(self, random_run):
        run, _ = random_run
        np.testing.assert_allclose(run.transitions.sum(axis=1), 1.0, atol=1e-12)
        log_z = pseudo_log_partition_from_transitions(run.transitions, run.spec_tau, run.beta)
        assert log_z == pytest.approx(run.pseudo.log_partition, abs=1e-10)

    def test_transitions_identity(self):
        spec = eig_hermitian(np.diag([0.0, 1.0, 2.0]))
        np.testing.assert_allclose(transition_probabilities(np.eye(3), spec, spec), np.eye(3))

    def test_diagnostics_columns(self, random_run):
        run, _ = random_run
        frame = run.mf_diagnostics()
        assert list(frame.columns) == ["index", "level", "initial_energy", "evolved_energy", "w", "prob"]
        assert len(frame) == run.spec_0.dim


class TestModifiedJarzynski:
    """Test suite for the relative-entropy identity and the bounds."""

    def test_identity_protocol(self, rng):
        report = modified_jarzynski_report(identity_run(random_hermitian(rng, 3)))
        assert report.lhs == pytest.approx(1.0, abs=1e-12)
        assert report.delta_f == pytest.approx(0.0, abs=1e-12)
        assert report.s_rel == pytest.approx(0.0, abs=1e-12)

    def test_random_protocol(self, random_run):
        report = modified_jarzynski_report(random_run[0])
        assert not report.support_violation
        assert report.residual <= 1e-10
        assert report.closed_form_residual <= 1e-8
        assert report.s_rel >= -1e-10

    def test_random_dim6(self, rng):
        model = CustomModel.linear(random_hermitian(rng, 6), random_hermitian(rng, 6))
        schedule = DriveSchedule(duration=2.0, shape="linear", start=0.0, end=1.0)
        run, _ = run_protocol(model, schedule, beta=2.0, steps=300)
        assert modified_jarzynski_report(run).residual <= 1e-10

    def test_bounds(self, random_run):
        bounds = bounds_report(random_run[0])
        assert bounds.slack19 >= -1e-9
        assert bounds.slack21 == pytest.approx(bounds.slack19, abs=1e-12)
        assert bounds.slack_max_work >= bounds.slack19 - 1e-12
        assert bounds.f_tilde_tau >= bounds.f_tau - 1e-12

    def test_identity_bounds_zero(self, rng):
        bounds = bounds_report(identity_run(random_hermitian(rng, 4)))
        assert bounds.slack19 == pytest.approx(0.0, abs=1e-12)
        assert bounds.slack21 == pytest.approx(0.0, abs=1e-12)

    def test_sudden_quench_slack(self):
        schedule = DriveSchedule(duration=1.0, shape="sudden", start=-1.0, end=2.0)
        run, _ = run_protocol(TwoLevelModel(delta=0.8), schedule, beta=1.0, steps=1)
        assert bounds_report(run).slack19 >= -1e-9

    def test_entropy_terms(self, random_run):
        terms = relative_entropy_terms(random_run[0])
        assert terms.negentropy == pytest.approx(terms.negentropy_closed_form, abs=1e-8)
        assert terms.cross_entropy == pytest.approx(terms.cross_entropy_closed_form, abs=1e-8)

    def test_summary(self, two_level_run):
        run, propagator = two_level_run
        summary = mf_summary(run, propagator)
        assert summary.residual_eq18 <= 1e-10
        assert summary.slack_eq19 >= -1e-9
        assert summary.pseudo_partition_residual <= 1e-10
        assert summary.s_rel_matrix == pytest.approx(summary.s_rel_closed_form, abs=1e-8)
        assert "lexicographic" in summary.basis_convention

    def test_unitary_sanity(self, rng):
        h = random_hermitian(rng, 3)
        u = expm_hermitian(random_hermitian(rng, 3), -1j)
        run = ProtocolRun.from_unitary(h, h, u, 1.0)
        assert exp_average(run.ttm, 1.0) == pytest.approx(1.0, rel=1e-10)
