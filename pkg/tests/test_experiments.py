import time

import pytest

from unitary_finsler import experiments
from unitary_finsler.config import ExperimentConfig
from unitary_finsler.errors import DomainError, EigenvalueAtMinusOne
from unitary_finsler.experiments import (
    TrialResult,
    completion_trial,
    convexity_trial,
    finite_rank_trial,
    nilpotent_trial,
    ordered_map,
    projection_trial,
    run_trials,
)
from unitary_finsler.orbits import commutator_decay
from unitary_finsler.sampling import trial_generator


def _failed(result):
    return [check.suite for check in result.checks if not check.ok]


def test_ordered_map_keeps_trial_order():
    def slow_square(trial):
        time.sleep(0.001 * (5 - trial))
        return trial * trial

    assert ordered_map(slow_square, 5, 1) == [0, 1, 4, 9, 16]
    assert ordered_map(slow_square, 5, 4) == [0, 1, 4, 9, 16]


def test_run_trials_turns_domain_errors_into_failed_checks():
    def flaky(config, trial):
        if trial == 1:
            raise DomainError("boom")
        result = TrialResult()
        result.check("fine", True)
        return result

    results = run_trials(ExperimentConfig(trials=3), flaky)
    assert [_failed(result) for result in results] == [[], ["trial_errors"], []]


def test_trials_are_independent_of_thread_count():
    serial = run_trials(ExperimentConfig(trials=3, dim=3, threads=1), completion_trial)
    parallel = run_trials(ExperimentConfig(trials=3, dim=3, threads=3), completion_trial)
    assert [result.rows for result in serial] == [result.rows for result in parallel]


@pytest.mark.parametrize("trial", [0, 1, 2])
def test_completion_trial_passes(trial):
    result = completion_trial(ExperimentConfig(dim=4), trial)
    assert _failed(result) == []
    assert {check.suite for check in result.checks} == {"parrott_bound", "completion_search"}
    assert result.rows[0]["rows"] + result.rows[0]["cols"] == 4


@pytest.mark.parametrize("trial", [0, 1])
def test_projection_trial_passes(trial):
    result = projection_trial(ExperimentConfig(dim=4), trial)
    assert _failed(result) == []
    suites = {check.suite for check in result.checks}
    assert {"conjugation", "codiagonal", "norm_bound", "angle_norm", "component_mismatch"} <= suites
    if trial == 0:
        assert "norm_one_quarter_turn" in suites


def test_nilpotent_trial_passes():
    result = nilpotent_trial(ExperimentConfig(dim=4), 0)
    assert _failed(result) == []
    assert "scalar_closed_form" in {check.suite for check in result.checks}
    assert result.rows[0]["dim"] == 4


def test_finite_rank_trial_on_rank_one_base():
    result = finite_rank_trial(ExperimentConfig(dim=4), 0)
    assert _failed(result) == []
    suites = {check.suite for check in result.checks}
    assert {"lifting_consistency", "random_liftings", "certificate", "counterexample_detected", "derivation_gap"} <= suites


def test_convexity_trial_operator_norm():
    result = convexity_trial(ExperimentConfig(dim=3, grid=16), 0)
    assert _failed(result) == []
    assert len(result.rows) == 16 or result.skipped == ["convexity"]


def test_geodesic_minimality_is_skipped_when_no_competitor_is_evaluated(monkeypatch):
    def off_branch(*args, **kwargs):
        raise EigenvalueAtMinusOne("competitor crossed -1")

    monkeypatch.setattr(experiments, "random_competitor_length", off_branch)
    result = TrialResult()
    experiments._geodesic_competitors(ExperimentConfig(dim=3), trial_generator(7, 0), result)
    assert result.checks == []
    assert result.skipped == ["geodesic_minimality", "geodesic_minimality"]


def test_geodesic_minimality_checks_evaluated_competitors():
    result = TrialResult()
    experiments._geodesic_competitors(ExperimentConfig(dim=3), trial_generator(7, 0), result)
    checked = [check for check in result.checks if check.suite == "geodesic_minimality"]
    assert len(checked) + len(result.skipped) == 2
    assert all(check.ok and check.slack < float("inf") for check in checked)


def test_run_trials_counts_closed_form_mismatch_as_failed_trial():
    def cancelling(config, trial):
        result = TrialResult()
        value, bound = commutator_decay([1e8 + 1.0, 1e8], 2)
        result.check("commutator_decay", value <= bound)
        return result

    results = run_trials(ExperimentConfig(trials=2), cancelling)
    assert [_failed(result) for result in results] == [["trial_errors"], ["trial_errors"]]
