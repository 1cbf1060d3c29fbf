"""Tests for the scaled comparison script's workload sizing and outcome checks."""

from scripts.scaled_reproduction import MIN_GENERATIONS, check_outcomes, fit_generations


class TestFitGenerations:
    """Generation count derived from a timed simulation."""

    def test_keeps_requested_when_affordable(self):
        assert fit_generations(0.01, 8, 3600.0, 9, 20, 100, 450) == 100

    def test_cuts_to_budget(self):
        planned = fit_generations(3.0, 8, 3600.0, 9, 20, 100, 450)

        assert planned < 100
        projected = 3.0 * (9 * 20 * (planned + 1) + 450) / 8
        assert projected <= 3600.0

    def test_floor(self):
        assert fit_generations(60.0, 1, 60.0, 9, 20, 100, 450) == MIN_GENERATIONS


class TestCheckOutcomes:
    """Pass/fail of the three comparison outcomes."""

    def test_all_pass(self):
        series = {a: [[0.1, 0.2, 0.3]] * 3 for a in ("neat", "hyperneat", "afpo")}
        voxels = {"neat": [20, 20, 20], "hyperneat": [10, 30, 12], "afpo": [15, 20, 12]}

        outcomes = check_outcomes(series, voxels, 3)

        assert all(o["passed"] for o in outcomes.values())
        assert outcomes["hyperneat_smaller"]["seeds_smaller"] == 2

    def test_improvement_needs_two_thirds_of_seeds(self):
        flat = [[0.2, 0.2]]
        series = {"neat": [[0.1, 0.2]] * 2 + flat, "hyperneat": [[0.1, 0.3]] * 3, "afpo": flat * 2 + [[0.1, 0.2]]}
        voxels = {"neat": [1, 1, 1], "hyperneat": [1, 1, 1], "afpo": [1, 1, 1]}

        outcomes = check_outcomes(series, voxels, 3)

        assert outcomes["improves"]["seeds_improved"] == {"neat": 2, "hyperneat": 3, "afpo": 1}
        assert not outcomes["improves"]["passed"]

    def test_decreasing_elitist_curve_fails(self):
        series = {"neat": [[0.3, 0.2, 0.4]] * 3, "hyperneat": [[0.1, 0.2]] * 3, "afpo": [[0.4, 0.1, 0.5]] * 3}
        voxels = {"neat": [1, 1, 1], "hyperneat": [1, 1, 1], "afpo": [1, 1, 1]}

        outcomes = check_outcomes(series, voxels, 3)

        assert outcomes["elitist_monotone"]["runs"] == {"neat": False, "hyperneat": True}
        assert not outcomes["elitist_monotone"]["passed"]
        assert outcomes["improves"]["passed"]
