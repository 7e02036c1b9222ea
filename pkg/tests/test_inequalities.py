"""
Numerical checks of the nonexpansiveness estimates and Fejer monotonicity.
"""
import pytest
import sys
import os

import numpy as np

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.core.inequalities import (
    averagedness_constant, averagedness_slack, fejer_profile, is_fejer_monotone,
    quasi_nonexpansive_constant, quasi_nonexpansive_slack, two_operator_slack,
)
from app.core.problems import build_problem, certificate, make_box_feasibility
from app.core.splitting import SplitState, build_fixed_point, make_params, step
from app.utils.errors import ValidationError

RELATIVE_SLACK = -1e-9


def run_iterates(problem, params, z0, iters):
    state = SplitState(z=z0)
    iterates = [z0]
    for _ in range(iters):
        state = step(problem, params, state)
        iterates.append(state.z)
    return iterates


class TestAveragedness:
    """The averagedness estimate of the cocoercive operator on arbitrary pairs."""

    @pytest.mark.parametrize('n,seed', [(2, 0), (2, 1), (3, 2), (5, 3), (5, 4)])
    def test_holds_on_random_pairs(self, quadratic_problem, random_z, n, seed):
        """Relative slack stays above -1e-9 on 100 seeded pairs."""
        problem, _ = quadratic_problem(n=n, d=3, seed=seed)
        params = make_params(problem)
        for pair in range(100):
            z = random_z(problem, seed=1000 * seed + 2 * pair)
            z_bar = random_z(problem, seed=1000 * seed + 2 * pair + 1)
            assert averagedness_slack(problem, params, z, z_bar).relative >= RELATIVE_SLACK

    def test_two_operator_form(self, quadratic_problem, random_z):
        """The n = 2 estimate holds in the extended parameter range."""
        problem, _ = quadratic_problem(n=2, d=3, seed=5)
        L = problem.lipschitz
        params = make_params(problem, lam=3.0 / L, gamma=0.45)
        for pair in range(100):
            report = two_operator_slack(problem, params, random_z(problem, 2 * pair), random_z(problem, 2 * pair + 1))
            assert report.relative >= RELATIVE_SLACK

    def test_two_operator_form_needs_two(self, quadratic_problem, random_z):
        """The n = 2 estimate is refused for larger rings."""
        problem, _ = quadratic_problem(n=3, d=2, seed=0)
        with pytest.raises(ValidationError):
            two_operator_slack(problem, make_params(problem), random_z(problem, 0), random_z(problem, 1))

    def test_constant_below_one(self, quadratic_problem):
        """Default parameters give an averagedness constant in (0, 1)."""
        problem, _ = quadratic_problem(n=4, d=2, seed=0)
        alpha = averagedness_constant(make_params(problem))
        assert 0.0 < alpha < 1.0


class TestQuasiNonexpansive:
    """The strong quasi-nonexpansiveness estimate of the reflected operator."""

    @pytest.mark.parametrize('n', [3, 4, 6])
    def test_holds_against_fixed_point(self, lipschitz_problem, random_z, n):
        """Relative slack stays above -1e-9 for 100 seeded z against a constructed fixed point."""
        problem, x_star = lipschitz_problem(n=n, d=3, seed=10 + n)
        params = make_params(problem)
        z_bar = build_fixed_point(problem, params, x_star, certificate(problem, x_star, params.lam))
        for sample in range(100):
            report = quasi_nonexpansive_slack(problem, params, random_z(problem, 500 + sample), z_bar)
            assert report.relative >= RELATIVE_SLACK

    def test_constant_positive(self, lipschitz_problem):
        """Default parameters give a positive strong quasi-nonexpansiveness constant."""
        problem, _ = lipschitz_problem(n=4, d=3, seed=0)
        assert quasi_nonexpansive_constant(make_params(problem)) > 0.0

    def test_refused_for_cocoercive(self, quadratic_problem, random_z):
        """The estimate is defined for the reflected operators only."""
        problem, _ = quadratic_problem(n=3, d=2, seed=0)
        z = random_z(problem, 0)
        with pytest.raises(ValidationError):
            quasi_nonexpansive_slack(problem, make_params(problem), z, z)


class TestFejer:
    """Distances to fixed points never increase along a run."""

    def test_quadratic_consensus(self, quadratic_problem, random_z):
        """Quadratic consensus run from a random start is Fejer monotone."""
        problem, x_star = quadratic_problem(n=4, d=5, seed=7)
        params = make_params(problem)
        z_bar = build_fixed_point(problem, params, x_star, certificate(problem, x_star, params.lam))
        profile = fejer_profile(run_iterates(problem, params, random_z(problem, 3, scale=5.0), 500), z_bar)
        assert is_fejer_monotone(profile, 1e-12)
        assert profile[-1] < profile[0]

    def test_box_feasibility_every_solution(self):
        """Box run is Fejer monotone with respect to fixed points built from several solutions."""
        spec = make_box_feasibility([(0.0, 2.0), (1.0, 3.0), (None, None)])
        problem = build_problem(spec)
        params = make_params(problem)
        iterates = run_iterates(problem, params, [np.array([5.0]), np.array([-3.0])], 300)
        for point in (1.0, 1.25, 1.5, 2.0):
            x_star = np.array([point])
            z_bar = build_fixed_point(problem, params, x_star, certificate(problem, x_star, params.lam))
            assert is_fejer_monotone(fejer_profile(iterates, z_bar), 1e-12)

    def test_detects_increase(self):
        """A growing profile is not Fejer monotone."""
        assert not is_fejer_monotone([1.0, 0.5, 0.6])
        assert is_fejer_monotone([1.0, 1.0 + 1e-13, 0.2])
