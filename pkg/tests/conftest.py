"""
Shared fixtures: seeded problem instances for the solver tests.
"""
import pytest
import sys
import os

import numpy as np

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.core.operators import AffineMap, AffineResolvent, L1Prox, QuadGradient, ZeroResolvent
from app.core.problems import (
    build_problem, make_quadratic_consensus, make_rng, power_iteration_norm, random_monotone_map, random_spd,
)
from app.core.splitting import Mode, ProblemInstance


def _monotone_forward(d, rng):
    mat = random_monotone_map(d, rng)
    return AffineMap(mat, rng.standard_normal(d), lipschitz=power_iteration_norm(mat),
                     regularity='lipschitz_monotone')


def _instance_with_solution(n, d, seed, mode):
    """
    A_1 = weighted l1, A_2..A_{n-1} = 0, A_n affine; forwards per mode.
    A_n's offset is chosen so that a seeded x* (no zero entries) solves the inclusion.
    """
    rng = make_rng(seed)
    x_star = rng.uniform(0.5, 1.5, size=d) * rng.choice([-1.0, 1.0], size=d)
    weight = 0.5
    forwards = [_monotone_forward(d, rng) for _ in range(n - 2)]
    if mode == Mode.MIXED:
        q_last = random_spd(d, rng)
        forwards.append(QuadGradient(q_last, rng.standard_normal(d), lipschitz=power_iteration_norm(q_last)))
    q = random_spd(d, rng)
    offset = q @ x_star + weight * np.sign(x_star) + sum(op.evaluate(x_star) for op in forwards)
    resolvents = [L1Prox(d, weight)] + [ZeroResolvent(d) for _ in range(n - 2)] + [AffineResolvent(d, q, offset)]
    return ProblemInstance(resolvents, forwards, mode=mode, name=f"{mode.value}_n{n}"), x_star


@pytest.fixture
def quadratic_problem():
    """Factory: (ProblemInstance, x*) for a seeded quadratic consensus instance."""
    def factory(n=4, d=5, seed=0):
        spec = make_quadratic_consensus(n, d, seed)
        return build_problem(spec, check_properties=False), np.asarray(spec.known_solution)
    return factory


@pytest.fixture
def lipschitz_problem():
    """Factory: (ProblemInstance, x*) in lipschitz mode with monotone affine forwards."""
    def factory(n=4, d=3, seed=0):
        return _instance_with_solution(n, d, seed, Mode.LIPSCHITZ)
    return factory


@pytest.fixture
def mixed_problem():
    """Factory: (ProblemInstance, x*) in mixed mode; the last forward is a quadratic gradient."""
    def factory(n=4, d=3, seed=0):
        return _instance_with_solution(n, d, seed, Mode.MIXED)
    return factory


@pytest.fixture
def random_z():
    """Factory: seeded list of n-1 vectors."""
    def factory(problem, seed, scale=2.0):
        rng = make_rng(seed)
        return [scale * rng.standard_normal(problem.dim) for _ in range(problem.n - 1)]
    return factory
