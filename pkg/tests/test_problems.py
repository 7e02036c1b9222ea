"""
Tests for problem builders, the JSON schema, oracles and baseline solvers.
"""
import pytest
import sys
import os

import numpy as np

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.core.operators import QuadGradient, SkewMap, ZeroMap, ZeroResolvent
from app.core.problems import (
    BUILTINS, build_problem, dump_problem, fb_baseline, grid_search, linear_solve, load_problem,
    make_bilinear_saddle, make_box_feasibility, make_builtin, make_mixed_instance, make_quadratic_consensus,
    make_rng, make_rotation_counterexample, oracle_solution, parse_problem, power_iteration_norm,
    product_space_blocks, product_space_dy, random_spd,
)
from app.core.ringsim import run_until_residual, spawn_ring
from app.core.splitting import Mode, ProblemInstance, Status, StopConfig, iterate, make_params
from app.utils.errors import NotFoundError, OracleError, ValidationError


def solve(problem, z0=None, tol=1e-22, max_iters=200000):
    result = iterate(problem, make_params(problem), z0=z0, stop=StopConfig(tol, max_iters, 1))
    assert result.status == Status.CONVERGED
    return result


class TestQuadraticConsensus:
    """Seeded and explicit quadratic instances."""

    def test_hand_example(self):
        """Q = [2], [2] with c = 2, 6 gives x* = 2."""
        spec = make_quadratic_consensus(2, 1, matrices=[[[2.0]], [[2.0]]], offsets=[[2.0], [6.0]])
        assert spec.known_solution == pytest.approx([2.0], abs=1e-15)
        result = solve(build_problem(spec))
        assert abs(result.x[0][0] - 2.0) <= 1e-9

    def test_zero_offsets(self):
        """All c_i = 0 gives x* = 0."""
        rng = make_rng(1)
        spec = make_quadratic_consensus(3, 4, matrices=[random_spd(4, rng) for _ in range(3)])
        assert np.allclose(spec.known_solution, 0.0, rtol=0, atol=1e-15)

    def test_seeded_known_solution_matches_oracle(self):
        """The stored solution agrees with the independent linear solve."""
        spec = make_quadratic_consensus(4, 5, seed=7)
        oracle = oracle_solution(spec)
        assert oracle.method == 'LinearSolve'
        assert np.allclose(oracle.solution, spec.known_solution, rtol=0, atol=1e-10)

    def test_declared_lipschitz_bounds_spectrum(self):
        """Declared L is at least the largest eigenvalue of each Q_i."""
        spec = make_quadratic_consensus(4, 5, seed=3)
        for desc in spec.forwards:
            top = np.linalg.eigvalsh(np.asarray(desc.params['matrix'])).max()
            assert top <= desc.L <= top * (1 + 1e-7)

    def test_structure(self):
        """A_1..A_{n-1} are zero and A_n carries the last quadratic."""
        spec = make_quadratic_consensus(4, 2, seed=0)
        assert [d.kind for d in spec.resolvents] == ['zero', 'zero', 'zero', 'affine_resolvent']
        assert [d.kind for d in spec.forwards] == ['quad_gradient'] * 3
        assert spec.mode == Mode.COCOERCIVE

    def test_invalid_size(self):
        """n < 2 is rejected."""
        with pytest.raises(ValidationError):
            make_quadratic_consensus(1, 2)


class TestRotation:
    """The rotation counterexample."""

    def test_spec(self):
        """Lipschitz mode, n = 3, L = 1, solution at the origin."""
        spec = make_rotation_counterexample()
        assert spec.mode == Mode.LIPSCHITZ
        assert spec.n == 3
        assert spec.known_solution == [0.0, 0.0]
        assert spec.forwards[0].L == 1.0

    @pytest.mark.parametrize('lam', [0.1, 0.5, 1.0])
    def test_forward_backward_diverges(self, lam):
        """Plain forward-backward grows the norm by sqrt(1 + lambda^2) every step."""
        rotation = SkewMap([[0.0, -1.0], [1.0, 0.0]], lipschitz=1.0)
        iterates = fb_baseline(rotation, ZeroResolvent(2), lam, [1.0, 0.5], 30)
        factor = np.sqrt(1.0 + lam ** 2)
        for before, after in zip(iterates, iterates[1:]):
            assert abs(np.linalg.norm(after) / np.linalg.norm(before) - factor) <= 1e-12


class TestBoxFeasibility:
    """Intersections of boxes through normal-cone resolvents."""

    def test_overlap_interval(self):
        """Boxes [0,2], [1,3], R: the limit lies in [1, 2]."""
        problem = build_problem(make_box_feasibility([(0.0, 2.0), (1.0, 3.0), (None, None)]))
        result = solve(problem, z0=[np.array([7.0]), np.array([-4.0])])
        assert 1.0 - 1e-6 <= result.x[0][0] <= 2.0 + 1e-6

    def test_identical_boxes(self):
        """Identical boxes: the limit lies in that box."""
        problem = build_problem(make_box_feasibility([([0.0, -1.0], [1.0, 0.0])] * 3))
        result = solve(problem, z0=[np.array([3.0, 3.0]), np.array([-2.0, 5.0])])
        assert np.all(result.x[0] >= [-1e-6, -1.0 - 1e-6]) and np.all(result.x[0] <= [1.0 + 1e-6, 1e-6])

    def test_single_point_intersection(self):
        """[0,1] and [1,2] meet only at 1."""
        problem = build_problem(make_box_feasibility([(0.0, 1.0), (1.0, 2.0), (None, None)]))
        result = solve(problem, z0=[np.array([-3.0]), np.array([4.0])])
        assert abs(result.x[0][0] - 1.0) <= 1e-6

    def test_grid_search_candidates(self):
        """Grid candidates cover [1, 2]; the spread means no single solution is returned."""
        spec = make_box_feasibility([(0.0, 2.0), (1.0, 3.0), (None, None)])
        oracle = oracle_solution(spec)
        assert oracle.method == 'GridSearch'
        assert oracle.solution is None
        assert oracle.candidates.min() >= 1.0 - 1e-3
        assert oracle.candidates.max() <= 2.0 + 1e-3
        assert oracle.candidates.max() - oracle.candidates.min() >= 0.99

    def test_no_oracle_in_three_dimensions(self):
        """d = 3 boxes carry no grid oracle and no known solution."""
        spec = make_box_feasibility([([0.0] * 3, [1.0] * 3)] * 2)
        with pytest.raises(OracleError):
            oracle_solution(spec)

    def test_grid_search_dimension_limit(self):
        """Grid search refuses d > 2."""
        problem = build_problem(make_box_feasibility([([0.0] * 3, [1.0] * 3)] * 2))
        with pytest.raises(OracleError):
            grid_search(problem)

    def test_grid_search_two_dimensional_boxes(self):
        """[0,1]^2 and [0.5,2]x[-1,0.5] meet in a 3 x 3 block of the quarter-step grid."""
        spec = make_box_feasibility([([0.0, 0.0], [1.0, 1.0]), ([0.5, -1.0], [2.0, 0.5]), (None, None)])
        candidates = grid_search(build_problem(spec), step=0.25, radius=2.0)
        expected = {(x, y) for x in (0.5, 0.75, 1.0) for y in (0.0, 0.25, 0.5)}
        assert {tuple(p) for p in candidates.tolist()} == expected

    def test_grid_search_point_limit(self):
        """Grids above GRID_MAX_POINTS are refused before any point is built."""
        problem = build_problem(make_box_feasibility([([0.0, 0.0], [1.0, 1.0])] * 2))
        with pytest.raises(OracleError) as excinfo:
            grid_search(problem, step=1e-3, radius=5.0)
        assert excinfo.value.details['points'] == 10001 ** 2

    def test_two_dimensional_default_grid_fits(self):
        """The default 2-D oracle grid stays under the point limit and finds the intersection."""
        spec = make_box_feasibility([([0.0, 0.0], [1.0, 1.0]), ([0.5, 0.5], [2.0, 2.0])])
        oracle = oracle_solution(spec)
        assert oracle.method == 'GridSearch'
        assert oracle.candidates.min(axis=0) == pytest.approx([0.5, 0.5], abs=2e-2)
        assert oracle.candidates.max(axis=0) == pytest.approx([1.0, 1.0], abs=2e-2)


class TestBilinearSaddle:
    """Saddle points of x'Py."""

    def test_scalar_coupling(self):
        """P = [1]: saddle at the origin by linear solve."""
        spec = make_bilinear_saddle([[1.0]])
        assert np.array_equal(oracle_solution(spec).solution, [0.0, 0.0])

    def test_zero_coupling_rejected(self):
        """P = 0 is refused."""
        with pytest.raises(ValidationError):
            make_bilinear_saddle([[0.0, 0.0], [0.0, 0.0]])

    def test_seeded_reflected_run(self):
        """Seeded 2x2 P with forward-reflected-backward reaches the origin."""
        problem = build_problem(make_builtin('bilinear_saddle', seed=3))
        rng = make_rng(8)
        result = solve(problem, z0=[rng.standard_normal(4) for _ in range(2)])
        assert np.linalg.norm(result.x[0]) <= 1e-6


class TestMixedInstance:
    """One monotone and two cocoercive forwards."""

    def test_structure_and_oracle(self):
        """Mixed mode, n = 4, linear-solve oracle equals the stored solution."""
        spec = make_mixed_instance(d=3, seed=2)
        assert spec.mode == Mode.MIXED and spec.n == 4
        assert [d.regularity for d in spec.forwards] == ['lipschitz_monotone', 'cocoercive', 'cocoercive']
        assert np.allclose(oracle_solution(spec).solution, spec.known_solution, rtol=0, atol=1e-10)

    def test_needs_two_dimensions(self):
        """d = 1 leaves no room for a rotation block."""
        with pytest.raises(ValidationError):
            make_mixed_instance(d=1)


class TestSchema:
    """ProblemSpec validation and file round trip."""

    def test_file_round_trip(self, tmp_path):
        """dump_problem then load_problem returns the same spec."""
        spec = make_quadratic_consensus(3, 2, seed=4)
        path = dump_problem(spec, str(tmp_path / 'problem.json'))
        assert load_problem(path).model_dump() == spec.model_dump()

    def test_arity_mismatch(self):
        """Forward count must match the mode."""
        payload = {'dim': 1, 'mode': 'cocoercive',
                   'resolvents': [{'kind': 'zero'}] * 3, 'forwards': [{'kind': 'zero_map'}]}
        with pytest.raises(ValidationError):
            parse_problem(payload)

    def test_known_solution_dimension(self):
        """known_solution must have dim entries."""
        payload = {'dim': 2, 'resolvents': [{'kind': 'zero'}] * 2, 'forwards': [{'kind': 'zero_map'}],
                   'known_solution': [0.0]}
        with pytest.raises(ValidationError):
            parse_problem(payload)

    def test_false_declaration_caught(self):
        """A rotation declared cocoercive fails the property check."""
        payload = {'dim': 2, 'mode': 'cocoercive', 'resolvents': [{'kind': 'zero'}] * 2,
                   'forwards': [{'kind': 'skew_map', 'params': {'matrix': [[0, -1], [1, 0]]},
                                 'regularity': 'cocoercive', 'L': 1.0}]}
        with pytest.raises(ValidationError) as exc:
            build_problem(parse_problem(payload))
        assert exc.value.details['failures'][0]['check'] == 'cocoercive'

    def test_underdeclared_lipschitz_caught(self):
        """Declared L below the true constant fails the Lipschitz check."""
        payload = {'dim': 1, 'resolvents': [{'kind': 'zero'}] * 2,
                   'forwards': [{'kind': 'quad_gradient', 'params': {'matrix': [[3.0]]}, 'L': 1.0}]}
        with pytest.raises(ValidationError):
            build_problem(parse_problem(payload))

    def test_builtins_build(self):
        """Every registered builtin passes its property checks."""
        for name in BUILTINS:
            problem = build_problem(make_builtin(name, seed=1), samples=200)
            assert problem.n >= 2

    def test_unknown_builtin(self):
        """Unknown names raise NotFoundError."""
        with pytest.raises(NotFoundError):
            make_builtin('nope')


class TestOracles:
    """Independent reference solutions."""

    def test_power_iteration(self):
        """Power iteration bounds the spectral norm from above, tightly."""
        estimate = power_iteration_norm(np.diag([3.0, 1.0, 0.5]))
        assert 3.0 <= estimate <= 3.0 * (1 + 2e-8)

    def test_linear_solve_singular(self):
        """A singular summed linear part has no linear-solve answer."""
        problem = ProblemInstance([ZeroResolvent(2)] * 2, [ZeroMap(2)])
        with pytest.raises(OracleError):
            linear_solve(problem)


class TestBaselines:
    """Forward-backward and product-space baselines."""

    def test_fb_constant_for_zero_operators(self):
        """Zero operators leave the iterate unchanged."""
        iterates = fb_baseline(ZeroMap(2), ZeroResolvent(2), 0.7, [1.0, -2.0], 5)
        assert len(iterates) == 6
        assert all(np.array_equal(x, [1.0, -2.0]) for x in iterates)

    def test_fb_quadratic_converges(self):
        """Forward-backward with lambda = 1/L solves Qx = c."""
        q = np.array([[2.0, 0.5], [0.5, 1.0]])
        c = np.array([1.0, -1.0])
        L = float(np.linalg.eigvalsh(q).max())
        iterates = fb_baseline(QuadGradient(q, c, lipschitz=L), ZeroResolvent(2), 1.0 / L, [0.0, 0.0], 500)
        assert np.allclose(iterates[-1], np.linalg.solve(q, c), rtol=0, atol=1e-10)

    def test_product_space_agrees_with_ring(self):
        """Product-space baseline and the ring solver agree on quadratic consensus."""
        spec = make_quadratic_consensus(4, 5, seed=7)
        problem = build_problem(spec)
        params = make_params(problem)
        ring = run_until_residual(spawn_ring(problem, params, keep_log=False), 1e-20, 100000, 1)
        assert ring.status == Status.CONVERGED
        baseline = product_space_dy(problem, 1.0 / problem.lipschitz, iters=20000)[-1]
        x_star = np.asarray(spec.known_solution)
        assert np.linalg.norm(baseline - x_star) <= 1e-6
        assert np.linalg.norm(baseline - ring.x[0]) <= 1e-6

    def test_product_space_zero_operators(self):
        """Zero operators keep x^k at the mean of the initial blocks."""
        problem = ProblemInstance([ZeroResolvent(2)] * 3, [ZeroMap(2)] * 2)
        blocks = [np.array([1.0, 2.0]), np.array([4.0, -2.0]), np.array([-2.0, 3.0])]
        iterates = product_space_dy(problem, 1.0, z0_blocks=blocks, iters=10)
        for x in iterates:
            assert np.allclose(x, [1.0, 1.0], rtol=0, atol=1e-14)

    def test_single_block_is_forward_backward(self):
        """One block reduces to forward-backward."""
        q = np.array([[2.0, 0.0], [0.0, 1.0]])
        forward = QuadGradient(q, [1.0, 1.0], lipschitz=2.0)
        resolvent = ZeroResolvent(2)
        x0 = np.array([3.0, -1.0])
        blocks = product_space_blocks([resolvent], [forward], 0.5, z0_blocks=[x0], iters=20)
        plain = fb_baseline(forward, resolvent, 0.5, x0, 20)
        for a, b in zip(blocks, plain):
            assert np.allclose(a, b, rtol=0, atol=1e-12)

    def test_product_space_step_bound(self):
        """lambda >= 2/L is refused."""
        problem = build_problem(make_quadratic_consensus(3, 2, seed=0), check_properties=False)
        with pytest.raises(ValidationError):
            product_space_dy(problem, 2.0 / problem.lipschitz)
