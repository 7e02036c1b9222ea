"""
Problem builders, JSON schema, independent oracles and baseline solvers.

Builders produce a ``ProblemSpec`` (the JSON problem schema); ``build_problem``
turns a spec into a ``ProblemInstance`` after running the regularity checks
on every operator. Oracles never call the splitting code: LinearSolve factors
the summed affine parts directly and GridSearch brute-forces the inclusion
0 in sum A_i(x) + sum B_i(x) on a grid.
"""
import json
from dataclasses import dataclass
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy import linalg as sla

import config
from app.core.operators import (
    AffineMap, AffineResolvent, BoxProjection, QuadGradient, SaddleBilinear, SkewMap,
    ZeroMap, ZeroResolvent, as_matrix, as_vector, check_firm_nonexpansive, check_regularity,
    forward_from_descriptor, resolvent_from_descriptor,
)
from app.core.splitting import Mode, ProblemInstance, forward_count, padded_forwards
from app.utils.errors import CertificateError, NotFoundError, OracleError, ValidationError
from app.utils.logger import get_solver_logger

logger = get_solver_logger()

# Declared Lipschitz bounds are power-iteration estimates inflated by this factor.
LIPSCHITZ_INFLATION = 1.0 + 1e-8


# ---------------------------------------------------------------------------
# JSON schema
# ---------------------------------------------------------------------------

class OperatorDescriptor(BaseModel):
    kind: str
    params: dict = Field(default_factory=dict)
    regularity: Optional[str] = None
    L: Optional[float] = None


class OracleSpec(BaseModel):
    kind: Literal['LinearSolve', 'GridSearch', 'None'] = 'None'
    step: Optional[float] = Field(default=None, gt=0)
    radius: float = Field(default=5.0, gt=0)
    center: Optional[List[float]] = None


class ProblemSpec(BaseModel):
    """Operators are listed in order: resolvents A_1..A_n, forwards B_1..B_m."""

    name: str = 'problem'
    dim: int = Field(ge=1)
    mode: Mode = Mode.COCOERCIVE
    resolvents: List[OperatorDescriptor]
    forwards: List[OperatorDescriptor] = Field(default_factory=list)
    known_solution: Optional[List[float]] = None
    oracle: Optional[OracleSpec] = None

    @model_validator(mode='after')
    def check_arity(self):
        n = len(self.resolvents)
        if n < 2:
            raise ValueError(f"need at least 2 resolvents, got {n}")
        if self.mode != Mode.COCOERCIVE and n < 3:
            raise ValueError(f"{self.mode.value} mode needs at least 3 resolvents, got {n}")
        expected = forward_count(n, self.mode)
        if len(self.forwards) != expected:
            raise ValueError(f"{self.mode.value} mode with n={n} needs {expected} forwards, got {len(self.forwards)}")
        if self.known_solution is not None and len(self.known_solution) != self.dim:
            raise ValueError(f"known_solution has {len(self.known_solution)} entries, dim is {self.dim}")
        return self

    @property
    def n(self):
        return len(self.resolvents)


def load_problem(path):
    with open(path, 'r', encoding='utf-8') as f:
        return parse_problem(json.load(f))


def parse_problem(payload):
    try:
        return ProblemSpec.model_validate(payload)
    except ValueError as e:
        raise ValidationError(f"Invalid problem description: {e}")


def dump_problem(spec, path):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(spec.model_dump_json(indent=2))
    return path


def spec_from_operators(name, mode, resolvents, forwards, known_solution=None, oracle=None):
    return ProblemSpec(
        name=name,
        dim=resolvents[0].dim,
        mode=Mode(mode),
        resolvents=[OperatorDescriptor(**op.to_descriptor()) for op in resolvents],
        forwards=[OperatorDescriptor(**op.to_descriptor()) for op in forwards],
        known_solution=None if known_solution is None else [float(v) for v in known_solution],
        oracle=oracle,
    )


def build_problem(spec, check_properties=True, samples=None, seed=0):
    """Instantiate operators from a ProblemSpec and verify their declared regularity."""
    samples = config.PROPERTY_SAMPLES if samples is None else samples
    resolvents = [resolvent_from_descriptor(d.model_dump(), spec.dim) for d in spec.resolvents]
    forwards = [forward_from_descriptor(d.model_dump(), spec.dim) for d in spec.forwards]
    problem = ProblemInstance(resolvents=resolvents, forwards=forwards, mode=spec.mode, name=spec.name)

    if check_properties:
        failures = []
        for i, op in enumerate(forwards):
            for report in check_regularity(op, samples, seed):
                if not report.passed:
                    failures.append({'operator': f"B_{i + 1}", 'check': report.name,
                                     'max_violation': report.max_violation})
        for i, op in enumerate(resolvents):
            report = check_firm_nonexpansive(op, 1.0, max(1, samples // 10), seed)
            if not report.passed:
                failures.append({'operator': f"A_{i + 1}", 'check': report.name,
                                 'max_violation': report.max_violation})
        if failures:
            raise ValidationError(f"Declared operator properties fail on sampled pairs ({spec.name})",
                                  details={'failures': failures})
    return problem


# ---------------------------------------------------------------------------
# Seeded matrices
# ---------------------------------------------------------------------------

def make_rng(seed):
    """PCG64 generator; the algorithm is fixed across platforms."""
    return np.random.Generator(np.random.PCG64(seed))


def power_iteration_norm(matrix, max_iter=100, rtol=1e-12, seed=0):
    """Upper bound on ||M||_2: power iteration on M'M, inflated by LIPSCHITZ_INFLATION."""
    mat = as_matrix(matrix, where='power iteration')
    gram = mat.T @ mat
    vec = make_rng(seed).standard_normal(gram.shape[0])
    vec /= np.linalg.norm(vec)
    estimate = 0.0
    for _ in range(max_iter):
        image = gram @ vec
        size = np.linalg.norm(image)
        if size == 0.0:
            return 0.0
        vec = image / size
        rayleigh = float(vec @ (gram @ vec))
        converged = abs(rayleigh - estimate) <= rtol * rayleigh
        estimate = rayleigh
        if converged:
            break
    return float(np.sqrt(estimate)) * LIPSCHITZ_INFLATION


def _orthogonal(d, rng):
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def random_spd(d, rng, low=0.5, high=2.0):
    """Symmetric positive definite matrix with top eigenvalue `high` and the rest in [low, 0.75 high]."""
    spectrum = np.concatenate([[high], rng.uniform(low, 0.75 * high, size=d - 1)])
    basis = _orthogonal(d, rng)
    mat = (basis * spectrum) @ basis.T
    return (mat + mat.T) / 2.0


def random_coupling(d1, d2, rng):
    """d1 x d2 matrix with largest singular value 1 and the others in [0.2, 0.6]."""
    rank = min(d1, d2)
    singular = np.concatenate([[1.0], rng.uniform(0.2, 0.6, size=rank - 1)])
    left, right = _orthogonal(d1, rng), _orthogonal(d2, rng)
    return (left[:, :rank] * singular) @ right[:, :rank].T


def random_monotone_map(d, rng, scale=1.0):
    """scale * U R U' with R block-diagonal rotations by angles in [pi/4, pi/2): monotone, not symmetric."""
    blocks = np.zeros((d, d))
    for j in range(0, d - 1, 2):
        theta = rng.uniform(np.pi / 4, np.pi / 2)
        c, s = np.cos(theta), np.sin(theta)
        blocks[j:j + 2, j:j + 2] = [[c, -s], [s, c]]
    basis = _orthogonal(d, rng)
    return scale * (basis @ blocks @ basis.T)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def make_quadratic_consensus(n=4, d=5, seed=0, matrices=None, offsets=None):
    """
    Minimize sum_i 1/2 x'Q_i x - c_i'x over R^d.

    f_1..f_{n-1} enter as forwards B_i = QuadGradient(Q_i, c_i); f_n enters
    through A_n = AffineResolvent(Q_n, c_n); A_1..A_{n-1} = 0.
    Explicit `matrices`/`offsets` override the seeded draws.
    """
    if n < 2 or d < 1:
        raise ValidationError(f"quadratic_consensus needs n >= 2 and d >= 1, got n={n}, d={d}")
    rng = make_rng(seed)
    if matrices is None:
        matrices, drawn = [], []
        for _ in range(n):
            matrices.append(random_spd(d, rng))
            drawn.append(rng.standard_normal(d))
        offsets = drawn if offsets is None else offsets
    matrices = [as_matrix(q) for q in matrices]
    offsets = [np.zeros(d) for _ in range(n)] if offsets is None else [as_vector(c, d) for c in offsets]
    if len(matrices) != n or len(offsets) != n:
        raise ValidationError(f"quadratic_consensus needs {n} matrices and offsets")

    forwards = [QuadGradient(q, c, lipschitz=power_iteration_norm(q)) for q, c in zip(matrices[:-1], offsets[:-1])]
    resolvents = [ZeroResolvent(d) for _ in range(n - 1)] + [AffineResolvent(d, matrices[-1], offsets[-1])]
    x_star = sla.solve(np.sum(matrices, axis=0), np.sum(offsets, axis=0), assume_a='pos')
    return spec_from_operators(f"quadratic_consensus_n{n}_d{d}_s{seed}", Mode.COCOERCIVE, resolvents, forwards,
                               known_solution=x_star, oracle=OracleSpec(kind='LinearSolve'))


def make_rotation_counterexample():
    """B_1 = rotation by 90 degrees: monotone, 1-Lipschitz, never cocoercive; unique zero at the origin."""
    rotation = np.array([[0.0, -1.0], [1.0, 0.0]])
    resolvents = [ZeroResolvent(2) for _ in range(3)]
    forwards = [SkewMap(rotation, lipschitz=1.0)]
    return spec_from_operators('rotation', Mode.LIPSCHITZ, resolvents, forwards,
                               known_solution=[0.0, 0.0], oracle=OracleSpec(kind='LinearSolve'))


def make_box_feasibility(boxes, step=None, radius=5.0):
    """Find a point in the intersection of boxes; A_i = normal cone of box i, all forwards zero.

    Each box is (lower, upper) with scalars or per-coordinate lists; None means unbounded.
    """
    if len(boxes) < 2:
        raise ValidationError(f"box_feasibility needs at least 2 boxes, got {len(boxes)}")
    dims = {len(np.atleast_1d(np.asarray(b, dtype=object))) for box in boxes for b in box if b is not None}
    d = dims.pop() if len(dims) == 1 else (1 if not dims else None)
    if d is None:
        raise ValidationError("Boxes disagree on dimension")
    resolvents = [BoxProjection(d, *[None if b is None else np.atleast_1d(b).tolist() for b in box])
                  for box in boxes]
    forwards = [ZeroMap(d) for _ in range(len(boxes) - 1)]
    oracle = OracleSpec(kind='GridSearch', step=step, radius=radius) if d <= 2 else None
    return spec_from_operators(f"box_feasibility_n{len(boxes)}", Mode.COCOERCIVE, resolvents, forwards,
                               oracle=oracle)


def make_bilinear_saddle(coupling, lipschitz=None, bounds=None):
    """
    Saddle point of Phi(x, y) = x'Py, solved on R^{d1+d2} with B_1 = (Py, -P'x).

    `bounds` = (lower, upper) constrains the joint variable through A_3.
    """
    coupling = as_matrix(coupling, where='bilinear coupling')
    if not np.any(coupling):
        raise ValidationError("Bilinear coupling matrix must be nonzero")
    d = sum(coupling.shape)
    lipschitz = power_iteration_norm(coupling) if lipschitz is None else float(lipschitz)
    forwards = [SaddleBilinear(coupling, lipschitz=lipschitz)]
    resolvents = [ZeroResolvent(d), ZeroResolvent(d)]
    if bounds is None:
        resolvents.append(ZeroResolvent(d))
        known, oracle = np.zeros(d), OracleSpec(kind='LinearSolve')
    else:
        resolvents.append(BoxProjection(d, *bounds))
        known = None
        oracle = OracleSpec(kind='GridSearch') if d <= 2 else None
    return spec_from_operators(f"bilinear_saddle_{coupling.shape[0]}x{coupling.shape[1]}", Mode.LIPSCHITZ,
                               resolvents, forwards, known_solution=known, oracle=oracle)


def make_mixed_instance(d=3, seed=0):
    """
    n = 4 with B_1 monotone Lipschitz (rotation-type affine map) and B_2, B_3
    cocoercive quadratic gradients; A_4 carries a fourth quadratic.
    """
    if d < 2:
        raise ValidationError(f"mixed instance needs d >= 2, got d={d}")
    rng = make_rng(seed)
    monotone = random_monotone_map(d, rng)
    c1 = rng.standard_normal(d)
    quads = [(random_spd(d, rng), rng.standard_normal(d)) for _ in range(3)]
    forwards = [AffineMap(monotone, c1, lipschitz=power_iteration_norm(monotone), regularity='lipschitz_monotone')]
    forwards += [QuadGradient(q, c, lipschitz=power_iteration_norm(q)) for q, c in quads[:2]]
    resolvents = [ZeroResolvent(d) for _ in range(3)] + [AffineResolvent(d, *quads[2])]
    total = monotone + sum(q for q, _ in quads)
    x_star = sla.solve(total, sum(c for _, c in quads) - c1)
    return spec_from_operators(f"mixed_quadratic_d{d}_s{seed}", Mode.MIXED, resolvents, forwards,
                               known_solution=x_star, oracle=OracleSpec(kind='LinearSolve'))


BUILTINS = {
    'quadratic_consensus': 'n quadratics, cocoercive mode (fb)',
    'rotation': '90-degree rotation, lipschitz mode (frb)',
    'box_feasibility': 'boxes [0,2], [1,3], R in 1-D, cocoercive mode (fb)',
    'bilinear_saddle': 'x\'Py with seeded 2x2 P, lipschitz mode (frb)',
    'mixed_quadratic': 'one monotone and two cocoercive forwards, mixed mode',
}


def make_builtin(name, seed=0, n=None, d=None):
    """Build a registered problem by name."""
    if name == 'quadratic_consensus':
        return make_quadratic_consensus(n or 4, d or 5, seed)
    if name == 'rotation':
        return make_rotation_counterexample()
    if name == 'box_feasibility':
        return make_box_feasibility([(0.0, 2.0), (1.0, 3.0), (None, None)])
    if name == 'bilinear_saddle':
        size = d or 2
        return make_bilinear_saddle(random_coupling(size, size, make_rng(seed)))
    if name == 'mixed_quadratic':
        return make_mixed_instance(d or 3, seed)
    raise NotFoundError(f"builtin problem '{name}'")


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

@dataclass
class OracleResult:
    method: str
    solution: Optional[np.ndarray]
    candidates: Optional[np.ndarray] = None


def linear_solve(problem):
    """Solve sum_i M_i x + sum_i offset_i = 0 with every operator affine and single-valued."""
    total = np.zeros((problem.dim, problem.dim))
    offset = np.zeros(problem.dim)
    for op in list(problem.resolvents) + list(problem.forwards):
        mat, shift = op.linear_part()
        total += mat
        offset += shift
    try:
        return sla.solve(total, -offset)
    except (sla.LinAlgError, ValueError) as e:
        raise OracleError(f"Summed linear part is singular: {e}")


def grid_search(problem, step=None, radius=5.0, center=None, tolerance=None, max_points=None):
    """
    All grid points of [center - radius, center + radius]^d (d <= 2) where
    0 lies in sum_i A_i(x) + sum_i B_i(x), using coordinatewise enclosures.

    Grids with more than max_points points (config.GRID_MAX_POINTS) are refused.
    """
    d = problem.dim
    if d > 2:
        raise OracleError(f"Grid search supports d <= 2, got d = {d}")
    step = config.GRID_DEFAULT_STEP[d] if step is None else float(step)
    max_points = config.GRID_MAX_POINTS if max_points is None else max_points
    axis = np.arange(-radius, radius + step / 2, step)
    total = axis.size ** d
    if total > max_points:
        raise OracleError(f"Grid of {total} points exceeds the limit of {max_points}",
                          details={'points': total, 'limit': max_points, 'step': step, 'radius': radius})
    center = np.zeros(d) if center is None else as_vector(center, d, where='grid center')
    tolerance = step * (1.0 + sum(op.lipschitz for op in problem.forwards)) if tolerance is None else tolerance
    grids = np.meshgrid(*[c + axis for c in center], indexing='ij')
    points = np.stack([g.ravel() for g in grids], axis=1)

    keep = np.ones(points.shape[0], dtype=bool)
    lo, hi = np.zeros(points.shape), np.zeros(points.shape)
    # inf - inf only arises on rows already dropped by keep
    with np.errstate(invalid='ignore'):
        for op in problem.resolvents:
            op_lo, op_hi = op.value_boxes(points)
            keep &= np.all(op_lo <= op_hi, axis=1)
            lo += op_lo
            hi += op_hi
        target = np.zeros(points.shape)
        for op in problem.forwards:
            target -= op.evaluate_rows(points)
        keep &= np.all(lo - tolerance <= target, axis=1) & np.all(target <= hi + tolerance, axis=1)
    logger.debug(f"grid search: {int(keep.sum())} of {total} points satisfy the inclusion")
    return points[keep]


def oracle_solution(spec, problem=None):
    """Independent reference solution for a spec according to spec.oracle."""
    problem = problem or build_problem(spec, check_properties=False)
    kind = spec.oracle.kind if spec.oracle else 'None'
    if kind == 'LinearSolve':
        return OracleResult('LinearSolve', linear_solve(problem))
    if kind == 'GridSearch':
        step = spec.oracle.step or config.GRID_DEFAULT_STEP.get(problem.dim, 1e-3)
        candidates = grid_search(problem, step, spec.oracle.radius, spec.oracle.center)
        if candidates.shape[0] == 0:
            raise OracleError("Grid search found no point satisfying the inclusion")
        spread = np.max(np.ptp(candidates, axis=0))
        solution = candidates.mean(axis=0) if spread <= 2 * step else None
        return OracleResult('GridSearch', solution, candidates)
    if spec.known_solution is not None:
        return OracleResult('Known', np.asarray(spec.known_solution, dtype=float))
    raise OracleError(f"No oracle available for {spec.name}")


def certificate(problem, x_star, lam=1.0, tolerance=None):
    """
    v with v_i = minimal-norm element of A_i(x*) for i < n and v_n closing
    sum v_i + sum B_i(x*) = 0; v_n is checked against A_n through its resolvent.
    """
    tolerance = config.CERTIFICATE_TOLERANCE if tolerance is None else tolerance
    x_star = as_vector(x_star, problem.dim, where='x_star')
    v = [op.selection(x_star) for op in problem.resolvents[:-1]]
    forward_sum = np.sum([op.evaluate(x_star) for op in padded_forwards(problem)], axis=0)
    v.append(-(np.sum(v, axis=0) + forward_sum))
    membership = float(np.linalg.norm(problem.resolvents[-1].resolve(lam, x_star + lam * v[-1]) - x_star))
    if membership > tolerance * max(1.0, lam):
        raise CertificateError(membership, tolerance)
    return v


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------

def fb_baseline(forward, resolvent, lam, x0, iters):
    """Plain forward-backward x^{k+1} = J_{lam A}(x^k - lam B(x^k)); returns x^0..x^iters."""
    if iters < 1:
        raise ValidationError(f"iters must be >= 1, got {iters}")
    x = as_vector(x0, resolvent.dim, where='x0')
    iterates = [x]
    for _ in range(iters):
        x = resolvent.resolve(lam, x - lam * forward.evaluate(x))
        iterates.append(x)
    return iterates


def product_space_blocks(resolvents, forwards, lam, z0_blocks=None, iters=1):
    """
    Davis-Yin on the product space with block averaging:
    x^k = mean_i z_i^k;  z_i^{k+1} = z_i^k + J_{lam A_i}(2x^k - z_i^k - lam B_i(x^k)) - x^k.
    Returns x^0..x^iters.
    """
    if len(forwards) != len(resolvents):
        raise ValidationError("Product-space iteration needs one forward per block")
    if iters < 1:
        raise ValidationError(f"iters must be >= 1, got {iters}")
    L = max((op.lipschitz for op in forwards), default=0.0)
    if not lam > 0 or (L > 0 and lam >= 2.0 / L):
        raise ValidationError(f"lambda={lam} must lie in (0, 2/L) = (0, {2.0 / L if L else float('inf'):.6g})")
    d = resolvents[0].dim
    z = [np.zeros(d) for _ in resolvents] if z0_blocks is None else \
        [as_vector(b, d, where=f"z0 block {i + 1}") for i, b in enumerate(z0_blocks)]
    if len(z) != len(resolvents):
        raise ValidationError(f"Need {len(resolvents)} initial blocks, got {len(z)}")

    x = np.mean(z, axis=0)
    iterates = [x]
    for _ in range(iters):
        z = [zi + op.resolve(lam, 2.0 * x - zi - lam * b.evaluate(x)) - x
             for zi, op, b in zip(z, resolvents, forwards)]
        x = np.mean(z, axis=0)
        iterates.append(x)
    return iterates


def product_space_dy(problem, lam, z0_blocks=None, iters=1):
    """Product-space baseline for a cocoercive problem; B_n is the zero map."""
    if problem.mode != Mode.COCOERCIVE:
        raise ValidationError("Product-space baseline needs a cocoercive problem")
    forwards = padded_forwards(problem) + [ZeroMap(problem.dim)]
    return product_space_blocks(problem.resolvents, forwards, lam, z0_blocks, iters)
