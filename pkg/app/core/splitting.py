"""
Fixed-point operators and the sequential driver.

Three operators act on the governing variable z = (z_1, ..., z_{n-1}):

* ``apply_T``        forward-backward sweep, every B_i cocoercive (n-1 forwards)
* ``apply_T_tilde``  forward-reflected-backward sweep, B_i monotone + Lipschitz (n-2 forwards)
* ``apply_mixed``    reflection only where B_{i-1} is not cocoercive (n-1 forwards,
                     the last one cocoercive)

Indices in docstrings are 1-based (A_1..A_n, z_1..z_{n-1}); storage is 0-based.

All three share one sweep and a handful of arithmetic kernels. The ring
simulator calls the same kernels so both executions perform the identical
sequence of floating-point operations and agree bit for bit.
"""
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np

import config
from app.core.operators import ZeroMap, as_vector
from app.utils.errors import CertificateError, TraceError, ValidationError
from app.utils.logger import get_solver_logger

logger = get_solver_logger()


class Mode(str, Enum):
    COCOERCIVE = 'cocoercive'
    LIPSCHITZ = 'lipschitz'
    MIXED = 'mixed'


# CLI/HTTP algorithm names
ALGO_MODES = {'fb': Mode.COCOERCIVE, 'frb': Mode.LIPSCHITZ, 'mixed': Mode.MIXED}


class Status(str, Enum):
    CONVERGED = 'Converged'
    MAX_ITERS = 'MaxIters'
    MAX_ROUNDS = 'MaxRounds'


def forward_count(n, mode):
    """Number of forward operators m for a ring of n resolvents."""
    return n - 2 if Mode(mode) == Mode.LIPSCHITZ else n - 1


# ---------------------------------------------------------------------------
# Problem and parameter types
# ---------------------------------------------------------------------------

@dataclass
class ProblemInstance:
    """Operators A_1..A_n (resolvents) and B_1..B_m (forwards) for one mode."""

    resolvents: list
    forwards: list
    mode: Mode = Mode.COCOERCIVE
    name: str = 'problem'

    def __post_init__(self):
        self.mode = Mode(self.mode)
        n = len(self.resolvents)
        if n < 2:
            raise ValidationError(f"Need at least 2 resolvent operators, got {n}")
        if self.mode != Mode.COCOERCIVE and n < 3:
            raise ValidationError(f"{self.mode.value} mode needs n >= 3, got n={n}")
        expected = forward_count(n, self.mode)
        if len(self.forwards) != expected:
            raise ValidationError(
                f"{self.mode.value} mode with n={n} needs {expected} forward operators, got {len(self.forwards)}",
                details={'n': n, 'expected': expected, 'got': len(self.forwards)})
        dims = {op.dim for op in list(self.resolvents) + list(self.forwards)}
        if len(dims) != 1:
            raise ValidationError(f"Operators disagree on dimension: {sorted(dims)}")

        if self.mode == Mode.COCOERCIVE:
            bad = [i + 1 for i, op in enumerate(self.forwards) if not op.is_cocoercive]
            if bad:
                raise ValidationError("Cocoercive mode requires cocoercive forwards",
                                      details={'non_cocoercive': bad})
        elif self.mode == Mode.LIPSCHITZ:
            bad = [i + 1 for i, op in enumerate(self.forwards) if op.is_cocoercive and op.kind != ZeroMap.kind]
            if bad:
                raise ValidationError("Lipschitz mode requires forwards declared lipschitz_monotone",
                                      details={'cocoercive': bad})
        elif not self.forwards[-1].is_cocoercive:
            raise ValidationError(f"Mixed mode requires B_{n - 1} to be declared cocoercive")

    @property
    def n(self):
        return len(self.resolvents)

    @property
    def dim(self):
        return self.resolvents[0].dim

    @property
    def lipschitz(self):
        """L = max_i L_i over the forward operators (0 with no forwards)."""
        return max((op.lipschitz for op in self.forwards), default=0.0)


@dataclass(frozen=True)
class StepParams:
    lam: float
    gamma: float
    L: float
    mode: Mode

    def to_dict(self):
        return {'lambda': self.lam, 'gamma': self.gamma, 'L': self.L, 'mode': Mode(self.mode).value}


@dataclass
class ParamCheck:
    """Outcome of validate_params; bounds are the open intervals (0, upper)."""

    accepted: bool
    reason: Optional[str]
    lambda_upper: float
    gamma_upper: Optional[float]
    lambda_rule: str
    gamma_rule: str

    def __bool__(self):
        return self.accepted

    def to_dict(self):
        def finite(v):
            return None if v is None or not math.isfinite(v) else v
        return {
            'accepted': self.accepted,
            'reason': self.reason,
            'lambda_interval': [0.0, finite(self.lambda_upper)],
            'gamma_interval': [0.0, finite(self.gamma_upper)],
            'lambda_rule': self.lambda_rule,
            'gamma_rule': self.gamma_rule,
        }


def _interval_rules(n, mode, L):
    """(lambda_upper, gamma_upper(lam), lambda_rule, gamma_rule) for the active mode."""
    if mode == Mode.COCOERCIVE:
        if n == 2:
            lam_upper, lam_rule = (math.inf if L == 0 else 4.0 / L), '4/L'
            return lam_upper, (lambda lam: 2.0 - lam * L / 2.0), lam_rule, '2 - lambda*L/2'
        lam_upper = math.inf if L == 0 else 2.0 / L
        return lam_upper, (lambda lam: 1.0 - lam * L / 2.0), '2/L', '1 - lambda*L/2'
    lam_upper = math.inf if L == 0 else 1.0 / (2.0 * L)
    return lam_upper, (lambda lam: 1.0 - 2.0 * lam * L), '1/(2L)', '1 - 2*lambda*L'


def validate_params(n, mode, L, lam, gamma):
    """Accept iff lam and gamma lie in the open intervals required by the mode.

    Rejection is returned as a value; the reason names the violated bound.
    """
    try:
        mode = Mode(mode)
    except ValueError:
        return ParamCheck(False, f"unknown mode '{mode}'", math.nan, None, '', '')
    L = float(L)

    def reject(reason, lam_upper=math.nan, gamma_upper=None, lam_rule='', gamma_rule=''):
        return ParamCheck(False, reason, lam_upper, gamma_upper, lam_rule, gamma_rule)

    if n < 2:
        return reject(f"n must be >= 2, got {n}")
    if mode != Mode.COCOERCIVE and n < 3:
        return reject(f"{mode.value} mode needs n >= 3, got {n}")
    if not math.isfinite(L) or L < 0:
        return reject(f"L must be finite and >= 0, got {L}")

    lam_upper, gamma_of, lam_rule, gamma_rule = _interval_rules(n, mode, L)
    if not (math.isfinite(lam) and lam > 0):
        return reject(f"lambda must be > 0, got {lam}", lam_upper, None, lam_rule, gamma_rule)
    if lam >= lam_upper:
        return reject(f"lambda={lam} violates lambda < {lam_rule} = {lam_upper:.6g}",
                      lam_upper, None, lam_rule, gamma_rule)

    gamma_upper = gamma_of(lam)
    if not (math.isfinite(gamma) and gamma > 0):
        return reject(f"gamma must be > 0, got {gamma}", lam_upper, gamma_upper, lam_rule, gamma_rule)
    if gamma >= gamma_upper:
        return reject(f"gamma={gamma} violates gamma < {gamma_rule} = {gamma_upper:.6g}",
                      lam_upper, gamma_upper, lam_rule, gamma_rule)
    return ParamCheck(True, None, lam_upper, gamma_upper, lam_rule, gamma_rule)


def default_params(n, mode, L):
    """lambda = 1/L (cocoercive) or 1/(4L) (lipschitz, mixed); 1 when L = 0.

    gamma is DEFAULT_GAMMA_FRACTION of its upper bound at that lambda.
    """
    mode = Mode(mode)
    L = float(L)
    if L == 0:
        lam = 1.0
    elif mode == Mode.COCOERCIVE:
        lam = 1.0 / L
    else:
        lam = 1.0 / (4.0 * L)
    _, gamma_of, _, _ = _interval_rules(n, mode, L)
    return StepParams(lam=lam, gamma=config.DEFAULT_GAMMA_FRACTION * gamma_of(lam), L=L, mode=mode)


def default_gamma(n, mode, L, lam):
    """DEFAULT_GAMMA_FRACTION of the gamma upper bound at the given lambda."""
    _, gamma_of, _, _ = _interval_rules(n, Mode(mode), float(L))
    return config.DEFAULT_GAMMA_FRACTION * gamma_of(lam)


def make_params(problem, mode=None, lam=None, gamma=None):
    """Fill missing lambda/gamma with defaults for the problem and validate the result."""
    mode = Mode(mode or problem.mode)
    L = problem.lipschitz
    lam = default_params(problem.n, mode, L).lam if lam is None else float(lam)
    if gamma is None:
        gamma = default_gamma(problem.n, mode, L, lam)
    params = StepParams(lam=lam, gamma=float(gamma), L=L, mode=mode)
    ensure_valid(problem, params)
    return params


def ensure_valid(problem, params):
    """Raise ValidationError unless params are admissible for problem."""
    L = max(params.L, problem.lipschitz)
    check = validate_params(problem.n, params.mode, L, params.lam, params.gamma)
    if not check:
        raise ValidationError(check.reason, details=check.to_dict())
    return check


# ---------------------------------------------------------------------------
# Arithmetic kernels shared with the ring agents
# ---------------------------------------------------------------------------

def resolvent_input(first, x_prev, z_prev, lam, forward_value=None, reflected=None):
    """((first + x_prev) - z_prev) - lam * forward_value - reflected, left to right."""
    u = first + x_prev
    u = u - z_prev
    if forward_value is not None:
        u = u - lam * forward_value
    if reflected is not None:
        u = u - reflected
    return u


def reflected_term(lam, value_now, value_before):
    """lam * (B(x_i) - B(x_{i-1})) for the operator owned by the sending agent."""
    return lam * (value_now - value_before)


def relaxed_update(z, gamma, x_next, x_curr):
    return z + gamma * (x_next - x_curr)


def squared_distance(a, b):
    diff = a - b
    return float(diff @ diff)


def coerce_z(problem, z):
    """Validate z as n-1 vectors of the problem dimension; returns a list of arrays."""
    blocks = list(z)
    if len(blocks) != problem.n - 1:
        raise ValidationError(f"z must have n-1 = {problem.n - 1} blocks, got {len(blocks)}")
    return [as_vector(block, problem.dim, where=f"z_{i + 1}") for i, block in enumerate(blocks)]


def zeros_z(problem):
    return [np.zeros(problem.dim) for _ in range(problem.n - 1)]


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def _sweep(resolvents, forwards, lam, z, reflect):
    """Compute x_1..x_n for one iteration.

    reflect: None (no reflection), 'all' (every B_{i-2}) or 'monotone'
    (only where B_{i-2} is not cocoercive; zeros otherwise).
    Returns (x, cache) with cache[j] = B_{j+1}(x_{j+1}).
    """
    n, m = len(resolvents), len(forwards)
    x = [None] * n
    cache = [None] * m
    x[0] = resolvents[0].resolve(lam, z[0])
    for i in range(1, n):
        first = z[i] if i < n - 1 else x[0]
        value = None
        if i - 1 < m:
            value = forwards[i - 1].evaluate(x[i - 1])
            cache[i - 1] = value
        reflected = None
        if reflect is not None and i >= 2:
            source = forwards[i - 2]
            if reflect == 'monotone' and source.is_cocoercive:
                reflected = np.zeros_like(x[i - 1])
            else:
                reflected = reflected_term(lam, source.evaluate(x[i - 1]), cache[i - 2])
        x[i] = resolvents[i].resolve(lam, resolvent_input(first, x[i - 1], z[i - 1], lam, value, reflected))
    return x, cache


def _check_arity(problem, expected, label):
    if len(problem.forwards) != expected:
        raise ValidationError(f"{label} needs {expected} forward operators, got {len(problem.forwards)}")


def sweep_cocoercive(problem, params, z):
    """x_1 = J(z_1); x_i = J(z_i + x_{i-1} - z_{i-1} - lam B_{i-1}(x_{i-1})); x_n uses x_1 in place of z_n."""
    _check_arity(problem, problem.n - 1, 'cocoercive sweep')
    return _sweep(problem.resolvents, problem.forwards, params.lam, z, None)


def sweep_frb(problem, params, z):
    """Forward-reflected-backward sweep: subtracts lam (B_{i-2}(x_{i-1}) - B_{i-2}(x_{i-2})) for i >= 3."""
    if problem.n < 3:
        raise ValidationError("Forward-reflected-backward sweep needs n >= 3")
    _check_arity(problem, problem.n - 2, 'forward-reflected-backward sweep')
    return _sweep(problem.resolvents, problem.forwards, params.lam, z, 'all')


def sweep_mixed(problem, params, z):
    """Reflection only for forwards not declared cocoercive; the last forward must be cocoercive."""
    if problem.n < 3:
        raise ValidationError("Mixed sweep needs n >= 3")
    _check_arity(problem, problem.n - 1, 'mixed sweep')
    if not problem.forwards[-1].is_cocoercive:
        raise ValidationError(f"Mixed sweep requires B_{problem.n - 1} to be cocoercive")
    return _sweep(problem.resolvents, problem.forwards, params.lam, z, 'monotone')


SWEEPS = {
    Mode.COCOERCIVE: sweep_cocoercive,
    Mode.LIPSCHITZ: sweep_frb,
    Mode.MIXED: sweep_mixed,
}


def _relax_all(z, gamma, x):
    return [relaxed_update(z[i], gamma, x[i + 1], x[i]) for i in range(len(z))]


def apply_T(problem, params, z):
    """z_i <- z_i + gamma (x_{i+1} - x_i) with x from the cocoercive sweep."""
    x, cache = sweep_cocoercive(problem, params, z)
    return _relax_all(z, params.gamma, x), x, cache


def apply_T_tilde(problem, params, z):
    x, cache = sweep_frb(problem, params, z)
    return _relax_all(z, params.gamma, x), x, cache


def apply_mixed(problem, params, z):
    x, cache = sweep_mixed(problem, params, z)
    return _relax_all(z, params.gamma, x), x, cache


APPLY = {
    Mode.COCOERCIVE: apply_T,
    Mode.LIPSCHITZ: apply_T_tilde,
    Mode.MIXED: apply_mixed,
}


def apply_operator(problem, params, z):
    """Apply the fixed-point operator selected by params.mode."""
    return APPLY[Mode(params.mode)](problem, params, z)


def residual_sq(z_next, z):
    """||z_next - z||^2 accumulated block by block in increasing index order."""
    total = 0.0
    for a, b in zip(z_next, z):
        total = total + squared_distance(a, b)
    return total


def consensus_gap(x):
    """max_i ||x_{i+1} - x_i||."""
    return max(float(np.linalg.norm(x[i + 1] - x[i])) for i in range(len(x) - 1))


# ---------------------------------------------------------------------------
# Fixed-point construction and extraction
# ---------------------------------------------------------------------------

def padded_forwards(problem):
    """Forwards B_1..B_{n-1}, filling a missing B_{n-1} with the zero map."""
    forwards = list(problem.forwards)
    while len(forwards) < problem.n - 1:
        forwards.append(ZeroMap(problem.dim))
    return forwards


def build_fixed_point(problem, params, x_star, v, tolerance=None):
    """z_1 = x* + lam v_1; z_i = lam v_i + z_{i-1} + lam B_{i-1}(x*) for i = 2..n-1.

    v must certify x*: v_i in A_i(x*) and sum v_i + sum B_i(x*) = 0.
    """
    tolerance = config.CERTIFICATE_TOLERANCE if tolerance is None else tolerance
    lam = params.lam
    x_star = as_vector(x_star, problem.dim, where='x_star')
    v = [as_vector(vi, problem.dim, where=f"v_{i + 1}") for i, vi in enumerate(v)]
    if len(v) != problem.n:
        raise ValidationError(f"Certificate needs n = {problem.n} vectors, got {len(v)}")
    forwards = padded_forwards(problem)
    values = [op.evaluate(x_star) for op in forwards]

    closure = float(np.linalg.norm(np.sum(v, axis=0) + np.sum(values, axis=0)))
    if closure > tolerance:
        raise CertificateError(closure, tolerance)
    for i, (op, vi) in enumerate(zip(problem.resolvents, v)):
        membership = float(np.linalg.norm(op.resolve(lam, x_star + lam * vi) - x_star))
        if membership > tolerance * max(1.0, lam):
            err = CertificateError(membership, tolerance)
            err.details['operator'] = i + 1
            raise err

    z_bar = [x_star + lam * v[0]]
    for i in range(1, problem.n - 1):
        z_bar.append(lam * v[i] + z_bar[i - 1] + lam * values[i - 1])
    return z_bar


def extract_solution(problem, params, z_bar):
    """Return (x_bar, deviation) with x_bar = J_{lam A_1}(z_1).

    deviation is the largest violation of the fixed-point identities
    x_bar = J_{lam A_i}(z_i - z_{i-1} + x_bar - lam B_{i-1}(x_bar)), i = 2..n-1, and
    x_bar = J_{lam A_n}(2 x_bar - z_{n-1} - lam B_{n-1}(x_bar)).
    """
    lam = params.lam
    z_bar = coerce_z(problem, z_bar)
    x_bar = problem.resolvents[0].resolve(lam, z_bar[0])
    forwards = padded_forwards(problem)
    n = problem.n
    deviation = 0.0
    for i in range(1, n - 1):
        u = z_bar[i] - z_bar[i - 1] + x_bar - lam * forwards[i - 1].evaluate(x_bar)
        deviation = max(deviation, float(np.linalg.norm(problem.resolvents[i].resolve(lam, u) - x_bar)))
    u = 2.0 * x_bar - z_bar[n - 2] - lam * forwards[n - 2].evaluate(x_bar)
    deviation = max(deviation, float(np.linalg.norm(problem.resolvents[n - 1].resolve(lam, u) - x_bar)))
    return x_bar, deviation


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

@dataclass
class StopConfig:
    tol_residual_sq: float = config.DEFAULT_TOL_RESIDUAL_SQ
    max_iters: int = config.DEFAULT_MAX_ITERS
    check_period: int = config.DEFAULT_CHECK_PERIOD

    def __post_init__(self):
        if self.tol_residual_sq < 0:
            raise ValidationError(f"tol_residual_sq must be >= 0, got {self.tol_residual_sq}")
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.check_period < 1:
            raise ValidationError(f"check_period must be >= 1, got {self.check_period}")


@dataclass
class SplitState:
    z: list
    x: Optional[list] = None
    forward_cache: Optional[list] = None
    k: int = 0
    last_residual_sq: float = math.inf


@dataclass
class TraceRecord:
    k: int
    residual_sq: float
    consensus_gap: float
    dual_values: Optional[list]
    wall_time: float


@dataclass
class Trace:
    records: List[TraceRecord] = field(default_factory=list)

    def append(self, record):
        if self.records and record.k <= self.records[-1].k:
            raise TraceError(f"Trace records must increase in k ({record.k} after {self.records[-1].k})")
        self.records.append(record)

    def rows(self):
        """(k, residual_sq, consensus_gap, dual_max_dist) per record; dual distance None when not recorded."""
        if self.records and all(r.dual_values is not None for r in self.records):
            dual = [max(dists, default=0.0) for dists in dual_trajectory(self)]
        else:
            dual = [None] * len(self.records)
        return [(r.k, r.residual_sq, r.consensus_gap, d) for r, d in zip(self.records, dual)]


@dataclass
class IterationResult:
    z: list
    x: list
    trace: Trace
    status: Status
    iterations: int


def trace_record(k, residual, x, cache, record_duals, started):
    duals = [value.copy() for value in cache] if record_duals else None
    return TraceRecord(k=k, residual_sq=residual, consensus_gap=consensus_gap(x),
                       dual_values=duals, wall_time=time.perf_counter() - started)


def step(problem, params, state):
    """Advance a SplitState by one application of the mode's operator."""
    z_next, x, cache = apply_operator(problem, params, state.z)
    return SplitState(z=z_next, x=x, forward_cache=cache, k=state.k + 1,
                      last_residual_sq=residual_sq(z_next, state.z))


def iterate(problem, params, z0=None, stop=None, record_duals=False):
    """Iterate the mode's operator until ||z^{k+1} - z^k||^2 <= tol or k = max_iters.

    The residual is checked every check_period iterations and at max_iters;
    each check produces one trace record.
    """
    ensure_valid(problem, params)
    stop = stop or StopConfig()
    z = zeros_z(problem) if z0 is None else coerce_z(problem, z0)
    apply = APPLY[Mode(params.mode)]
    trace = Trace()
    started = time.perf_counter()
    logger.info(f"iterate {problem.name}: mode={Mode(params.mode).value} n={problem.n} d={problem.dim} "
                f"lambda={params.lam:.6g} gamma={params.gamma:.6g}")

    status = Status.MAX_ITERS
    x = None
    k = 0
    while k < stop.max_iters:
        z_next, x, cache = apply(problem, params, z)
        k += 1
        if k % stop.check_period == 0 or k == stop.max_iters:
            residual = residual_sq(z_next, z)
            trace.append(trace_record(k, residual, x, cache, record_duals, started))
            logger.debug(f"k={k} residual_sq={residual:.3e}")
            if residual <= stop.tol_residual_sq:
                z = z_next
                status = Status.CONVERGED
                break
        z = z_next

    logger.info(f"iterate {problem.name}: {status.value} after {k} iterations")
    return IterationResult(z=z, x=x, trace=trace, status=status, iterations=k)


def dual_trajectory(trace):
    """||B_i(x_i^k) - B_i(x_i^final)|| per trace record, one list per record."""
    if not trace.records:
        raise TraceError("Trace is empty")
    if any(r.dual_values is None for r in trace.records):
        raise TraceError("Trace was recorded without dual values")
    final = trace.records[-1].dual_values
    return [[float(np.linalg.norm(value - last)) for value, last in zip(r.dual_values, final)]
            for r in trace.records]
