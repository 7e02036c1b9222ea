"""
Operator catalog for RingSplit.

Set-valued maximally monotone operators A_i are represented only through their
resolvents J_{lam A}; single-valued operators B_i carry a declared regularity
(cocoercive or monotone-Lipschitz) and a declared constant L.

Vectors are 1-D float64 numpy arrays. Every public entry point rejects inputs
of the wrong dimension or with NaN/Inf entries.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import linalg as sla

import config
from app.utils.errors import DimensionError, NonFiniteError, OracleError, ValidationError

# Matrices declared symmetric/skew must match their transpose to this tolerance.
STRUCTURE_TOLERANCE = 1e-12


class Regularity(str, Enum):
    COCOERCIVE = 'cocoercive'
    LIPSCHITZ_MONOTONE = 'lipschitz_monotone'


def as_vector(values, dim=None, where='operator'):
    """Coerce values to a finite 1-D float array, checking its dimension."""
    vec = np.asarray(values, dtype=float)
    if vec.ndim == 0:
        vec = vec.reshape(1)
    if vec.ndim != 1:
        raise ValidationError(f"{where}: expected a vector, got shape {vec.shape}")
    if dim is not None and vec.shape[0] != dim:
        raise DimensionError(dim, vec.shape[0], where)
    if not np.all(np.isfinite(vec)):
        raise NonFiniteError(where)
    return vec


def as_matrix(values, where='operator'):
    mat = np.atleast_2d(np.asarray(values, dtype=float))
    if mat.ndim != 2:
        raise ValidationError(f"{where}: expected a matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise NonFiniteError(where)
    return mat


def _bounds(values, dim, fill):
    """Box bounds: None entries (JSON null) mean unbounded."""
    if values is None:
        return np.full(dim, fill)
    out = np.array([fill if v is None else float(v) for v in np.atleast_1d(np.asarray(values, dtype=object))])
    if out.shape[0] != dim:
        raise DimensionError(dim, out.shape[0], 'box bounds')
    return out


def _soft_threshold(u, threshold):
    return np.sign(u) * np.maximum(np.abs(u) - threshold, 0.0)


def _interval_subgradient(delta, weight):
    """Coordinatewise enclosure of weight * d|t| at t = delta."""
    lo = np.where(delta > 0, weight, -weight)
    hi = np.where(delta < 0, -weight, weight)
    return lo, hi


# ---------------------------------------------------------------------------
# Resolvent-defined operators
# ---------------------------------------------------------------------------

class ResolventOp:
    """A maximally monotone operator A known through x -> J_{lam A}(x)."""

    kind = 'abstract'

    def __init__(self, dim):
        dim = int(dim)
        if dim < 1:
            raise ValidationError(f"Operator dimension must be positive, got {dim}")
        self.dim = dim

    def resolve(self, lam, u):
        """Return J_{lam A}(u), the unique v with u - v in lam A(v)."""
        if not lam > 0:
            raise ValidationError(f"Resolvent parameter must be positive, got {lam}")
        u = as_vector(u, self.dim, where=f"resolve[{self.kind}]")
        out = self._resolve(float(lam), u)
        if not np.all(np.isfinite(out)):
            raise NonFiniteError(f"resolve[{self.kind}] output")
        return out

    def _resolve(self, lam, u):
        raise NotImplementedError

    def selection(self, x):
        """Minimal-norm element of A(x)."""
        raise NotImplementedError

    def value_box(self, x):
        """Coordinatewise (lo, hi) enclosure of A(x); empty when lo > hi."""
        raise OracleError(f"{self.kind} has no coordinatewise enclosure")

    def value_boxes(self, points):
        """value_box for every row of an (N, dim) array; returns (N, dim) arrays lo, hi."""
        boxes = [self.value_box(p) for p in points]
        lo = np.array([b[0] for b in boxes], dtype=float).reshape(-1, self.dim)
        hi = np.array([b[1] for b in boxes], dtype=float).reshape(-1, self.dim)
        return lo, hi

    def linear_part(self):
        """(M, offset) with A(x) = M x + offset, for single-valued affine operators."""
        raise OracleError(f"{self.kind} is not a single-valued affine operator")

    def params(self):
        return {}

    def to_descriptor(self):
        return {'kind': self.kind, 'params': self.params()}

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class ZeroResolvent(ResolventOp):
    """A = 0, so J_{lam A} is the identity for every lam."""

    kind = 'zero'

    def _resolve(self, lam, u):
        return u.copy()

    def selection(self, x):
        return np.zeros(self.dim)

    def value_box(self, x):
        return np.zeros(self.dim), np.zeros(self.dim)

    def value_boxes(self, points):
        return np.zeros(points.shape), np.zeros(points.shape)

    def linear_part(self):
        return np.zeros((self.dim, self.dim)), np.zeros(self.dim)

    @classmethod
    def from_params(cls, dim, params):
        return cls(dim)


class L1Prox(ResolventOp):
    """Subdifferential of w * ||x||_1; the resolvent is soft thresholding at lam * w."""

    kind = 'l1_prox'

    def __init__(self, dim, weight):
        super().__init__(dim)
        if weight < 0:
            raise ValidationError(f"L1 weight must be nonnegative, got {weight}")
        self.weight = float(weight)

    def _resolve(self, lam, u):
        return _soft_threshold(u, lam * self.weight)

    def selection(self, x):
        x = as_vector(x, self.dim, where='selection[l1_prox]')
        return self.weight * np.sign(x)

    def value_box(self, x):
        x = as_vector(x, self.dim, where='value_box[l1_prox]')
        return _interval_subgradient(x, self.weight)

    def value_boxes(self, points):
        return _interval_subgradient(points, self.weight)

    def params(self):
        return {'weight': self.weight}

    @classmethod
    def from_params(cls, dim, params):
        return cls(dim, params.get('weight', 1.0))


class SubdiffAbsSum(ResolventOp):
    """Subdifferential of w * sum_j |x_j - a_j|; resolvent is a + soft(u - a, lam * w)."""

    kind = 'subdiff_abs_sum'

    def __init__(self, dim, center, weight=1.0):
        super().__init__(dim)
        if weight < 0:
            raise ValidationError(f"Absolute-sum weight must be nonnegative, got {weight}")
        self.center = as_vector(center, dim, where='subdiff_abs_sum center')
        self.weight = float(weight)

    def _resolve(self, lam, u):
        return self.center + _soft_threshold(u - self.center, lam * self.weight)

    def selection(self, x):
        x = as_vector(x, self.dim, where='selection[subdiff_abs_sum]')
        return self.weight * np.sign(x - self.center)

    def value_box(self, x):
        x = as_vector(x, self.dim, where='value_box[subdiff_abs_sum]')
        return _interval_subgradient(x - self.center, self.weight)

    def value_boxes(self, points):
        return _interval_subgradient(points - self.center, self.weight)

    def params(self):
        return {'center': self.center.tolist(), 'weight': self.weight}

    @classmethod
    def from_params(cls, dim, params):
        return cls(dim, params['center'], params.get('weight', 1.0))


class BoxProjection(ResolventOp):
    """Normal cone of the box [lower, upper]; the resolvent is the projection for every lam."""

    kind = 'box_projection'

    def __init__(self, dim, lower=None, upper=None):
        super().__init__(dim)
        self.lower = _bounds(lower, self.dim, -np.inf)
        self.upper = _bounds(upper, self.dim, np.inf)
        if np.any(self.lower > self.upper):
            raise ValidationError("Box lower bound exceeds upper bound",
                                  details={'lower': self.lower.tolist(), 'upper': self.upper.tolist()})

    def _resolve(self, lam, u):
        # Points exactly on a face stay on that face.
        return np.minimum(np.maximum(u, self.lower), self.upper)

    def contains(self, x):
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def selection(self, x):
        x = as_vector(x, self.dim, where='selection[box_projection]')
        if not self.contains(x):
            raise OracleError("Normal cone is empty outside the box")
        return np.zeros(self.dim)

    def value_box(self, x):
        return self._enclosure(as_vector(x, self.dim, where='value_box[box_projection]'))

    def value_boxes(self, points):
        return self._enclosure(points)

    def _enclosure(self, x):
        # Broadcasts over leading axes of x.
        at_lower = x == self.lower
        at_upper = x == self.upper
        lo = np.where(at_lower, -np.inf, 0.0)
        hi = np.where(at_upper, np.inf, 0.0)
        outside = (x < self.lower) | (x > self.upper)
        lo = np.where(outside, np.inf, lo)
        hi = np.where(outside, -np.inf, hi)
        return lo, hi

    def params(self):
        def encode(arr):
            return [None if not np.isfinite(v) else float(v) for v in arr]
        return {'lower': encode(self.lower), 'upper': encode(self.upper)}

    @classmethod
    def from_params(cls, dim, params):
        return cls(dim, params.get('lower'), params.get('upper'))


class HalfspaceProjection(ResolventOp):
    """Normal cone of {x : <a, x> <= beta}."""

    kind = 'halfspace_projection'

    def __init__(self, dim, normal, offset):
        super().__init__(dim)
        self.normal = as_vector(normal, dim, where='halfspace normal')
        self.offset = float(offset)
        self._normal_sq = float(self.normal @ self.normal)
        if self._normal_sq == 0.0:
            raise ValidationError("Halfspace normal must be nonzero")

    def _resolve(self, lam, u):
        excess = float(self.normal @ u) - self.offset
        if excess <= 0.0:
            return u.copy()
        return u - (excess / self._normal_sq) * self.normal

    def selection(self, x):
        x = as_vector(x, self.dim, where='selection[halfspace_projection]')
        if float(self.normal @ x) > self.offset:
            raise OracleError("Normal cone is empty outside the halfspace")
        return np.zeros(self.dim)

    def value_box(self, x):
        x = as_vector(x, self.dim, where='value_box[halfspace_projection]')
        gap = float(self.normal @ x) - self.offset
        if gap < 0:
            return np.zeros(self.dim), np.zeros(self.dim)
        if gap > 0:
            return np.full(self.dim, np.inf), np.full(self.dim, -np.inf)
        support = np.flatnonzero(self.normal)
        if support.size != 1:
            raise OracleError("Boundary normal cone of a non axis-aligned halfspace is not a box")
        lo, hi = np.zeros(self.dim), np.zeros(self.dim)
        j = support[0]
        if self.normal[j] > 0:
            hi[j] = np.inf
        else:
            lo[j] = -np.inf
        return lo, hi

    def params(self):
        return {'normal': self.normal.tolist(), 'offset': self.offset}

    @classmethod
    def from_params(cls, dim, params):
        return cls(dim, params['normal'], params['offset'])


class AffineResolvent(ResolventOp):
    """A(v) = Q v - c with Q symmetric PSD; the resolvent solves (I + lam Q) v = u + lam c."""

    kind = 'affine_resolvent'

    def __init__(self, dim, matrix, offset=None):
        super().__init__(dim)
        self.matrix = as_matrix(matrix, where='affine_resolvent matrix')
        if self.matrix.shape != (dim, dim):
            raise DimensionError(dim, self.matrix.shape[0], 'affine_resolvent matrix')
        if not np.allclose(self.matrix, self.matrix.T, rtol=0.0, atol=STRUCTURE_TOLERANCE):
            raise ValidationError("AffineResolvent matrix must be symmetric")
        if np.linalg.eigvalsh(self.matrix).min() < -STRUCTURE_TOLERANCE:
            raise ValidationError("AffineResolvent matrix must be positive semidefinite")
        self.offset = np.zeros(dim) if offset is None else as_vector(offset, dim, where='affine_resolvent offset')
        # Last (lam, factorization) pair; replaced atomically.
        self._factor = (None, None)

    def _factorization(self, lam):
        cached_lam, factor = self._factor
        if cached_lam != lam:
            factor = sla.cho_factor(np.eye(self.dim) + lam * self.matrix)
            self._factor = (lam, factor)
        return factor

    def _resolve(self, lam, u):
        return sla.cho_solve(self._factorization(lam), u + lam * self.offset)

    def selection(self, x):
        x = as_vector(x, self.dim, where='selection[affine_resolvent]')
        return self.matrix @ x - self.offset

    def value_box(self, x):
        value = self.selection(x)
        return value, value

    def value_boxes(self, points):
        value = points @ self.matrix.T - self.offset
        return value, value.copy()

    def linear_part(self):
        return self.matrix.copy(), -self.offset

    def params(self):
        return {'matrix': self.matrix.tolist(), 'offset': self.offset.tolist()}

    @classmethod
    def from_params(cls, dim, params):
        return cls(dim, params['matrix'], params.get('offset'))


RESOLVENT_KINDS = {
    cls.kind: cls
    for cls in (ZeroResolvent, L1Prox, SubdiffAbsSum, BoxProjection, HalfspaceProjection, AffineResolvent)
}


def resolvent_from_descriptor(descriptor, dim):
    kind = descriptor.get('kind')
    if kind not in RESOLVENT_KINDS:
        raise ValidationError(f"Unknown resolvent kind '{kind}'",
                              details={'known': sorted(RESOLVENT_KINDS)})
    return RESOLVENT_KINDS[kind].from_params(dim, descriptor.get('params') or {})


# ---------------------------------------------------------------------------
# Forward (single-valued) operators
# ---------------------------------------------------------------------------

class ForwardOp:
    """A single-valued monotone operator with declared regularity and constant L."""

    kind = 'abstract'
    default_regularity = Regularity.LIPSCHITZ_MONOTONE

    def __init__(self, dim, lipschitz, regularity=None):
        dim = int(dim)
        if dim < 1:
            raise ValidationError(f"Operator dimension must be positive, got {dim}")
        self.dim = dim
        self.regularity = Regularity(regularity or self.default_regularity)
        self.lipschitz = float(lipschitz)
        if not np.isfinite(self.lipschitz) or self.lipschitz < 0:
            raise ValidationError(f"Lipschitz constant must be finite and nonnegative, got {lipschitz}")
        if self.lipschitz == 0 and self.kind != ZeroMap.kind:
            raise ValidationError(f"Only the zero map may declare L = 0 ({self.kind})")

    @property
    def is_cocoercive(self):
        return self.regularity == Regularity.COCOERCIVE

    def evaluate(self, x):
        x = as_vector(x, self.dim, where=f"forward_eval[{self.kind}]")
        out = self._apply(x)
        if not np.all(np.isfinite(out)):
            raise NonFiniteError(f"forward_eval[{self.kind}] output")
        return out

    def evaluate_rows(self, points):
        """B applied to every row of an (N, dim) array, through the affine part."""
        mat, offset = self.linear_part()
        return points @ mat.T + offset

    def _apply(self, x):
        raise NotImplementedError

    def linear_part(self):
        raise NotImplementedError

    def params(self):
        return {}

    def to_descriptor(self):
        return {'kind': self.kind, 'params': self.params(),
                'regularity': self.regularity.value, 'L': self.lipschitz}

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, L={self.lipschitz}, {self.regularity.value})"


class ZeroMap(ForwardOp):
    kind = 'zero_map'
    default_regularity = Regularity.COCOERCIVE

    def __init__(self, dim, lipschitz=0.0, regularity=None):
        super().__init__(dim, lipschitz, regularity)

    def _apply(self, x):
        return np.zeros(self.dim)

    def linear_part(self):
        return np.zeros((self.dim, self.dim)), np.zeros(self.dim)

    @classmethod
    def from_params(cls, dim, params, lipschitz, regularity):
        return cls(dim, lipschitz or 0.0, regularity)


class AffineMap(ForwardOp):
    """B(x) = M x + c; regularity is declared by the caller."""

    kind = 'affine_map'

    def __init__(self, matrix, offset=None, lipschitz=None, regularity=None):
        self.matrix = as_matrix(matrix, where='affine_map matrix')
        dim = self.matrix.shape[0]
        if self.matrix.shape != (dim, dim):
            raise ValidationError(f"AffineMap matrix must be square, got {self.matrix.shape}")
        if lipschitz is None:
            raise ValidationError("AffineMap needs a declared Lipschitz constant")
        super().__init__(dim, lipschitz, regularity)
        self.offset = np.zeros(dim) if offset is None else as_vector(offset, dim, where='affine_map offset')

    def _apply(self, x):
        return self.matrix @ x + self.offset

    def linear_part(self):
        return self.matrix.copy(), self.offset.copy()

    def params(self):
        return {'matrix': self.matrix.tolist(), 'offset': self.offset.tolist()}

    @classmethod
    def from_params(cls, dim, params, lipschitz, regularity):
        op = cls(params['matrix'], params.get('offset'), lipschitz, regularity)
        if op.dim != dim:
            raise DimensionError(dim, op.dim, 'affine_map')
        return op


class QuadGradient(ForwardOp):
    """Gradient of 1/2 x'Qx - c'x, i.e. B(x) = Q x - c with Q symmetric positive definite."""

    kind = 'quad_gradient'
    default_regularity = Regularity.COCOERCIVE

    def __init__(self, matrix, offset=None, lipschitz=None, regularity=None):
        self.matrix = as_matrix(matrix, where='quad_gradient matrix')
        dim = self.matrix.shape[0]
        if self.matrix.shape != (dim, dim):
            raise ValidationError(f"QuadGradient matrix must be square, got {self.matrix.shape}")
        if not np.allclose(self.matrix, self.matrix.T, rtol=0.0, atol=STRUCTURE_TOLERANCE):
            raise ValidationError("QuadGradient matrix must be symmetric")
        if np.linalg.eigvalsh(self.matrix).min() < -STRUCTURE_TOLERANCE:
            raise ValidationError("QuadGradient matrix must be positive semidefinite")
        if lipschitz is None:
            raise ValidationError("QuadGradient needs a declared Lipschitz constant")
        super().__init__(dim, lipschitz, regularity)
        self.offset = np.zeros(dim) if offset is None else as_vector(offset, dim, where='quad_gradient offset')

    def _apply(self, x):
        return self.matrix @ x - self.offset

    def linear_part(self):
        return self.matrix.copy(), -self.offset

    def params(self):
        return {'matrix': self.matrix.tolist(), 'offset': self.offset.tolist()}

    @classmethod
    def from_params(cls, dim, params, lipschitz, regularity):
        op = cls(params['matrix'], params.get('offset'), lipschitz, regularity)
        if op.dim != dim:
            raise DimensionError(dim, op.dim, 'quad_gradient')
        return op


class SkewMap(ForwardOp):
    """B(x) = K x with K skew-symmetric: monotone, never cocoercive unless K = 0."""

    kind = 'skew_map'

    def __init__(self, matrix, lipschitz=None, regularity=None):
        self.matrix = as_matrix(matrix, where='skew_map matrix')
        dim = self.matrix.shape[0]
        if self.matrix.shape != (dim, dim):
            raise ValidationError(f"SkewMap matrix must be square, got {self.matrix.shape}")
        if not np.allclose(self.matrix, -self.matrix.T, rtol=0.0, atol=STRUCTURE_TOLERANCE):
            raise ValidationError("SkewMap matrix must be skew-symmetric")
        if lipschitz is None:
            raise ValidationError("SkewMap needs a declared Lipschitz constant")
        super().__init__(dim, lipschitz, regularity)

    def _apply(self, x):
        return self.matrix @ x

    def linear_part(self):
        return self.matrix.copy(), np.zeros(self.dim)

    def params(self):
        return {'matrix': self.matrix.tolist()}

    @classmethod
    def from_params(cls, dim, params, lipschitz, regularity):
        op = cls(params['matrix'], lipschitz, regularity)
        if op.dim != dim:
            raise DimensionError(dim, op.dim, 'skew_map')
        return op


class SaddleBilinear(ForwardOp):
    """(grad_x Phi, -grad_y Phi) for Phi(x, y) = x'Py on R^{d1 + d2}.

    L is declared by the caller and must bound ||P||_2.
    """

    kind = 'saddle_bilinear'

    def __init__(self, coupling, lipschitz=None, regularity=None):
        self.coupling = as_matrix(coupling, where='saddle_bilinear coupling')
        self.d1, self.d2 = self.coupling.shape
        if lipschitz is None:
            raise ValidationError("SaddleBilinear needs a declared Lipschitz constant")
        super().__init__(self.d1 + self.d2, lipschitz, regularity)

    def _apply(self, x):
        primal, dual = x[:self.d1], x[self.d1:]
        return np.concatenate([self.coupling @ dual, -(self.coupling.T @ primal)])

    def linear_part(self):
        mat = np.zeros((self.dim, self.dim))
        mat[:self.d1, self.d1:] = self.coupling
        mat[self.d1:, :self.d1] = -self.coupling.T
        return mat, np.zeros(self.dim)

    def params(self):
        return {'coupling': self.coupling.tolist()}

    @classmethod
    def from_params(cls, dim, params, lipschitz, regularity):
        op = cls(params['coupling'], lipschitz, regularity)
        if op.dim != dim:
            raise DimensionError(dim, op.dim, 'saddle_bilinear')
        return op


FORWARD_KINDS = {
    cls.kind: cls
    for cls in (ZeroMap, AffineMap, QuadGradient, SkewMap, SaddleBilinear)
}


def forward_from_descriptor(descriptor, dim):
    kind = descriptor.get('kind')
    if kind not in FORWARD_KINDS:
        raise ValidationError(f"Unknown forward kind '{kind}'",
                              details={'known': sorted(FORWARD_KINDS)})
    return FORWARD_KINDS[kind].from_params(dim, descriptor.get('params') or {},
                                           descriptor.get('L'), descriptor.get('regularity'))


# ---------------------------------------------------------------------------
# Spec-level entry points
# ---------------------------------------------------------------------------

def resolve(op, lam, u):
    """J_{lam A}(u) for a catalog operator."""
    return op.resolve(lam, u)


def forward_eval(op, x):
    """B(x) for a catalog operator; bit-identical for identical inputs."""
    return op.evaluate(x)


# ---------------------------------------------------------------------------
# Instrumentation
# ---------------------------------------------------------------------------

class CountingResolvent(ResolventOp):
    """Proxy counting resolvent calls."""

    def __init__(self, inner):
        super().__init__(inner.dim)
        self.inner = inner
        self.kind = inner.kind
        self.calls = 0

    def resolve(self, lam, u):
        self.calls += 1
        return self.inner.resolve(lam, u)

    def selection(self, x):
        return self.inner.selection(x)

    def value_box(self, x):
        return self.inner.value_box(x)

    def value_boxes(self, points):
        return self.inner.value_boxes(points)

    def linear_part(self):
        return self.inner.linear_part()

    def params(self):
        return self.inner.params()


class CountingForward(ForwardOp):
    """Proxy counting forward evaluations (one evaluation point per call)."""

    def __init__(self, inner):
        self.inner = inner
        self.kind = inner.kind
        self.dim = inner.dim
        self.regularity = inner.regularity
        self.lipschitz = inner.lipschitz
        self.calls = 0

    def evaluate(self, x):
        self.calls += 1
        return self.inner.evaluate(x)

    def linear_part(self):
        return self.inner.linear_part()

    def params(self):
        return self.inner.params()


def instrument(op):
    """Wrap an operator in a counting proxy."""
    if isinstance(op, ResolventOp):
        return CountingResolvent(op)
    if isinstance(op, ForwardOp):
        return CountingForward(op)
    raise ValidationError(f"Cannot instrument {type(op).__name__}")


def reset_counters(ops):
    for op in ops:
        op.calls = 0


# ---------------------------------------------------------------------------
# Property checks
# ---------------------------------------------------------------------------

@dataclass
class PropertyReport:
    name: str
    samples: int
    max_violation: float
    passed: bool


def _rng(seed):
    # PCG64 is a fixed 64-bit algorithm, so seeded samples agree across platforms.
    return np.random.Generator(np.random.PCG64(seed))


def _sample_pairs(dim, samples, seed, scale):
    if samples < 1:
        raise ValidationError(f"samples must be >= 1, got {samples}")
    rng = _rng(seed)
    for _ in range(samples):
        yield scale * rng.standard_normal(dim), scale * rng.standard_normal(dim)


def _check_defaults(samples, tolerance):
    samples = config.PROPERTY_SAMPLES if samples is None else samples
    tolerance = config.PROPERTY_TOLERANCE if tolerance is None else tolerance
    return samples, tolerance


def check_firm_nonexpansive(op, lam, samples=100, seed=0, scale=1.0, tolerance=None):
    """Worst violation of <J(u)-J(v), (u-J(u))-(v-J(v))> >= 0 over seeded pairs."""
    tolerance = config.PROPERTY_TOLERANCE if tolerance is None else tolerance
    worst = 0.0
    for u, v in _sample_pairs(op.dim, samples, seed, scale):
        ju, jv = op.resolve(lam, u), op.resolve(lam, v)
        inner = float((ju - jv) @ ((u - ju) - (v - jv)))
        worst = max(worst, -inner)
    return PropertyReport('firm_nonexpansive', samples, worst, worst <= tolerance)


def check_lipschitz(op, samples=None, seed=0, scale=1.0, tolerance=None):
    """Worst excess of ||B(x)-B(y)|| / ||x-y|| over the declared L."""
    samples, tolerance = _check_defaults(samples, tolerance)
    worst = 0.0
    for x, y in _sample_pairs(op.dim, samples, seed, scale):
        gap = np.linalg.norm(x - y)
        if gap == 0.0:
            continue
        ratio = np.linalg.norm(op.evaluate(x) - op.evaluate(y)) / gap
        worst = max(worst, ratio - op.lipschitz)
    return PropertyReport('lipschitz', samples, worst, worst <= op.lipschitz * tolerance + 1e-15)


def check_cocoercive(op, samples=None, seed=0, scale=1.0, tolerance=None):
    """Worst violation of <B(x)-B(y), x-y> >= (1/L)||B(x)-B(y)||^2."""
    samples, tolerance = _check_defaults(samples, tolerance)
    worst = 0.0
    for x, y in _sample_pairs(op.dim, samples, seed, scale):
        diff = op.evaluate(x) - op.evaluate(y)
        inner = float(diff @ (x - y))
        penalty = float(diff @ diff) / op.lipschitz if op.lipschitz > 0 else 0.0
        worst = max(worst, penalty - inner)
    return PropertyReport('cocoercive', samples, worst, worst <= tolerance)


def check_monotone(op, samples=None, seed=0, scale=1.0, tolerance=None):
    """Worst violation of <B(x)-B(y), x-y> >= 0."""
    samples, tolerance = _check_defaults(samples, tolerance)
    worst = 0.0
    for x, y in _sample_pairs(op.dim, samples, seed, scale):
        inner = float((op.evaluate(x) - op.evaluate(y)) @ (x - y))
        worst = max(worst, -inner)
    return PropertyReport('monotone', samples, worst, worst <= tolerance)


def check_regularity(op, samples=None, seed=0):
    """Run the checks implied by the operator's declared regularity."""
    reports = [check_lipschitz(op, samples, seed)]
    if op.is_cocoercive:
        reports.append(check_cocoercive(op, samples, seed))
    else:
        reports.append(check_monotone(op, samples, seed))
    return reports
