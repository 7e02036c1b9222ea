"""
Numerical diagnostics for the nonexpansiveness estimates of the fixed-point operators.

Each ``*_slack`` function evaluates ||z - z_bar||^2 minus the left-hand side of
the corresponding estimate; a nonnegative slack means the estimate holds at
that pair. ``relative`` divides by ||z - z_bar||^2 so tolerances are scale free.
"""
from dataclasses import dataclass

import numpy as np

from app.core.splitting import Mode, apply_operator, apply_T, coerce_z
from app.utils.errors import ValidationError


@dataclass
class SlackReport:
    lhs: float
    rhs: float

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def relative(self):
        return self.slack / self.rhs if self.rhs > 0 else self.slack


def _sq(blocks):
    return float(sum(float(b @ b) for b in blocks))


def _sub(a, b):
    return [ai - bi for ai, bi in zip(a, b)]


def _L(problem, params):
    return max(params.L, problem.lipschitz)


def averagedness_constant(params):
    """alpha = 2 gamma / (2 - lambda L); T is alpha-averaged when alpha < 1."""
    return 2.0 * params.gamma / (2.0 - params.lam * params.L)


def quasi_nonexpansive_constant(params):
    """sigma = (1 - gamma - 2 lambda L) / gamma."""
    return (1.0 - params.gamma - 2.0 * params.lam * params.L) / params.gamma


def averagedness_slack(problem, params, z, z_bar):
    """
    ||Tz - Tz_bar||^2 + c ||(I-T)z - (I-T)z_bar||^2
        + (1/gamma) ||sum_i (I-T)(z)_i - sum_i (I-T)(z_bar)_i||^2  <=  ||z - z_bar||^2

    with c = (1 - gamma)/gamma - lambda L/(2 gamma). Holds for every pair (z, z_bar).
    """
    z, z_bar = coerce_z(problem, z), coerce_z(problem, z_bar)
    gamma, lam, L = params.gamma, params.lam, _L(problem, params)
    tz, _, _ = apply_T(problem, params, z)
    tz_bar, _, _ = apply_T(problem, params, z_bar)
    step_diff = _sub(_sub(z, tz), _sub(z_bar, tz_bar))
    coeff = (1.0 - gamma) / gamma - lam * L / (2.0 * gamma)
    summed = np.sum(step_diff, axis=0)
    lhs = _sq(_sub(tz, tz_bar)) + coeff * _sq(step_diff) + float(summed @ summed) / gamma
    return SlackReport(lhs=lhs, rhs=_sq(_sub(z, z_bar)))


def two_operator_slack(problem, params, z, z_bar):
    """
    n = 2 form: ||Tz - Tz_bar||^2 + ((2 - gamma)/gamma - lambda L/(2 gamma)) ||(I-T)z - (I-T)z_bar||^2
    <= ||z - z_bar||^2.
    """
    if problem.n != 2:
        raise ValidationError(f"Two-operator estimate needs n = 2, got n = {problem.n}")
    z, z_bar = coerce_z(problem, z), coerce_z(problem, z_bar)
    gamma, lam, L = params.gamma, params.lam, _L(problem, params)
    tz, _, _ = apply_T(problem, params, z)
    tz_bar, _, _ = apply_T(problem, params, z_bar)
    step_diff = _sub(_sub(z, tz), _sub(z_bar, tz_bar))
    coeff = (2.0 - gamma) / gamma - lam * L / (2.0 * gamma)
    lhs = _sq(_sub(tz, tz_bar)) + coeff * _sq(step_diff)
    return SlackReport(lhs=lhs, rhs=_sq(_sub(z, z_bar)))


def quasi_nonexpansive_slack(problem, params, z, z_bar):
    """
    For z_bar a fixed point of the reflected operator T~:

      ||T~z - z_bar||^2 + s ||(I-T~)z||^2 + (1/gamma) ||sum_i (I-T~)(z)_i||^2
        + gamma lambda L ||(I-T~)(z)_1||^2 + gamma lambda L ||(I-T~)(z)_{n-1}||^2  <=  ||z - z_bar||^2

    with s = (1 - gamma)/gamma - 2 lambda L/gamma.
    """
    if Mode(params.mode) == Mode.COCOERCIVE:
        raise ValidationError("Quasi-nonexpansive estimate applies to the reflected operators")
    z, z_bar = coerce_z(problem, z), coerce_z(problem, z_bar)
    gamma, lam, L = params.gamma, params.lam, _L(problem, params)
    tz, _, _ = apply_operator(problem, params, z)
    step = _sub(z, tz)
    coeff = (1.0 - gamma) / gamma - 2.0 * lam * L / gamma
    summed = np.sum(step, axis=0)
    boundary = gamma * lam * L * (float(step[0] @ step[0]) + float(step[-1] @ step[-1]))
    lhs = _sq(_sub(tz, z_bar)) + coeff * _sq(step) + float(summed @ summed) / gamma + boundary
    return SlackReport(lhs=lhs, rhs=_sq(_sub(z, z_bar)))


def fejer_profile(z_iterates, z_bar):
    """||z^k - z_bar|| along a run."""
    return [float(np.sqrt(_sq(_sub(z, z_bar)))) for z in z_iterates]


def is_fejer_monotone(profile, tolerance=1e-12):
    return all(b <= a + tolerance for a, b in zip(profile, profile[1:]))
