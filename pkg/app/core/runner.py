"""
Solve orchestration shared by the command line and the HTTP service.
"""
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

import config
from app.core.problems import ProblemSpec, build_problem, load_problem, make_builtin, oracle_solution, parse_problem
from app.core.ringsim import run_until_residual, spawn_ring, write_message_log
from app.core.splitting import ALGO_MODES, Mode, Status, StopConfig, iterate, make_params
from app.utils.errors import OracleError, ValidationError
from app.utils.file_utils import resolve_problem_path, write_json, write_trace_csv
from app.utils.logger import get_app_logger

logger = get_app_logger()


class RunConfig(BaseModel):
    """One solve: problem source, algorithm, stopping rule, execution and outputs."""

    problem_path: Optional[str] = None
    problem: Optional[dict] = None
    builtin: Optional[str] = None
    seed: int = config.DEFAULT_SEED
    n: Optional[int] = Field(default=None, ge=2)
    d: Optional[int] = Field(default=None, ge=1)
    algo: Optional[Literal['fb', 'frb', 'mixed']] = None
    lam: Optional[float] = None
    gamma: Optional[float] = None
    tol: float = Field(default=config.DEFAULT_TOL_RESIDUAL_SQ, ge=0)
    max_iters: int = Field(default=config.DEFAULT_MAX_ITERS, ge=1)
    check_period: int = Field(default=config.DEFAULT_CHECK_PERIOD, ge=1)
    execution: Literal['sequential', 'ring'] = 'sequential'
    trace_path: Optional[str] = None
    message_log_path: Optional[str] = None
    out_path: Optional[str] = None


@dataclass
class SolveOutcome:
    spec: ProblemSpec
    params: object
    status: Status
    iterations: int
    residual_sq: float
    solution: np.ndarray
    oracle_method: Optional[str]
    oracle_distance: Optional[float]
    trace_rows: list
    message_summary: Optional[dict] = None

    @property
    def converged(self):
        return self.status == Status.CONVERGED

    def summary(self, max_coords=None):
        max_coords = config.SUMMARY_MAX_COORDS if max_coords is None else max_coords
        return {
            'problem': self.spec.name,
            'mode': Mode(self.params.mode).value,
            'params': self.params.to_dict(),
            'status': self.status.value,
            'iterations': self.iterations,
            'final_residual_sq': self.residual_sq,
            'solution_head': [float(v) for v in self.solution[:max_coords]],
            'dim': int(self.solution.shape[0]),
            'oracle': self.oracle_method,
            'oracle_distance': self.oracle_distance,
        }


def effective_seed(seed):
    """RINGSPLIT_SEED, when set, wins over the requested seed."""
    override = config.get_seed_override()
    return seed if override is None else override


def load_spec(cfg):
    """Resolve the problem source of a RunConfig into a ProblemSpec in the requested mode."""
    sources = [s for s in (cfg.problem_path, cfg.problem, cfg.builtin) if s is not None]
    if len(sources) != 1:
        raise ValidationError("Give exactly one problem source: a problem file, an inline problem or a builtin")
    if cfg.problem_path is not None:
        spec = load_problem(resolve_problem_path(cfg.problem_path))
    elif cfg.problem is not None:
        spec = parse_problem(cfg.problem)
    else:
        spec = make_builtin(cfg.builtin, seed=effective_seed(cfg.seed), n=cfg.n, d=cfg.d)

    if cfg.algo is not None and ALGO_MODES[cfg.algo] != spec.mode:
        payload = spec.model_dump()
        payload['mode'] = ALGO_MODES[cfg.algo]
        spec = parse_problem(payload)
    return spec


def run_solve(cfg):
    """Run a solve as described by cfg, writing any requested outputs."""
    spec = load_spec(cfg)
    problem = build_problem(spec)
    params = make_params(problem, spec.mode, cfg.lam, cfg.gamma)
    stop = StopConfig(tol_residual_sq=cfg.tol, max_iters=cfg.max_iters, check_period=cfg.check_period)
    logger.info(f"solve {spec.name}: exec={cfg.execution} params={params.to_dict()}")

    message_summary = None
    if cfg.execution == 'ring':
        net = spawn_ring(problem, params, keep_log=cfg.message_log_path is not None)
        result = run_until_residual(net, stop.tol_residual_sq, stop.max_iters, stop.check_period,
                                    record_duals=True)
        if cfg.message_log_path:
            write_message_log(net, cfg.message_log_path)
            message_summary = result.message_summary
    else:
        if cfg.message_log_path:
            logger.warning("Message log requested for a sequential run; nothing written")
        result = iterate(problem, params, stop=stop, record_duals=True)

    solution = result.x[0]
    oracle_method, oracle_distance = None, None
    try:
        oracle = oracle_solution(spec, problem)
        oracle_method = oracle.method
        if oracle.solution is not None:
            oracle_distance = float(np.linalg.norm(solution - oracle.solution))
    except OracleError as e:
        logger.info(f"No oracle cross-check for {spec.name}: {e.message}")

    rows = result.trace.rows()
    outcome = SolveOutcome(spec=spec, params=params, status=result.status, iterations=result.iterations,
                           residual_sq=result.trace.records[-1].residual_sq, solution=solution,
                           oracle_method=oracle_method, oracle_distance=oracle_distance,
                           trace_rows=rows, message_summary=message_summary)

    if cfg.trace_path:
        write_trace_csv(rows, cfg.trace_path)
    if cfg.out_path:
        state = outcome.summary(max_coords=solution.shape[0])
        state['x'] = [v.tolist() for v in result.x]
        state['z'] = [v.tolist() for v in result.z]
        write_json(state, cfg.out_path)
    logger.info(f"solve {spec.name}: {outcome.status.value} in {outcome.iterations} iterations")
    return outcome
