"""
Deterministic message-passing simulation of the decentralized ring protocol.

Agent i (1-based) owns A_i, B_{i-1} (agents i >= 2, when that forward exists),
z_{i-1} (agents i >= 2) and x_i. Agents talk only to i-1 and i+1 (mod n)
over FIFO channels keyed by (sender, receiver, direction): "down" carries
values toward i+1, "up" toward i-1.

Execution is round-synchronous and single-threaded. Round r performs
iteration k = r - 1; in each round agents act in order 1..n:

* agent 1 reads z_1 (sent up by agent 2 last round), computes x_1 and sends
  it down to agent 2 and up to agent n (a single message when n = 2);
* agents 2..n-1 read x_{i-1} (and, in reflected modes for i >= 3, the
  reflected term) from below and z_i from above, compute x_i and z_{i-1}^+,
  send x_i (and their reflected term) down and z_{i-1}^+ up;
* agent n uses x_1 in place of z_n and sends z_{n-1}^+ up.

Agents compute with the kernels of ``app.core.splitting`` so the governing
sequence matches the sequential driver bit for bit.
"""
import time
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

import config
from app.core.splitting import (
    Mode, Status, StopConfig, Trace, coerce_z, ensure_valid, reflected_term,
    relaxed_update, resolvent_input, squared_distance, trace_record, zeros_z,
)
from app.utils.errors import ProtocolError, ValidationError
from app.utils.file_utils import write_jsonl
from app.utils.logger import get_solver_logger

logger = get_solver_logger()

DOWN = 'down'
UP = 'up'


class PayloadTag(str, Enum):
    X_VALUE = 'XValue'
    Z_VALUE = 'ZValue'
    REFLECTED = 'ReflectedTerm'
    RESIDUAL = 'ResidualPartial'
    HALT = 'Halt'


DATA_TAGS = (PayloadTag.X_VALUE, PayloadTag.Z_VALUE, PayloadTag.REFLECTED)
CONTROL_TAGS = (PayloadTag.RESIDUAL, PayloadTag.HALT)


@dataclass(frozen=True)
class Message:
    sender: int
    receiver: int
    round: int
    tag: PayloadTag
    value: object = None

    @property
    def norm(self):
        if self.tag == PayloadTag.HALT:
            return 0.0
        if self.tag == PayloadTag.RESIDUAL:
            return float(self.value)
        return float(np.linalg.norm(self.value))

    def to_record(self):
        return {'round': self.round, 'from': self.sender, 'to': self.receiver,
                'payload_tag': self.tag.value, 'norm': self.norm}


@dataclass
class AgentState:
    """Private state of one agent; nothing here is read by another agent directly."""

    id: int
    resolvent: object
    forward: Optional[object] = None
    z: Optional[np.ndarray] = None
    x: Optional[np.ndarray] = None
    # B_{i-1}(x_{i-1}) from the current round
    forward_value: Optional[np.ndarray] = None
    step_sq: float = 0.0
    residual_seen: Optional[float] = None
    halted: bool = False


class RingNetwork:
    """Agents, channels and the round scheduler for one solve."""

    def __init__(self, problem, params, agents, keep_log=True):
        self.problem = problem
        self.params = params
        self.mode = Mode(params.mode)
        self.agents = agents
        self.n = len(agents)
        self.round = 0
        self.keep_log = keep_log
        self.log = []
        self.channels = {}
        for a in range(1, self.n + 1):
            self.channels[(a, self.successor(a), DOWN)] = deque()
            self.channels[(a, self.predecessor(a), UP)] = deque()

    @property
    def reflective(self):
        return self.mode in (Mode.LIPSCHITZ, Mode.MIXED)

    def successor(self, a):
        return a % self.n + 1

    def predecessor(self, a):
        return (a - 2) % self.n + 1

    def agent(self, a):
        return self.agents[a - 1]

    # -- channels ---------------------------------------------------------

    def send(self, sender, receiver, direction, tag, value=None):
        expected = self.successor(sender) if direction == DOWN else self.predecessor(sender)
        if receiver != expected:
            raise ProtocolError(f"Agent {sender} cannot send {direction} to non-adjacent agent {receiver}",
                                edge=(sender, receiver), round_number=self.round)
        message = Message(sender, receiver, self.round, PayloadTag(tag), value)
        self.channels[(sender, receiver, direction)].append(message)
        if self.keep_log:
            self.log.append(message)
        return message

    def receive(self, sender, receiver, direction, tag, round_number):
        queue = self.channels.get((sender, receiver, direction))
        if not queue:
            raise ProtocolError(f"Missing {PayloadTag(tag).value} on {sender}->{receiver} ({direction})",
                                edge=(sender, receiver), round_number=round_number)
        message = queue.popleft()
        if message.tag != tag or message.round != round_number:
            raise ProtocolError(
                f"Expected {PayloadTag(tag).value}@{round_number} on {sender}->{receiver}, "
                f"got {message.tag.value}@{message.round}",
                edge=(sender, receiver), round_number=round_number)
        return message.value

    def pending(self):
        return [m for queue in self.channels.values() for m in queue]

    # -- global views (for traces and tests; agents never use these) -----

    def z(self):
        return [self.agent(a).z for a in range(2, self.n + 1)]

    def x(self):
        return [agent.x for agent in self.agents]

    def forward_cache(self):
        return [self.agent(a).forward_value for a in range(2, self.n + 1) if self.agent(a).forward is not None]


def spawn_ring(problem, params, z0=None, keep_log=True):
    """Create agents holding only their own operators and variables; agents 2..n send z_{i-1}^0 up."""
    ensure_valid(problem, params)
    mode = Mode(params.mode)
    if len(problem.forwards) != (problem.n - 2 if mode == Mode.LIPSCHITZ else problem.n - 1):
        raise ValidationError(f"Problem arity does not match {mode.value} mode")
    z = zeros_z(problem) if z0 is None else coerce_z(problem, z0)
    n, m = problem.n, len(problem.forwards)

    agents = [AgentState(id=1, resolvent=problem.resolvents[0])]
    for a in range(2, n + 1):
        forward = problem.forwards[a - 2] if a - 2 < m else None
        agents.append(AgentState(id=a, resolvent=problem.resolvents[a - 1], forward=forward,
                                 z=z[a - 2].copy()))

    net = RingNetwork(problem, params, agents, keep_log=keep_log)
    for a in range(2, n + 1):
        net.send(a, a - 1, UP, PayloadTag.Z_VALUE, net.agent(a).z)
    logger.debug(f"spawned ring: n={n} mode={mode.value} channels={len(net.channels)}")
    return net


def _run_agent_one(net, r):
    agent = net.agent(1)
    z1 = net.receive(2, 1, UP, PayloadTag.Z_VALUE, r - 1)
    agent.x = agent.resolvent.resolve(net.params.lam, z1)
    net.send(1, 2, DOWN, PayloadTag.X_VALUE, agent.x)
    if net.n > 2:
        net.send(1, net.n, UP, PayloadTag.X_VALUE, agent.x)


def _run_agent(net, a, r):
    """Agents 2..n."""
    agent = net.agent(a)
    lam, gamma, n = net.params.lam, net.params.gamma, net.n
    x_prev = net.receive(a - 1, a, DOWN, PayloadTag.X_VALUE, r)
    reflected = None
    if net.reflective and a >= 3:
        reflected = net.receive(a - 1, a, DOWN, PayloadTag.REFLECTED, r)
    if a < n:
        first = net.receive(a + 1, a, UP, PayloadTag.Z_VALUE, r - 1)
    elif n == 2:
        first = x_prev
    else:
        first = net.receive(1, n, UP, PayloadTag.X_VALUE, r)

    value = None
    if agent.forward is not None:
        value = agent.forward.evaluate(x_prev)
    agent.forward_value = value
    agent.x = agent.resolvent.resolve(lam, resolvent_input(first, x_prev, agent.z, lam, value, reflected))
    z_next = relaxed_update(agent.z, gamma, agent.x, x_prev)
    agent.step_sq = squared_distance(z_next, agent.z)
    agent.z = z_next

    if a < n:
        net.send(a, a + 1, DOWN, PayloadTag.X_VALUE, agent.x)
        if net.reflective:
            if net.mode == Mode.MIXED and agent.forward.is_cocoercive:
                term = np.zeros_like(agent.x)
            else:
                term = reflected_term(lam, agent.forward.evaluate(agent.x), value)
            net.send(a, a + 1, DOWN, PayloadTag.REFLECTED, term)
    net.send(a, a - 1, UP, PayloadTag.Z_VALUE, agent.z)


def step_round(net):
    """Execute one iteration of the protocol; raises ProtocolError on any schedule violation."""
    net.round += 1
    r = net.round
    _run_agent_one(net, r)
    for a in range(2, net.n + 1):
        _run_agent(net, a, r)

    # Only the z messages for the next round may remain.
    leftovers = net.pending()
    expected = {(a, a - 1) for a in range(2, net.n + 1)}
    seen = {(m.sender, m.receiver) for m in leftovers
            if m.tag == PayloadTag.Z_VALUE and m.round == r}
    if len(leftovers) != len(expected) or seen != expected:
        stray = next((m for m in leftovers if (m.sender, m.receiver) not in expected or m.round != r), None)
        raise ProtocolError(f"Unconsumed or missing messages after round {r}",
                            edge=(stray.sender, stray.receiver) if stray else None, round_number=r)
    return net


def aggregate_residual(net, tol_residual_sq=None):
    """
    Sum ||z_i^+ - z_i||^2 along agents 2 -> 3 -> ... -> n, then broadcast n -> 1 -> ... -> n.

    The broadcast carries the total, or Halt when the total is <= tol_residual_sq.
    Uses exactly 2(n-1) control messages.
    """
    r, n = net.round, net.n
    partial = 0.0 + net.agent(2).step_sq
    for a in range(2, n):
        net.send(a, a + 1, DOWN, PayloadTag.RESIDUAL, partial)
        partial = net.receive(a, a + 1, DOWN, PayloadTag.RESIDUAL, r)
        partial = partial + net.agent(a + 1).step_sq
    total = partial

    halt = tol_residual_sq is not None and total <= tol_residual_sq
    tag = PayloadTag.HALT if halt else PayloadTag.RESIDUAL
    sender = n
    for _ in range(n):
        receiver = net.successor(sender)
        net.send(sender, receiver, DOWN, tag, None if halt else total)
        net.receive(sender, receiver, DOWN, tag, r)
        agent = net.agent(receiver)
        agent.residual_seen = total
        agent.halted = halt
        sender = receiver
    return total


@dataclass
class RingResult:
    z: list
    x: list
    trace: Trace
    status: Status
    iterations: int
    message_summary: dict


def run_until_residual(net, tol_residual_sq=None, max_rounds=None, check_period=None, record_duals=False):
    """Run rounds until the aggregated residual reaches tol (Halt) or max_rounds; returns a RingResult."""
    stop = StopConfig(
        tol_residual_sq=config.DEFAULT_TOL_RESIDUAL_SQ if tol_residual_sq is None else tol_residual_sq,
        max_iters=config.DEFAULT_MAX_ITERS if max_rounds is None else max_rounds,
        check_period=config.DEFAULT_CHECK_PERIOD if check_period is None else check_period,
    )
    trace = Trace()
    started = time.perf_counter()
    status = Status.MAX_ROUNDS
    logger.info(f"ring run {net.problem.name}: mode={net.mode.value} n={net.n}")
    while net.round < stop.max_iters:
        step_round(net)
        r = net.round
        if r % stop.check_period == 0 or r == stop.max_iters:
            residual = aggregate_residual(net, stop.tol_residual_sq)
            trace.append(trace_record(r, residual, net.x(), net.forward_cache(), record_duals, started))
            if all(agent.halted for agent in net.agents):
                status = Status.CONVERGED
                break
    logger.info(f"ring run {net.problem.name}: {status.value} after {net.round} rounds")
    return RingResult(z=net.z(), x=net.x(), trace=trace, status=status,
                      iterations=net.round, message_summary=message_log_summary(net))


def message_log_records(net):
    return [m.to_record() for m in net.log]


def write_message_log(net, path):
    """One JSON object per message: {round, from, to, payload_tag, norm}."""
    return write_jsonl(message_log_records(net), path)


def message_log_summary(net):
    """Per-round counts of data, reflected-term and control messages (spawn is round 0)."""
    per_round = {}
    for m in net.log:
        counts = per_round.setdefault(m.round, {'data': 0, 'reflected': 0, 'control': 0})
        if m.tag in CONTROL_TAGS:
            counts['control'] += 1
        else:
            counts['data'] += 1
            if m.tag == PayloadTag.REFLECTED:
                counts['reflected'] += 1
    return {'rounds': net.round, 'messages': len(net.log), 'per_round': per_round}
