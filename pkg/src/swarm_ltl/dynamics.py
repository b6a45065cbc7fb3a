"""Connectivity graph, potential-field controller and integration.

Agents are indexed 0..N-1 here; ``positions`` is an (N, 2) array and an
edge is an ordered index pair ``(i, j)`` with ``i < j``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from itertools import combinations
from typing import TYPE_CHECKING

import networkx as nx
import numpy as np

if TYPE_CHECKING:
    from collections.abc import Iterable

    from numpy.typing import NDArray

logger = logging.getLogger(__name__)

Edge = tuple[int, int]
EdgeSet = frozenset[Edge]

MIN_SUBSTEP_FRACTION = 64
V_TOLERANCE = 1e-9


class IntegrationError(RuntimeError):
    """Raised when a step cannot keep every existing edge below the radius."""

    def __init__(self, message: str, time: float | None = None) -> None:
        if time is not None:
            message = f"{message} (t={time:.3f}s)"
        super().__init__(message)
        self.time = time


class PotentialDomainError(IntegrationError):
    """Edge length outside [0, r) where the potential is undefined."""


@dataclass(frozen=True, eq=False)
class SwarmState:
    """Positions, connectivity and the leader term of the controller."""

    positions: NDArray[np.float64]
    edges: EdgeSet
    leader: int | None = None
    goal: NDArray[np.float64] | None = None

    @property
    def size(self) -> int:
        return int(self.positions.shape[0])

    @property
    def leader_flags(self) -> NDArray[np.float64]:
        flags = np.zeros(self.size)
        if self.leader is not None:
            flags[self.leader] = 1.0
        return flags

    def with_leader(self, leader: int | None, goal: Iterable[float] | None) -> SwarmState:
        target = None if goal is None else np.asarray(tuple(goal), dtype=float)
        return replace(self, leader=leader, goal=target)


def pairwise_distances(positions: NDArray[np.float64]) -> NDArray[np.float64]:
    diff = positions[:, None, :] - positions[None, :, :]
    return np.asarray(np.linalg.norm(diff, axis=-1), dtype=float)


def initial_edges(positions: NDArray[np.float64], r: float) -> EdgeSet:
    """Edges at start-up: strictly inside the communication radius."""
    dist = pairwise_distances(positions)
    n = positions.shape[0]
    return frozenset((i, j) for i, j in combinations(range(n), 2) if dist[i, j] < r)


def update_edges(
    prev: EdgeSet, positions: NDArray[np.float64], r: float, eps: float
) -> EdgeSet:
    """New edges need length <= r - eps; existing ones survive up to r."""
    if not 0 < eps < r:
        msg = f"Hysteresis must satisfy 0 < eps < r, got eps={eps}, r={r}"
        raise ValueError(msg)
    dist = pairwise_distances(positions)
    n = positions.shape[0]
    edges = set()
    for i, j in combinations(range(n), 2):
        d = dist[i, j]
        if d <= r - eps or (d <= r and (i, j) in prev):
            edges.add((i, j))
    return frozenset(edges)


def is_connected(n: int, edges: Iterable[Edge]) -> bool:
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from(edges)
    return n <= 1 or bool(nx.is_connected(graph))


def neighbors(i: int, edges: Iterable[Edge]) -> list[int]:
    return sorted(b if a == i else a for a, b in edges if i in (a, b))


def phi(d: float, r: float) -> float:
    """Edge potential d^2 / (r^2 - d^2), defined on [0, r)."""
    if not 0 <= d < r:
        msg = f"Edge length {d:.6f} outside potential domain [0, {r})"
        raise PotentialDomainError(msg)
    return d * d / (r * r - d * d)


def edge_weight(d: float, r: float) -> float:
    """Gradient gain 2 r^2 / (r^2 - d^2)^2 of the edge potential."""
    if not 0 <= d < r:
        msg = f"Edge length {d:.6f} outside potential domain [0, {r})"
        raise PotentialDomainError(msg)
    gap = r * r - d * d
    return 2 * r * r / (gap * gap)


def edge_addition_bound(r: float, eps: float) -> float:
    """Largest possible potential of a freshly added edge: phi(r - eps)."""
    d = r - eps
    return d * d / (eps * (2 * r - eps))


def control_input(
    i: int,
    positions: NDArray[np.float64],
    neighbor_ids: Iterable[int],
    b_i: float,
    goal: NDArray[np.float64] | None,
    r: float,
) -> NDArray[np.float64]:
    """u_i = -b_i (x_i - c) - sum_j w(|x_ij|) (x_i - x_j)."""
    x_i = positions[i]
    u = np.zeros(2)
    if b_i and goal is not None:
        u -= b_i * (x_i - goal)
    for j in neighbor_ids:
        diff = x_i - positions[j]
        u -= edge_weight(float(np.linalg.norm(diff)), r) * diff
    return u


def _velocities(
    positions: NDArray[np.float64],
    edges: EdgeSet,
    flags: NDArray[np.float64],
    goal: NDArray[np.float64] | None,
    r: float,
) -> NDArray[np.float64]:
    u = np.zeros_like(positions)
    if goal is not None:
        u -= flags[:, None] * (positions - goal)
    for i, j in sorted(edges):
        diff = positions[i] - positions[j]
        pull = edge_weight(float(np.linalg.norm(diff)), r) * diff
        u[i] -= pull
        u[j] += pull
    return u


def lyapunov(state: SwarmState, r: float) -> float:
    """V = sum over edges of phi + 1/2 sum_i b_i |x_i - c|^2."""
    return _lyapunov(state.positions, state.edges, state.leader_flags, state.goal, r)


def _lyapunov(
    positions: NDArray[np.float64],
    edges: EdgeSet,
    flags: NDArray[np.float64],
    goal: NDArray[np.float64] | None,
    r: float,
) -> float:
    # each edge appears twice in the neighbor double sum, halved once
    value = sum(
        phi(float(np.linalg.norm(positions[i] - positions[j])), r) for i, j in edges
    )
    if goal is not None:
        offsets = positions - goal
        value += 0.5 * float(np.sum(flags * np.sum(offsets * offsets, axis=1)))
    return float(value)


def build_weight_matrix(state: SwarmState, r: float) -> NDArray[np.float64]:
    """Weighted Laplacian H with h_ij = 2 r^2 / (r^2 - |x_ij|^2)^2."""
    n = state.size
    h = np.zeros((n, n))
    for i, j in state.edges:
        w = edge_weight(float(np.linalg.norm(state.positions[i] - state.positions[j])), r)
        h[i, j] -= w
        h[j, i] -= w
        h[i, i] += w
        h[j, j] += w
    return h


def _rk4(
    positions: NDArray[np.float64],
    h: float,
    edges: EdgeSet,
    flags: NDArray[np.float64],
    goal: NDArray[np.float64] | None,
    r: float,
) -> NDArray[np.float64]:
    k1 = _velocities(positions, edges, flags, goal, r)
    k2 = _velocities(positions + 0.5 * h * k1, edges, flags, goal, r)
    k3 = _velocities(positions + 0.5 * h * k2, edges, flags, goal, r)
    k4 = _velocities(positions + h * k3, edges, flags, goal, r)
    return positions + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _stretched(
    before: NDArray[np.float64],
    after: NDArray[np.float64],
    edges: EdgeSet,
    limit: float,
) -> bool:
    for i, j in edges:
        d_after = float(np.linalg.norm(after[i] - after[j]))
        if d_after > limit and d_after > float(np.linalg.norm(before[i] - before[j])):
            return True
    return False


def step(
    state: SwarmState, dt: float, *, r: float, eps: float, now: float = 0.0
) -> SwarmState:
    """Advance one outer step with classical RK4, edge set frozen.

    A sub-step is rejected and halved when an edge grows past r - eps/2,
    when V rises, or when a stage leaves the potential's domain. Halving
    stops at dt/64. Edges are updated once, after the full step.
    """
    flags = state.leader_flags
    goal = state.goal
    edges = state.edges
    limit = r - eps / 2
    x = state.positions.copy()
    v = _lyapunov(x, edges, flags, goal, r)

    # progress in units of dt/64, so sub-step bookkeeping stays exact
    remaining = MIN_SUBSTEP_FRACTION
    units = MIN_SUBSTEP_FRACTION
    while remaining > 0:
        units = min(units, remaining)
        h = dt * units / MIN_SUBSTEP_FRACTION
        reason = None
        try:
            candidate = _rk4(x, h, edges, flags, goal, r)
            if _stretched(x, candidate, edges, limit):
                reason = "edge stretched past r - eps/2"
            else:
                v_new = _lyapunov(candidate, edges, flags, goal, r)
                if v_new > v + V_TOLERANCE * max(1.0, v):
                    reason = f"V increased from {v:.9g} to {v_new:.9g}"
        except PotentialDomainError as exc:
            reason = str(exc)
        if reason is None:
            x = candidate
            v = v_new
            remaining -= units
            continue
        if units == 1:
            msg = f"Integration failed at minimum sub-step dt/{MIN_SUBSTEP_FRACTION}: {reason}"
            raise IntegrationError(msg, time=now)
        units //= 2
        logger.debug("t=%.3f: halving sub-step to dt*%d/64 (%s)", now, units, reason)

    new_edges = update_edges(edges, x, r, eps)
    lost = sorted(edges - new_edges)
    if lost:
        i, j = lost[0]
        msg = f"Edge ({i + 1}, {j + 1}) lost during step"
        raise IntegrationError(msg, time=now)
    return replace(state, positions=x, edges=new_edges)
