"""Exact SEIRD epidemics on a network (direct-method Gillespie).

Infectious nodes transmit along each incident link to a susceptible
neighbour at rate ``beta_n``; exposed nodes become infectious at rate
``gamma_E``; infectious nodes leave at rate ``gamma_I`` and die with a
probability that jumps from ``p_d_low`` to ``p_d_high`` once prevalence
exceeds ``i_th``.

The S–I links, the exposed nodes and the infectious nodes are each kept in
an :class:`IndexedSet`, so picking the next event is O(1) and applying it
costs O(degree).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, NamedTuple

import numpy as np

from .network import Network
from .rng import py_random, seed_sequence

S, E, I, R, D = 0, 1, 2, 3, 4


class NodeState(IntEnum):
    S = S
    E = E
    I = I  # noqa: E741
    R = R
    D = D


INFECTION = "infection"
INCUBATION_END = "incubation-end"
RECOVERY = "recovery"
DEATH = "death"


@dataclass(frozen=True)
class SeirdParams:
    beta_n: float
    gamma_E: float
    gamma_I: float
    p_d_low: float
    p_d_high: float
    i_th: float

    def __post_init__(self):
        if self.beta_n < 0:
            raise ValueError("beta_n must be non-negative")
        if self.gamma_E <= 0 or self.gamma_I <= 0:
            raise ValueError("gamma_E and gamma_I must be positive")
        if not 0.0 <= self.p_d_low <= self.p_d_high <= 1.0:
            raise ValueError("need 0 <= p_d_low <= p_d_high <= 1")

    def death_probability(self, prevalence: float) -> float:
        return self.p_d_high if prevalence > self.i_th else self.p_d_low


class Event(NamedTuple):
    time: float
    kind: str
    node: int


class IndexedSet:
    """Set of ints with O(1) insert, remove and uniform sampling."""

    __slots__ = ("items", "pos")

    def __init__(self, items=()):
        self.items: list[int] = []
        self.pos: dict[int, int] = {}
        for x in items:
            self.add(x)

    def __len__(self):
        return len(self.items)

    def __contains__(self, x):
        return x in self.pos

    def __iter__(self):
        return iter(self.items)

    def add(self, x: int) -> None:
        if x not in self.pos:
            self.pos[x] = len(self.items)
            self.items.append(x)

    def remove(self, x: int) -> None:
        i = self.pos.pop(x)
        last = self.items.pop()
        if last != x:
            self.items[i] = last
            self.pos[last] = i

    def sample(self, u: float) -> int:
        """Element at ``floor(u * len)`` for ``u`` uniform on [0, 1)."""
        return self.items[int(u * len(self.items))]


class NetworkSimState:
    """Mutable per-run state: node states, compartment counts, S–I links.

    An S–I link is encoded as ``s_node * n + i_node``.
    """

    def __init__(self, net: Network, node_states, time: float = 0.0):
        self.net = net
        self.n = net.n_nodes
        self.node_states = bytearray(node_states)
        if len(self.node_states) != self.n:
            raise ValueError("node_states length must equal the network size")
        self.time = float(time)
        self.counts = [0, 0, 0, 0, 0]
        for x in self.node_states:
            self.counts[x] += 1
        self.exposed = IndexedSet(i for i, x in enumerate(self.node_states) if x == E)
        self.infectious = IndexedSet(i for i, x in enumerate(self.node_states) if x == I)
        n = self.n
        adj = net.adjacency
        st = self.node_states
        self.si_links = IndexedSet(
            w * n + u for u in self.infectious for w in adj[u] if st[w] == S
        )

    @property
    def si_edge_count(self) -> int:
        return len(self.si_links)

    def count_tuple(self) -> tuple[int, int, int, int, int]:
        return tuple(self.counts)


def init_state(net: Network, i0_count: int, seed) -> NetworkSimState:
    """Infect ``i0_count`` distinct nodes chosen uniformly; everyone else is S."""
    if not 0 < i0_count < net.n_nodes:
        raise ValueError("need 0 < i0_count < N")
    rng = np.random.default_rng(seed_sequence(seed))
    states = np.zeros(net.n_nodes, dtype=np.uint8)
    states[rng.choice(net.n_nodes, size=i0_count, replace=False)] = I
    return NetworkSimState(net, states.tobytes())


def si_edge_recount(state: NetworkSimState, net: Network | None = None) -> int:
    net = state.net if net is None else net
    st = np.frombuffer(bytes(state.node_states), dtype=np.uint8)
    a, b = st[net.edges[:, 0]], st[net.edges[:, 1]]
    return int(np.count_nonzero(((a == S) & (b == I)) | ((a == I) & (b == S))))


def _apply(state: NetworkSimState, params: SeirdParams, rng, total: float):
    """Pick and apply one event given the current total rate."""
    adj = state.net.adjacency
    st = state.node_states
    n = state.n
    counts = state.counts
    si = state.si_links
    r = rng.random() * total
    w_inf = params.beta_n * len(si)
    if r < w_inf:
        node = si.sample(rng.random()) // n
        remove = si.remove
        for w in adj[node]:
            if st[w] == I:
                remove(node * n + w)
        st[node] = E
        counts[S] -= 1
        counts[E] += 1
        state.exposed.add(node)
        return INFECTION, node
    if r < w_inf + params.gamma_E * len(state.exposed):
        node = state.exposed.sample(rng.random())
        state.exposed.remove(node)
        add = si.add
        for w in adj[node]:
            if st[w] == S:
                add(w * n + node)
        st[node] = I
        counts[E] -= 1
        counts[I] += 1
        state.infectious.add(node)
        return INCUBATION_END, node
    node = state.infectious.sample(rng.random())
    p_d = params.death_probability(counts[I] / n)
    state.infectious.remove(node)
    remove = si.remove
    for w in adj[node]:
        if st[w] == S:
            remove(w * n + node)
    counts[I] -= 1
    if rng.random() < p_d:
        st[node] = D
        counts[D] += 1
        return DEATH, node
    st[node] = R
    counts[R] += 1
    return RECOVERY, node


def total_rate(state: NetworkSimState, params: SeirdParams) -> float:
    return (params.beta_n * len(state.si_links)
            + params.gamma_E * len(state.exposed)
            + params.gamma_I * len(state.infectious))


def gillespie_step(state: NetworkSimState, params: SeirdParams, rng):
    """Advance ``state`` in place by one event.

    Returns ``(state, event, dt)``, or ``None`` when no event can occur (the
    epidemic is over). ``rng`` is a :class:`random.Random`.
    """
    total = total_rate(state, params)
    if total <= 0.0:
        return None
    dt = rng.expovariate(total)
    state.time += dt
    kind, node = _apply(state, params, rng, total)
    return state, Event(state.time, kind, node), dt


def advance(state: NetworkSimState, params: SeirdParams, rng, t_end: float,
            log: list | None = None) -> bool:
    """Fire events until ``t_end`` with the rates held fixed.

    The waiting time that would overshoot ``t_end`` is discarded; by
    memorylessness this is exact when the rates change at ``t_end``.
    Returns ``False`` once the chain has been absorbed.
    """
    expo = rng.expovariate
    beta_n, g_e, g_i = params.beta_n, params.gamma_E, params.gamma_I
    si, ex, inf = state.si_links, state.exposed, state.infectious
    while True:
        total = beta_n * len(si) + g_e * len(ex) + g_i * len(inf)
        if total <= 0.0:
            state.time = max(state.time, t_end)
            return False
        t_next = state.time + expo(total)
        if t_next > t_end:
            state.time = t_end
            return True
        state.time = t_next
        kind, node = _apply(state, params, rng, total)
        if log is not None:
            log.append(Event(t_next, kind, node))


@dataclass
class DailyCounts:
    """Compartment counts sampled at integer days ``0..t_final``."""

    days: np.ndarray
    counts: np.ndarray  # (days, 5) ordered S, E, I, R, D
    beta_n: np.ndarray

    COLUMNS = ("day", "S", "E", "I", "R", "D", "beta_n")

    def rows(self):
        for d, c, b in zip(self.days.tolist(), self.counts.tolist(), self.beta_n.tolist()):
            yield (d, *c, b)


def run_seird(net: Network, params: SeirdParams,
              beta_n_schedule: Callable[[int], float] | float,
              t_final: int, seed, i0_count: int | None = None,
              state: NetworkSimState | None = None,
              record_events: bool = True):
    """Simulate from day 0 to ``t_final``; ``beta_n`` is re-read each day.

    Either pass a prepared ``state`` or ``i0_count`` initial infectious nodes
    (drawn from a child of ``seed``). Returns ``(event_log, daily_counts)``.
    """
    if t_final <= 0:
        raise ValueError("t_final must be positive")
    init_seed, dyn_seed = seed_sequence(seed).spawn(2)
    if state is None:
        if i0_count is None:
            raise ValueError("pass either state or i0_count")
        state = init_state(net, i0_count, init_seed)
    rng = py_random(dyn_seed)
    schedule = beta_n_schedule if callable(beta_n_schedule) else (lambda _d: beta_n_schedule)
    days = int(np.ceil(t_final))
    counts = np.zeros((days + 1, 5), dtype=np.int64)
    betas = np.zeros(days + 1)
    log: list[Event] | None = [] if record_events else None
    counts[0] = state.counts
    for d in range(days):
        b = float(schedule(d))
        betas[d] = b
        p = params if b == params.beta_n else _with_beta(params, b)
        advance(state, p, rng, float(min(d + 1, t_final)), log)
        counts[d + 1] = state.counts
    betas[days] = betas[days - 1]
    return log, DailyCounts(np.arange(days + 1), counts, betas)


def _with_beta(params: SeirdParams, beta_n: float) -> SeirdParams:
    return SeirdParams(beta_n, params.gamma_E, params.gamma_I,
                       params.p_d_low, params.p_d_high, params.i_th)
