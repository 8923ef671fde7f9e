"""
Quantum network layer: concurrence, swap planning, Bell-pair ledger.

A connected network is upgraded to a complete entanglement graph by
swapping Bell pairs along shortest paths. A path of ``d`` hops costs
``d - 1`` swaps. Every pair of vertices then holds ``replicas`` Bell pairs,
and each teleportation consumes one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import DisconnectedGraph, InvalidParameter, ResourceExhausted
from .gossip import (
    ContactSampler,
    Mode,
    TimeEstimate,
    TrialStream,
    completion_rounds,
    default_max_rounds,
    exchange,
    initial_state,
    summarize,
    trial_seeds,
)
from .graph import UNREACHABLE, Graph, distance_matrix
from .transition import complete_matrix

NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """Pure state ``sum_ij a_ij |ij>`` stored as the 2x2 amplitude matrix."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex)
        if a.shape == (4,):
            a = a.reshape(2, 2)
        if a.shape != (2, 2):
            raise InvalidParameter(f"amplitudes must be 2x2 (or length 4), got shape {a.shape}")
        norm = float(np.sum(np.abs(a) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidParameter(f"state is not normalised: sum |a_ij|^2 = {norm!r}")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def bell(cls) -> "TwoQubitState":
        s = 1 / math.sqrt(2)
        return cls([[s, 0], [0, s]])

    @classmethod
    def product(cls) -> "TwoQubitState":
        return cls([[1, 0], [0, 0]])


def concurrence(s: TwoQubitState) -> float:
    a = s.amplitudes
    return float(2 * abs(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]))


def chain_concurrence(states: Sequence[TwoQubitState]) -> float:
    """Concurrence left after swapping through a chain of ``K`` links.

    The product of the per-link concurrences ``2|det A_i|``, so a chain of
    Bell pairs stays at 1.
    """
    if len(states) == 0:
        raise InvalidParameter("chain needs at least one link")
    return float(np.prod([concurrence(s) for s in states]))


@dataclass(frozen=True)
class PairPlan:
    u: int
    v: int
    path: tuple[int, ...]
    swaps: int


@dataclass(frozen=True)
class UpdatePlan:
    n: int
    mode: Mode
    replicas: int
    pairs: tuple[PairPlan, ...]

    @property
    def total_edges(self) -> int:
        return len(self.pairs)

    @property
    def total_swaps(self) -> int:
        return sum(p.swaps for p in self.pairs)

    @property
    def totals(self) -> dict:
        return {
            "edges": self.total_edges,
            "swaps": self.total_swaps,
            "edges_with_replicas": self.total_edges * self.replicas,
            "swaps_with_replicas": self.total_swaps * self.replicas,
        }

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "mode": self.mode,
            "replicas": self.replicas,
            "pairs": [{"u": p.u, "v": p.v, "path": list(p.path), "swaps": p.swaps} for p in self.pairs],
            "totals": self.totals,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, obj: dict) -> "UpdatePlan":
        pairs = tuple(PairPlan(p["u"], p["v"], tuple(p["path"]), p["swaps"]) for p in obj["pairs"])
        plan = cls(obj["n"], obj.get("mode", "single"), obj["replicas"], pairs)
        for p in pairs:
            if p.swaps != len(p.path) - 2 or p.path[0] != p.u or p.path[-1] != p.v:
                raise InvalidParameter(f"plan JSON: inconsistent entry for pair ({p.u}, {p.v})")
        if "totals" in obj and obj["totals"] != plan.totals:
            raise InvalidParameter("plan JSON: totals do not match the per-pair entries")
        return plan


def _lex_shortest_path(adj, dist_to_v: np.ndarray, u: int, v: int) -> tuple[int, ...]:
    path = [u]
    cur = u
    while cur != v:
        cur = next(w for w in adj[cur] if dist_to_v[w] == dist_to_v[cur] - 1)
        path.append(cur)
    return tuple(path)


def plan_update(g: Graph, mode: Mode = "single") -> UpdatePlan:
    """Swap plan that links every non-adjacent pair along a shortest path.

    Paths are the lexicographically smallest shortest vertex sequences.
    ``replicas`` is 1 for single-piece and ``n`` for multi-piece gossip.
    """
    if mode not in ("single", "multi"):
        raise InvalidParameter(f"mode must be 'single' or 'multi', got {mode!r}")
    if g.n < 2:
        raise InvalidParameter("update plan needs n >= 2")
    d = distance_matrix(g)
    if (d == UNREACHABLE).any():
        raise DisconnectedGraph("cannot plan an update for a disconnected graph")
    adj = g.neighbors()
    pairs = []
    for u, v in combinations(range(g.n), 2):
        if d[u, v] < 2:
            continue
        path = _lex_shortest_path(adj, d[:, v], u, v)
        pairs.append(PairPlan(u, v, path, len(path) - 2))
    return UpdatePlan(g.n, mode, 1 if mode == "single" else g.n, tuple(pairs))


def ring_swap_count(n: int) -> int:
    """Closed-form total swaps for an even ring: ``(n/2)(n/2 - 1)^2``."""
    if n % 2:
        raise InvalidParameter("closed form holds for even n only")
    m = n // 2
    return m * (m - 1) ** 2


@dataclass(frozen=True)
class QuantumNetwork:
    base: Graph
    ledger: dict = field(default_factory=dict)

    def count(self, u: int, v: int) -> int:
        return self.ledger.get((min(u, v), max(u, v)), 0)

    def total(self) -> int:
        return sum(self.ledger.values())

    def contact_graph(self) -> Graph:
        return Graph(self.base.n, [p for p, c in self.ledger.items() if c > 0])

    def is_complete(self) -> bool:
        n = self.base.n
        return all(self.count(u, v) > 0 for u, v in combinations(range(n), 2))


def apply_update(g: Graph, plan: UpdatePlan) -> QuantumNetwork:
    """Provision ``plan.replicas`` Bell pairs on every vertex pair, physical edges included."""
    if plan.n != g.n:
        raise InvalidParameter(f"plan is for n={plan.n}, graph has n={g.n}")
    missing = {p for p in combinations(range(g.n), 2) if not g.has_edge(*p)}
    planned = [(p.u, p.v) for p in plan.pairs]
    if len(set(planned)) != len(planned) or set(planned) != missing:
        raise InvalidParameter("plan does not cover exactly the non-adjacent pairs of the graph")
    for p in plan.pairs:
        if any(not g.has_edge(a, b) for a, b in zip(p.path, p.path[1:])):
            raise InvalidParameter(f"path for pair ({p.u}, {p.v}) leaves the physical graph")
    ledger = {p: plan.replicas for p in combinations(range(g.n), 2)}
    return QuantumNetwork(g, ledger)


def teleport(net: QuantumNetwork, u: int, v: int, times: int = 1) -> QuantumNetwork:
    """Network with ``times`` Bell pairs consumed on ``(u, v)``."""
    key = (min(u, v), max(u, v))
    have = net.ledger.get(key, 0)
    if have < times:
        raise ResourceExhausted(key, f"pair {key} holds {have} Bell pair(s), needed {times}")
    ledger = dict(net.ledger)
    ledger[key] = have - times
    return QuantumNetwork(net.base, ledger)


def _pair_draws(contacts: np.ndarray, state: np.ndarray) -> np.ndarray:
    """Bell pairs each unordered pair spends this round, shape ``(B, n, n)`` upper-triangular.

    Single-piece: one pair per contact that carries the message across.
    Multi-piece: one pair per message that crosses. A pair contacted from both
    ends in one round is charged once.
    """
    B, n = contacts.shape
    b = np.broadcast_to(np.arange(B)[:, None], (B, n))
    i = np.broadcast_to(np.arange(n), (B, n))
    j = contacts
    if state.ndim == 2:
        amount = (state[b, i] != state[b, j]).astype(np.int64)
    else:
        amount = (state[b, i] != state[b, j]).sum(axis=-1)
    amount = np.where(i == j, 0, amount)
    draws = np.zeros((B, n, n), dtype=np.int64)
    draws[b, np.minimum(i, j), np.maximum(i, j)] = amount
    return draws


class _LedgerObserver:
    def __init__(self, trials: int, n: int, replicas: int):
        self.replicas = replicas
        self.used = np.zeros((trials, n, n), dtype=np.int64)

    def __call__(self, t, ids, contacts, state):
        self.used[ids] += _pair_draws(contacts, state)
        over = self.used[ids] > self.replicas
        if over.any():
            k, u, v = (int(x) for x in np.argwhere(over)[0])
            raise ResourceExhausted(
                (u, v), f"trial {int(ids[k])}, round {t}: pair ({u}, {v}) needs more than "
                        f"{self.replicas} Bell pair(s)"
            )


@dataclass(frozen=True)
class QuantumGossipResult:
    estimate: TimeEstimate
    plan: UpdatePlan
    max_draw: np.ndarray
    teleports: np.ndarray
    samples_by_source: dict = field(default_factory=dict, repr=False, compare=False)


def run_quantum_gossip(
    g: Graph,
    mode: Mode = "single",
    epsilon: float = 0.1,
    trials: int = 1000,
    seed: int = 0,
    max_rounds: int | None = None,
    vertex_transitive: bool = False,
    check_ledger: bool = True,
    workers: int | None = None,
) -> QuantumGossipResult:
    """Gossip on the upgraded network with every exchange paid for by teleportation.

    The contact dynamics are those of ``complete_matrix(n)``, with the same
    trial seeds plain gossip would use, so the ledger never changes a
    completion round; it only accounts for and enforces Bell-pair use.
    """
    if not 0 < epsilon < 1:
        raise InvalidParameter(f"epsilon must lie in (0, 1), got {epsilon}")
    plan = plan_update(g, mode)
    apply_update(g, plan)
    n = g.n
    P = complete_matrix(n)
    max_rounds = default_max_rounds(n) if max_rounds is None else max_rounds
    sources = [0] if mode == "multi" or vertex_transitive else list(range(n))
    best, by_source, draws, counts = None, {}, [], []
    censored = False
    for v in sources:
        seeds = trial_seeds(seed, trials, v if mode == "single" else 0)
        obs = _LedgerObserver(trials, n, plan.replicas) if check_ledger else None
        samples = completion_rounds(P, mode, seeds, max_rounds, source=v, observer=obs, workers=workers)
        est = summarize(samples, epsilon, max_rounds, source=v if mode == "single" else None)
        by_source[v] = samples
        censored |= est.censored
        if obs is not None:
            draws.append(obs.used.reshape(trials, -1).max(axis=1))
            counts.append(obs.used.reshape(trials, -1).sum(axis=1))
        if best is None or est.t_estimate > best.t_estimate:
            best = est
    estimate = TimeEstimate(best.epsilon, best.t_estimate, best.trials, best.quantile_ci,
                            censored, best.source, best.samples)
    empty = np.zeros(0, dtype=np.int64)
    return QuantumGossipResult(
        estimate, plan,
        np.concatenate(draws) if draws else empty,
        np.concatenate(counts) if counts else empty,
        by_source,
    )


def run_quantum_trial(
    net: QuantumNetwork,
    mode: Mode,
    trial_seed: int,
    source: int = 0,
    max_rounds: int | None = None,
) -> tuple[int | None, QuantumNetwork]:
    """One trial driven through :func:`teleport`, one call per Bell pair spent.

    Slow reference path for cross-checking the vectorised ledger.
    Returns the completion round (``None`` if not reached) and the drained network.
    """
    n = net.base.n
    if not net.is_complete():
        raise InvalidParameter("quantum gossip needs every pair provisioned")
    P = complete_matrix(n)
    sampler = ContactSampler(P)
    rng = TrialStream(trial_seed)
    state = initial_state(n, mode, source)
    max_rounds = default_max_rounds(n) if max_rounds is None else max_rounds
    for t in range(1, max_rounds + 1):
        contacts = sampler.sample(rng.random(n))
        charged = set()
        for i in range(n):
            j = int(contacts[i])
            key = (min(i, j), max(i, j))
            if i == j or key in charged:
                continue
            charged.add(key)
            if mode == "single":
                cost = int(state[i] != state[j])
            else:
                cost = int((state[i] != state[j]).sum())
            if cost:
                net = teleport(net, i, j, cost)
        state = exchange(state[None], contacts[None])[0]
        if state.all():
            return t, net
    return None, net


def doubling_schedule(n: int, source: int = 0) -> list[list[tuple[int, int]]]:
    """Push schedule on a complete contact graph: every informed vertex sends once per round.

    Informs ``n`` vertices in ``ceil(log2 n)`` rounds.
    """
    informed = [source]
    rest = [v for v in range(n) if v != source]
    rounds = []
    while rest:
        moves = []
        for u in list(informed):
            if not rest:
                break
            w = rest.pop(0)
            moves.append((u, w))
        informed += [w for _, w in moves]
        rounds.append(moves)
    return rounds


def replay_schedule(net: QuantumNetwork, schedule, source: int = 0):
    """Apply scheduled contacts round by round, paying for each with a teleport.

    Each vertex initiates at most one contact per round. Returns the
    informed-set sizes after each round and the drained network.
    """
    n = net.base.n
    state = initial_state(n, "single", source)
    sizes = []
    for moves in schedule:
        contacts = np.arange(n)
        for u, w in moves:
            if contacts[u] != u:
                raise InvalidParameter(f"vertex {u} makes two contacts in one round")
            contacts[u] = w
        for u, w in moves:
            if state[u] != state[w]:
                net = teleport(net, u, w)
        state = exchange(state[None], contacts[None])[0]
        sizes.append(int(state.sum()))
    return sizes, net
