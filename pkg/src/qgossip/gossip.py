"""
Synchronous push-pull gossip: single-piece and multi-piece.

Randomness is counter based. The uniform used by vertex ``i`` in round ``t``
of a trial is a fixed 64-bit hash of ``(trial_seed, t, i)``, and trial ``k``
of stream ``s`` gets ``trial_seed = derive_trial_seed(seed, k, s)``. A trial
therefore produces the same contacts whether it runs alone, inside a
vectorised batch, or on another thread.

Streams: in single-piece mode the stream id is the source vertex; multi-piece
runs use stream 0.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy import stats

from .conductance import conductance, mean_conductance
from .errors import InvalidParameter
from .graph import Graph
from .transition import TransitionMatrix, validate

Mode = Literal["single", "multi"]

_MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def mix64(x):
    """splitmix64 finaliser, elementwise on uint64 (wrapping arithmetic)."""
    z = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def derive_trial_seed(seed: int, trial: int, stream: int = 0) -> int:
    base = int(mix64(np.uint64(seed & _MASK64) ^ mix64(np.uint64(stream & _MASK64))))
    return int(mix64(np.uint64((base + (trial + 1) * GOLDEN) & _MASK64)))


def trial_seeds(seed: int, trials: int, stream: int = 0) -> np.ndarray:
    base = int(mix64(np.uint64(seed & _MASK64) ^ mix64(np.uint64(stream & _MASK64))))
    k = np.arange(1, trials + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(np.uint64(base) + k * np.uint64(GOLDEN))


def round_uniforms(seeds: np.ndarray, t: int, n: int) -> np.ndarray:
    """Uniforms in [0, 1) of shape ``(len(seeds), n)`` for round ``t``."""
    ctr = (np.uint64(t) << np.uint64(32)) | np.arange(n, dtype=np.uint64)
    h = mix64(np.asarray(seeds, dtype=np.uint64)[:, None] ^ mix64(ctr)[None, :])
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


class TrialStream:
    """Counter-based generator for one trial; each ``random`` call is one round."""

    def __init__(self, trial_seed: int):
        self.seed = np.uint64(trial_seed & _MASK64)
        self.round = 0

    def random(self, n: int) -> np.ndarray:
        self.round += 1
        return round_uniforms(np.array([self.seed]), self.round, n)[0]


class ContactSampler:
    """Maps uniforms to contacts under ``P``; drawing yourself means contacting nobody."""

    def __init__(self, P: TransitionMatrix):
        n = P.n
        a = P.entries
        keys, targets, starts = [], [], []
        for i in range(n):
            starts.append(len(keys))
            cum = 0.0
            for j in range(n):
                if j != i and a[i, j] > 0:
                    cum += a[i, j]
                    keys.append(i + cum)
                    targets.append(j)
        self.n = n
        self.keys = np.array(keys, dtype=float)
        self.targets = np.array(targets + [0], dtype=np.int64)
        self.starts = np.array(starts, dtype=np.int64)
        self.ends = np.append(self.starts[1:], len(keys))

    def sample(self, u: np.ndarray) -> np.ndarray:
        """``u`` has shape ``(..., n)``; returns contacts of the same shape."""
        rows = np.broadcast_to(np.arange(self.n), u.shape)
        pos = np.searchsorted(self.keys, rows + u, side="right")
        hit = pos < self.ends[rows]
        return np.where(hit, self.targets[np.minimum(pos, len(self.keys))], rows)


def exchange(state: np.ndarray, contacts: np.ndarray) -> np.ndarray:
    """Apply one round of contacts to a batch of states.

    ``state`` is ``(B, n)`` boolean (single-piece informed flags) or
    ``(B, n, n)`` boolean (multi-piece, row ``i`` = messages held by ``i``).
    Both ends of every contact end up with the union of what they held before
    the round. Self-contacts are no-ops.
    """
    B, n = contacts.shape
    b = np.arange(B)[:, None]
    new = state | state[b, contacts]
    if state.ndim == 2:
        sb, si = np.nonzero(state)
        new[sb, contacts[sb, si]] = True
    else:
        np.logical_or.at(new, (np.broadcast_to(b, (B, n)), contacts), state)
    return new


def is_complete(state: np.ndarray) -> np.ndarray:
    axes = tuple(range(1, state.ndim))
    return state.all(axis=axes)


def initial_state(n: int, mode: Mode, source: int = 0, informed=None) -> np.ndarray:
    if mode == "single":
        s = np.zeros(n, dtype=bool)
        s[list(informed) if informed is not None else [source]] = True
        return s
    if mode == "multi":
        return np.eye(n, dtype=bool)
    raise InvalidParameter(f"mode must be 'single' or 'multi', got {mode!r}")


def step(state: np.ndarray, matrix: TransitionMatrix, rng, sampler: ContactSampler | None = None):
    """One synchronous round for a single trial.

    ``rng`` needs a ``random(n)`` method (a :class:`TrialStream` or a numpy
    ``Generator``).
    """
    sampler = sampler or ContactSampler(matrix)
    contacts = sampler.sample(np.asarray(rng.random(matrix.n)))
    return exchange(state[None], contacts[None])[0]


def default_max_rounds(n: int) -> int:
    return 64 * n * math.ceil(math.log2(n)) + 64 if n > 1 else 64


@dataclass(frozen=True)
class GossipConfig:
    graph: Graph
    matrix: TransitionMatrix
    mode: Mode = "single"
    source: int = 0
    seed: int = 0
    informed: frozenset[int] | None = None

    def __post_init__(self):
        if self.matrix.graph != self.graph:
            raise InvalidParameter("matrix is defined over a different graph")
        if self.mode not in ("single", "multi"):
            raise InvalidParameter(f"mode must be 'single' or 'multi', got {self.mode!r}")
        if self.mode == "single" and not 0 <= self.source < self.graph.n:
            raise InvalidParameter(f"source {self.source} outside 0..{self.graph.n - 1}")
        diag = validate(self.matrix)
        if diag is not None:
            raise InvalidParameter(f"invalid transition matrix: {diag}")

    @property
    def stream(self) -> int:
        return self.source if self.mode == "single" else 0


@dataclass
class DisseminationTrace:
    mode: Mode
    rounds: list = field(default_factory=list)
    completion_round: int | None = None

    def to_json(self) -> dict:
        if self.mode == "single":
            rounds = [sorted(s) for s in self.rounds]
        else:
            rounds = [[sorted(si) for si in r] for r in self.rounds]
        return {"mode": self.mode, "completion_round": self.completion_round, "rounds": rounds}


def _snapshot(state: np.ndarray, mode: Mode):
    if mode == "single":
        return frozenset(np.flatnonzero(state).tolist())
    return tuple(frozenset(np.flatnonzero(row).tolist()) for row in state)


def run_to_completion(config: GossipConfig, max_rounds: int | None = None, trial: int = 0) -> DisseminationTrace:
    """Run one trial until every vertex has everything, recording each round.

    The trial uses ``derive_trial_seed(config.seed, trial, config.stream)``.
    Hitting ``max_rounds`` leaves ``completion_round`` as ``None``.
    """
    n = config.graph.n
    max_rounds = default_max_rounds(n) if max_rounds is None else max_rounds
    if max_rounds < 1:
        raise InvalidParameter("max_rounds must be >= 1")
    sampler = ContactSampler(config.matrix)
    rng = TrialStream(derive_trial_seed(config.seed, trial, config.stream))
    state = initial_state(n, config.mode, config.source, config.informed)
    trace = DisseminationTrace(config.mode, [_snapshot(state, config.mode)])
    if state.all():
        trace.completion_round = 0
        return trace
    for t in range(1, max_rounds + 1):
        state = step(state, config.matrix, rng, sampler)
        trace.rounds.append(_snapshot(state, config.mode))
        if state.all():
            trace.completion_round = t
            break
    return trace


# observer(round, trial_ids, contacts, pre_round_state); may raise to abort
Observer = Callable[[int, np.ndarray, np.ndarray, np.ndarray], None]


def _completion_chunk(sampler, n, mode, source, informed, seeds, ids, max_rounds, observer):
    done = np.full(len(seeds), max_rounds + 1, dtype=np.int64)
    init = initial_state(n, mode, source, informed)
    if init.all():
        done[:] = 0
        return done
    state = np.broadcast_to(init, (len(seeds),) + init.shape).copy()
    active = np.arange(len(seeds))
    for t in range(1, max_rounds + 1):
        if active.size == 0:
            break
        contacts = sampler.sample(round_uniforms(seeds[active], t, n))
        if observer is not None:
            observer(t, ids[active], contacts, state)
        state = exchange(state, contacts)
        fin = is_complete(state)
        done[active[fin]] = t
        active, state = active[~fin], state[~fin]
    return done


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("QGOSSIP_THREADS", "1")))
    except ValueError:
        return 1


def completion_rounds(
    matrix: TransitionMatrix,
    mode: Mode,
    seeds: np.ndarray,
    max_rounds: int,
    source: int = 0,
    informed=None,
    observer: Observer | None = None,
    workers: int | None = None,
) -> np.ndarray:
    """Completion round of each trial seed; ``max_rounds + 1`` marks a censored trial.

    Trials are split across ``workers`` threads (default from
    ``QGOSSIP_THREADS``); the result does not depend on the split.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    sampler = ContactSampler(matrix)
    ids = np.arange(len(seeds))
    workers = thread_count() if workers is None else workers
    args = (sampler, matrix.n, mode, source, informed)
    if workers <= 1 or len(seeds) < 2 * workers:
        return _completion_chunk(*args, seeds, ids, max_rounds, observer)
    parts = np.array_split(ids, workers)
    with ThreadPoolExecutor(workers) as pool:
        out = pool.map(lambda p: _completion_chunk(*args, seeds[p], p, max_rounds, observer), parts)
        return np.concatenate(list(out))


@dataclass(frozen=True)
class TimeEstimate:
    epsilon: float
    t_estimate: int
    trials: int
    quantile_ci: tuple[int, int]
    censored: bool = False
    source: int | None = None
    samples: np.ndarray | None = field(default=None, repr=False, compare=False)


def empirical_time(samples: np.ndarray, epsilon: float) -> int:
    """Smallest ``t`` such that the fraction of samples above ``t`` is at most ``epsilon``."""
    s = np.sort(np.asarray(samples))
    allowed = math.floor(epsilon * len(s) + 1e-9)
    return int(s[len(s) - allowed - 1])


def quantile_ci(samples: np.ndarray, q: float, level: float = 0.95) -> tuple[int, int]:
    """Distribution-free order-statistic interval for the ``q``-quantile."""
    s = np.sort(np.asarray(samples))
    N = len(s)
    alpha = (1 - level) / 2
    lo = int(stats.binom.ppf(alpha, N, q))
    hi = int(stats.binom.ppf(1 - alpha, N, q)) + 1
    lo, hi = min(max(lo, 1), N), min(max(hi, 1), N)
    return int(s[lo - 1]), int(s[hi - 1])


def summarize(samples: np.ndarray, epsilon: float, max_rounds: int, source=None) -> TimeEstimate:
    return TimeEstimate(
        epsilon=epsilon,
        t_estimate=empirical_time(samples, epsilon),
        trials=len(samples),
        quantile_ci=quantile_ci(samples, 1 - epsilon),
        censored=bool((samples > max_rounds).any()),
        source=source,
        samples=samples,
    )


def estimate_time(
    config: GossipConfig,
    epsilon: float,
    trials: int,
    max_rounds: int | None = None,
    vertex_transitive: bool = False,
    workers: int | None = None,
) -> TimeEstimate:
    """Monte Carlo epsilon-dissemination time.

    Single-piece mode takes the worst source: every vertex is run with
    ``trials`` trials and the largest estimate is reported, unless
    ``vertex_transitive`` is set, in which case only ``config.source`` is run.
    Censored trials count as not finished; ``censored`` flags them.
    """
    if not 0 < epsilon < 1:
        raise InvalidParameter(f"epsilon must lie in (0, 1), got {epsilon}")
    if trials < 100:
        raise InvalidParameter(f"need at least 100 trials, got {trials}")
    n = config.graph.n
    max_rounds = default_max_rounds(n) if max_rounds is None else max_rounds
    if config.mode == "multi":
        seeds = trial_seeds(config.seed, trials, 0)
        samples = completion_rounds(config.matrix, "multi", seeds, max_rounds, workers=workers)
        return summarize(samples, epsilon, max_rounds)
    sources = [config.source] if vertex_transitive or config.informed is not None else range(n)
    best = None
    censored = False
    for v in sources:
        seeds = trial_seeds(config.seed, trials, v)
        samples = completion_rounds(config.matrix, "single", seeds, max_rounds, source=v,
                                    informed=config.informed, workers=workers)
        est = summarize(samples, epsilon, max_rounds, source=v)
        censored |= est.censored
        if best is None or est.t_estimate > best.t_estimate:
            best = est
    return TimeEstimate(best.epsilon, best.t_estimate, best.trials, best.quantile_ci,
                        censored, best.source, best.samples)


def bound_single(P: TransitionMatrix, epsilon: float, phi: float | None = None) -> float:
    """``(ln n + ln(1/epsilon)) / Phi(P)``: the single-piece bound's shape with constant 1.

    A yardstick for scaling, not a certified upper bound.
    """
    phi = conductance(P).value if phi is None else phi
    if phi <= 0:
        raise InvalidParameter("conductance is zero; the bound is infinite")
    return (math.log(P.n) + math.log(1.0 / epsilon)) / phi


def bound_multi(P: TransitionMatrix, epsilon: float, mean_phi: float | None = None) -> float:
    """``mean_conductance(P) * ln(1/epsilon) / n`` with constant 1."""
    mean_phi = mean_conductance(P) if mean_phi is None else mean_phi
    if not math.isfinite(mean_phi) or mean_phi <= 0:
        raise InvalidParameter("mean conductance must be finite and positive")
    return mean_phi * math.log(1.0 / epsilon) / P.n
