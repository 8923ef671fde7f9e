import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgossip.errors import InvalidParameter
from qgossip.gossip import (
    ContactSampler,
    GossipConfig,
    TrialStream,
    bound_multi,
    bound_single,
    completion_rounds,
    default_max_rounds,
    derive_trial_seed,
    empirical_time,
    estimate_time,
    exchange,
    mix64,
    round_uniforms,
    run_to_completion,
    step,
    trial_seeds,
)
from qgossip.graph import gen_complete, gen_random_connected, gen_ring
from qgossip.transition import complete_matrix, lazy_uniform_matrix, ring_matrix


def cfg(g, P, **kw):
    return GossipConfig(g, P, **kw)


def assert_monotone(trace):
    if trace.mode == "single":
        for a, b in zip(trace.rounds, trace.rounds[1:]):
            assert a <= b
    else:
        for a, b in zip(trace.rounds, trace.rounds[1:]):
            assert all(x <= y for x, y in zip(a, b))


def test_mix64_reference_values():
    # splitmix64 outputs for state 0: first draws are well known
    assert int(mix64(np.uint64(0))) == 0xE220A8397B1DCDAF
    assert int(mix64(np.uint64(0x9E3779B97F4A7C15))) == 0x6E789E6AA1B965F4


def test_trial_seeds_match_scalar_rule():
    arr = trial_seeds(123, 50, stream=3)
    assert [int(x) for x in arr] == [derive_trial_seed(123, k, 3) for k in range(50)]
    assert len(set(arr.tolist())) == 50


def test_uniforms_in_unit_interval_and_roughly_uniform():
    u = round_uniforms(trial_seeds(1, 2000), 5, 16)
    assert u.min() >= 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.005
    hist, _ = np.histogram(u, bins=10, range=(0, 1))
    assert (np.abs(hist / u.size - 0.1) < 0.005).all()


def test_trial_stream_matches_batch_uniforms():
    seeds = trial_seeds(9, 4)
    s = TrialStream(int(seeds[2]))
    for t in range(1, 6):
        assert (s.random(7) == round_uniforms(seeds, t, 7)[2]).all()


@pytest.mark.parametrize("P", [ring_matrix(6), complete_matrix(5),
                               lazy_uniform_matrix(gen_random_connected(7, 0.3, 2))])
def test_sampler_frequencies_match_matrix(P):
    n = P.n
    u = round_uniforms(trial_seeds(4, 40000), 1, n)
    c = ContactSampler(P).sample(u)
    for i in range(n):
        freq = np.bincount(c[:, i], minlength=n) / len(c)
        expected = P.entries[i].copy()
        expected[i] = 1 - (expected.sum() - expected[i])
        assert np.abs(freq - expected).max() < 0.01


def test_sampler_only_contacts_neighbours():
    g = gen_random_connected(10, 0.2, 3)
    P = lazy_uniform_matrix(g)
    c = ContactSampler(P).sample(round_uniforms(trial_seeds(1, 500), 1, 10))
    for i in range(10):
        for j in np.unique(c[:, i]):
            assert j == i or g.has_edge(i, int(j))


def test_no_contacts_leaves_state_unchanged():
    s = np.array([[True, False, False, True]])
    assert (exchange(s, np.arange(4)[None]) == s).all()
    m = np.eye(4, dtype=bool)[None]
    assert (exchange(m, np.arange(4)[None]) == m).all()


def test_n2_infection_probability_by_enumeration():
    # vertex 0 informed; each vertex contacts the other with prob 1/2, nobody otherwise
    P = complete_matrix(2)
    state = np.array([[True, False]])
    p_informed = 0.0
    for c0, c1 in product([0, 1], [1, 0]):
        prob = P[0, c0] * P[1, c1]
        after = exchange(state, np.array([[c0, c1]]))
        p_informed += prob * after[0, 1]
    assert p_informed == 0.75
    # sampled
    seeds = trial_seeds(2, 20000)
    done = completion_rounds(P, "single", seeds, 1)
    assert abs((done == 1).mean() - 0.75) < 0.01


def test_multi_piece_union_on_contact():
    state = np.zeros((1, 3, 3), dtype=bool)
    state[0, 0, [0]] = True
    state[0, 1, [1, 2]] = True
    state[0, 2, [2]] = True
    contacts = np.array([[1, 1, 2]])
    new = exchange(state, contacts)
    assert (new[0, 0] == new[0, 1]).all()
    assert set(np.flatnonzero(new[0, 0])) == {0, 1, 2}
    assert set(np.flatnonzero(new[0, 2])) == {2}


def test_pull_from_shared_vertex_all_apply():
    # several uninformed vertices contacting one informed vertex all learn in that round
    state = np.array([[True, False, False, False]])
    new = exchange(state, np.array([[0, 0, 0, 0]]))
    assert new.all()


def test_run_completes_at_round_zero_when_everyone_informed():
    g = gen_complete(2)
    tr = run_to_completion(cfg(g, complete_matrix(2), informed=frozenset({0, 1})), 10)
    assert tr.completion_round == 0
    assert len(tr.rounds) == 1


def test_ring8_needs_at_least_four_rounds():
    g, P = gen_ring(8), ring_matrix(8)
    rounds = completion_rounds(P, "single", trial_seeds(0, 5000), default_max_rounds(8))
    assert rounds.min() >= 4
    assert (rounds == 4).any()  # best case is attainable
    for k in range(20):
        tr = run_to_completion(cfg(g, P, seed=k))
        sizes = [len(s) for s in tr.rounds]
        assert all(b - a <= 2 for a, b in zip(sizes, sizes[1:]))


def test_run_to_completion_matches_batch_engine():
    for g, P in [(gen_ring(9), ring_matrix(9)), (gen_complete(7), complete_matrix(7))]:
        for mode in ("single", "multi"):
            for source in (0, 3):
                c = cfg(g, P, mode=mode, source=source, seed=77)
                stream = source if mode == "single" else 0
                seeds = trial_seeds(77, 12, stream)
                batch = completion_rounds(P, mode, seeds, 500, source=source)
                singles = [run_to_completion(c, 500, trial=k).completion_round for k in range(12)]
                assert batch.tolist() == singles


def test_determinism_same_seed_same_trace():
    c = cfg(gen_ring(10), ring_matrix(10), mode="multi", seed=5)
    a, b = run_to_completion(c), run_to_completion(c)
    assert a.rounds == b.rounds and a.completion_round == b.completion_round
    d = run_to_completion(cfg(gen_ring(10), ring_matrix(10), mode="multi", seed=6))
    assert d.rounds != a.rounds


def test_parallel_trials_identical_to_sequential():
    P = ring_matrix(12)
    seeds = trial_seeds(3, 301)
    seq = completion_rounds(P, "single", seeds, 1000, workers=1)
    for w in (2, 3, 8):
        assert (completion_rounds(P, "single", seeds, 1000, workers=w) == seq).all()
    # a trial's outcome does not depend on which batch it runs in
    assert (completion_rounds(P, "single", seeds[100:150], 1000) == seq[100:150]).all()


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 12), p=st.floats(0, 1), seed=st.integers(0, 2**32),
       mode=st.sampled_from(["single", "multi"]))
def test_traces_are_monotone_and_end_complete(n, p, seed, mode):
    g = gen_random_connected(n, p, seed)
    tr = run_to_completion(cfg(g, lazy_uniform_matrix(g), mode=mode, source=seed % n, seed=seed))
    assert_monotone(tr)
    assert tr.completion_round is not None
    last = tr.rounds[tr.completion_round]
    if mode == "single":
        assert last == frozenset(range(n))
        assert all(len(s) < n for s in tr.rounds[:-1])
    else:
        assert all(s == frozenset(range(n)) for s in last)
        assert not all(all(s == frozenset(range(n)) for s in r) for r in tr.rounds[:-1])


def test_step_accepts_numpy_generator():
    P = ring_matrix(6)
    s = np.zeros(6, dtype=bool)
    s[0] = True
    rng = np.random.default_rng(0)
    for _ in range(200):
        s2 = step(s, P, rng)
        assert (s2 >= s).all()
        s = s2
    assert s.all()


def test_max_rounds_exhaustion_is_not_an_error():
    tr = run_to_completion(cfg(gen_ring(30), ring_matrix(30), seed=1), max_rounds=2)
    assert tr.completion_round is None and len(tr.rounds) == 3
    est = estimate_time(cfg(gen_ring(30), ring_matrix(30)), 0.1, 100, max_rounds=5,
                        vertex_transitive=True)
    assert est.censored and est.t_estimate == 6


def test_empirical_time_definition():
    samples = np.array([1] * 85 + [2] * 10 + [3] * 5)
    assert empirical_time(samples, 0.1) == 2
    assert empirical_time(samples, 0.05) == 2
    assert empirical_time(samples, 0.04) == 3
    assert empirical_time(samples, 0.2) == 1
    rng = np.random.default_rng(0)
    for _ in range(50):
        s = rng.integers(0, 20, size=137)
        eps = rng.uniform(0.01, 0.9)
        t = empirical_time(s, eps)
        assert (s > t).mean() <= eps
        assert (s > t - 1).mean() > eps


def test_estimate_n2_analytic_tail():
    # P(not done after t) = (1/4)^t, so the 0.1-time is 2
    est = estimate_time(cfg(gen_complete(2), complete_matrix(2), seed=1), 0.1, 10_000)
    assert est.t_estimate == 2
    assert est.quantile_ci[0] <= 2 <= est.quantile_ci[1]
    assert not est.censored
    samples = est.samples
    for t in (1, 2, 3):
        assert abs((samples > t).mean() - 0.25 ** t) < 4 * math.sqrt(0.25 ** t / 10_000) + 1e-3


def test_sup_over_sources_takes_the_worst():
    # a star: the worst source is a leaf
    from qgossip.graph import Graph
    g = Graph(6, [(0, i) for i in range(1, 6)])
    c = cfg(g, lazy_uniform_matrix(g), seed=2)
    full = estimate_time(c, 0.1, 400)
    centre = estimate_time(c, 0.1, 400, vertex_transitive=True)
    assert full.t_estimate >= centre.t_estimate
    assert full.source != 0


def test_estimate_argument_checks():
    c = cfg(gen_complete(3), complete_matrix(3))
    with pytest.raises(InvalidParameter):
        estimate_time(c, 0.0, 100)
    with pytest.raises(InvalidParameter):
        estimate_time(c, 0.1, 99)
    with pytest.raises(InvalidParameter):
        GossipConfig(gen_complete(3), complete_matrix(4))
    with pytest.raises(InvalidParameter):
        GossipConfig(gen_complete(3), complete_matrix(3), source=3)


def test_epsilon_monotonicity_of_estimate():
    c = cfg(gen_ring(10), ring_matrix(10), seed=4)
    ts = [estimate_time(c, e, 2000, vertex_transitive=True).t_estimate for e in (0.5, 0.2, 0.1, 0.05, 0.01)]
    assert ts == sorted(ts)


def test_bound_single_examples():
    assert bound_single(complete_matrix(8), 0.1) == pytest.approx((math.log(8) + math.log(10)) / 0.5)
    assert bound_single(complete_matrix(8), 0.1) == pytest.approx(8.76, abs=0.01)
    assert bound_single(ring_matrix(8), 0.1) == pytest.approx(35.06, abs=0.01)
    for n in (4, 8, 16):
        ratio = bound_single(ring_matrix(n), 0.1) / bound_single(complete_matrix(n), 0.1)
        assert ratio == pytest.approx((n - n // 2) / n * n)


def test_bound_multi_examples():
    assert bound_multi(ring_matrix(4), 0.1) == pytest.approx(16 * math.log(10) / 4)
    assert bound_multi(ring_matrix(4), 0.1) == pytest.approx(9.21, abs=0.01)
    assert bound_multi(ring_matrix(6), 1 - 1e-12) == pytest.approx(0, abs=1e-9)
    from qgossip.conductance import circulant_mean_conductance
    vals = [bound_multi(ring_matrix(n), 0.1, circulant_mean_conductance(ring_matrix(n)))
            for n in (16, 32, 64, 128)]
    ratios = [b / a for a, b in zip(vals, vals[1:])]
    assert all(3.8 < r < 4.2 for r in ratios)  # quadratic growth


def test_bounds_reject_zero_conductance():
    with pytest.raises(InvalidParameter):
        bound_single(ring_matrix(4), 0.1, phi=0.0)
    with pytest.raises(InvalidParameter):
        bound_multi(ring_matrix(4), 0.1, mean_phi=float("inf"))


def test_trace_json_shape():
    tr = run_to_completion(cfg(gen_complete(4), complete_matrix(4), mode="multi", seed=1))
    obj = tr.to_json()
    assert obj["mode"] == "multi"
    assert obj["rounds"][0] == [[0], [1], [2], [3]]
    assert obj["completion_round"] == len(obj["rounds"]) - 1
