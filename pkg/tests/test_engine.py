"""Bounded engine: frozen small-case values, criteria, invariants."""
from __future__ import annotations

import math
import random

import numpy as np
import pytest

from katzbounds import (ConvergenceError, Criterion, Graph, KatzState,
                        ParameterError, StateError, check_converged,
                        default_alpha, dense_oracle, epsilon_separated, init,
                        iterate_once, ranking_result, run,
                        separated_fraction, tail_gamma, validate_alpha)

import builders


# ---- parameter plumbing ----

def test_default_alpha_from_max_degree():
    assert default_alpha(builders.star(5)) == 1.0 / 5.0
    assert default_alpha(builders.path(4)) == 1.0 / 3.0


def test_default_alpha_edgeless():
    g = Graph.from_edges(3, [])
    assert default_alpha(g) == 0.5


@pytest.mark.parametrize("alpha", [0.0, -0.1, 0.25, 0.3, float("nan"),
                                   float("inf")])
def test_validate_alpha_rejects(alpha):
    with pytest.raises(ParameterError):
        validate_alpha(alpha, 4)


def test_validate_alpha_accepts_open_interval():
    validate_alpha(0.2499999, 4)
    validate_alpha(1e-9, 4)
    validate_alpha(0.999, 0)
    with pytest.raises(ParameterError):
        validate_alpha(1.0, 0)


def test_tail_gamma_values():
    # gamma = d / (1 - alpha d)
    assert tail_gamma(0.25, 3) == 3 / (1 - 0.75)
    assert tail_gamma(0.5, 0) == 0.0


def test_criterion_validation():
    with pytest.raises(ParameterError):
        Criterion.ranking(0.0)
    with pytest.raises(ParameterError):
        Criterion.top_k(0, 1e-6)
    with pytest.raises(ParameterError):
        Criterion.pair(2, 2, 1e-6)
    with pytest.raises(ParameterError):
        Criterion("nonsense")


def test_init_rejects_bad_shapes():
    g = builders.path(4)
    with pytest.raises(ParameterError):
        init(g, Criterion.top_k(5, 1e-6))
    with pytest.raises(ParameterError):
        init(g, Criterion.pair(0, 7))
    with pytest.raises(ParameterError):
        init(g, Criterion.ranking(1e-6), threads=0)
    # undirected flag demands a symmetric arc set
    gd = Graph.from_edges(3, [(0, 1)])
    with pytest.raises(ParameterError):
        init(gd, Criterion.ranking(1e-6), undirected=True)


# ---- frozen values, derived by hand and checked against the dense oracle ----

def test_triangle_first_level_exact():
    # K_3 at alpha = 1/3: every node has two walks of length 1, so the
    # attenuated level-1 mass is 2/3 per node and katz_1 = 2/3.
    # gamma = 2 / (1 - 2/3) = 6; upper_1 = 2/3 + (1/3)(2/3)(6) = 2 exactly,
    # and the true value is delta/(1-delta) = 2, so the bound is sharp.
    # lower_1 = katz_1 + alpha * w_1 = 2/3 + 2/9 = 8/9.
    g = builders.complete(3)
    st = init(g, Criterion.score(1e-6), alpha=1 / 3, undirected=True)
    iterate_once(st, g)
    assert st.r == 1
    np.testing.assert_allclose(st.levels[1], 2 / 3, rtol=0, atol=0)
    np.testing.assert_allclose(st.katz, 2 / 3, rtol=0, atol=0)
    np.testing.assert_allclose(st.lower, 8 / 9, rtol=1e-15)
    # equality holds in real arithmetic; the gamma division costs one ulp
    np.testing.assert_allclose(st.upper, 2.0, rtol=0, atol=5e-16)


def test_k4_upper_is_exact_katz():
    # K_4 at alpha = 1/4: delta = 3/4, exact katz = 3 for every node.
    # gamma = 3 / (1 - 3/4) = 12, upper_1 = 3/4 + (1/4)(3/4)(12) = 3.
    # Score gap after one round: 3 - (3/4 + 3/16) = 2.0625.
    g = builders.complete(4)
    st = init(g, Criterion.score(1e-6), alpha=0.25, undirected=True)
    iterate_once(st, g)
    np.testing.assert_array_equal(st.upper, 3.0)
    assert st.gap() == 2.0625


def test_star_converged_values():
    # S_3 at alpha = 1/4, hub 0: solving (I - aA)z = 1 gives
    # z_hub = 28/13, z_leaf = 20/13, so katz = aAz is 15/13 at the hub
    # and 7/13 at each leaf.
    g = builders.star(4)
    st = init(g, Criterion.score(1e-12), alpha=0.25, undirected=True)
    run(st, g)
    np.testing.assert_allclose(st.katz, [15 / 13, 7 / 13, 7 / 13, 7 / 13],
                               rtol=1e-11)
    assert np.all(st.lower <= np.array([15 / 13, 7 / 13, 7 / 13, 7 / 13]) + 1e-15)
    assert np.all(st.upper >= np.array([15 / 13, 7 / 13, 7 / 13, 7 / 13]) - 1e-15)


def test_directed_path_terminates():
    # 0 -> 1 -> 2 at alpha = 1/2: katz = (1/2 + 1/4, 1/2, 0). Levels die
    # after two rounds, so bounds collapse onto the exact values.
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    st = init(g, Criterion.score(1e-9), alpha=0.5)
    run(st, g)
    np.testing.assert_allclose(st.katz, [0.75, 0.5, 0.0], rtol=0, atol=1e-15)
    np.testing.assert_allclose(st.lower, st.katz, rtol=0, atol=0)
    np.testing.assert_allclose(st.upper, st.katz, rtol=0, atol=1e-12)


def test_edgeless_graph_all_zero():
    g = Graph.from_edges(4, [])
    st = init(g, Criterion.ranking(1e-6))
    res = run(st, g)
    assert res.iterations_used == 1
    np.testing.assert_array_equal(st.katz, 0.0)
    np.testing.assert_array_equal(st.upper, 0.0)
    assert list(res.order) == [0, 1, 2, 3]


# ---- invariants ----

def test_bounds_bracket_oracle_on_random_graphs():
    for seed in range(8):
        g = builders.er_graph(30, 0.15, seed=seed)
        alpha = default_alpha(g)
        exact = dense_oracle(g, alpha=alpha).values
        st = init(g, Criterion.score(1e-9), alpha=alpha, undirected=True)
        for _ in range(12):
            iterate_once(st, g)
            slack = 1e-12 * (1.0 + np.abs(exact))
            assert np.all(st.lower <= exact + slack)
            assert np.all(st.upper >= exact - slack)


def test_bounds_monotone_per_iteration():
    g = builders.grid(6, 6)
    st = init(g, Criterion.score(1e-9), undirected=True)
    prev_lower = st.lower.copy()
    prev_upper = st.upper.copy()
    for _ in range(15):
        iterate_once(st, g)
        assert np.all(st.lower >= prev_lower - 1e-15)
        assert np.all(st.upper <= prev_upper + 1e-15)
        prev_lower = st.lower.copy()
        prev_upper = st.upper.copy()


def test_directed_lower_is_partial_sum():
    g = builders.er_graph(20, 0.1, seed=3, undirected=False)
    st = init(g, Criterion.score(1e-9))
    iterate_once(st, g)
    iterate_once(st, g)
    np.testing.assert_array_equal(st.lower, st.katz)


def test_undirected_lower_adds_tail_step():
    g = builders.cycle(6)
    st = init(g, Criterion.score(1e-9), undirected=True)
    iterate_once(st, g)
    np.testing.assert_allclose(st.lower,
                               st.katz + st.alpha * st.levels[1],
                               rtol=0, atol=0)


def test_state_rejects_stale_graph():
    g = builders.path(4)
    st = init(g, Criterion.ranking(1e-6))
    g.insert_arcs([(0, 2)])
    with pytest.raises(StateError):
        iterate_once(st, g)


def test_check_converged_needs_an_iteration():
    g = builders.path(4)
    st = init(g, Criterion.ranking(1e-6))
    with pytest.raises(StateError):
        check_converged(st)


# ---- criteria behavior ----

def test_score_criterion_gap_below_epsilon():
    g = builders.grid(5, 5)
    st = init(g, Criterion.score(1e-7), undirected=True)
    run(st, g)
    assert st.gap() < 1e-7


def test_pair_criterion_stops_early():
    # hub versus leaf separates after very few rounds
    g = builders.star(30)
    st_pair = init(g, Criterion.pair(0, 7, 1e-6), undirected=True)
    run(st_pair, g)
    st_full = init(g, Criterion.ranking(1e-6), undirected=True)
    run(st_full, g)
    assert st_pair.r <= st_full.r
    assert epsilon_separated(st_pair, 0, 7)


def test_pair_direction_picks_larger_lower():
    g = builders.star(6)
    st = init(g, Criterion.pair(3, 0, 1e-6), undirected=True)
    run(st, g)
    # hub 0 wins even though it was passed second
    assert st.lower[0] > st.upper[3] - 1e-6


def test_topk_deactivation_shrinks_monotonically():
    g = builders.er_graph(60, 0.1, seed=21)
    st = init(g, Criterion.top_k(5, 1e-8), undirected=True)
    prev = st.active.size
    for _ in range(st.max_iterations):
        iterate_once(st, g)
        done = check_converged(st)
        assert st.active.size <= prev
        prev = st.active.size
        if done:
            break
    assert check_converged(st)
    assert st.active.size <= 60


def test_topk_agrees_with_full_ranking_prefix():
    g = builders.er_graph(50, 0.12, seed=4)
    st_k = init(g, Criterion.top_k(8, 1e-9), undirected=True)
    res_k = run(st_k, g)
    st_r = init(g, Criterion.ranking(1e-9), undirected=True)
    res_r = run(st_r, g)
    exact = dense_oracle(g, alpha=st_r.alpha).values
    order = np.lexsort((np.arange(50), -exact))
    # prefix agreement holds wherever the oracle gap exceeds epsilon
    for i, (a, b) in enumerate(zip(res_k.top(8), order[:8])):
        if a != b:
            assert abs(exact[a] - exact[b]) < 1e-9
    for a, b in zip(res_r.order, order):
        if a != b:
            assert abs(exact[a] - exact[b]) < 1e-9


def test_ranking_result_is_frozen_and_sorted():
    g = builders.star(7)
    res = run(init(g, Criterion.ranking(1e-6), undirected=True), g)
    assert res.order[0] == 0
    lowers = res.lower[res.order]
    assert np.all(np.diff(lowers) <= 0)
    with pytest.raises(ValueError):
        res.lower[0] = 99.0


def test_ranking_ties_break_by_node_id():
    g = builders.cycle(5)
    res = run(init(g, Criterion.ranking(1e-6), undirected=True), g)
    assert list(res.order) == [0, 1, 2, 3, 4]


def test_convergence_error_at_cap():
    g = builders.complete(6)
    st = init(g, Criterion.score(1e-10), undirected=True, max_iterations=2)
    with pytest.raises(ConvergenceError) as exc:
        run(st, g)
    assert exc.value.iterations == 2
    assert exc.value.gap > 1e-10


def test_default_iteration_cap_scales_with_epsilon():
    g = builders.complete(4)
    st_loose = init(g, Criterion.score(1e-2), undirected=True)
    st_tight = init(g, Criterion.score(1e-12), undirected=True)
    assert st_tight.max_iterations > st_loose.max_iterations
    rho = st_loose.alpha * 3
    expected = 10 * math.ceil(math.log(1e2) / math.log(1 / rho))
    assert st_loose.max_iterations == max(1, expected)


def test_epsilon_separated_ties_pass_once_tight():
    # separation asks lower(w) > upper(v) - eps, so equal-value nodes
    # separate in both directions once the bounds are within eps
    g = builders.star(4)
    st = init(g, Criterion.ranking(1e-6), undirected=True)
    run(st, g)
    assert epsilon_separated(st, 0, 1)
    assert epsilon_separated(st, 1, 2)
    assert epsilon_separated(st, 2, 1)
    assert not epsilon_separated(st, 1, 0)  # leaf never beats the hub


def test_epsilon_separated_is_strict_at_the_boundary():
    # directed two-arc path at alpha = 1/2 terminates, so every bound is
    # an exact binary fraction: katz = (3/4, 1/2, 0) with lower = upper.
    # At eps = 1/4 the comparison 1/2 > 3/4 - 1/4 must fail: strictly.
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    st = init(g, Criterion.score(0.25), alpha=0.5)
    run(st, g)
    np.testing.assert_array_equal(st.lower, [0.75, 0.5, 0.0])
    np.testing.assert_array_equal(st.upper, [0.75, 0.5, 0.0])
    assert not epsilon_separated(st, 1, 0)
    assert epsilon_separated(st, 1, 2)


# ---- separated fraction ----

def test_separated_fraction_star():
    # hub against each leaf separates, leaf pairs never do:
    # 3 of 6 pairs on four nodes.
    g = builders.star(4)
    st = init(g, Criterion.ranking(1e-4), undirected=True)
    run(st, g)
    assert separated_fraction(st) == 0.5


def test_separated_fraction_matches_quadratic_count():
    rng = random.Random(2)
    for seed in range(6):
        g = builders.er_graph(25, 0.15, seed=seed)
        st = init(g, Criterion.score(1e-5), undirected=True)
        run(st, g)
        n = g.node_count
        brute = 0
        for v in range(n):
            for w in range(n):
                if v != w and st.lower[w] > st.upper[v]:
                    brute += 1
        assert separated_fraction(st) == brute / (n * (n - 1) // 2)


def test_separated_fraction_tiny_graphs():
    g = Graph.from_edges(1, [])
    st = init(g, Criterion.ranking(1e-6))
    run(st, g)
    assert separated_fraction(st) == 1.0


# ---- threads ----

def test_threads_bitwise_identical():
    g = builders.er_graph(120, 0.06, seed=17)
    st1 = init(g, Criterion.ranking(1e-8), undirected=True, threads=1)
    st8 = init(g, Criterion.ranking(1e-8), undirected=True, threads=8)
    r1 = run(st1, g)
    r8 = run(st8, g)
    assert r1.iterations_used == r8.iterations_used
    np.testing.assert_array_equal(r1.lower, r8.lower)
    np.testing.assert_array_equal(r1.upper, r8.upper)
    np.testing.assert_array_equal(r1.order, r8.order)
