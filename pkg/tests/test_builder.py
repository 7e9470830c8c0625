import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gen import LIPSCHITZ_FAMILIES, fuzz_instance, smooth_table, urysohn_oracle
from paramcont.builder import (
    BuildConfig,
    BuildTrace,
    EnvelopeError,
    PreconditionError,
    build_representation,
    build_urysohn_pair,
    compute_envelopes,
    insert_between,
    urysohn_series,
)
from paramcont.model import EnvelopePair, Node, PreferenceField, SampledSpace
from paramcont.spaces import GridSpec, SplitSpec, grid_box, triple_split
from paramcont.verify import check_representation


def isolated(n):
    return SampledSpace(tuple(Node(i, (float(i),), (frozenset({i}),)) for i in range(n)), perfectly_normal=True)


def sign(x):
    return np.sign(np.where(x == 0, 0.0, x))


class TestUrysohn:
    def test_all_indifferent_gives_zero(self):
        s = grid_box(GridSpec(((0, 1),), 5))
        U = build_urysohn_pair(PreferenceField.from_pairs(5, 2, {}), s)
        assert np.all(U.values == 0.0)
        assert U.provenance == "urysohn"

    def test_single_strict_node_matches_series_oracle(self):
        s = grid_box(GridSpec(((0, 1),), 5))
        f = PreferenceField.from_pairs(5, 2, {4: [(0, 1)]})
        U = build_urysohn_pair(f, s)
        expected = urysohn_oracle(s.metric, np.arange(5) < 4, 32)
        assert U.values[1, 4] > 0
        assert np.all(U.values[1, :4] == 0.0)
        assert U.values[1, 4] == pytest.approx(expected[4], rel=1e-15)

    def test_series_matches_oracle_on_random_zero_sets(self):
        rng = np.random.default_rng(11)
        s = grid_box(GridSpec(((0, 1), (0, 2)), 6))
        for _ in range(5):
            zero = rng.random(s.size) < 0.4
            np.testing.assert_allclose(urysohn_series(s.metric, zero, 16), urysohn_oracle(s.metric, zero, 16), rtol=1e-12)

    def test_empty_zero_set(self):
        s = grid_box(GridSpec(((0, 1),), 4))
        assert urysohn_series(s.metric, np.zeros(4, bool), 8) == pytest.approx(np.full(4, 1 - 2**-8))

    def test_needs_two_alternatives_and_metric(self):
        s = grid_box(GridSpec(((0, 1),), 3))
        with pytest.raises(ValueError, match="two alternatives"):
            build_urysohn_pair(PreferenceField.from_pairs(3, 3, {}), s)
        t = triple_split(SplitSpec(2, "three"))
        with pytest.raises(ValueError, match="metric"):
            build_urysohn_pair(PreferenceField.from_pairs(t.size, 2, {}), t)

    def test_asymmetry_is_required(self):
        s = grid_box(GridSpec(((0, 1),), 3))
        f = PreferenceField.from_pairs(3, 2, {0: [(0, 1), (1, 0)]})
        with pytest.raises(PreconditionError, match="Asy"):
            build_urysohn_pair(f, s)


class TestEnvelopes:
    prior = np.array([[0.0], [1.0], [0.0]])

    def test_indifferent_to_prior_collapses(self):
        f = PreferenceField.from_pairs(1, 3, {0: [(0, 1), (0, 2)]})
        env = compute_envelopes(2, [0, 1], self.prior, f)
        assert env.g[0] == env.h[0] == 1.0
        assert not env.strict_mask[0]

    def test_between_two_priors(self):
        f = PreferenceField.from_pairs(1, 3, {0: [(0, 2), (2, 1), (0, 1)]})
        env = compute_envelopes(2, [0, 1], self.prior, f)
        assert (env.g[0], env.h[0]) == (0.0, 1.0)
        assert env.strict_mask[0]

    def test_top_ranked(self):
        f = PreferenceField.from_pairs(1, 3, {0: [(0, 1), (1, 2), (0, 2)]})
        env = compute_envelopes(2, [0, 1], self.prior, f)
        assert env.g[0] == 1.0 and env.h[0] == np.inf

    def test_no_prior(self):
        f = PreferenceField.from_pairs(2, 1, {})
        env = compute_envelopes(0, [], np.zeros((1, 2)), f)
        assert np.all(env.g == -np.inf) and np.all(env.h == np.inf)

    def test_corrupt_prior_detected(self):
        # priors stored in the wrong order relative to the relation
        f = PreferenceField.from_pairs(1, 3, {0: [(0, 2), (2, 1), (0, 1)]})
        with pytest.raises(EnvelopeError):
            compute_envelopes(2, [0, 1], np.array([[1.0], [0.0], [0.0]]), f)


class TestInsertBetween:
    path = grid_box(GridSpec(((0, 1),), 3, (1.0,)))

    def test_pinned_node(self):
        env = EnvelopePair(np.array([1.0, 1.0, 1.0]), np.array([1.0, 1.0, 1.0]))
        assert np.all(insert_between(env, self.path) == 1.0)

    def test_three_node_path_boxes_every_round(self):
        env = EnvelopePair(np.array([-np.inf, 0.0, -np.inf]), np.array([np.inf, 0.0, 2.0]))
        start = insert_between(env, self.path, BuildConfig(smoothing_rounds=0))
        assert start.tolist() == [0.0, 0.0, -0.5]
        # M = 3: boxes are [-3+1.5, 3-1.5], {0}, [-3+1.25, 2-1.25]
        lo = np.array([-1.5, 0.0, -1.75])
        hi = np.array([1.5, 0.0, 0.75])
        for k in range(12):
            f = insert_between(env, self.path, BuildConfig(smoothing_rounds=k))
            assert np.all(lo <= f) and np.all(f <= hi)
            assert f[1] == 0.0

    def test_strict_node_box(self):
        env = EnvelopePair(np.array([0.0, 0.0, 0.0]), np.array([1.0, 1.0, 1.0]))
        for k in range(5):
            f = insert_between(env, self.path, BuildConfig(smoothing_rounds=k))
            assert np.all((0.25 <= f) & (f <= 0.75))

    def test_rejects_crossed_envelopes(self):
        with pytest.raises(EnvelopeError):
            insert_between(EnvelopePair(np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 0.0])), self.path)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(4, 40))
    def test_smoothing_never_raises_variation_when_boxes_are_slack(self, seed, m):
        # wide boxes around a slowly varying profile: projection never binds
        rng = np.random.default_rng(seed)
        space = grid_box(GridSpec(((0, 1),), m, (1.0,)))
        phi = np.cumsum(rng.uniform(-0.2, 0.2, m))
        env = EnvelopePair(phi - 100.0, phi + 100.0)
        prev = None
        for k in range(8):
            f = insert_between(env, space, BuildConfig(smoothing_rounds=k))
            tv = np.abs(np.diff(f)).sum()
            if prev is not None:
                assert tv <= prev + 1e-12
            prev = tv


class TestBuildRepresentation:
    def test_single_alternative_is_zero(self):
        s = grid_box(GridSpec(((0, 1),), 4))
        U = build_representation(PreferenceField.from_pairs(4, 1, {}), s)
        assert np.all(U.values == 0.0) and U.provenance == "inductive"

    def test_sign_pattern_matches_urysohn(self):
        s = grid_box(GridSpec(((0, 1), (0, 1)), 7))
        c = s.coords_array()
        table = np.vstack([c[:, 0], np.round(2 * c[:, 1]) / 2])
        f = PreferenceField.from_utility(table)
        a = build_urysohn_pair(f, s)
        b = build_representation(f, s)
        assert np.array_equal(sign(a.values[1] - a.values[0]), sign(b.values[1] - b.values[0]))

    def test_two_node_trace(self):
        f = PreferenceField.from_pairs(2, 3, {0: [(0, 1), (1, 2), (0, 2)]})
        U = build_representation(f, isolated(2))
        assert U.values[0, 0] < U.values[1, 0] < U.values[2, 0]
        assert np.all(U.values[:, 1] == 0.0)

    def test_requires_nt(self):
        f = PreferenceField.from_pairs(1, 3, {0: [(0, 1)]})
        with pytest.raises(PreconditionError, match="NT"):
            build_representation(f, isolated(1))

    def test_requires_perfect_normality_flag(self):
        t = triple_split(SplitSpec(3, "three"))
        with pytest.raises(PreconditionError, match="perfectly normal"):
            build_representation(PreferenceField.from_pairs(t.size, 2, {}), t)
        build_representation(PreferenceField.from_pairs(t.size, 2, {}), t, require_perfectly_normal=False)

    def test_alternative_cap(self):
        f = PreferenceField.from_pairs(1, 5, {})
        with pytest.raises(ValueError, match="cap of 4"):
            build_representation(f, isolated(1), BuildConfig(max_alternatives=4))

    def test_bad_order(self):
        with pytest.raises(ValueError, match="permutation"):
            build_representation(PreferenceField.from_pairs(1, 2, {}), isolated(1), BuildConfig(enumeration_order=(0, 0)))

    def test_config_validation(self):
        for kwargs in ({"smoothing_rounds": -1}, {"strict_gap_fraction": 0.5}, {"urysohn_terms": 0}, {"max_alternatives": 0}):
            with pytest.raises(ValueError):
                BuildConfig(**kwargs)

    def test_globally_indifferent_rows_duplicate(self):
        s = grid_box(GridSpec(((0, 1),), 9))
        c = s.coords_array()[:, 0]
        f = PreferenceField.from_utility(np.vstack([c, np.sin(4 * c), c]))
        U = build_representation(f, s)
        assert np.array_equal(U.values[0], U.values[2])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_order_exact_sandwich_and_collapse(seed):
    inst = fuzz_instance(np.random.default_rng(seed), max_nodes=120)
    trace = BuildTrace()
    U = build_representation(inst.field, inst.space, trace=trace)
    assert check_representation(U, inst.field, tol=0.0).passed
    indiff = inst.field.indifferent()
    for j, prior, env, row in trace.steps:
        assert np.all(env.g <= row) and np.all(row <= env.h)
        s = env.strict_mask
        assert np.all(env.g[s] < row[s]) and np.all(row[s] < env.h[s])
        for k in prior:
            tied = indiff[:, j, k]
            assert np.array_equal(U.values[j, tied], U.values[k, tied])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_enumeration_order_never_changes_represented_order(seed):
    rng = np.random.default_rng(seed)
    inst = fuzz_instance(rng, max_alts=6, max_nodes=80)
    order = tuple(rng.permutation(inst.field.n_alts).tolist())
    U = build_representation(inst.field, inst.space, BuildConfig(enumeration_order=order))
    assert check_representation(U, inst.field, tol=0.0).passed


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 30))
def test_urysohn_zero_set_is_exact(seed, m):
    rng = np.random.default_rng(seed)
    s = grid_box(GridSpec(((0, 1),), m))
    table = smooth_table(rng, s.coords_array(), 2, quantize=True)
    f = PreferenceField.from_utility(table)
    U = build_urysohn_pair(f, s)
    diff = U.values[1] - U.values[0]
    assert np.array_equal(diff == 0.0, f.indifferent()[:, 0, 1])
    assert np.array_equal(diff > 0, f.strict[:, 0, 1])


@pytest.mark.parametrize("family", sorted(LIPSCHITZ_FAMILIES))
def test_adjacent_jump_at_most_doubles_under_refinement(family):
    jumps = []
    for m in (8, 16, 32):
        s = grid_box(GridSpec(((0, 1), (0, 1)), m))
        U = build_representation(PreferenceField.from_utility(LIPSCHITZ_FAMILIES[family](s.coords_array())), s)
        idx = s.padded[0]
        jumps.append(max(float(np.abs(row[idx] - row[:, None]).max()) for row in U.values))
    assert all(b <= 2 * a for a, b in zip(jumps, jumps[1:]))
