import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_model
from kgsq.query import (
    QuerySpec,
    analogy_query,
    browse_back,
    browse_start,
    browse_step,
    direction,
    mean_vector,
    rank_candidates,
    results_payload,
    sim,
    similar_entities,
    similar_with_bias,
)

from oracles import ranked_query_oracle


def assert_ranked_equal(ranked, expected):
    assert ranked.ids() == [e for e, _ in expected]
    for (_, got), (_, want) in zip(ranked.entries, expected):
        assert got == pytest.approx(want, rel=1e-10, abs=1e-10)


def assert_ranked_invariants(ranked, k, excluded=()):
    scores = [s for _, s in ranked.entries]
    assert scores == sorted(scores, reverse=True)
    assert len(ranked) <= k
    assert not set(ranked.ids()) & set(excluded)
    for (e1, s1), (e2, s2) in zip(ranked.entries, ranked.entries[1:]):
        if s1 == s2:
            assert e1 < e2


class TestVectorOps:
    def test_sim_hand_value(self):
        assert sim(np.array([1.0, 2.0]), np.array([3.0, 4.0])) == 11.0

    def test_sim_symmetry(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a, b = rng.normal(size=(2, 7))
            assert sim(a, b) == sim(b, a)

    def test_sim_zero_annihilates(self):
        assert sim(np.arange(4.0), np.zeros(4)) == 0.0

    def test_sim_length_mismatch(self):
        with pytest.raises(ValueError):
            sim(np.ones(3), np.ones(4))

    def test_direction_hand_value(self):
        assert direction(np.array([3.0, 4.0]), np.array([1.0, 1.0])).tolist() == [2.0, 3.0]

    def test_direction_of_self_is_zero(self):
        a = np.array([1.5, -2.0, 0.25])
        assert direction(a, a).tolist() == [0.0, 0.0, 0.0]

    def test_direction_antisymmetry(self):
        rng = np.random.default_rng(1)
        a, b = rng.normal(size=(2, 5))
        assert np.array_equal(direction(a, b), -direction(b, a))

    def test_direction_length_mismatch(self):
        with pytest.raises(ValueError):
            direction(np.ones(2), np.ones(3))


class TestMeanVector:
    def test_hand_value(self):
        m = make_model(2, 1, 2)
        m.head_vectors[0] = [1.0, 1.0]
        m.head_vectors[1] = [3.0, 5.0]
        assert mean_vector([0, 1], m).tolist() == [2.0, 3.0]

    def test_singleton_is_the_row(self):
        m = make_model(3, 1, 4, seed=2)
        assert np.array_equal(mean_vector([1], m), m.head_vectors[1])

    def test_empty_is_zero_vector(self):
        m = make_model(3, 1, 4)
        assert mean_vector([], m).tolist() == [0.0, 0.0, 0.0, 0.0]

    def test_invalid_id(self):
        m = make_model(3, 1, 4)
        with pytest.raises(ValueError):
            mean_vector([5], m)


def spec_fixture_model():
    m = make_model(3, 1, 2)
    m.head_vectors[0] = [1.0, 0.0]
    m.head_vectors[1] = [0.9, 0.1]
    m.head_vectors[2] = [-1.0, 0.0]
    return m


class TestSimilarEntities:
    def test_two_candidate_hand_case(self):
        ranked = similar_entities(QuerySpec(anchor=0, k=1), spec_fixture_model())
        assert ranked.entries == [(1, pytest.approx(0.9))]

    def test_large_k_returns_all_non_excluded(self):
        m = make_model(6, 1, 4, seed=3)
        ranked = similar_entities(QuerySpec(anchor=2, k=50), m)
        assert sorted(ranked.ids()) == [0, 1, 3, 4, 5]
        assert_ranked_invariants(ranked, 50, excluded=[2])

    def test_exclusion_can_be_disabled(self):
        m = make_model(4, 1, 3, seed=4)
        ranked = similar_entities(QuerySpec(anchor=1, k=4, exclude=False), m)
        assert 1 in ranked.ids()

    def test_type_filter_with_no_matches_is_empty(self):
        m = make_model(4, 1, 3, seed=5, types={0: "paper"})
        ranked = similar_entities(QuerySpec(anchor=0, k=3, type_filter="venue"), m)
        assert ranked.entries == []

    def test_untyped_entities_match_only_no_filter(self):
        m = make_model(4, 1, 3, seed=5, types={1: "paper", 2: "paper"})
        with_filter = similar_entities(QuerySpec(anchor=0, k=4, type_filter="paper"), m)
        assert sorted(with_filter.ids()) == [1, 2]
        without = similar_entities(QuerySpec(anchor=0, k=4), m)
        assert sorted(without.ids()) == [1, 2, 3]

    def test_bias_entities_rejected(self):
        m = make_model(3, 1, 2)
        with pytest.raises(ValueError):
            similar_entities(QuerySpec(anchor=0, positives=(1,)), m)

    def test_matches_oracle_on_random_fixtures(self):
        for seed in range(100):
            rng = np.random.default_rng(seed)
            n, d = int(rng.integers(3, 50)), int(rng.integers(2, 9))
            m = make_model(n, 1, d, seed=seed)
            spec = QuerySpec(anchor=int(rng.integers(n)), k=int(rng.integers(1, n + 2)))
            ranked = similar_entities(spec, m)
            expected = ranked_query_oracle(
                m.head_vectors.tolist(), {}, m.head_vectors[spec.anchor].tolist(),
                spec.k, {spec.anchor},
            )
            assert_ranked_equal(ranked, expected)
            assert_ranked_invariants(ranked, spec.k, excluded=[spec.anchor])


class TestSimilarWithBias:
    def test_empty_bias_identical_to_similar(self):
        m = make_model(8, 1, 5, seed=6)
        spec = QuerySpec(anchor=3, k=5)
        assert similar_with_bias(spec, m).entries == similar_entities(spec, m).entries

    def test_anchor_as_bias_preserves_order(self):
        # A = {anchor} scores by sim(e_i, 2e): same order, doubled scores
        m = make_model(10, 1, 4, seed=7)
        plain = similar_entities(QuerySpec(anchor=2, k=9), m)
        biased = similar_with_bias(QuerySpec(anchor=2, positives=(2,), k=9), m)
        assert biased.ids() == plain.ids()
        for (_, s2), (_, s1) in zip(biased.entries, plain.entries):
            assert s2 == pytest.approx(2.0 * s1, rel=1e-12)

    def test_negatives_rejected(self):
        m = make_model(3, 1, 2)
        with pytest.raises(ValueError):
            similar_with_bias(QuerySpec(anchor=0, negatives=(1,)), m)

    def test_matches_oracle_on_random_fixtures(self):
        for seed in range(100):
            rng = np.random.default_rng(1000 + seed)
            n, d = int(rng.integers(4, 40)), int(rng.integers(2, 9))
            m = make_model(n, 1, d, seed=seed)
            anchor = int(rng.integers(n))
            positives = tuple(int(x) for x in rng.choice(n, size=rng.integers(1, 4), replace=False))
            spec = QuerySpec(anchor=anchor, positives=positives, k=int(rng.integers(1, 8)))
            ranked = similar_with_bias(spec, m)
            point = np.mean([m.head_vectors[p] for p in positives], axis=0) + m.head_vectors[anchor]
            expected = ranked_query_oracle(
                m.head_vectors.tolist(), {}, point.tolist(), spec.k, {anchor, *positives},
            )
            assert_ranked_equal(ranked, expected)


class TestAnalogyQuery:
    def test_one_dimensional_sanity(self):
        m = make_model(4, 1, 1)
        m.head_vectors[:, 0] = [0.0, 1.0, 2.0, 3.0]
        ranked = analogy_query(QuerySpec(anchor=1, positives=(2,), negatives=(1,), k=1), m)
        assert ranked.entries == [(3, pytest.approx(6.0))]

    def test_equal_biases_cancel(self):
        m = make_model(10, 1, 6, seed=8)
        cancel = analogy_query(
            QuerySpec(anchor=4, positives=(1, 2), negatives=(1, 2), k=10, exclude=False), m
        )
        plain = similar_entities(QuerySpec(anchor=4, k=10, exclude=False), m)
        assert cancel.entries == plain.entries

    def test_degradation_chain(self):
        m = make_model(12, 1, 5, seed=9)
        spec = QuerySpec(anchor=5, k=8)
        a = analogy_query(spec, m)
        b = similar_with_bias(spec, m)
        c = similar_entities(spec, m)
        assert a.entries == b.entries == c.entries

    def test_matches_oracle_on_random_fixtures(self):
        for seed in range(100):
            rng = np.random.default_rng(2000 + seed)
            n, d = int(rng.integers(5, 40)), int(rng.integers(2, 9))
            types = {int(i): "t" for i in rng.choice(n, size=n // 2, replace=False)}
            m = make_model(n, 1, d, seed=seed, types=types)
            anchor = int(rng.integers(n))
            positives = tuple(int(x) for x in rng.choice(n, size=rng.integers(0, 3), replace=False))
            negatives = tuple(int(x) for x in rng.choice(n, size=rng.integers(0, 3), replace=False))
            use_filter = "t" if rng.integers(2) else None
            spec = QuerySpec(
                anchor=anchor, positives=positives, negatives=negatives,
                k=int(rng.integers(1, 10)), type_filter=use_filter,
            )
            ranked = analogy_query(spec, m)
            point = m.head_vectors[anchor].copy()
            if positives:
                point = point + np.mean([m.head_vectors[p] for p in positives], axis=0)
            if negatives:
                point = point - np.mean([m.head_vectors[p] for p in negatives], axis=0)
            expected = ranked_query_oracle(
                m.head_vectors.tolist(), types, point.tolist(),
                spec.k, {anchor, *positives, *negatives}, use_filter,
            )
            assert_ranked_equal(ranked, expected)

    def test_scaling_leaves_order_unchanged(self):
        m = make_model(20, 1, 6, seed=10)
        spec = QuerySpec(anchor=3, positives=(5, 7), negatives=(9,), k=15)
        reference = analogy_query(spec, m)
        for c in (0.5, 2.0, 10.0):
            scaled = make_model(20, 1, 6, seed=10)
            scaled.head_vectors = m.head_vectors * c
            got = analogy_query(spec, scaled)
            assert got.ids() == reference.ids()
            for (_, s_scaled), (_, s_ref) in zip(got.entries, reference.entries):
                assert s_scaled == pytest.approx(c * c * s_ref, rel=1e-9)

    def test_tie_break_by_entity_id(self):
        m = make_model(5, 1, 3, seed=11)
        m.head_vectors[3] = m.head_vectors[1]
        m.head_vectors[4] = m.head_vectors[1]
        ranked = similar_entities(QuerySpec(anchor=0, k=5), m)
        tied = [e for e, s in ranked.entries if s == sim(m.head_vectors[1], m.head_vectors[0])]
        assert tied == sorted(tied)

    def test_invalid_anchor(self):
        m = make_model(3, 1, 2)
        with pytest.raises(ValueError):
            analogy_query(QuerySpec(anchor=7), m)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_exclusion_soundness_property(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 30))
        m = make_model(n, 1, 4, seed=seed % 17)
        anchor = int(rng.integers(n))
        positives = tuple(int(x) for x in rng.choice(n, size=2, replace=False))
        negatives = tuple(int(x) for x in rng.choice(n, size=1))
        ranked = analogy_query(
            QuerySpec(anchor=anchor, positives=positives, negatives=negatives, k=n), m
        )
        assert not {anchor, *positives, *negatives} & set(ranked.ids())


class TestBrowse:
    def test_start_copies_anchor_row(self):
        m = make_model(5, 1, 4, seed=12)
        session = browse_start(2, m)
        assert np.array_equal(session.anchor_vector, m.head_vectors[2])
        session.anchor_vector[0] += 1.0
        assert session.anchor_vector[0] != m.head_vectors[2][0]

    def test_sessions_are_independent(self):
        m = make_model(5, 1, 4, seed=12)
        a = browse_start(1, m)
        b = browse_start(1, m)
        browse_step(a, m, positives=(3,), k=2)
        assert b.trail == []
        assert np.array_equal(b.anchor_vector, m.head_vectors[1])

    def test_invalid_anchor(self):
        m = make_model(3, 1, 2)
        with pytest.raises(ValueError):
            browse_start(9, m)

    def test_empty_step_keeps_anchor_and_ranks_around_point(self):
        m = make_model(8, 1, 5, seed=13)
        session = browse_start(0, m)
        before = session.anchor_vector.copy()
        _, ranked = browse_step(session, m, k=7)
        assert np.array_equal(session.anchor_vector, before)
        plain = similar_entities(QuerySpec(anchor=0, k=7), m)
        assert ranked.entries == plain.entries

    def test_two_steps_accumulate_both_directions(self):
        m = make_model(10, 1, 4, seed=14)
        session = browse_start(0, m)
        browse_step(session, m, positives=(1,), negatives=(2,), k=3)
        browse_step(session, m, positives=(3, 4), negatives=(5,), k=3)
        expected = (
            m.head_vectors[0]
            + m.head_vectors[1] - m.head_vectors[2]
            + (m.head_vectors[3] + m.head_vectors[4]) / 2.0 - m.head_vectors[5]
        )
        assert np.allclose(session.anchor_vector, expected, rtol=1e-12, atol=1e-14)

    def test_step_equals_fresh_query_from_current_point(self):
        for seed in range(50):
            rng = np.random.default_rng(3000 + seed)
            n = int(rng.integers(6, 40))
            m = make_model(n, 1, 6, seed=seed)
            anchor = int(rng.integers(n))
            session = browse_start(anchor, m)
            p1 = tuple(int(x) for x in rng.choice(n, size=2, replace=False))
            n1 = (int(rng.integers(n)),)
            browse_step(session, m, positives=p1, negatives=n1, k=4)
            p2 = (int(rng.integers(n)),)
            n2 = (int(rng.integers(n)),)
            point = (
                session.anchor_vector
                + m.head_vectors[p2[0]] - m.head_vectors[n2[0]]
            )
            exclude = {anchor, *p1, *n1, *p2, *n2}
            expected = ranked_query_oracle(
                m.head_vectors.tolist(), {}, point.tolist(), 4, exclude
            )
            _, ranked = browse_step(session, m, positives=p2, negatives=n2, k=4)
            assert_ranked_equal(ranked, expected)

    def test_exclusion_accumulates_over_trail(self):
        m = make_model(10, 1, 4, seed=15)
        session = browse_start(0, m)
        _, r1 = browse_step(session, m, positives=(1,), negatives=(2,), k=9)
        _, r2 = browse_step(session, m, positives=(3,), k=9)
        assert not {0, 1, 2} & set(r1.ids())
        assert not {0, 1, 2, 3} & set(r2.ids())

    def test_failed_step_leaves_session_unchanged(self):
        m = make_model(5, 1, 4, seed=16)
        session = browse_start(0, m)
        before_vec = session.anchor_vector
        with pytest.raises(ValueError):
            browse_step(session, m, positives=(99,), k=2)
        assert session.trail == []
        assert session.anchor_vector is before_vec

    def test_back_restores_bit_exactly(self):
        m = make_model(8, 1, 5, seed=17)
        session = browse_start(3, m)
        snapshot = session.anchor_vector
        browse_step(session, m, positives=(1,), negatives=(2,), k=3)
        browse_back(session)
        assert session.anchor_vector is snapshot
        assert session.trail == []

    def test_back_at_start_rejected(self):
        m = make_model(4, 1, 3, seed=18)
        with pytest.raises(ValueError, match="session start"):
            browse_back(browse_start(0, m))

    def test_three_steps_three_backs(self):
        m = make_model(12, 1, 4, seed=19)
        session = browse_start(5, m)
        original = session.anchor_vector
        browse_step(session, m, positives=(1,), k=2)
        browse_step(session, m, negatives=(2,), k=2)
        browse_step(session, m, positives=(3,), negatives=(4,), k=2)
        for _ in range(3):
            browse_back(session)
        assert session.anchor_vector is original
        assert session.trail == []


class TestPayload:
    def test_results_payload_shape(self):
        m = make_model(4, 1, 3, seed=20, types={1: "paper"})
        ranked = similar_entities(QuerySpec(anchor=0, k=2), m)
        rows = results_payload(m, ranked)
        assert [set(r) for r in rows] == [{"entity", "type", "score"}] * len(rows)
        assert all(isinstance(r["entity"], str) for r in rows)

    def test_spec_validates_k(self):
        with pytest.raises(ValueError):
            QuerySpec(anchor=0, k=0)
