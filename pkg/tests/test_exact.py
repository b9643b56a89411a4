import itertools
import random

import pytest

from dtiling import (
    InputError,
    SearchBudget,
    build,
    complete_3graph,
    construct_G0,
    construct_G1,
    four_partite,
    four_partite_degree_stats,
    four_partite_perfect_matching,
    is_D_free,
    max_D_free_set,
    max_tiling_exact,
    perfect_tiling_exact,
    planted_extremal,
    quad_catalog,
    random_codegree_instance,
    steiner_triple_system,
    validate_tiling,
)

from naive import (
    naive_four_partite_matching,
    naive_max_D_free,
    naive_max_tiling_size,
    naive_perfect_partition,
)


class TestCatalog:
    def test_complete_k8(self):
        cat = quad_catalog(complete_3graph(8))
        assert len(cat.quads) == 70

    def test_sts_empty(self):
        assert quad_catalog(steiner_triple_system(9)).quads == ()

    def test_g0_quads_meet_a(self):
        cat = quad_catalog(construct_G0(8))
        assert cat.quads
        assert all(0 in q for q in cat.quads)

    def test_incidence_index(self):
        cat = quad_catalog(complete_3graph(6))
        for v, ids in enumerate(cat.by_vertex):
            assert all(v in cat.quads[i] for i in ids)


class TestPerfect:
    def test_k8_found(self):
        res = perfect_tiling_exact(complete_3graph(8))
        assert res.status == "found"
        assert res.tiling.size == 2
        # independent brute force agrees a partition exists
        assert naive_perfect_partition(8, complete_3graph(8).edges) is not None

    def test_g1_8_infeasible(self):
        res = perfect_tiling_exact(construct_G1(8))
        assert res.status == "infeasible"
        assert res.tiling is None

    def test_unique_cover(self):
        G = build(8, [(0, 1, 2), (0, 1, 3), (4, 5, 6), (4, 5, 7)])
        res = perfect_tiling_exact(G)
        assert res.status == "found"
        assert [c.vertices for c in res.tiling.copies] == [(0, 1, 2, 3), (4, 5, 6, 7)]

    def test_divisibility(self):
        with pytest.raises(InputError):
            perfect_tiling_exact(complete_3graph(6))

    def test_budget_exhaustion_flagged(self):
        res = perfect_tiling_exact(complete_3graph(16), SearchBudget(node_limit=1))
        assert res.status == "exhausted"


class TestMaxTiling:
    def test_g0_8(self):
        res = max_tiling_exact(construct_G0(8))
        assert res.status == "found"
        assert res.optimal
        assert res.tiling.size == 1

    def test_k8(self):
        assert max_tiling_exact(complete_3graph(8)).tiling.size == 2

    def test_sts_zero(self):
        assert max_tiling_exact(steiner_triple_system(7)).tiling.size == 0

    def test_on_exhaust_fail_drops_payload(self):
        # greedy start grabs (0,1,2,3) and stalls at one copy, so proving
        # the 2-copy optimum needs search nodes the budget does not allow
        G = build(8, [(0, 1, 2), (0, 1, 3), (0, 1, 4), (0, 1, 5), (2, 3, 6), (2, 3, 7)])
        res = max_tiling_exact(G, SearchBudget(node_limit=1, on_exhaust="fail"))
        assert res.status == "exhausted"
        assert res.tiling is None
        full = max_tiling_exact(G)
        assert full.optimal and full.tiling.size == 2

    def test_matches_naive_dp(self):
        rng = random.Random(11)
        for _ in range(15):
            n = rng.choice([8, 12])
            G = random_codegree_instance(n, rng.randint(0, n // 4), rng.randint(0, 10**6))
            res = max_tiling_exact(G)
            assert res.optimal
            assert res.tiling.size == naive_max_tiling_size(n, G.edges)

    def test_perfect_agrees_with_max(self):
        rng = random.Random(5)
        for _ in range(12):
            n = rng.choice([8, 12, 16])
            G = random_codegree_instance(n, rng.randint(1, n // 4 + 1), rng.randint(0, 10**6))
            perfect = perfect_tiling_exact(G).status == "found"
            assert perfect == (max_tiling_exact(G).tiling.size == n // 4)


class TestRelabelInvariance:
    def test_feasibility_and_size(self):
        rng = random.Random(3)
        for seed in range(6):
            G = random_codegree_instance(12, 2, seed)
            perm = list(range(12))
            rng.shuffle(perm)
            H = build(12, [tuple(sorted(perm[v] for v in e)) for e in G.edges])
            assert perfect_tiling_exact(G).status == perfect_tiling_exact(H).status
            assert max_tiling_exact(G).tiling.size == max_tiling_exact(H).tiling.size


class TestMaxDFree:
    def test_planted_8(self):
        res = max_D_free_set(planted_extremal(8))
        assert res.status == "found"
        assert len(res.vertices) == 6

    def test_k8(self):
        assert len(max_D_free_set(complete_3graph(8)).vertices) == 3

    def test_edgeless(self):
        assert len(max_D_free_set(build(8, [])).vertices) == 8

    def test_result_is_d_free(self):
        G = random_codegree_instance(12, 3, 9)
        res = max_D_free_set(G)
        assert is_D_free(G, res.vertices)

    def test_matches_naive(self):
        rng = random.Random(2)
        for _ in range(10):
            n = rng.randint(6, 9)
            G = random_codegree_instance(n, rng.randint(0, 2), rng.randint(0, 10**6))
            res = max_D_free_set(G)
            assert res.status == "found"
            assert len(res.vertices) == len(naive_max_D_free(n, G.edges))


def complete_four_partite(m):
    parts = [range(i * m, (i + 1) * m) for i in range(4)]
    edges = list(itertools.product(*parts))
    return four_partite(parts, edges)


class TestFourPartite:
    def test_complete_m3(self):
        res = four_partite_perfect_matching(complete_four_partite(3))
        assert res.status == "found"
        assert len(res.matching) == 3

    def test_isolated_vertex(self):
        H = complete_four_partite(2)
        edges = [e for e in H.edges if e[0] != 0]
        res = four_partite_perfect_matching(four_partite(H.parts, edges))
        assert res.status == "infeasible"

    def test_matches_brute_force(self):
        rng = random.Random(17)
        for _ in range(20):
            m = 4
            parts = [range(i * m, (i + 1) * m) for i in range(4)]
            pool = list(itertools.product(*parts))
            edges = rng.sample(pool, k=rng.randint(0, 48))
            H = four_partite(parts, edges)
            res = four_partite_perfect_matching(H)
            brute = naive_four_partite_matching(parts, edges)
            assert (res.status == "found") == (brute is not None)
            if res.status == "found":
                assert set(res.matching) <= set(H.edges)
                for i in range(4):
                    assert {e[i] for e in res.matching} == set(parts[i])

    def test_unequal_parts(self):
        with pytest.raises(InputError):
            four_partite([range(2), range(2, 4), range(4, 6), range(6, 9)], [])

    def test_overlapping_parts(self):
        with pytest.raises(InputError):
            four_partite([range(2), range(1, 3), range(4, 6), range(6, 8)], [])

    def test_non_transversal_edge(self):
        with pytest.raises(InputError):
            four_partite(
                [range(2), range(2, 4), range(4, 6), range(6, 8)], [(0, 1, 4, 6)]
            )

    def test_degree_stats_complete(self):
        stats = four_partite_degree_stats(complete_four_partite(3))
        # every V1 vertex sits in 27 edges; every transversal triple of
        # V2 x V3 x V4 extends by all 3 V1 vertices
        assert stats["m"] == 3
        assert stats["min_degree_part1"] == 27
        assert stats["min_degree_triple"] == 3
        assert stats["lhs"] == 3 * 27 + 27 * 3
        assert stats["rhs"] == 1.5 * 81
        assert stats["condition_met"]


class TestBudget:
    def test_validation(self):
        with pytest.raises(InputError):
            SearchBudget(node_limit=0)
        with pytest.raises(InputError):
            SearchBudget(time_limit=-1)
        with pytest.raises(InputError):
            SearchBudget(on_exhaust="panic")

    def test_witnesses_validate(self):
        G = random_codegree_instance(12, 3, 4)
        res = max_tiling_exact(G)
        assert validate_tiling(G, res.tiling).ok
