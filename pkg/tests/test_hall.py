from __future__ import annotations

from fractions import Fraction

import pytest

from hfactor.constructions import apex_multipartite
from hfactor.errors import BadParameter
from hfactor.generators import (
    hypothesis_deleted_multipartite,
    random_multipartite_deleted,
)
from hfactor.graphs import Graph, Partition, VertexSet, complete_multipartite
from hfactor.hall import (
    HallWitness,
    PackFailure,
    StarPacking,
    contract_stars,
    default_tolerance,
    pack_apex_multipartite,
    star_pack,
)
from hfactor.solver import verify_packing


def _sides(g: Graph, big_size: int) -> tuple[VertexSet, VertexSet]:
    return (
        VertexSet.from_iterable(range(big_size), g.n),
        VertexSet.from_iterable(range(big_size, g.n), g.n),
    )


def test_star_pack_complete_bipartite():
    g = complete_multipartite([12, 4])
    big, small = _sides(g, 12)
    sp = star_pack(g, big, small, 3)
    assert isinstance(sp, StarPacking)
    centers = [c for c, _ in sp.stars]
    leaves = sorted(v for _, ls in sp.stars for v in ls)
    assert sorted(centers) == list(range(12, 16))
    assert leaves == list(range(12))


def test_star_pack_under_light_deletions():
    for seed in range(20):
        g, part = random_multipartite_deleted([15, 5], 0.2, seed)
        sp = star_pack(g, part[0], part[1], 3)
        assert isinstance(sp, StarPacking)
        for c, ls in sp.stars:
            assert all(g.has_edge(c, v) for v in ls)


def test_star_pack_absent_with_hall_witness():
    g = complete_multipartite([6, 2])
    # isolate center 6 from the big side entirely
    g = g.drop_edges([(6, v) for v in range(6)])
    big, small = _sides(g, 6)
    res = star_pack(g, big, small, 3)
    assert isinstance(res, HallWitness)
    demand, supply = res.violation()
    assert demand > supply
    assert 6 in res.centers


def test_star_pack_size_mismatch():
    g = complete_multipartite([7, 2])
    big, small = _sides(g, 7)
    with pytest.raises(BadParameter):
        star_pack(g, big, small, 3)


def test_contract_stars_complete_host():
    g = complete_multipartite([6, 6, 2])
    part = Partition.from_lists([range(6), range(6, 12), range(12, 14)], 14)
    sp = star_pack(g, part[1], part[2], 3)
    contracted, back_map = contract_stars(g, sp, [part[0]])
    assert contracted.n == 6 + 2
    # complete host stays complete towards the contracted vertices
    for i in range(6):
        for j in range(6, 8):
            assert contracted.has_edge(i, j)
    assert all(len(back_map[i]) == 1 for i in range(6))
    assert all(len(back_map[j]) == 4 for j in range(6, 8))


def test_contract_stars_misses_propagate():
    g = complete_multipartite([6, 6, 2])
    part = Partition.from_lists([range(6), range(6, 12), range(12, 14)], 14)
    sp = star_pack(g, part[1], part[2], 3)
    center, leaves = sp.stars[0]
    g2 = g.drop_edges([(0, leaves[0])])
    contracted, back_map = contract_stars(g2, sp, [part[0]])
    star_vertex = next(
        j for j in range(6, 8) if set(back_map[j]) == set((center,) + leaves)
    )
    assert not contracted.has_edge(0, star_vertex)
    other = 6 if star_vertex == 7 else 7
    assert contracted.has_edge(0, other)


@pytest.mark.parametrize("q,r,k", [(1, 3, 4), (2, 3, 5), (2, 4, 3)])
def test_pack_apex_complete_host(q, r, k):
    sizes = [k * r] * q + [k]
    g = complete_multipartite(sizes)
    part = Partition.from_lists(
        [range(sum(sizes[:i]), sum(sizes[: i + 1])) for i in range(q + 1)], g.n
    )
    res = pack_apex_multipartite(g, part, q, r)
    assert not isinstance(res, PackFailure)
    assert verify_packing(apex_multipartite(q, r), g, res, require_perfect=True)


@pytest.mark.parametrize("q,r,k", [(1, 3, 6), (2, 3, 5), (2, 4, 4), (3, 4, 3)])
def test_pack_apex_within_guarantee_band(q, r, k):
    band = default_tolerance(q, r)
    pattern = apex_multipartite(q, r)
    for seed in range(30):
        g, part = hypothesis_deleted_multipartite([k * r] * q + [k], band / 2, band, seed)
        res = pack_apex_multipartite(g, part, q, r)
        assert not isinstance(res, PackFailure)
        assert verify_packing(pattern, g, res, require_perfect=True)


def test_pack_apex_reports_failing_level():
    g = complete_multipartite([9, 9, 3])
    part = Partition.from_lists([range(9), range(9, 18), range(18, 21)], 21)
    g = g.drop_edges([(0, v) for v in range(9, 18)])  # vertex 0 loses all of class 2
    res = pack_apex_multipartite(g, part, 2, 3)
    assert isinstance(res, PackFailure)
    assert res.witness.violation()[0] > res.witness.violation()[1]


def test_default_tolerance_ladder():
    assert default_tolerance(1, 3) == Fraction(1, 2)
    assert default_tolerance(2, 3) == Fraction(1, 8)
    assert default_tolerance(2, 4) == Fraction(1, 10)


def test_contract_stars_union_bound_on_misses():
    # each contracted vertex a host vertex misses costs at most one of that
    # vertex's r+1 host misses across the two merged classes
    q, r, k = 2, 3, 5
    band = default_tolerance(q, r)
    for seed in range(10):
        g, part = hypothesis_deleted_multipartite([k * r] * q + [k], band / 2, band, seed)
        sp = star_pack(g, part[q - 1], part[q], r)
        assert isinstance(sp, StarPacking)
        contracted, back_map = contract_stars(g, sp, list(part.classes[: q - 1]))
        n_rest = sum(len(c) for c in part.classes[: q - 1])
        for i, bm in enumerate(back_map[:n_rest]):
            (v,) = bm
            host_misses = sum(
                1
                for cls in (part[q - 1], part[q])
                for w in cls
                if not g.has_edge(v, w)
            )
            contracted_misses = sum(
                1
                for j in range(n_rest, contracted.n)
                if not contracted.has_edge(i, j)
            )
            assert contracted_misses <= host_misses
