import numpy as np
import pytest

from graphscatter import (
    ChainCondition,
    FamilySpec,
    Family,
    build_graph,
    chain_condition,
    family_from_string,
    make_family,
    read_graph_file,
    write_graph_file,
)
from graphscatter.graphs import GraphError


def test_bridge_blocks(bridge):
    assert bridge.n_boundary == 2 and bridge.n_internal == 0
    assert np.array_equal(bridge.block_a, [[0, 1], [1, 0]])
    assert bridge.block_b.shape == (0, 2)
    assert bridge.block_d.shape == (0, 0)


def test_self_loop_rejected():
    with pytest.raises(GraphError):
        build_graph([(1, 1)], [1, 2])


def test_duplicate_edge_rejected():
    with pytest.raises(GraphError):
        build_graph([(1, 2), (2, 1)], [1, 2])


def test_duplicate_boundary_rejected():
    with pytest.raises(GraphError):
        build_graph([(1, 2)], [1, 1])


def test_ac4_equals_explicit_edge_list():
    fam = make_family(family_from_string("AC:4"))
    explicit = build_graph(
        [(1, 3), (2, 3), (3, 4), (4, 5), (5, 6), (6, 3)], [1, 2], "AC(4)")
    assert np.array_equal(fam.block_a, explicit.block_a)
    assert np.array_equal(fam.block_b, explicit.block_b)
    assert np.array_equal(fam.block_d, explicit.block_d)


def test_al2_structure():
    g = make_family(family_from_string("AL:2"))
    assert g.n_internal == 2
    # both boundary vertices attach to the head of the pendant path
    assert g.block_b[0, 0] == 1 and g.block_b[0, 1] == 1
    assert g.block_b[1, 0] == 0 and g.block_b[1, 1] == 0
    assert g.block_d[0, 1] == 1


def test_family_determinism():
    a = make_family(FamilySpec(Family.CYCLE, 10, 5))
    b = make_family(FamilySpec(Family.CYCLE, 10, 5))
    assert np.array_equal(a.h_g, b.h_g)


def test_h_symmetric_across_families():
    for spec in ("Line:4", "AL:5", "AC:6", "AC2:5", "C:9:4"):
        h = make_family(family_from_string(spec)).h_g
        assert np.array_equal(h, h.T)


def test_cycle_bounds():
    with pytest.raises(GraphError):
        FamilySpec(Family.CYCLE, 10, 6)
    with pytest.raises(GraphError):
        FamilySpec(Family.CYCLE, 10, 1)
    with pytest.raises(GraphError):
        FamilySpec(Family.AL, 1)
    with pytest.raises(GraphError):
        FamilySpec(Family.AC, 2)


def test_cycle_105_antipodal():
    g = make_family(family_from_string("C:10:5"))
    assert g.n_vertices == 10
    deg = g.h_g.sum(axis=0)
    assert np.all(deg == 2)


def test_chain_condition_values():
    assert chain_condition(make_family(family_from_string("AC:4"))) == \
        (ChainCondition.HOLDS, -1)
    assert chain_condition(make_family(family_from_string("C:10:5"))) == \
        (ChainCondition.HOLDS, 1)
    # linear graph with two or more inner vertices fails
    assert chain_condition(make_family(family_from_string("Line:5")))[0] is \
        ChainCondition.FAILS


def test_chain_condition_bridge(bridge):
    status, _ = chain_condition(bridge)
    assert status is ChainCondition.EDGE_BETWEEN_BOUNDARY


def test_graph_file_roundtrip(tmp_path):
    g = make_family(family_from_string("AC2:5"))
    path = tmp_path / "g.graph"
    write_graph_file(g, path)
    back = read_graph_file(path)
    assert np.array_equal(back.h_g, g.h_g)
    assert back.name == g.name


def test_graph_file_rejects_garbage(tmp_path):
    path = tmp_path / "bad.graph"
    path.write_text("graph bad 2 0\n1 2\n1 2 3\nboundary: 1 2\n")
    with pytest.raises(GraphError):
        read_graph_file(path)
