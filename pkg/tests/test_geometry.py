import json

import pytest
from hypothesis import given, settings, strategies as st

from tfim_sholo.errors import (InvalidMarks, MissingMarks, NonSimplePath, NotDobrushin, OffLattice,
                               ViolatedNeighborAssumption, WrongColumnParity)
from tfim_sholo.geometry import (BLACK, EXTERIOR, HBOUNDARY, INTERIOR, VBOUNDARY, WHITE, Lattice, boundary_arcs,
                                 build_domain, color_of, dobrushin_rectangle, domain_from_json, dual_rectangle,
                                 path_from_lanes, primal_rectangle)


def test_color_parity():
    assert color_of(0) == BLACK and color_of(1) == WHITE and color_of(-1) == WHITE


def test_lattice_rejects_nonpositive_delta():
    with pytest.raises(ValueError):
        Lattice(0.0)


def test_primal_rectangle_columns():
    d = primal_rectangle(1.0, 4, 2.0)
    black = [c for c in d.columns if c.color == BLACK]
    assert len(black) == 4
    assert all(c.intervals == ((0.0, 2.0),) for c in black)
    white_interior = {s.column for s in d.slots if s.color == WHITE}
    assert white_interior == {1, 3, 5}


@pytest.mark.parametrize("z, expected", [
    ((0, 1.0), (BLACK, VBOUNDARY)),
    ((2, 0.0), (BLACK, HBOUNDARY)),
    ((3, 1.0), (WHITE, INTERIOR)),
    ((8, 1.0), (BLACK, EXTERIOR)),
    ((2, 3.0), (BLACK, EXTERIOR)),
])
def test_classify_examples(z, expected):
    pc = primal_rectangle(1.0, 4, 2.0).classify(*z)
    assert (pc.color, pc.position) == expected


def test_hboundary_points_are_interval_endpoints():
    d = dobrushin_rectangle(1.0, 4, 2.0, 1.0, 1.0)
    for col in d.columns:
        for lo, hi in col.intervals:
            assert d.classify(col.x_index, lo).position == HBOUNDARY
            assert d.classify(col.x_index, hi).position == HBOUNDARY


def test_off_lattice_vertex_named():
    with pytest.raises(OffLattice, match="vertex 1"):
        build_domain(Lattice(1.0), "primal", [[0, 0], [2.3, 0], [2.3, 1], [0, 1]])


def test_non_simple_path():
    bowtie = [[0, 0], [2, 0], [2, 1], [1, 1], [1, -1], [0, -1]]
    with pytest.raises(NonSimplePath):
        build_domain(Lattice(1.0), "primal", bowtie)


def test_wrong_column_parity():
    with pytest.raises(WrongColumnParity):
        build_domain(Lattice(1.0), "primal", [[0, 0], [1.5, 0], [1.5, 1], [0, 1]])


def test_dobrushin_needs_marks():
    with pytest.raises(MissingMarks):
        build_domain(Lattice(1.0), "dobrushin", [[-0.5, 0], [3.5, 0], [3.5, 1], [-0.5, 1]])


def test_violated_neighbor_assumption():
    # a strip of width delta/2 leaves column 0 with no interior neighbour for t in (1, 2)
    path = [[-0.5, 0], [3.5, 0], [3.5, 1], [0.5, 1], [0.5, 2], [0, 2], [0, 1], [-0.5, 1]]
    with pytest.raises(ViolatedNeighborAssumption):
        build_domain(Lattice(1.0), "dobrushin", path, {"a": [-0.25, 1.0], "b": [3.25, 1.0]})


def test_corner_mark_rejected():
    from tfim_sholo.geometry import dobrushin_rectangle_path
    path, marks = dobrushin_rectangle_path(1.0, 4, 2.0, 1.0, 1.0)
    marks["a"] = [-0.5, 1.0]
    with pytest.raises(InvalidMarks):
        build_domain(Lattice(1.0), "dobrushin", path, marks)


def test_boundary_arcs_orientation():
    d = dobrushin_rectangle(1.0, 4, 2.0, 1.0, 1.0)
    black, white = boundary_arcs(d)
    assert black[0].start == white[0].start == (-0.25, 1.0)
    assert black[-1].end == white[-1].end == (3.25, 1.0)
    # ccw from a on the left goes down and across the bottom: white
    assert any(s.start[1] == s.end[1] == 0.0 for s in white)
    assert not any(s.start[1] == s.end[1] == 0.0 for s in black)
    assert any(s.start[1] == s.end[1] == 2.0 for s in black)


def test_boundary_arcs_needs_dobrushin():
    with pytest.raises(NotDobrushin):
        boundary_arcs(primal_rectangle(1.0, 4, 2.0))


def test_boundary_colors_match_column_colors():
    d = dobrushin_rectangle(1.0, 4, 2.0, 1.0, 1.0)
    assert d.boundary_color(-1, 0.5) == WHITE
    assert d.boundary_color(0, 1.5) == BLACK
    assert d.boundary_color(2, 0.0) == WHITE
    assert d.boundary_color(2, 2.0) == BLACK


def _same_polygon(p, q):
    return build_domain(Lattice(1.0), "primal", p).path == build_domain(Lattice(1.0), "primal", q).path


def test_reconstruction_idempotent():
    d = dobrushin_rectangle(1.0, 4, 2.0, 0.7, 1.3)
    rebuilt = build_domain(d.lattice, "dobrushin", path_from_lanes(d), d.to_json()["marks"])
    assert rebuilt.path == d.path
    assert rebuilt.columns == d.columns
    assert rebuilt.marks == d.marks


def test_json_round_trip():
    d = dobrushin_rectangle(0.5, 5, 1.5, 0.4, 1.1)
    e = domain_from_json(json.dumps(d.to_json()))
    assert e.columns == d.columns and e.marks == d.marks and e.kind == "dobrushin"


@settings(max_examples=40, deadline=None)
@given(n_black=st.integers(2, 6), height=st.sampled_from([0.5, 1.0, 2.0]),
       fa=st.floats(0.1, 0.9), fb=st.floats(0.1, 0.9), delta=st.sampled_from([1.0, 0.5]))
def test_classification_exhaustive_and_neighbors(n_black, height, fa, fb, delta):
    d = dobrushin_rectangle(delta, n_black, height, round(fa * height, 4), round(fb * height, 4))
    m0, m1 = d.m_range
    for m in range(m0 - 1, m1 + 2):
        for k in range(-1, 12):
            t = k * height / 10
            pc = d.classify(m, t)
            assert pc.position in (INTERIOR, VBOUNDARY, HBOUNDARY, EXTERIOR)
            if pc.position == INTERIOR:
                for mm in (m - 1, m + 1):
                    assert d.classify(mm, t).position != EXTERIOR
            if pc.position == VBOUNDARY:
                assert INTERIOR in (d.classify(m - 1, t).position, d.classify(m + 1, t).position)


def test_dual_rectangle_has_white_sides():
    d = dual_rectangle(1.0, 4, 2.0)
    assert d.columns[0].color == WHITE and d.columns[-1].color == WHITE
    assert d.classify(-1, 1.0).position == VBOUNDARY
    assert d.classify(0, 1.0).position == INTERIOR
