import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfim_sholo.configuration import count_components, empty_configuration, make_configuration, sample_poisson
from tfim_sholo.errors import ForeignPass, TieBreak
from tfim_sholo.geometry import dobrushin_rectangle
from tfim_sholo.interface import (ARROW_UNIT, QUARTER, HorizontalHop, VerticalRun, gamma_quarter_turns,
                                  passes_at, trace_arrangement, winding_to_exit)
from tfim_sholo.verification import figure_four

STRIP = dobrushin_rectangle(1.0, 2, 2.0, 1.0, 1.0)  # one interior white column
DOM = dobrushin_rectangle(1.0, 4, 2.0, 1.0, 1.0)


def test_empty_configuration_hugs_black_arc():
    tr = trace_arrangement(STRIP, empty_configuration(STRIP))
    assert tr.loop_count == 0
    runs = [s for s in tr.interface if isinstance(s, VerticalRun)]
    # down the left notch, up the full height, down, up into b
    assert [(r.line, r.direction) for r in runs] == [(-0.25, "down"), (0.25, "up"), (0.75, "down"), (1.25, "up")]
    assert runs[1].t1 == 2.0 and runs[2].t1 == 2.0
    assert gamma_quarter_turns(tr) == 0


def test_interface_ends_pointing_right():
    for seed in range(20):
        tr = trace_arrangement(DOM, sample_poisson(DOM, 1.0, 1.0, seed))
        last = tr.interface[-1]
        assert isinstance(last, HorizontalHop) and last.direction == "right" and last.t == 1.0
        assert last.to_line == pytest.approx(3.5)
        # turning[k] is the heading after segment k, measured from the departure direction
        assert tr.turning[-1] == pytest.approx(0.0)


def test_single_bridge_two_turns():
    tr = trace_arrangement(STRIP, make_configuration(STRIP, bridges={1: [0.5]}))
    hops = [s for s in tr.interface if isinstance(s, HorizontalHop) and s.t == 0.5]
    assert len(hops) == 1 and hops[0].direction == "right"
    i = tr.interface.index(hops[0])
    # heading up, then right along the hop, then down: two clockwise quarter turns
    assert tr.turning[i - 2] == pytest.approx(QUARTER)
    assert tr.turning[i - 1] == pytest.approx(0.0)
    assert tr.turning[i] == pytest.approx(-QUARTER)
    assert tr.loop_count == count_components(STRIP, tr.config, "dobrushin-wired").loops == 1


def test_figure_four_loops():
    dom, cfg = figure_four()
    tr = trace_arrangement(dom, cfg)
    assert tr.loop_count == 5
    assert len(tr.loops) == 5


def test_unique_vertical_run_pass():
    tr = trace_arrangement(STRIP, empty_configuration(STRIP))
    rec = passes_at(tr, (0, 1.5))
    assert [(p.direction, p.winding) for p in rec.passes] == [("up", -math.pi / 2)]


def test_unvisited_point_has_no_passes():
    tr = trace_arrangement(STRIP, make_configuration(STRIP, bridges={1: [0.5]}))
    assert passes_at(tr, (1, 1.5)).passes == ()


def test_bridge_traversed_right():
    tr = trace_arrangement(STRIP, make_configuration(STRIP, bridges={1: [0.5]}))
    right = [p for p in passes_at(tr, (1, 0.5)).passes if p.direction == "right"]
    assert len(right) == 1 and right[0].winding == 0.0


def test_final_segment_winding_zero():
    tr = trace_arrangement(STRIP, empty_configuration(STRIP))
    ps = passes_at(tr, (2, 0.5)).passes
    up = [p for p in ps if p.direction == "up"]
    # the up run on line 1.25 ends at b; the right turn into b is the only turn left
    assert winding_to_exit(tr, up[0]) == pytest.approx(-QUARTER)


def test_foreign_pass_rejected():
    t1 = trace_arrangement(STRIP, empty_configuration(STRIP))
    t2 = trace_arrangement(STRIP, empty_configuration(STRIP))
    p = passes_at(t1, (0, 1.5)).passes[0]
    with pytest.raises(ForeignPass):
        winding_to_exit(t2, p)


def test_extra_full_turn():
    dom = dobrushin_rectangle(1.0, 3, 2.0, 1.0, 1.0)
    cfg = make_configuration(dom, cuts={2: [1.469154302818429], 4: [0.4306280204141778]},
                             bridges={1: [0.18825728448079837, 0.8662538804729476]})
    tr = trace_arrangement(dom, cfg)
    down = [p for p in passes_at(tr, (1, 1.0)).passes if p.direction == "down"]
    # direct value is +pi/2; this pass winds once more clockwise
    assert [p.quarter_turns for p in down] == [-3]


def test_tie_rejected():
    with pytest.raises(TieBreak):
        trace_arrangement(DOM, make_configuration(DOM, cuts={2: [0.5]}, bridges={3: [0.5]}))


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 100_000), rate=st.floats(0.3, 3.0))
def test_trace_invariants(seed, rate):
    cfg = sample_poisson(DOM, rate, rate, seed)
    tr = trace_arrangement(DOM, cfg)
    assert tr.loop_count == count_components(DOM, cfg, "dobrushin-wired").loops
    assert gamma_quarter_turns(tr) == 0  # fixed by the marks
    for w in tr.loop_turning:
        assert abs(w) == pytest.approx(2 * math.pi)
    steps = np.diff(tr.turning)
    assert np.all(np.isin(np.round(steps / QUARTER), [-1, 0, 1]))
    for s in DOM.slots:
        t = 0.5 * (s.lo + s.hi)
        for p in passes_at(tr, (s.column, t)).passes:
            target = -math.atan2(ARROW_UNIT[p.direction].imag, ARROW_UNIT[p.direction].real)
            r = (p.winding - target) / (2 * math.pi)
            assert r == pytest.approx(round(r), abs=1e-12)
            assert winding_to_exit(tr, p) == pytest.approx(p.winding)
