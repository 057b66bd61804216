import pytest

from qscatter.canonical import Seed, build_seed_diagram
from qscatter.fixtures import load_fixture
from qscatter.qcoeff import ONE, QScalar, s_power
from qscatter.qtorus import QTorusElement, wallcross_apply
from qscatter.scattering import (
    INGOING,
    OUTGOING,
    DiagramError,
    ScatteringDiagram,
    Wall,
    check_loop_identity,
    classical_diagram,
    complete,
    consistency_check_on_B,
    diagram_from_json,
    diagram_to_json,
    loop_product,
    path_ordered_product,
)

PENTAGON = Seed(((1, 0), (0, 1)), ("E1", "E2"))
# toric model of dP5 with the three extra fan rays
DP5_MODEL = Seed(((1, 0), (0, 1)), ("E1", "E2"), ((1, 0), (1, 1), (0, 1)))


def mono(t, beta, order, c=ONE, classical=False):
    return QTorusElement.monomial(t, beta, order, None, c, classical)


def pentagon_wall(order):
    return QTorusElement({(0, 0, (0, 0)): ONE, (-1, -1, (1, 1)): s_power(-1)}, order, None, 2)


def test_empty_diagram():
    d = ScatteringDiagram((), 5, ("E1",), None)
    x = mono((2, 1), (0,), 5)
    assert path_ordered_product(d, (1, -1), (1, 1), x, turns=2) == x
    assert check_loop_identity(d)["pass"]
    assert complete(d).walls == ()


def test_forward_then_backward_is_identity():
    order = 8
    f = QTorusElement({(0, 0, (0,)): ONE, (0, -1, (1,)): s_power(-1)}, order, None, 1)
    d = ScatteringDiagram((Wall((0, 1), f, OUTGOING),), order, ("E",), None)
    for t in [(1, 0), (3, -2), (-1, 4)]:
        x = mono(t, (0,), order)
        there = path_ordered_product(d, (1, 0), (-1, 1), x)
        assert there != x
        assert path_ordered_product(d, (-1, 1), (1, 0), there, clockwise=True) == x


def test_two_wall_seed_defect_at_order_two():
    d = build_seed_diagram(PENTAGON, 3)
    rep = check_loop_identity(d)
    assert not rep["pass"] and rep["degree"] == 2
    # the defect is undone by crossing the missing pentagon wall counterclockwise,
    # which for an outgoing wall means epsilon = -1
    g = pentagon_wall(3)
    for t in [(1, 0), (0, 1)]:
        x = mono(t, (0, 0), 3)
        defect = loop_product(d, x) - x
        fix = wallcross_apply(g, (1, 1), x, -1) - x
        assert defect.degree_part(2) == -fix.degree_part(2)
        assert defect.degree_part(2)


def test_two_wall_seed_classical_defect_by_hand():
    # classically z^p crosses 1 + w as z^p (1 + w)^<n,p> with n = (1,-1) normal to (1,1)
    d = classical_diagram(build_seed_diagram(PENTAGON, 3))
    w = (-1, -1)
    for t, n_dot in [((1, 0), 1), ((0, 1), -1)]:
        x = mono(t, (0, 0), 3, classical=True)
        defect = loop_product(d, x) - x
        want = mono((t[0] + w[0], t[1] + w[1]), (1, 1), 3, QScalar(-n_dot), classical=True)
        assert defect == want


def test_pentagon_completion_adds_one_wall():
    done = complete(build_seed_diagram(PENTAGON, 5), 5)
    added = [w for w in done.walls if w.added]
    assert len(added) == 1
    (w,) = added
    assert w.direction == (1, 1) and w.orientation == OUTGOING
    assert w.f == pentagon_wall(5)
    assert check_loop_identity(done, 5)["pass"]


def test_pentagon_without_new_wall_fails_at_degree_two():
    seed_only = build_seed_diagram(PENTAGON, 5)
    rep = check_loop_identity(seed_only, 5)
    assert rep == {**rep, "pass": False, "degree": 2}
    with_wall = ScatteringDiagram(seed_only.walls + (Wall((1, 1), pentagon_wall(5), OUTGOING),), 5, ("E1", "E2"), None)
    assert check_loop_identity(with_wall, 5)["pass"]


def test_single_wall_completion_adds_nothing():
    d = build_seed_diagram(Seed(((2, 1),), ("E",)), 6)
    assert set(complete(d).walls) == set(d.walls)
    d2 = build_seed_diagram(Seed(((1, 0), (1, 0)), ("E1", "E2")), 6)
    assert set(complete(d2).walls) == set(d2.walls)
    assert len(d2.walls) == 2


def test_dp5_model_walls_only_on_five_rays():
    done = complete(build_seed_diagram(DP5_MODEL, 4), 4)
    dirs = {w.direction for w in done.walls}
    fan = set(DP5_MODEL.fan_rays())
    assert dirs == fan and len(fan) == 5
    assert check_loop_identity(done)["pass"]


@pytest.mark.parametrize("seed", [PENTAGON, DP5_MODEL, Seed(((1, 0), (0, 1), (-1, -1)), ("E1", "E2", "E3"))])
def test_completion_idempotent(seed):
    once = complete(build_seed_diagram(seed, 4), 4)
    assert complete(once, 4).walls == once.walls


def test_completion_independent_of_insertion_order():
    seed = Seed(((1, 0), (0, 1), (-1, -1)), ("E1", "E2", "E3"))
    d = build_seed_diagram(seed, 4)
    rev = ScatteringDiagram(tuple(reversed(d.walls)), d.order, d.labels, None)
    assert complete(rev).walls == complete(d).walls


@pytest.mark.parametrize("seed", [PENTAGON, DP5_MODEL])
def test_classical_limit_commutes_with_completion(seed):
    d = build_seed_diagram(seed, 4)
    a = classical_diagram(complete(d, 4))
    b = complete(classical_diagram(d), 4)
    assert {(w.direction, w.orientation): w.f for w in a.walls} == {(w.direction, w.orientation): w.f for w in b.walls}


def test_ungraded_input_rejected():
    f = QTorusElement({(0, 0, (0,)): ONE, (-1, 0, (0,)): ONE}, 3, None, 1)
    with pytest.raises(DiagramError):
        Wall((1, 0), f)
    with pytest.raises(DiagramError):
        Wall((2, 0), pentagon_wall(3))
    with pytest.raises(DiagramError):
        Wall((1, 1), pentagon_wall(3), INGOING)


@pytest.mark.parametrize("name", ["dp5", "v1", "v2", "toric_p2", "pentagon"])
def test_fixture_diagrams_consistent(name):
    fx = load_fixture(name)
    assert consistency_check_on_B(fx.diagram(3))["pass"]
    assert consistency_check_on_B(fx.diagram(1))["pass"]


def _perturb(diagram, index, label):
    w = diagram.walls[index]
    surface = diagram.surface
    cls = [0] * surface.class_rank
    cls[surface.labels.index(label)] = 1
    spurious = QTorusElement({(0, 0, surface.zero_class()): ONE, (-1, 0, tuple(cls)): ONE}, diagram.order, w.f.chart, surface.class_rank)
    walls = list(diagram.walls)
    walls[index] = w.with_f(w.f * spurious)
    return ScatteringDiagram(tuple(walls), diagram.order, diagram.labels, surface)


def test_dp5_perturbed_wall_fails():
    d = load_fixture("dp5").diagram(3)
    assert d.walls[0].ray == 0
    rep = consistency_check_on_B(_perturb(d, 0, "E1"))
    assert not rep["pass"]
    assert rep["kind"] in ("ray", "chamber")


def test_diagram_json_round_trip():
    for d in (load_fixture("pentagon").diagram(4), complete(build_seed_diagram(PENTAGON, 4))):
        back = diagram_from_json(diagram_to_json(d))
        assert back.walls == d.walls and back.labels == d.labels and back.order == d.order
