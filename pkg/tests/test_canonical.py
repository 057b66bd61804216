import pytest

from qscatter.affine_base import ChartVector, nu_pushforward
from qscatter.canonical import (
    Seed,
    SeedError,
    build_seed_diagram,
    canonical_diagram,
    ray_functions,
    rho_presentation,
    seed_from_json,
    seed_to_json,
    surface_from_seed,
)
from qscatter.fixtures import FIXTURES, load_fixture
from qscatter.qcoeff import ONE, s_power
from qscatter.qtorus import QTorusElement
from qscatter.scattering import INGOING, OUTGOING, complete, consistency_check_on_B

PENTAGON = Seed(((1, 0), (0, 1)), ("E1", "E2"), ((1, 0), (0, 1)))


def binomial(t, beta, order, chart=None):
    rank = len(beta)
    return QTorusElement({(0, 0, (0,) * rank): ONE, (t[0], t[1], tuple(beta)): s_power(-1)}, order, chart, rank)


def test_seed_diagram_two_lines():
    d = build_seed_diagram(Seed(((1, 0), (0, 1)), ("E1", "E2")), 4)
    lines = {}
    for w in d.walls:
        lines.setdefault(w.hamiltonian_direction, []).append(w)
    assert set(lines) == {(1, 0), (0, 1)}
    assert {w.f for w in lines[(1, 0)]} == {binomial((-1, 0), (1, 0), 4)}
    assert {w.f for w in lines[(0, 1)]} == {binomial((0, -1), (0, 1), 4)}
    assert {w.orientation for w in d.walls} == {INGOING, OUTGOING}


def test_seed_diagram_repeated_direction():
    d = build_seed_diagram(Seed(((1, 0), (1, 0)), ("E1", "E2")), 4)
    assert {w.direction for w in d.walls} == {(1, 0), (-1, 0)}
    want = binomial((-1, 0), (1, 0), 4) * binomial((-1, 0), (0, 1), 4)
    assert all(w.f == want for w in d.walls)


def test_empty_seed():
    assert build_seed_diagram(Seed((), ()), 3).walls == ()


def test_seed_validation_and_json():
    with pytest.raises(SeedError):
        Seed(((2, 0),), ("E1",))
    with pytest.raises(SeedError):
        Seed(((1, 0),), ("E1", "E2"))
    assert seed_from_json(seed_to_json(PENTAGON)) == PENTAGON
    with pytest.raises(SeedError):
        seed_from_json({"seed_vectors": [[1, 0]], "blowups": [{"dir": [0, 1], "class": "E1"}]})


def test_surface_from_seed_selfint():
    S = surface_from_seed(PENTAGON)
    assert S.fan == ((1, 0), (0, 1), (-1, 0), (0, -1))
    # P1 x P1 with one blow-up on each of the last two rays
    assert S.selfint == (0, 0, -1, -1)
    with pytest.raises(SeedError):
        surface_from_seed(Seed(((1, 0),), ("E1",)))


def test_toric_pair_has_empty_diagram():
    seed = Seed((), (), ((1, 0), (0, 1), (-1, -1)))
    d = canonical_diagram(seed, None, 4)
    assert d.walls == ()
    assert consistency_check_on_B(d)["pass"]


def test_dp5_five_ray_walls():
    d = load_fixture("dp5").diagram(3)
    S = d.surface
    assert len(d.walls) == 5
    for j in range(5):
        f_out, f_in = ray_functions(d, j)
        beta = [0] * S.class_rank
        beta[S.labels.index(f"E{j + 1}")] = 1
        assert f_out == binomial((-1, 0), beta, 3, j)
        assert f_in.is_one()


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_walls_outgoing_and_consistent(name):
    d = load_fixture(name).diagram(3)
    assert all(w.orientation == OUTGOING for w in d.walls)
    assert consistency_check_on_B(d)["pass"]


def test_pentagon_interior_wall_verbatim():
    d = canonical_diagram(PENTAGON, None, 4, include_interior=True)
    interior = [w for w in d.walls if w.ray is None]
    assert len(interior) == 1
    (w,) = interior
    S = d.surface
    assert w.chart == 0 and w.direction == (1, 1)
    beta = [0] * S.class_rank
    beta[S.labels.index("E1")] = beta[S.labels.index("E2")] = 1
    assert w.f == binomial((-1, -1), beta, 4, 0)


def test_interior_pullback_then_pushforward():
    plane = complete(build_seed_diagram(PENTAGON, 4), 4)
    (added,) = [w for w in plane.walls if w.added]
    d = canonical_diagram(PENTAGON, None, 4, include_interior=True)
    (w,) = [w for w in d.walls if w.ray is None]
    S = d.surface
    assert nu_pushforward(S, ChartVector(w.chart, *w.direction)) == added.direction
    pushed = {}
    for (a, b, beta), c in w.f.terms.items():
        t = nu_pushforward(S, ChartVector(w.chart, a, b))
        cls = tuple(beta[S.labels.index(lab)] for lab in plane.labels)
        pushed[(t[0], t[1], cls)] = c
    assert pushed == dict(added.f.terms)


def test_pentagon_fixture_wall_class():
    # in the fixture basis the new wall carries kink(ray 0) + kink(ray 1) - E1 - E2
    fx = load_fixture("pentagon")
    S = fx.surface
    d = fx.diagram(4)
    (w,) = [w for w in d.walls if w.ray is None]
    want = [a + b for a, b in zip(S.kinks[0], S.kinks[1])]
    want[S.labels.index("E1")] -= 1
    want[S.labels.index("E2")] -= 1
    assert w.f == binomial((-1, -1), want, 4, 0)
    assert S.format_class(tuple(want)) == S.format_class(S.class_from_dict({"D3": 1, "D4": 1}))


def test_seed_surface_mismatch():
    other = load_fixture("dp5").surface
    with pytest.raises(SeedError):
        canonical_diagram(PENTAGON, other, 3)


def test_rho_presentation_dp5():
    d = load_fixture("dp5").diagram(3)
    for j in range(5):
        rep = rho_presentation(d, j)
        assert rep["pass"]
        assert all(all(v.values()) for v in rep["checks"].values())
        assert len(rep["relations"]) == 4


def test_rho_presentation_special_fiber():
    d = load_fixture("dp5").diagram(1)
    rep = rho_presentation(d, 2)
    assert rep["pass"]
    # X_+ and X_- carry the kink, which vanishes modulo the boundary ideal
    assert rep["images"]["minus"]["X_plus"] == []
    assert rep["images"]["plus"]["X_minus"] == []


def test_rho_presentation_toric_ray():
    d = load_fixture("toric_p2").diagram(3)
    rep = rho_presentation(d, 0)
    assert rep["pass"]
    f_out, f_in = ray_functions(d, 0)
    assert f_out.is_one() and f_in.is_one()
    assert rep["relations"][2] == "X_+*X_- = q^(1/2)*z^kappa*f_out(q^-1*X)*f_in(X)*X^(-1)"


def test_rho_presentation_rejects_non_ray():
    from qscatter.scattering import DiagramError

    with pytest.raises(DiagramError):
        rho_presentation(load_fixture("dp5").diagram(2), 7)
