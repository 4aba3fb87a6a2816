import numpy as np
import pytest

from qhdef import liegroup as lg
from qhdef import spaces as sp
from qhdef.axioms import CheckConfig, check_space

from conftest import GROUPS

ELEMENT = {"su2": [0.7, 0.3, 0.2], "so3": [0.7, 0.3, 0.2], "t2": [0.7, 0.3], "sl2r": [0.3, 0.2, 0.1]}
QUICK = CheckConfig(samples=6)


def _x(m):
    return m.matrix(np.array(ELEMENT[m.name]))


def _wedge(m, a1, b1, a2, b2):
    """<a ^ b>(X1, X2) for algebra-valued forms with a(Xi) = ai, b(Xi) = bi."""
    return lg.pair(m, a1, b2) - lg.pair(m, a2, b1)


@pytest.mark.parametrize("name", GROUPS)
def test_double_form_matches_defining_formula(name, rng):
    # [PAPER] omega = 1/2<Ad_beta a*theta^L ^ a*theta^L> + 1/2<a*theta^L ^ (b*theta^L + b*theta^R)>
    m = lg.get_model(name)
    beta = lg.sample_group(m, rng, lg.base_scale(m))
    Adb = lambda z: lg.Ad(beta, z)  # noqa: E731
    Q = sp.double_form_matrix(m, beta)
    for _ in range(4):
        u1, v1, u2, v2 = (lg.sample_algebra(m, rng, 1.0) for _ in range(4))
        want = 0.5 * _wedge(m, Adb(u1), u1, Adb(u2), u2) + 0.5 * _wedge(m, u1, v1 + Adb(v1), u2, v2 + Adb(v2))
        got = np.concatenate([m.coords(u1), m.coords(v1)]) @ Q @ np.concatenate([m.coords(u2), m.coords(v2)])
        assert got == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("name", GROUPS)
def test_tstar_form_matches_canonical_formula(name, rng):
    # [PAPER] sigma((y1, z1), (y2, z2)) = <y1, z2> - <y2, z1> + <x, [y1, y2]>
    m = lg.get_model(name)
    x = lg.sample_algebra(m, rng, 1.0)
    Q = sp.tstar_form_matrix(m, m.coords(x))
    y1, z1, y2, z2 = (lg.sample_algebra(m, rng, 1.0) for _ in range(4))
    want = lg.pair(m, y1, z2) - lg.pair(m, y2, z1) + lg.pair(m, x, lg.ad(y1, y2))
    got = np.concatenate([m.coords(y1), m.coords(z1)]) @ Q @ np.concatenate([m.coords(y2), m.coords(z2)])
    assert got == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("name", GROUPS)
def test_conj_and_orbit_orientation(name, rng):
    # [DERIVED] shipped orientation is the negative of 1/2(<v1,Ad_f v2> - <v2,Ad_f v1>)
    # and of -<y,[v1,v2]>; with it the moment condition holds with the frozen sign
    m = lg.get_model(name)
    f = lg.sample_group(m, rng, lg.base_scale(m))
    y = lg.sample_algebra(m, rng, 1.0)
    v1, v2 = lg.sample_algebra(m, rng, 1.0), lg.sample_algebra(m, rng, 1.0)
    c1, c2 = m.coords(v1), m.coords(v2)
    reversed_conj = 0.5 * (lg.pair(m, v1, lg.Ad(f, v2)) - lg.pair(m, v2, lg.Ad(f, v1)))
    assert c1 @ sp.conj_form_matrix(m, f) @ c2 == pytest.approx(-reversed_conj, abs=1e-12)
    assert c1 @ sp.orbit_form_matrix(m, m.coords(y)) @ c2 == pytest.approx(lg.pair(m, y, lg.ad(v1, v2)), abs=1e-12)


def test_kks_moment_condition_by_hand():
    # [DERIVED] X_v = [v, y], so sigma(X_v, X_w) = d<y, v>(X_w) = <[w, y], v> = <y, [v, w]>
    m = lg.get_model("su2")
    y, v, w = m.basis[2], m.basis[0], m.basis[1]
    assert lg.pair(m, lg.ad(w, y), v) == pytest.approx(lg.pair(m, y, lg.ad(v, w)))


@pytest.mark.parametrize(
    "name,coeffs,dim",
    [("su2", [0.7, 0.3, 0.2], 2), ("so3", [0.7, 0.3, 0.2], 2), ("t2", [0.7, 0.3], 0), ("sl2r", [0.3, 0.2, 0.1], 2)],
)
def test_orbit_and_class_dimensions(name, coeffs, dim):
    m = lg.get_model(name)
    x = m.matrix(np.array(coeffs))
    assert sp.orbit_space(m, x).dim == dim
    assert sp.conj_class_space(m, lg.exp(m, x)).dim == dim


def test_central_class_is_a_point():
    # [TRIVIAL] -I is central in SU(2): its class is a point
    m = lg.get_model("su2")
    s = sp.conj_class_space(m, -m.identity)
    assert s.dim == 0
    rep = check_space(s, QUICK)
    assert rep.passed and rep.ranks["max_rank"] == 0


def test_zero_orbit_vacuous_pass():
    m = lg.get_model("so3")
    rep = check_space(sp.orbit_space(m, np.zeros((3, 3))), QUICK)
    assert rep.passed and rep.ranks["min_rank"] == 0


@pytest.mark.parametrize("name", GROUPS)
@pytest.mark.parametrize("kind", ["double", "tstar", "conjugacy", "orbit"])
def test_shipped_spaces_pass(name, kind):
    m = lg.get_model(name)
    space = {
        "double": lambda: sp.double_space(m),
        "tstar": lambda: sp.tstar_space(m),
        "conjugacy": lambda: sp.conj_class_space(m, lg.exp(m, _x(m))),
        "orbit": lambda: sp.orbit_space(m, _x(m)),
    }[kind]()
    rep = check_space(space, QUICK)
    assert rep.passed, rep.to_dict()


def _fd_left(g_of_s, h=1e-6):
    return np.linalg.inv(g_of_s(0.0)) @ (g_of_s(h) - g_of_s(-h)) / (2 * h)


@pytest.mark.parametrize("name", GROUPS)
def test_double_generators_are_action_derivatives(name, rng):
    m = lg.get_model(name)
    s = sp.double_space(m).rebase(rng)
    p = s.embed(rng.uniform(-0.05, 0.05, s.dim))
    vc = rng.normal(size=m.dim)
    v = m.matrix(vc)
    for f in (0, 1):
        moved = lambda e: s.act(f, lg.exp(m, e * v), p)  # noqa: E731
        fd = np.concatenate([m.coords(_fd_left(lambda e: moved(e)[k])) for k in (0, 1)])
        np.testing.assert_allclose(s.generator(p, f) @ vc, fd, atol=1e-8)


@pytest.mark.parametrize("name", GROUPS)
def test_tstar_generators_are_action_derivatives(name, rng):
    m = lg.get_model(name)
    s = sp.tstar_space(m).rebase(rng)
    p = s.embed(np.zeros(s.dim))
    vc = rng.normal(size=m.dim)
    v = m.matrix(vc)
    h = 1e-6
    for f in (0, 1):
        moved = lambda e: s.act(f, lg.exp(m, e * v), p)  # noqa: E731
        a_part = m.coords(_fd_left(lambda e: moved(e)[0]))
        x_part = m.coords((moved(h)[1] - moved(-h)[1]) / (2 * h))
        np.testing.assert_allclose(s.generator(p, f) @ vc, np.concatenate([a_part, x_part]), atol=1e-8)


@pytest.mark.parametrize("name", GROUPS)
def test_double_rep_columns_are_coordinate_fields(name, rng):
    m = lg.get_model(name)
    s = sp.double_space(m).rebase(rng)
    u = rng.uniform(-0.1, 0.1, s.dim)
    R = s.rep(u)
    for k in range(s.dim):
        fd = np.concatenate(
            [m.coords(_fd_left(lambda h: s.embed(u + h * np.eye(s.dim)[k])[i])) for i in (0, 1)]
        )
        np.testing.assert_allclose(R[:, k], fd, atol=1e-8)


def test_transversal_selects_independent_images():
    images = np.array([[1.0, 2.0, 0.0], [0.0, 0.0, 1.0]])
    sel = sp.transversal(images)
    assert sel.shape == (3, 2)
    np.testing.assert_array_equal(np.argmax(sel, axis=0), [0, 2])


def test_point_space():
    m = lg.get_model("su2")
    qh, ham = sp.PointSpace(m), sp.PointSpace(m, sp.HAM)
    np.testing.assert_array_equal(qh.moment(qh.embed(np.zeros(0)))[0], m.identity)
    assert not np.any(ham.moment(ham.embed(np.zeros(0)))[0])
    assert check_space(qh, QUICK).passed and check_space(ham, QUICK).passed


def test_omega_matrix_is_pulled_back_form(rng):
    m = lg.get_model("so3")
    s = sp.double_space(m)
    u = rng.uniform(-0.1, 0.1, s.dim)
    R = s.rep(u)
    np.testing.assert_allclose(s.omega_matrix(u), R.T @ s.form(s.embed(u)) @ R, atol=1e-14)
    X, Y = rng.normal(size=(2, s.nrep))
    assert s.form_on(s.embed(u), X, Y) == pytest.approx(X @ s.form(s.embed(u)) @ Y)
