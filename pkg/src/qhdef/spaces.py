"""Concrete quasi-Hamiltonian and Hamiltonian spaces on local charts.

Every space works with a *natural tangent representation*: a real vector
of length ``nrep`` per tangent vector (left-trivialized group tangents,
linear algebra coordinates, or a generating algebra element for orbits).
A space supplies, at a point p,

* ``form(p)``: the 2-form as an antisymmetric (nrep x nrep) matrix,
* ``moment(p)``: one matrix per acting factor (group element for
  quasi-Hamiltonian spaces, algebra element for Hamiltonian ones),
* ``moment_tangent(p)``: per factor, the (d x nrep) matrix of
  theta^L(d mu) (quasi-Hamiltonian) or d nu (Hamiltonian),
* ``generator(p, f)``: the (nrep x d) matrix sending v to the
  representation of X_v = d/ds exp(s v) . p for factor f,

and a chart ``u -> embed(u)`` together with ``rep(u)``, whose columns
represent the coordinate vector fields.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import block_diag

from . import liegroup as lg
from .charts import Chart, TwoFormEval
from .liegroup import GroupModel

QH = "quasiHamiltonian"
HAM = "hamiltonian"

CHART_RADIUS = 0.3
BASE_SCALE = 1.0
TRANSVERSAL_TOL = 1e-8


class StructuredSpace:
    flavor: str
    factors: tuple
    dim: int
    nrep: int
    name: str = "space"
    pairing_rescale: float = 1.0
    domain_radius: float = CHART_RADIUS

    # -- interface -------------------------------------------------------
    def embed(self, u):
        raise NotImplementedError

    def rep(self, u) -> np.ndarray:
        raise NotImplementedError

    def form(self, p) -> np.ndarray:
        raise NotImplementedError

    def moment(self, p) -> list:
        raise NotImplementedError

    def moment_tangent(self, p) -> list:
        raise NotImplementedError

    def generator(self, p, f: int) -> np.ndarray:
        raise NotImplementedError

    def act(self, f: int, g: np.ndarray, p):
        raise NotImplementedError

    def rebase(self, rng: np.random.Generator) -> "StructuredSpace":
        return self

    # -- derived ---------------------------------------------------------
    @property
    def chart(self) -> Chart:
        return Chart(self.dim, self.embed, self.domain_radius)

    def omega_matrix(self, u) -> np.ndarray:
        R = self.rep(u)
        return R.T @ self.form(self.embed(u)) @ R

    @property
    def omega(self) -> TwoFormEval:
        return TwoFormEval(self.omega_matrix, self.dim, self.domain_radius)

    def form_on(self, p, X: np.ndarray, Y: np.ndarray) -> float:
        return float(X @ self.form(p) @ Y)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} dim={self.dim} factors={[m.name for m in self.factors]}>"


def _group_chart(model: GroupModel, g0: np.ndarray, uc: np.ndarray):
    return g0 @ lg.exp(model, model.matrix(uc)), lg.dexp_matrix(model, uc)


def transversal(images: np.ndarray, tol: float = TRANSVERSAL_TOL) -> np.ndarray:
    """Greedy Gram-Schmidt selection of basis directions with independent images.

    `images[:, i]` is the infinitesimal-action image of basis element i.
    Returns a (d x k) matrix whose columns are the selected basis vectors.
    """
    d = images.shape[1]
    kept, ortho = [], []
    for i in range(d):
        r = images[:, i].astype(float).copy()
        for q in ortho:
            r -= (q @ r) * q
        n = np.linalg.norm(r)
        if n > tol:
            kept.append(i)
            ortho.append(r / n)
    return np.eye(d)[:, kept]


def _orbit_rep(model: GroupModel, basis_sel: np.ndarray, u) -> np.ndarray:
    sc = basis_sel @ u
    S = model.matrix(sc)
    return lg.Ad_matrix(model, lg.exp(model, S)) @ lg.dexp_matrix(model, sc) @ basis_sel


# ---------------------------------------------------------------------------
# the double


def double_form_matrix(model: GroupModel, beta: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Double 2-form on left-trivialized tangents (u, v) at (alpha, beta)."""
    K = model.gram * scale
    Adb = lg.Ad_matrix(model, beta)
    d = model.dim
    Q = np.zeros((2 * d, 2 * d))
    Q[:d, :d] = 0.5 * (Adb.T @ K - K @ Adb)
    Q[:d, d:] = 0.5 * K @ (np.eye(d) + Adb)
    Q[d:, :d] = -Q[:d, d:].T
    return Q


class DoubleSpace(StructuredSpace):
    """G x G with action (g, h).(a, b) = (g a h^-1, h b h^-1) and moment (a b a^-1, b^-1)."""

    flavor = QH

    def __init__(self, model: GroupModel, alpha0=None, beta0=None):
        self.model = model
        self.factors = (model, model)
        self.dim = self.nrep = 2 * model.dim
        self.name = f"double[{model.name}]"
        self.alpha0 = model.identity if alpha0 is None else alpha0
        self.beta0 = model.identity if beta0 is None else beta0

    def embed(self, u):
        d = self.model.dim
        a, _ = _group_chart(self.model, self.alpha0, u[:d])
        b, _ = _group_chart(self.model, self.beta0, u[d:])
        return a, b

    def rep(self, u):
        d = self.model.dim
        return block_diag(lg.dexp_matrix(self.model, u[:d]), lg.dexp_matrix(self.model, u[d:]))

    def form(self, p):
        return double_form_matrix(self.model, p[1], self.pairing_rescale)

    def moment(self, p):
        a, b = p
        return [a @ b @ np.linalg.inv(a), np.linalg.inv(b)]

    def moment_tangent(self, p):
        a, b = p
        m, d = self.model, self.model.dim
        Ada = lg.Ad_matrix(m, a)
        first = np.hstack([Ada @ (lg.Ad_matrix(m, np.linalg.inv(b)) - np.eye(d)), Ada])
        second = np.hstack([np.zeros((d, d)), -lg.Ad_matrix(m, b)])
        return [first, second]

    def generator(self, p, f):
        a, b = p
        m, d = self.model, self.model.dim
        if f == 0:
            return np.vstack([lg.Ad_matrix(m, np.linalg.inv(a)), np.zeros((d, d))])
        return np.vstack([-np.eye(d), lg.Ad_matrix(m, np.linalg.inv(b)) - np.eye(d)])

    def act(self, f, g, p):
        a, b = p
        if f == 0:
            return g @ a, b
        gi = np.linalg.inv(g)
        return a @ gi, g @ b @ gi

    def rebase(self, rng):
        return DoubleSpace(
            self.model,
            lg.sample_group(self.model, rng, lg.base_scale(self.model, BASE_SCALE)),
            lg.sample_group(self.model, rng, lg.base_scale(self.model, BASE_SCALE)),
        )


def double_space(model: GroupModel) -> DoubleSpace:
    return DoubleSpace(model)


# ---------------------------------------------------------------------------
# cotangent bundle, left-trivialized as G x g


def tstar_form_matrix(model: GroupModel, xc: np.ndarray) -> np.ndarray:
    """<y1, z2> - <y2, z1> + <x, [y1, y2]> on tangents (y, z) at (alpha, x)."""
    d = model.dim
    K = model.gram
    Q = np.zeros((2 * d, 2 * d))
    Q[:d, :d] = np.einsum("e,eab->ab", xc, model.cartan)
    Q[:d, d:] = K
    Q[d:, :d] = -K
    return Q


class TStarSpace(StructuredSpace):
    """T*G = G x g with action (g, h).(a, x) = (g a h^-1, Ad_h x) and moment (Ad_a x, -x)."""

    flavor = HAM

    def __init__(self, model: GroupModel, alpha0=None, x0=None):
        self.model = model
        self.factors = (model, model)
        self.dim = self.nrep = 2 * model.dim
        self.name = f"tstar[{model.name}]"
        self.alpha0 = model.identity if alpha0 is None else alpha0
        self.x0 = np.zeros(model.dim) if x0 is None else np.asarray(x0, dtype=float)

    def embed(self, u):
        d = self.model.dim
        a, _ = _group_chart(self.model, self.alpha0, u[:d])
        return a, self.model.matrix(self.x0 + u[d:])

    def rep(self, u):
        d = self.model.dim
        return block_diag(lg.dexp_matrix(self.model, u[:d]), np.eye(d))

    def form(self, p):
        return tstar_form_matrix(self.model, self.model.coords(p[1]))

    def moment(self, p):
        a, x = p
        return [a @ x @ np.linalg.inv(a), -x]

    def moment_tangent(self, p):
        a, x = p
        m, d = self.model, self.model.dim
        Ada = lg.Ad_matrix(m, a)
        A = lg.ad_matrix(m, m.coords(x))
        return [np.hstack([-Ada @ A, Ada]), np.hstack([np.zeros((d, d)), -np.eye(d)])]

    def generator(self, p, f):
        a, x = p
        m, d = self.model, self.model.dim
        if f == 0:
            return np.vstack([lg.Ad_matrix(m, np.linalg.inv(a)), np.zeros((d, d))])
        return np.vstack([-np.eye(d), -lg.ad_matrix(m, m.coords(x))])

    def act(self, f, g, p):
        a, x = p
        if f == 0:
            return g @ a, x
        gi = np.linalg.inv(g)
        return a @ gi, g @ x @ gi

    def rebase(self, rng):
        return TStarSpace(
            self.model,
            lg.sample_group(self.model, rng, lg.base_scale(self.model, BASE_SCALE)),
            lg.sample_coords(self.model, rng, lg.base_scale(self.model, BASE_SCALE)),
        )


def tstar_space(model: GroupModel) -> TStarSpace:
    return TStarSpace(model)


# ---------------------------------------------------------------------------
# conjugacy classes and adjoint orbits
#
# Tangents are represented by a generating element w (X_w).  Both forms are
# oriented so that the moment condition holds with the same sign as for the
# double and T*G; the reversed orientation 1/2(<v1, Ad_f v2> - <v2, Ad_f v1>)
# (resp. -<y, [v1, v2]>) satisfies it only with the opposite sign.


def conj_form_matrix(model: GroupModel, f: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """1/2(<v2, Ad_f v1> - <v1, Ad_f v2>) on generating elements v1, v2."""
    K = model.gram * scale
    Adf = lg.Ad_matrix(model, f)
    return 0.5 * (Adf.T @ K - K @ Adf)


def orbit_form_matrix(model: GroupModel, yc: np.ndarray) -> np.ndarray:
    """<y, [v1, v2]> on generating elements v1, v2."""
    return np.einsum("e,eab->ab", yc, model.cartan)


class ConjClassSpace(StructuredSpace):
    flavor = QH

    def __init__(self, model: GroupModel, a: np.ndarray, f0=None):
        self.model = model
        self.a = np.asarray(a)
        self.f0 = self.a if f0 is None else f0
        self.factors = (model,)
        self.nrep = model.dim
        images = lg.Ad_matrix(model, np.linalg.inv(self.f0)) - np.eye(model.dim)
        self.basis_sel = transversal(images)
        self.dim = self.basis_sel.shape[1]
        self.name = f"conjugacy[{model.name}]"

    def embed(self, u):
        h = lg.exp(self.model, self.model.matrix(self.basis_sel @ u))
        return h @ self.f0 @ np.linalg.inv(h)

    def rep(self, u):
        return _orbit_rep(self.model, self.basis_sel, u)

    def form(self, p):
        return conj_form_matrix(self.model, p, self.pairing_rescale)

    def moment(self, p):
        return [p]

    def moment_tangent(self, p):
        return [lg.Ad_matrix(self.model, np.linalg.inv(p)) - np.eye(self.model.dim)]

    def generator(self, p, f):
        return np.eye(self.model.dim)

    def act(self, f, g, p):
        return g @ p @ np.linalg.inv(g)

    def rebase(self, rng):
        g = lg.sample_group(self.model, rng, lg.base_scale(self.model, BASE_SCALE))
        return ConjClassSpace(self.model, self.a, g @ self.a @ np.linalg.inv(g))


def conj_class_space(model: GroupModel, a: np.ndarray) -> ConjClassSpace:
    return ConjClassSpace(model, a)


class OrbitSpace(StructuredSpace):
    flavor = HAM

    def __init__(self, model: GroupModel, x: np.ndarray, y0=None):
        self.model = model
        self.x = np.asarray(x)
        self.y0 = model.coords(self.x) if y0 is None else np.asarray(y0, dtype=float)
        self.factors = (model,)
        self.nrep = model.dim
        self.basis_sel = transversal(-lg.ad_matrix(model, self.y0))
        self.dim = self.basis_sel.shape[1]
        self.name = f"orbit[{model.name}]"

    def embed(self, u):
        h = lg.exp(self.model, self.model.matrix(self.basis_sel @ u))
        return self.model.matrix(lg.Ad_matrix(self.model, h) @ self.y0)

    def rep(self, u):
        return _orbit_rep(self.model, self.basis_sel, u)

    def form(self, p):
        return orbit_form_matrix(self.model, self.model.coords(p))

    def moment(self, p):
        return [p]

    def moment_tangent(self, p):
        return [-lg.ad_matrix(self.model, self.model.coords(p))]

    def generator(self, p, f):
        return np.eye(self.model.dim)

    def act(self, f, g, p):
        return g @ p @ np.linalg.inv(g)

    def rebase(self, rng):
        g = lg.sample_group(self.model, rng, lg.base_scale(self.model, BASE_SCALE))
        return OrbitSpace(self.model, self.x, lg.Ad_matrix(self.model, g) @ self.model.coords(self.x))


def orbit_space(model: GroupModel, x: np.ndarray) -> OrbitSpace:
    return OrbitSpace(model, x)


class PointSpace(StructuredSpace):
    """A single point acted on trivially, with moment 1 (or 0)."""

    def __init__(self, model: GroupModel, flavor: str = QH):
        self.model = model
        self.flavor = flavor
        self.factors = (model,)
        self.dim = self.nrep = 0
        self.name = f"point[{model.name}]"

    def embed(self, u):
        return ()

    def rep(self, u):
        return np.zeros((0, 0))

    def form(self, p):
        return np.zeros((0, 0))

    def moment(self, p):
        m = self.model
        return [m.identity if self.flavor == QH else np.zeros_like(m.identity)]

    def moment_tangent(self, p):
        return [np.zeros((self.model.dim, 0))]

    def generator(self, p, f):
        return np.zeros((0, self.model.dim))

    def act(self, f, g, p):
        return p
