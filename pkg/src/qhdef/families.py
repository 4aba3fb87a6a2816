"""Hamiltonian deformation families over a t-line.

A family works on one chart shared by every fiber.  The chart data
("state") is t-independent; t enters only through the fiber 2-form, the
moment map in phi-chart coordinates, and the rescaled Maurer-Cartan forms.
Fibers with t != 0 are quasi-Hamiltonian for the pairing (1/t)<.,.>, the
zero fiber is Hamiltonian.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import block_diag
from scipy.optimize import minimize_scalar

from . import liegroup as lg
from .charts import TwoFormEval, wedge_pair_matrix
from .defspace import ChartPoint, theta_hat_matrix
from .fusion import merged_factor_map, same_model
from .liegroup import DomainError, GroupModel
from .spaces import BASE_SCALE, CHART_RADIUS, HAM, QH, StructuredSpace, _orbit_rep, transversal

SMALL_T = 1e-6
X0_SCALE = 0.5
DEFAULT_T_DOMAIN = (-2.0, 2.0)
SCAN_STEP = 1.0 / 64
SCAN_MAX = 4.0
SCAN_XTOL = 1e-8
# a refined local minimum this small is treated as singular (conservative)
SCAN_SINGULAR_TOL = 1e-6


class DeformationFamily:
    factors: tuple
    dim: int
    nrep: int
    t_domain: tuple = DEFAULT_T_DOMAIN
    name: str = "family"
    domain_radius: float = CHART_RADIUS

    def state(self, u):
        raise NotImplementedError

    def rep(self, u) -> np.ndarray:
        raise NotImplementedError

    def form(self, s, t: float) -> np.ndarray:
        raise NotImplementedError

    def mu_hat(self, s, t: float) -> list:
        """phi-chart coordinates (basis coordinates) of the moment, per factor."""
        raise NotImplementedError

    def theta_hat_tangent(self, s, t: float) -> list:
        """Per factor, the (d x nrep) matrix of theta-hat^L applied to d mu-hat."""
        raise NotImplementedError

    def generator(self, s, f: int) -> np.ndarray:
        raise NotImplementedError

    def act(self, f: int, g: np.ndarray, s):
        raise NotImplementedError

    def rebase(self, rng) -> "DeformationFamily":
        return self

    # -- derived ---------------------------------------------------------
    def in_domain(self, t: float) -> bool:
        lo, hi = self.t_domain
        return lo < t < hi

    def omega_chart(self, u, t: float) -> np.ndarray:
        R = self.rep(u)
        return R.T @ self.form(self.state(u), t) @ R

    def omega_form(self, t: float) -> TwoFormEval:
        return TwoFormEval(lambda u: self.omega_chart(u, t), self.dim, self.domain_radius)

    def mu_hat_chart(self, u, t: float) -> list:
        s = self.state(u)
        return [ChartPoint(m.matrix(c), t) for m, c in zip(self.factors, self.mu_hat(s, t))]

    def fiber(self, t: float) -> "FiberSpace":
        if not self.in_domain(t):
            raise DomainError(f"t = {t} outside the family's domain {self.t_domain}")
        return FiberSpace(self, t)


class FiberSpace(StructuredSpace):
    """The fiber over t of a deformation family, as a structured space."""

    def __init__(self, family: DeformationFamily, t: float):
        self.family = family
        self.t = float(t)
        self.flavor = QH if t != 0 else HAM
        self.pairing_rescale = 1.0 / t if t != 0 else 1.0
        self.factors = family.factors
        self.dim, self.nrep = family.dim, family.nrep
        self.domain_radius = family.domain_radius
        self.name = f"{family.name}@t={t:g}"

    def embed(self, u):
        return self.family.state(u)

    def rep(self, u):
        return self.family.rep(u)

    def form(self, p):
        return self.family.form(p, self.t)

    def moment(self, p):
        out = []
        for m, c in zip(self.factors, self.family.mu_hat(p, self.t)):
            x = m.matrix(c)
            out.append(lg.exp(m, self.t * x) if self.t != 0 else x)
        return out

    def moment_tangent(self, p):
        T = self.family.theta_hat_tangent(p, self.t)
        return [self.t * L for L in T] if self.t != 0 else T

    def generator(self, p, f):
        return self.family.generator(p, f)

    def act(self, f, g, p):
        return self.family.act(f, g, p)

    def rebase(self, rng):
        return FiberSpace(self.family.rebase(rng), self.t)


def fiber(family: DeformationFamily, t: float) -> FiberSpace:
    return family.fiber(t)


# ---------------------------------------------------------------------------
# difference quotients, evaluated as power series in t*ad


def sinh_quotient(model: GroupModel, yc: np.ndarray, t: float) -> np.ndarray:
    """(Ad_{e^{ty}} - Ad_{e^{-ty}}) / (2t), continued by ad_y at t = 0."""
    A = lg.ad_matrix(model, yc)
    if abs(t) < SMALL_T:
        return A
    return A @ lg.sinhc_matrix(t * A)


def double_operators(model: GroupModel, xc: np.ndarray, t: float):
    """A_t = (Ad_{e^-tx} - Ad_{e^tx})/(2t) and B_t = dexp_tx + Ad_{e^tx} dexp_tx."""
    d = model.dim
    if abs(t) < SMALL_T:
        return -lg.ad_matrix(model, xc), 2.0 * np.eye(d)
    A_t = -sinh_quotient(model, xc, t)
    dexp = lg.dexp_matrix(model, t * xc)
    B_t = dexp + lg.Ad_matrix(model, lg.exp(model, t * model.matrix(xc))) @ dexp
    return A_t, B_t


def _group_chart_point(model, g0, uc):
    return g0 @ lg.exp(model, model.matrix(uc))


class DoubleFamily(DeformationFamily):
    """G x (deformation space of G): the double at t = 1, T*G at t = 0.

    Chart (alpha, x) with alpha = alpha0 exp(U) and x = x0 + z; the fiber
    point over t != 0 is (alpha, exp(t x)).
    """

    def __init__(self, model: GroupModel, alpha0=None, x0=None, t_domain=DEFAULT_T_DOMAIN):
        self.model = model
        self.factors = (model, model)
        self.dim = self.nrep = 2 * model.dim
        self.alpha0 = model.identity if alpha0 is None else alpha0
        self.x0 = np.zeros(model.dim) if x0 is None else np.asarray(x0, dtype=float)
        self.t_domain = t_domain
        self.name = f"double_family[{model.name}]"

    def state(self, u):
        d = self.model.dim
        return _group_chart_point(self.model, self.alpha0, u[:d]), self.x0 + u[d:]

    def rep(self, u):
        d = self.model.dim
        return block_diag(lg.dexp_matrix(self.model, u[:d]), np.eye(d))

    def form(self, s, t):
        _, xc = s
        d = self.model.dim
        K = self.model.gram
        A_t, B_t = double_operators(self.model, xc, t)
        Q = np.zeros((2 * d, 2 * d))
        Q[:d, :d] = K @ A_t
        Q[:d, d:] = 0.5 * K @ B_t
        Q[d:, :d] = -Q[:d, d:].T
        return Q

    def mu_hat(self, s, t):
        a, xc = s
        return [lg.Ad_matrix(self.model, a) @ xc, -xc]

    def theta_hat_tangent(self, s, t):
        a, xc = s
        m, d = self.model, self.model.dim
        Ada = lg.Ad_matrix(m, a)
        dm0 = np.hstack([-Ada @ lg.ad_matrix(m, xc), Ada])
        dm1 = np.hstack([np.zeros((d, d)), -np.eye(d)])
        m0 = Ada @ xc
        return [theta_hat_matrix(m, "L", m0, t) @ dm0, theta_hat_matrix(m, "L", -xc, t) @ dm1]

    def generator(self, s, f):
        a, xc = s
        m, d = self.model, self.model.dim
        if f == 0:
            return np.vstack([lg.Ad_matrix(m, np.linalg.inv(a)), np.zeros((d, d))])
        return np.vstack([-np.eye(d), -lg.ad_matrix(m, xc)])

    def act(self, f, g, s):
        a, xc = s
        if f == 0:
            return g @ a, xc
        return a @ np.linalg.inv(g), lg.Ad_matrix(self.model, g) @ xc

    def rebase(self, rng):
        return DoubleFamily(
            self.model,
            lg.sample_group(self.model, rng, lg.base_scale(self.model, BASE_SCALE)),
            lg.sample_coords(self.model, rng, X0_SCALE),
            self.t_domain,
        )


def double_family(model: GroupModel) -> DoubleFamily:
    return DoubleFamily(model)


# ---------------------------------------------------------------------------
# conjugacy classes near the identity


def invertibility_interval(model: GroupModel, x: np.ndarray, step: float = SCAN_STEP, t_max: float = SCAN_MAX):
    """Open interval around 0 on which dexp_{t x} stays invertible.

    Scans the smallest singular value of dexp_{tx} on a grid and refines each
    local minimum with a bounded scalar minimization; a refined minimum below
    the singular threshold ends the interval at that t.  Returns (lo, hi);
    +-t_max means no singularity was found within the scan.
    """
    xc = model.coords(x)

    def sigma(t):
        return float(np.linalg.svd(lg.dexp_matrix(model, t * xc), compute_uv=False)[-1])

    def scan(sign):
        ts = sign * np.arange(0.0, t_max + step / 2, step)
        vals = np.array([sigma(t) for t in ts])
        for k in range(1, len(ts)):
            if vals[k] <= lg.DEXP_SINGULAR_TOL:
                return ts[k]
            right = vals[k + 1] if k + 1 < len(ts) else np.inf
            if vals[k] <= vals[k - 1] and vals[k] <= right:
                lo, hi = sorted((ts[k - 1], ts[min(k + 1, len(ts) - 1)]))
                res = minimize_scalar(sigma, bounds=(lo, hi), method="bounded", options={"xatol": SCAN_XTOL})
                if res.fun <= SCAN_SINGULAR_TOL:
                    return float(res.x)
        return sign * t_max

    return scan(-1.0), scan(1.0)


class ConjFamily(DeformationFamily):
    """Conjugacy classes C_{exp(t x)} over t != 0 and the adjoint orbit of x at t = 0.

    The chart is the orbit chart y(s) = Ad_{exp(S)} y0; the fiber point
    over t != 0 is exp(t y).
    """

    def __init__(self, model: GroupModel, x: np.ndarray, y0=None, t_domain=None):
        self.model = model
        self.x = np.asarray(x)
        self.factors = (model,)
        self.nrep = model.dim
        if t_domain is None:
            t_domain = invertibility_interval(model, self.x)
            if not (t_domain[0] < 0 and t_domain[1] > 1):
                bad = t_domain[1] if t_domain[1] <= 1 else t_domain[0]
                raise DomainError(f"dexp_(t x) is singular at t = {bad:.6f}, inside [0, 1]")
        self.t_domain = t_domain
        self.y0 = model.coords(self.x) if y0 is None else np.asarray(y0, dtype=float)
        self.basis_sel = transversal(-lg.ad_matrix(model, self.y0))
        self.dim = self.basis_sel.shape[1]
        self.name = f"conj_family[{model.name}]"

    def state(self, u):
        h = lg.exp(self.model, self.model.matrix(self.basis_sel @ u))
        return lg.Ad_matrix(self.model, h) @ self.y0

    def rep(self, u):
        return _orbit_rep(self.model, self.basis_sel, u)

    def form(self, s, t):
        # oriented like ConjClassSpace / OrbitSpace
        return -self.model.gram @ sinh_quotient(self.model, s, t)

    def mu_hat(self, s, t):
        return [s]

    def theta_hat_tangent(self, s, t):
        return [theta_hat_matrix(self.model, "L", s, t) @ -lg.ad_matrix(self.model, s)]

    def generator(self, s, f):
        return np.eye(self.model.dim)

    def act(self, f, g, s):
        return lg.Ad_matrix(self.model, g) @ s

    def rebase(self, rng):
        g = lg.sample_group(self.model, rng, lg.base_scale(self.model, BASE_SCALE))
        y0 = lg.Ad_matrix(self.model, g) @ self.model.coords(self.x)
        return ConjFamily(self.model, self.x, y0, self.t_domain)


def conj_family(model: GroupModel, x: np.ndarray) -> ConjFamily:
    return ConjFamily(model, x)


# ---------------------------------------------------------------------------
# products and fusion


class PointFamily(DeformationFamily):
    def __init__(self, model: GroupModel):
        self.model = model
        self.factors = (model,)
        self.dim = self.nrep = 0
        self.name = f"point_family[{model.name}]"

    def state(self, u):
        return ()

    def rep(self, u):
        return np.zeros((0, 0))

    def form(self, s, t):
        return np.zeros((0, 0))

    def mu_hat(self, s, t):
        return [np.zeros(self.model.dim)]

    def theta_hat_tangent(self, s, t):
        return [np.zeros((self.model.dim, 0))]

    def generator(self, s, f):
        return np.zeros((0, self.model.dim))

    def act(self, f, g, s):
        return s


class ProductFamily(DeformationFamily):
    def __init__(self, f1: DeformationFamily, f2: DeformationFamily):
        self.f1, self.f2 = f1, f2
        self.factors = tuple(f1.factors) + tuple(f2.factors)
        self.dim = f1.dim + f2.dim
        self.nrep = f1.nrep + f2.nrep
        self.t_domain = (max(f1.t_domain[0], f2.t_domain[0]), min(f1.t_domain[1], f2.t_domain[1]))
        self.domain_radius = min(f1.domain_radius, f2.domain_radius)
        self.name = f"{f1.name} x {f2.name}"

    def state(self, u):
        return self.f1.state(u[: self.f1.dim]), self.f2.state(u[self.f1.dim :])

    def rep(self, u):
        return block_diag(self.f1.rep(u[: self.f1.dim]), self.f2.rep(u[self.f1.dim :]))

    def form(self, s, t):
        return block_diag(self.f1.form(s[0], t), self.f2.form(s[1], t))

    def mu_hat(self, s, t):
        return self.f1.mu_hat(s[0], t) + self.f2.mu_hat(s[1], t)

    def theta_hat_tangent(self, s, t):
        n1, n2 = self.f1.nrep, self.f2.nrep
        left = [np.hstack([m, np.zeros((m.shape[0], n2))]) for m in self.f1.theta_hat_tangent(s[0], t)]
        right = [np.hstack([np.zeros((m.shape[0], n1)), m]) for m in self.f2.theta_hat_tangent(s[1], t)]
        return left + right

    def generator(self, s, f):
        k = len(self.f1.factors)
        if f < k:
            G = self.f1.generator(s[0], f)
            return np.vstack([G, np.zeros((self.f2.nrep, G.shape[1]))])
        G = self.f2.generator(s[1], f - k)
        return np.vstack([np.zeros((self.f1.nrep, G.shape[1])), G])

    def act(self, f, g, s):
        k = len(self.f1.factors)
        if f < k:
            return self.f1.act(f, g, s[0]), s[1]
        return s[0], self.f2.act(f - k, g, s[1])

    def rebase(self, rng):
        return ProductFamily(self.f1.rebase(rng), self.f2.rebase(rng))


class FusedFamily(DeformationFamily):
    """Fusion of factors (i, j) of a family.

    The correction term is t/2 <theta-hat^L(d mu-hat_i) ^ theta-hat^R(d mu-hat_j)>:
    over t != 0 it is the quasi-Hamiltonian fusion term for (1/t)<.,.>, and
    it vanishes on the zero fiber, where Hamiltonian fusion leaves the form alone.
    """

    def __init__(self, inner: DeformationFamily, i: int, j: int):
        if not same_model(inner.factors[i], inner.factors[j]):
            raise ValueError("fused factors must act through the same group model")
        self.inner, self.i, self.j = inner, i, j
        self.groups = merged_factor_map(len(inner.factors), i, j)
        self.factors = tuple(inner.factors[g[0]] for g in self.groups)
        self.dim, self.nrep = inner.dim, inner.nrep
        self.t_domain = inner.t_domain
        self.domain_radius = inner.domain_radius
        self.model = inner.factors[i]
        self.name = f"fuse({inner.name}; {i},{j})"

    def state(self, u):
        return self.inner.state(u)

    def rep(self, u):
        return self.inner.rep(u)

    def form(self, s, t):
        Q = self.inner.form(s, t)
        if t == 0:
            return Q
        m = self.model
        mh = self.inner.mu_hat(s, t)
        T = self.inner.theta_hat_tangent(s, t)
        right = lg.Ad_matrix(m, lg.exp(m, t * m.matrix(mh[self.j]))) @ T[self.j]
        return Q + 0.5 * t * wedge_pair_matrix(m, T[self.i], right)

    def mu_hat(self, s, t):
        mh = self.inner.mu_hat(s, t)
        m = self.model
        out = []
        for g in self.groups:
            if len(g) == 1:
                out.append(mh[g[0]])
            elif t == 0:
                out.append(mh[self.i] + mh[self.j])
            else:
                prod = lg.exp(m, t * m.matrix(mh[self.i])) @ lg.exp(m, t * m.matrix(mh[self.j]))
                out.append(m.coords(lg.log(m, prod)) / t)
        return out

    def theta_hat_tangent(self, s, t):
        T = self.inner.theta_hat_tangent(s, t)
        m = self.model
        out = []
        for g in self.groups:
            if len(g) == 1:
                out.append(T[g[0]])
            elif t == 0:
                out.append(T[self.i] + T[self.j])
            else:
                mj = self.inner.mu_hat(s, t)[self.j]
                Adinv = lg.Ad_matrix(m, lg.exp(m, -t * m.matrix(mj)))
                out.append(Adinv @ T[self.i] + T[self.j])
        return out

    def generator(self, s, f):
        return sum(self.inner.generator(s, k) for k in self.groups[f])

    def act(self, f, g, s):
        for k in reversed(self.groups[f]):
            s = self.inner.act(k, g, s)
        return s

    def rebase(self, rng):
        return FusedFamily(self.inner.rebase(rng), self.i, self.j)


def fuse_family(family: DeformationFamily, factors: tuple[int, int]) -> FusedFamily:
    return FusedFamily(family, *factors)


def external_fuse_family(f1: DeformationFamily, f2: DeformationFamily, shared: tuple[int, int] = (0, 0)) -> FusedFamily:
    a, b = shared
    if not same_model(f1.factors[a], f2.factors[b]):
        raise ValueError("shared factors act through different group models")
    return FusedFamily(ProductFamily(f1, f2), a, len(f1.factors) + b)


def moduli_family(model: GroupModel, genus: int, boundaries: int) -> DeformationFamily:
    """Deformation of M(Sigma) to N(Sigma), fused in the same order as the moduli builders."""
    if genus < 0 or boundaries < 0:
        raise ValueError("genus and boundary count must be non-negative")
    pieces = [double_family(model) for _ in range(boundaries)]
    pieces += [fuse_family(double_family(model), (0, 1)) for _ in range(genus)]
    if not pieces:
        return PointFamily(model)
    acc = pieces[0]
    for nxt in pieces[1:]:
        acc = external_fuse_family(acc, nxt, (0, 0))
    acc.name = f"moduli_family[{model.name}](g={genus},r={boundaries})"
    return acc
