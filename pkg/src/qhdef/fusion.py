"""Products, internal and external fusion, and moduli spaces of flat connections."""
from __future__ import annotations

import numpy as np
from scipy.linalg import block_diag

from . import liegroup as lg
from .charts import wedge_pair_matrix
from .spaces import HAM, QH, PointSpace, StructuredSpace, double_space, tstar_space


def same_model(a: lg.GroupModel, b: lg.GroupModel) -> bool:
    return a is b or (a.name == b.name and a.pairing_scale == b.pairing_scale)


class ProductSpace(StructuredSpace):
    def __init__(self, s1: StructuredSpace, s2: StructuredSpace):
        if s1.flavor != s2.flavor:
            raise ValueError(f"cannot multiply a {s1.flavor} space with a {s2.flavor} space")
        if s1.pairing_rescale != s2.pairing_rescale:
            raise ValueError("product factors use different pairing rescales")
        self.s1, self.s2 = s1, s2
        self.flavor = s1.flavor
        self.pairing_rescale = s1.pairing_rescale
        self.factors = tuple(s1.factors) + tuple(s2.factors)
        self.dim = s1.dim + s2.dim
        self.nrep = s1.nrep + s2.nrep
        self.domain_radius = min(s1.domain_radius, s2.domain_radius)
        self.name = f"{s1.name} x {s2.name}"

    def embed(self, u):
        return self.s1.embed(u[: self.s1.dim]), self.s2.embed(u[self.s1.dim :])

    def rep(self, u):
        return block_diag(self.s1.rep(u[: self.s1.dim]), self.s2.rep(u[self.s1.dim :]))

    def form(self, p):
        return block_diag(self.s1.form(p[0]), self.s2.form(p[1]))

    def moment(self, p):
        return self.s1.moment(p[0]) + self.s2.moment(p[1])

    def moment_tangent(self, p):
        n1, n2 = self.s1.nrep, self.s2.nrep
        left = [np.hstack([m, np.zeros((m.shape[0], n2))]) for m in self.s1.moment_tangent(p[0])]
        right = [np.hstack([np.zeros((m.shape[0], n1)), m]) for m in self.s2.moment_tangent(p[1])]
        return left + right

    def generator(self, p, f):
        k = len(self.s1.factors)
        if f < k:
            G = self.s1.generator(p[0], f)
            return np.vstack([G, np.zeros((self.s2.nrep, G.shape[1]))])
        G = self.s2.generator(p[1], f - k)
        return np.vstack([np.zeros((self.s1.nrep, G.shape[1])), G])

    def act(self, f, g, p):
        k = len(self.s1.factors)
        if f < k:
            return self.s1.act(f, g, p[0]), p[1]
        return p[0], self.s2.act(f - k, g, p[1])

    def rebase(self, rng):
        return ProductSpace(self.s1.rebase(rng), self.s2.rebase(rng))


def merged_factor_map(n: int, i: int, j: int) -> list[list[int]]:
    """Inner factor indices behind each factor after merging j into i."""
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"cannot fuse factors {i} and {j} of {n}")
    groups = []
    for k in range(n):
        if k == j:
            continue
        groups.append([i, j] if k == i else [k])
    return groups


class FusedSpace(StructuredSpace):
    """Internal fusion of factors (i, j) of a space into one diagonal factor."""

    def __init__(self, inner: StructuredSpace, i: int, j: int):
        if not same_model(inner.factors[i], inner.factors[j]):
            raise ValueError("fused factors must act through the same group model")
        self.inner, self.i, self.j = inner, i, j
        self.groups = merged_factor_map(len(inner.factors), i, j)
        self.flavor = inner.flavor
        self.pairing_rescale = inner.pairing_rescale
        self.factors = tuple(inner.factors[g[0]] for g in self.groups)
        self.dim, self.nrep = inner.dim, inner.nrep
        self.domain_radius = inner.domain_radius
        self.name = f"fuse({inner.name}; {i},{j})"

    def embed(self, u):
        return self.inner.embed(u)

    def rep(self, u):
        return self.inner.rep(u)

    def form(self, p):
        Q = self.inner.form(p)
        if self.flavor == HAM:
            return Q
        model = self.inner.factors[self.i]
        mu = self.inner.moment(p)
        T = self.inner.moment_tangent(p)
        left = T[self.i]
        right = lg.Ad_matrix(model, mu[self.j]) @ T[self.j]
        return Q + 0.5 * wedge_pair_matrix(model, left, right, self.pairing_rescale)

    def moment(self, p):
        mu = self.inner.moment(p)
        out = []
        for g in self.groups:
            if len(g) == 1:
                out.append(mu[g[0]])
            elif self.flavor == QH:
                out.append(mu[self.i] @ mu[self.j])
            else:
                out.append(mu[self.i] + mu[self.j])
        return out

    def moment_tangent(self, p):
        T = self.inner.moment_tangent(p)
        out = []
        if self.flavor == QH:
            model = self.inner.factors[self.i]
            mu_j = self.inner.moment(p)[self.j]
        for g in self.groups:
            if len(g) == 1:
                out.append(T[g[0]])
            elif self.flavor == QH:
                # theta^L(d(ab)) = Ad_{b^-1} theta^L(da) + theta^L(db)
                out.append(lg.Ad_matrix(model, np.linalg.inv(mu_j)) @ T[self.i] + T[self.j])
            else:
                out.append(T[self.i] + T[self.j])
        return out

    def generator(self, p, f):
        return sum(self.inner.generator(p, k) for k in self.groups[f])

    def act(self, f, g, p):
        for k in reversed(self.groups[f]):
            p = self.inner.act(k, g, p)
        return p

    def rebase(self, rng):
        return FusedSpace(self.inner.rebase(rng), self.i, self.j)


def internal_fuse_qh(space: StructuredSpace, factors: tuple[int, int]) -> FusedSpace:
    if space.flavor != QH:
        raise ValueError("internal_fuse_qh needs a quasi-Hamiltonian space")
    return FusedSpace(space, *factors)


def internal_fuse_ham(space: StructuredSpace, factors: tuple[int, int]) -> FusedSpace:
    if space.flavor != HAM:
        raise ValueError("internal_fuse_ham needs a Hamiltonian space")
    return FusedSpace(space, *factors)


def external_fuse(s1: StructuredSpace, s2: StructuredSpace, shared: tuple[int, int] = (0, 0)) -> StructuredSpace:
    """Fuse factor shared[0] of s1 with factor shared[1] of s2 on the product."""
    if s1.flavor != s2.flavor:
        raise ValueError(f"flavor mismatch: {s1.flavor} vs {s2.flavor}")
    a, b = shared
    if not same_model(s1.factors[a], s2.factors[b]):
        raise ValueError("shared factors act through different group models")
    return FusedSpace(ProductSpace(s1, s2), a, len(s1.factors) + b)


def _moduli(model, genus: int, boundaries: int, piece, fuse_internal, flavor):
    if genus < 0 or boundaries < 0:
        raise ValueError("genus and boundary count must be non-negative")
    pieces = [piece(model) for _ in range(boundaries)]
    pieces += [fuse_internal(piece(model), (0, 1)) for _ in range(genus)]
    if not pieces:
        return PointSpace(model, flavor)
    acc = pieces[0]
    for nxt in pieces[1:]:
        acc = external_fuse(acc, nxt, (0, 0))
    return acc


def moduli_qh(model, genus: int, boundaries: int) -> StructuredSpace:
    """Flat G-connections on a genus-g surface with r+1 boundary circles, as fused doubles."""
    space = _moduli(model, genus, boundaries, double_space, internal_fuse_qh, QH)
    space.name = f"moduli_qh[{model.name}](g={genus},r={boundaries})"
    return space


def moduli_ham(model, genus: int, boundaries: int) -> StructuredSpace:
    space = _moduli(model, genus, boundaries, tstar_space, internal_fuse_ham, HAM)
    space.name = f"moduli_ham[{model.name}](g={genus},r={boundaries})"
    return space
