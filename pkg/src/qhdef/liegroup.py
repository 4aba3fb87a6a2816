"""Matrix Lie group core: exp, log, adjoint maps, invariant pairing, dexp, sampling.

Algebra vectors and group elements are plain square numpy arrays.  Inside the
geometry code most quantities are carried as coordinate vectors in the
model's algebra basis; `GroupModel.coords` / `GroupModel.matrix` convert.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, logm

SERIES_TOL = 1e-15
SERIES_MAX_TERMS = 500
LOG_SERIES_RADIUS = 0.1
DEXP_SINGULAR_TOL = 1e-9


class DomainError(ValueError):
    """Raised when an input leaves the domain where a chart or log is valid."""


class MembershipError(ValueError):
    """Raised when a matrix fails the defining relations of its model."""


def _stack(mats: np.ndarray) -> np.ndarray:
    """Real-stack (..., n, n) complex matrices into (..., 2n^2) vectors."""
    mats = np.asarray(mats)
    flat = mats.reshape(mats.shape[:-2] + (-1,))
    return np.concatenate([flat.real, flat.imag], axis=-1)


@dataclass(frozen=True, eq=False)
class GroupModel:
    """A concrete matrix Lie group with an algebra basis and invariant pairing.

    The pairing is ``<a, b> = pairing_scale * Re tr(ab)``.
    """

    name: str
    matrix_size: int
    algebra_basis: tuple
    kind: str
    pairing_scale: float = 1.0
    membership_tol: float = 1e-9
    log_radius: float = 1.0
    complex_entries: bool = False
    # derived in __post_init__
    basis: np.ndarray = field(init=False, repr=False)
    gram: np.ndarray = field(init=False, repr=False)
    structure: np.ndarray = field(init=False, repr=False)
    cartan: np.ndarray = field(init=False, repr=False)
    _proj: np.ndarray = field(init=False, repr=False)
    _stacked: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        dtype = complex if self.complex_entries else float
        basis = np.array([np.asarray(b, dtype=dtype) for b in self.algebra_basis])
        stacked = _stack(basis).T  # (2n^2, d)
        proj = np.linalg.pinv(stacked)
        gram = self.pairing_scale * np.real(np.einsum("aij,bji->ab", basis, basis))
        if abs(np.linalg.det(gram)) < 1e-12:
            raise ValueError(f"{self.name}: pairing is degenerate on the basis")
        # structure[c, a, b] = c-th coordinate of [b_a, b_b]
        brackets = np.einsum("aij,bjk->abik", basis, basis)
        brackets = brackets - brackets.transpose(1, 0, 2, 3)
        structure = np.einsum("ck,abk->cab", proj, _stack(brackets))
        # cartan[a, b, c] = <b_a, [b_b, b_c]>
        cartan = np.einsum("ae,ebc->abc", gram, structure)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "gram", gram)
        object.__setattr__(self, "structure", structure)
        object.__setattr__(self, "cartan", cartan)
        object.__setattr__(self, "_proj", proj)
        object.__setattr__(self, "_stacked", stacked)

    @property
    def abelian(self) -> bool:
        return not np.any(self.structure)

    @property
    def dim(self) -> int:
        return len(self.algebra_basis)

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.matrix_size, dtype=self.basis.dtype)

    def coords(self, x: np.ndarray) -> np.ndarray:
        """Basis coordinates of an algebra matrix (least-squares projection)."""
        return self._proj @ _stack(x)

    def matrix(self, c) -> np.ndarray:
        return np.tensordot(np.asarray(c, dtype=float), self.basis, axes=1)

    def algebra_residual(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(self._stacked @ self.coords(x) - _stack(x)))

    def in_algebra(self, x: np.ndarray) -> bool:
        return self.algebra_residual(x) <= self.membership_tol * max(1.0, np.linalg.norm(x))

    def membership_residual(self, g: np.ndarray) -> float:
        """Largest violation of the group's defining relations."""
        g = np.asarray(g)
        n = self.matrix_size
        eye = np.eye(n)
        res = []
        if self.kind in ("su", "torus"):
            res.append(np.linalg.norm(g.conj().T @ g - eye))
        if self.kind == "so":
            res.append(np.linalg.norm(g.T @ g - eye))
        if self.kind in ("so", "sl"):
            res.append(np.linalg.norm(np.imag(g)))
        if self.kind == "torus":
            res.append(np.linalg.norm(g - np.diag(np.diag(g))))
        if self.kind in ("su", "so", "sl"):
            res.append(abs(np.linalg.det(g) - 1.0))
        return float(max(res))

    def is_member(self, g: np.ndarray) -> bool:
        return self.membership_residual(g) <= self.membership_tol * max(1.0, np.linalg.norm(g))

    def pair_coords(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(a @ self.gram @ b)


# ---------------------------------------------------------------------------
# shipped models

_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def su2(pairing_scale: float = 1.0) -> GroupModel:
    # b_k = -(i/2) sigma_k, so [b_1, b_2] = b_3
    basis = tuple(-0.5j * s for s in _SIGMA)
    return GroupModel("su2", 2, basis, "su", pairing_scale, log_radius=2.0, complex_entries=True)


def so3(pairing_scale: float = 1.0) -> GroupModel:
    basis = []
    for k in range(3):
        m = np.zeros((3, 3))
        i, j = (k + 1) % 3, (k + 2) % 3
        m[j, i], m[i, j] = 1.0, -1.0
        basis.append(m)
    return GroupModel("so3", 3, tuple(basis), "so", pairing_scale, log_radius=2.0)


def t2(pairing_scale: float = 1.0) -> GroupModel:
    basis = (np.diag([1j, 0]), np.diag([0, 1j]))
    return GroupModel("t2", 2, basis, "torus", pairing_scale, log_radius=2.0, complex_entries=True)


def sl2r(pairing_scale: float = 1.0) -> GroupModel:
    h = np.array([[1.0, 0.0], [0.0, -1.0]])
    e = np.array([[0.0, 1.0], [0.0, 0.0]])
    f = np.array([[0.0, 0.0], [1.0, 0.0]])
    return GroupModel("sl2r", 2, (h, e, f), "sl", pairing_scale, log_radius=1.0)


MODELS = {"su2": su2, "so3": so3, "t2": t2, "sl2r": sl2r}


def get_model(name: str, pairing_scale: float = 1.0) -> GroupModel:
    try:
        return MODELS[name](pairing_scale)
    except KeyError:
        raise KeyError(f"unknown group model {name!r}; choose from {sorted(MODELS)}") from None


# ---------------------------------------------------------------------------
# matrix-level operations


def exp(model: GroupModel, x: np.ndarray) -> np.ndarray:
    g = expm(np.asarray(x, dtype=model.basis.dtype))
    if not model.is_member(g):
        raise MembershipError(f"exp left {model.name}: residual {model.membership_residual(g):.3e}")
    return g


def log(model: GroupModel, g: np.ndarray) -> np.ndarray:
    """Principal logarithm, projected onto the algebra.

    Only valid when ``||g - I||_2 < log_radius``; outside that ball a
    DomainError is raised and the caller must resample or shrink t.
    """
    g = np.asarray(g)
    dist = np.linalg.norm(g - np.eye(model.matrix_size), 2)
    if not dist < model.log_radius:
        raise DomainError(f"log: ||g - I|| = {dist:.4f} >= log_radius {model.log_radius}")
    if dist < LOG_SERIES_RADIUS:
        x = _log_series(g - np.eye(model.matrix_size))
    else:
        x, _ = logm(g, disp=False)
    return model.matrix(model.coords(x))


def _log_series(d: np.ndarray) -> np.ndarray:
    """log(1 + d) = d - d^2/2 + d^3/3 - ...; near 1 this sidesteps logm's edge cases."""
    total = d.copy()
    power = d
    for k in range(2, SERIES_MAX_TERMS):
        power = power @ d
        term = power * ((-1) ** (k + 1) / k)
        total = total + term
        if np.linalg.norm(term) < SERIES_TOL:
            break
    return total


def ad(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def Ad(g: np.ndarray, x: np.ndarray) -> np.ndarray:
    return g @ x @ np.linalg.inv(g)


def pair(model: GroupModel, a: np.ndarray, b: np.ndarray) -> float:
    return float(model.pairing_scale * np.real(np.trace(a @ b)))


def dexp(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Left-trivialized differential of exp: sum_k (-ad_x)^k v / (k+1)!."""
    total = np.array(v, dtype=np.result_type(x, v))
    term = total.copy()
    for k in range(1, SERIES_MAX_TERMS):
        term = -ad(x, term) / (k + 1)
        total = total + term
        if np.linalg.norm(term) < SERIES_TOL:
            break
    return total


# ---------------------------------------------------------------------------
# coordinate-level operators (d x d matrices acting on basis coordinates)


def ad_matrix(model: GroupModel, xc: np.ndarray) -> np.ndarray:
    return np.einsum("cab,a->cb", model.structure, xc)


def Ad_matrix(model: GroupModel, g: np.ndarray) -> np.ndarray:
    if model.abelian:
        # exact, so bracket-free quantities carry no conjugation roundoff
        return np.eye(model.dim)
    conj = g @ model.basis @ np.linalg.inv(g)
    return (model._proj @ _stack(conj).T)


def _series(first: np.ndarray, step) -> np.ndarray:
    total = first.copy()
    term = first
    for k in range(1, SERIES_MAX_TERMS):
        term = step(term, k)
        total = total + term
        if np.linalg.norm(term) < SERIES_TOL:
            break
    return total


def dexp_matrix(model: GroupModel, xc: np.ndarray) -> np.ndarray:
    """Matrix of v -> dexp_x(v) in basis coordinates."""
    A = ad_matrix(model, xc)
    return _series(np.eye(model.dim), lambda term, k: -A @ term / (k + 1))


def sinhc_matrix(M: np.ndarray) -> np.ndarray:
    """sinh(M) M^{-1} as the even power series sum M^{2k} / (2k+1)!."""
    M2 = M @ M
    return _series(np.eye(len(M)), lambda term, k: term @ M2 / ((2 * k) * (2 * k + 1)))


def dexp_invertible(model: GroupModel, x: np.ndarray) -> bool:
    return dexp_min_singular(model, x) > DEXP_SINGULAR_TOL


def dexp_min_singular(model: GroupModel, x: np.ndarray) -> float:
    return float(np.linalg.svd(dexp_matrix(model, model.coords(x)), compute_uv=False)[-1])


# ---------------------------------------------------------------------------
# sampling


def rng_from(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def sample_coords(model: GroupModel, rng_seed, scale: float) -> np.ndarray:
    return rng_from(rng_seed).uniform(-scale, scale, model.dim)


def sample_algebra(model: GroupModel, rng_seed, scale: float) -> np.ndarray:
    """Algebra element with basis coefficients uniform in [-scale, scale]."""
    return model.matrix(sample_coords(model, rng_seed, scale))


def sample_group(model: GroupModel, rng_seed, scale: float) -> np.ndarray:
    return exp(model, sample_algebra(model, rng_seed, scale))


NONCOMPACT_BASE_SCALE = 0.5


def base_scale(model: GroupModel, compact_scale: float = 1.0) -> float:
    """Sampling radius for chart base points; Ad grows exponentially on sl(2,R)."""
    return NONCOMPACT_BASE_SCALE if model.kind == "sl" else compact_scale
