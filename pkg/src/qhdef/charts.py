"""Chart-local numerical differential geometry.

Two-forms are evaluated in the coordinate frame of a chart, as the
antisymmetric Gram matrix ``Omega(u)[i, j] = omega(d/du_i, d/du_j)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .liegroup import DomainError, GroupModel

DEFAULT_STEP = 1e-4


@dataclass(frozen=True)
class Chart:
    dim: int
    embed: Callable
    domain_radius: float = 0.3

    def check(self, u: np.ndarray) -> None:
        if np.linalg.norm(u) >= self.domain_radius:
            raise DomainError(f"chart coordinates |u| = {np.linalg.norm(u):.4f} outside radius {self.domain_radius}")


class TwoFormEval:
    """A 2-form on a chart, given as a map u -> (dim x dim) Gram matrix."""

    def __init__(self, matrix: Callable[[np.ndarray], np.ndarray], dim: int, domain_radius: float = np.inf):
        self._matrix = matrix
        self.dim = dim
        self.domain_radius = domain_radius

    def matrix(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if np.linalg.norm(u) >= self.domain_radius:
            raise DomainError("2-form evaluated outside its chart domain")
        m = np.asarray(self._matrix(u), dtype=float)
        return 0.5 * (m - m.T)

    def __call__(self, u, i: int, j: int) -> float:
        return float(self.matrix(u)[i, j])


def _check_steps(u, step, radius):
    if step <= 0:
        raise ValueError("finite-difference step must be positive")
    if radius is not None and np.linalg.norm(u) + step >= radius:
        raise DomainError("finite-difference stencil leaves the chart domain")


def fd_jacobian(f: Callable, u, step: float = DEFAULT_STEP, domain_radius: float | None = None) -> np.ndarray:
    """Central-difference Jacobian of a map R^m -> R^n, shape (n, m)."""
    u = np.asarray(u, dtype=float)
    _check_steps(u, step, domain_radius)
    cols = []
    for k in range(len(u)):
        e = np.zeros_like(u)
        e[k] = step
        cols.append((np.asarray(f(u + e), dtype=float) - np.asarray(f(u - e), dtype=float)) / (2 * step))
    return np.stack(cols, axis=-1) if cols else np.zeros((np.size(f(u)), 0))


def form_derivatives(form: TwoFormEval, u, step: float = DEFAULT_STEP) -> np.ndarray:
    """D[k, i, j] = d/du_k Omega_ij by central differences."""
    u = np.asarray(u, dtype=float)
    _check_steps(u, step, form.domain_radius if np.isfinite(form.domain_radius) else None)
    out = np.zeros((form.dim, form.dim, form.dim))
    for k in range(form.dim):
        e = np.zeros_like(u)
        e[k] = step
        out[k] = (form.matrix(u + e) - form.matrix(u - e)) / (2 * step)
    return out


def ext_deriv_tensor(form: TwoFormEval, u, step: float = DEFAULT_STEP) -> np.ndarray:
    """Full tensor (d omega)_{ijk} at u; coordinate fields commute so no bracket terms."""
    D = form_derivatives(form, u, step)
    return D - D.transpose(1, 0, 2) + D.transpose(1, 2, 0)


def ext_deriv_2form(form: TwoFormEval, u, idx: tuple[int, int, int], step: float = DEFAULT_STEP) -> float:
    i, j, k = idx
    return float(ext_deriv_tensor(form, u, step)[i, j, k])


def gram_rank(form, u=None, tol: float = 1e-8):
    """Rank of an antisymmetric Gram matrix and a basis of its kernel.

    `form` may be a TwoFormEval (evaluated at u) or a matrix.
    """
    m = form.matrix(u) if isinstance(form, TwoFormEval) else np.asarray(form, dtype=float)
    if m.size == 0:
        return 0, []
    _, s, vt = np.linalg.svd(m)
    ref = s[0] if s[0] > tol else 1.0
    rank = int(np.sum(s > tol * ref))
    return rank, [vt[k] for k in range(rank, len(s))]


def wedge_pair(model: GroupModel, a1_u, a2_v, a1_v, a2_u, scale: float = 1.0) -> float:
    """<a1(u), a2(v)> - <a1(v), a2(u)> for algebra-valued 1-form values (coordinates)."""
    return scale * (model.pair_coords(a1_u, a2_v) - model.pair_coords(a1_v, a2_u))


def wedge_pair_matrix(model: GroupModel, A1: np.ndarray, A2: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Gram matrix of <A1 ^ A2> on a frame: columns of A1, A2 are the 1-form values."""
    M = A1.T @ model.gram @ A2
    return scale * (M - M.T)
