"""The deformation space of G to its Lie algebra.

Points with t != 0 carry a group element, points with t == 0 an algebra
element.  The chart ``phi(x, t) = (exp(t x), t)`` (``(x, 0)`` at t = 0)
gives smooth coordinates near the zero fiber.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import liegroup as lg
from .liegroup import GroupModel

EQ_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DefPoint:
    t: float
    payload: np.ndarray

    def is_group(self) -> bool:
        return self.t != 0


@dataclass(frozen=True, eq=False)
class ChartPoint:
    x: np.ndarray
    t: float


def close(p: DefPoint, q: DefPoint, tol: float = EQ_TOL) -> bool:
    return p.t == q.t and float(np.linalg.norm(p.payload - q.payload)) <= tol


def phi(model: GroupModel, c: ChartPoint) -> DefPoint:
    if c.t == 0:
        return DefPoint(0.0, np.asarray(c.x))
    return DefPoint(c.t, lg.exp(model, c.t * c.x))


def phi_inv(model: GroupModel, p: DefPoint) -> ChartPoint:
    if p.t == 0:
        return ChartPoint(np.asarray(p.payload), 0.0)
    return ChartPoint(lg.log(model, p.payload) / p.t, p.t)


def conj_act(model: GroupModel, g: np.ndarray, p: DefPoint) -> DefPoint:
    # same formula on both kinds of fiber: conjugation on G, Ad on the algebra
    return DefPoint(p.t, lg.Ad(g, p.payload))


def mul(model: GroupModel, p: DefPoint, q: DefPoint) -> DefPoint:
    if p.t != q.t:
        raise ValueError(f"mul: points lie over different t ({p.t} vs {q.t})")
    if p.t == 0:
        return DefPoint(0.0, p.payload + q.payload)
    return DefPoint(p.t, p.payload @ q.payload)


def mul_chart(model: GroupModel, c1: ChartPoint, c2: ChartPoint) -> ChartPoint:
    """(1/t) log(exp(tx) exp(ty)), or x + y at t = 0."""
    if c1.t != c2.t:
        raise ValueError(f"mul_chart: points lie over different t ({c1.t} vs {c2.t})")
    t = c1.t
    if t == 0:
        return ChartPoint(c1.x + c2.x, 0.0)
    prod = lg.exp(model, t * c1.x) @ lg.exp(model, t * c2.x)
    return ChartPoint(lg.log(model, prod) / t, t)


def bch4(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Baker-Campbell-Hausdorff series truncated after degree 4."""
    xy = lg.ad(x, y)
    return (
        x
        + y
        + xy / 2
        + (lg.ad(x, xy) - lg.ad(y, xy)) / 12
        - lg.ad(y, lg.ad(x, xy)) / 24
    )


def mul_chart_bch4(c1: ChartPoint, c2: ChartPoint) -> ChartPoint:
    t = c1.t
    if t == 0:
        return ChartPoint(c1.x + c2.x, 0.0)
    return ChartPoint(bch4(t * c1.x, t * c2.x) / t, t)


def theta_hat(model: GroupModel, side: Literal["L", "R"], c: ChartPoint, v: np.ndarray) -> np.ndarray:
    """Rescaled Maurer-Cartan form on a fiber-direction chart tangent v at c."""
    if c.t == 0:
        return np.array(v)
    left = lg.dexp(c.t * c.x, v)
    if side == "L":
        return left
    if side == "R":
        return lg.Ad(lg.exp(model, c.t * c.x), left)
    raise ValueError(f"side must be 'L' or 'R', got {side!r}")


def theta_hat_matrix(model: GroupModel, side: str, xc: np.ndarray, t: float) -> np.ndarray:
    """Coordinate matrix of v -> theta_hat(side, (x, t), v)."""
    if t == 0:
        return np.eye(model.dim)
    left = lg.dexp_matrix(model, t * xc)
    if side == "L":
        return left
    return lg.Ad_matrix(model, lg.exp(model, t * model.matrix(xc))) @ left


# the three structure maps of a deformation space, pulled back through phi


def projection(p: DefPoint) -> float:
    return p.t


def kappa(model: GroupModel, p: DefPoint) -> np.ndarray:
    """Projection to G: the group element off the zero fiber, the identity on it."""
    return p.payload if p.t != 0 else model.identity


def f_tilde(f, df, p: DefPoint) -> float:
    """(1/t) f(g) off the zero fiber and df(x) on it, for f vanishing at 1."""
    if p.t == 0:
        return float(df(p.payload))
    return float(f(p.payload)) / p.t
