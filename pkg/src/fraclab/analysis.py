"""Special functions and Sobolev-constant machinery.

The critical embedding H^s -> L_{2*} with 2* = 2n/(n-2s) has an explicit
best constant on the whole space,

    S = (4 pi)^s * Gamma((n+2s)/2)/Gamma((n-2s)/2) * [Gamma(n/2)/Gamma(n)]^(2s/n),

attained (up to dilation, translation and scaling) by the profile
U(x) = (1 + |x|^2)^((2s-n)/2).  This module evaluates the constant and the
profile, computes discrete L_p norms and Rayleigh quotients, minimizes the
quotient over a subdomain by normalized gradient descent, and sweeps
dilations alpha*Omega, where the spectral form decreases toward the
restricted one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .domain import BoxGrid, GridFunction, SubDomain, dilate, extend_by_zero
from .operators import SymOperator, dirichlet_operator, navier_operator

__all__ = [
    "SobolevSetup",
    "QuotientResult",
    "SweepRow",
    "gamma",
    "extension_constant",
    "sobolev_constant_closed_form",
    "extremal_function",
    "lp_norm",
    "rayleigh_quotient",
    "minimize_quotient",
    "dilation_sweep",
]


def gamma(x: float) -> float:
    """Gamma function for positive arguments (relative error ~1e-15)."""
    if not (x > 0 and math.isfinite(x)):
        raise ValueError(f"gamma requires a positive finite argument, got {x}")
    return math.gamma(x)


def extension_constant(s: float) -> float:
    """The extension normalization C_s = 4^s Gamma(1+s)/Gamma(1-s) (= 1 at s = 1/2)."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"exponent must lie in (0, 1), got {s}")
    return 4.0**s * gamma(1.0 + s) / gamma(1.0 - s)


@dataclass(frozen=True)
class SobolevSetup:
    """Dimension and exponent of a subcritical embedding (requires n > 2s)."""

    n: int
    s: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"exponent must lie in (0, 1), got {self.s}")
        if self.n <= 2.0 * self.s:
            raise ValueError(f"embedding requires n > 2s, got n={self.n}, s={self.s}")

    @property
    def critical_exponent(self) -> float:
        return 2.0 * self.n / (self.n - 2.0 * self.s)


def sobolev_constant_closed_form(n: int, s: float) -> float:
    """Best whole-space constant of the critical embedding (see module docstring)."""
    setup = SobolevSetup(n=n, s=s)  # validates n > 2s
    n_, s_ = float(setup.n), setup.s
    return (
        (4.0 * math.pi) ** s_
        * gamma((n_ + 2.0 * s_) / 2.0)
        / gamma((n_ - 2.0 * s_) / 2.0)
        * (gamma(n_ / 2.0) / gamma(n_)) ** (2.0 * s_ / n_)
    )


def extremal_function(grid: BoxGrid, n: int, s: float) -> GridFunction:
    """The optimizer profile U(x) = (1+|x|^2)^((2s-n)/2) sampled at the grid nodes."""
    setup = SobolevSetup(n=n, s=s)
    if grid.dim != setup.n:
        raise ValueError(f"grid dimension {grid.dim} != n = {setup.n}")
    r2 = np.sum(grid.node_coords() ** 2, axis=1)
    return GridFunction(grid=grid, values=(1.0 + r2) ** ((2.0 * setup.s - setup.n) / 2.0))


def _values_and_grid(u, grid: BoxGrid | None) -> tuple[np.ndarray, BoxGrid]:
    if isinstance(u, GridFunction):
        if grid is not None and grid != u.grid:
            raise ValueError("explicit grid disagrees with the function's grid")
        return u.values, u.grid
    if grid is None:
        raise ValueError("a grid is required when passing raw values")
    return np.asarray(u, dtype=float), grid


def lp_norm(u, p: float, grid: BoxGrid | None = None) -> float:
    """Discrete L_p norm (h^dim * sum |u_i|^p)^(1/p) on the grid."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    vals, g = _values_and_grid(u, grid)
    hdim = g.h**g.dim
    return float((hdim * np.sum(np.abs(vals) ** p)) ** (1.0 / p))


def rayleigh_quotient(form_value: float, u, p: float, grid: BoxGrid | None = None) -> float:
    """Quotient form_value / ||u||_{L_p}^2; invariant under scaling of u."""
    denom = lp_norm(u, p, grid) ** 2
    if denom == 0.0:
        raise ZeroDivisionError("Rayleigh quotient undefined for u = 0")
    return float(form_value) / denom


@dataclass(frozen=True)
class QuotientResult:
    """Outcome of a quotient minimization (minimizer normalized in L_p)."""

    value: float
    minimizer: GridFunction
    iterations: int
    converged: bool

    def __post_init__(self):
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ValueError(f"quotient value must be positive and finite, got {self.value}")


def minimize_quotient(
    operator: SymOperator,
    domain: SubDomain,
    p: float,
    seed: np.ndarray,
    max_iter: int = 500,
    tol: float = 1e-9,
) -> QuotientResult:
    """Minimize  h^dim u^T M u / ||u||_{L_p}^2  over u on Omega by normalized descent.

    Each step moves against the constrained gradient M u - q |u|^(p-2) u,
    renormalizes in L_p, and halves the step on any non-decrease, so the
    value sequence is nonincreasing.  For p = 2 the minimum is the smallest
    eigenvalue of M.  Convergence flag: relative decrease fell below ``tol``.
    """
    if operator.n != domain.node_count:
        raise ValueError("operator size does not match the domain's node count")
    if p < 2:
        # the constrained gradient carries |u|^(p-2), singular below p = 2
        raise ValueError(f"p must be >= 2, got {p}")
    u0 = np.asarray(seed, dtype=float)
    if u0.shape != (operator.n,):
        raise ValueError(f"seed must have length {operator.n}, got shape {u0.shape}")
    if not np.any(u0):
        raise ValueError("seed must be nonzero")
    grid = domain.grid
    hdim = grid.h**grid.dim

    def normalize(v):
        return v / (hdim * np.sum(np.abs(v) ** p)) ** (1.0 / p)

    u = normalize(u0)
    mu = operator.apply(u)
    q = hdim * float(u @ mu)
    eta = 1.0 / float(np.max(np.abs(operator.eigen.eigenvalues)))
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        grad = mu - q * np.abs(u) ** (p - 2.0) * u
        while True:
            v = normalize(u - eta * grad)
            mv = operator.apply(v)
            qv = hdim * float(v @ mv)
            if qv <= q or eta < 1e-18:
                break
            eta *= 0.5
        rel_drop = (q - qv) / q if q > 0 else 0.0
        u, mu, q = v, mv, qv
        eta *= 1.25
        if 0.0 <= rel_drop < tol:
            converged = True
            break
    return QuotientResult(
        value=q,
        minimizer=extend_by_zero(u, domain),
        iterations=iterations,
        converged=converged,
    )


class SweepRow(NamedTuple):
    alpha: float
    q_navier: float
    q_dirichlet: float
    ratio: float


def dilation_sweep(
    u: np.ndarray, domain: SubDomain, s: float, alphas: list[float]
) -> list[SweepRow]:
    """Spectral form on alpha*Omega versus the restricted form, per dilation.

    ``u`` lives on Omega's nodes and is zero-extended into each dilate; all
    dilates must fit on Omega's existing box (the common lattice), otherwise
    the sweep raises.  Ratios are >= 1 up to roundoff and decrease toward 1.
    """
    alphas = [float(a) for a in alphas]
    if any(a2 <= a1 for a1, a2 in zip(alphas, alphas[1:])):
        raise ValueError("dilation factors must be strictly increasing")
    vals = np.asarray(u, dtype=float)
    if vals.shape != (domain.node_count,):
        raise ValueError(f"expected {domain.node_count} values on the mask")
    box = domain.grid
    q_dir = dirichlet_operator(domain, box, s).form(vals)
    rows = []
    base_idx = domain.indices
    for alpha in alphas:
        try:
            dil = dilate(domain, alpha, max_halfwidth=box.halfwidth)
        except ValueError as exc:
            raise ValueError(f"grid/box capacity exceeded at alpha={alpha}: {exc}") from exc
        dil_idx = dil.indices
        if not np.all(np.isin(base_idx, dil_idx)):
            raise ValueError(f"dilate by alpha={alpha} does not contain the base domain")
        v = np.zeros(dil.node_count)
        v[np.searchsorted(dil_idx, base_idx)] = vals
        q_nav = navier_operator(dil, s).form(v)
        rows.append(SweepRow(alpha=alpha, q_navier=q_nav, q_dirichlet=q_dir, ratio=q_nav / q_dir))
    return rows
