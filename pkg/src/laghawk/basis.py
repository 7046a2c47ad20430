"""Orthonormal Laguerre and Erlang kernel bases sharing a single pole.

The Laguerre family is orthonormal on [0, inf) and sign-indefinite; the
Erlang family collects the nonnegative gamma densities with integer shape.
Both span the same exponential-polynomial space and are related by a lower
triangular change of basis ``g = L h``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = [
    "LAGUERRE",
    "ERLANG",
    "KernelBasis",
    "ErlangTransform",
    "recursion_coeffs",
    "eval_laguerre_polys",
    "eval_basis",
    "basis_laplace",
    "basis_mass",
    "jacobi_matrix",
    "erlang_transform",
]

LAGUERRE = "laguerre"
ERLANG = "erlang"


@dataclass(frozen=True)
class KernelBasis:
    """Kernel basis family with decay rate ``beta`` and ``order_P`` components."""

    family: str
    beta: float
    order_P: int

    def __post_init__(self) -> None:
        if self.family not in (LAGUERRE, ERLANG):
            raise ParameterError(f"unknown basis family {self.family!r}")
        if not (isinstance(self.beta, (int, float)) and math.isfinite(self.beta) and self.beta > 0):
            raise ParameterError(f"beta must be positive and finite, got {self.beta!r}")
        if not (isinstance(self.order_P, (int, np.integer)) and self.order_P >= 1):
            raise ParameterError(f"order_P must be an integer >= 1, got {self.order_P!r}")

    @classmethod
    def laguerre(cls, beta: float, order_P: int) -> "KernelBasis":
        return cls(LAGUERRE, float(beta), int(order_P))

    @classmethod
    def erlang(cls, beta: float, order_P: int) -> "KernelBasis":
        return cls(ERLANG, float(beta), int(order_P))


@dataclass(frozen=True)
class ErlangTransform:
    """Lower triangular change of basis ``g = L h`` and its closed-form inverse."""

    L: np.ndarray
    L_inverse: np.ndarray


def recursion_coeffs(j: int, beta: float) -> tuple[float, float, float]:
    """Three-term recursion coefficients (rho_j, kappa_j, gamma_j).

    The orthonormal Laguerre polynomials for the weight ``beta*exp(-beta*t)``
    satisfy ``u_{j+1} = (rho_j*t - kappa_j)*u_j - gamma_j*u_{j-1}`` with
    ``rho_j = 2*beta/(j+1)``, ``kappa_j = (2j+1)/(j+1)``, ``gamma_j = j/(j+1)``.
    """
    if not (isinstance(j, (int, np.integer)) and j >= 0):
        raise ParameterError(f"j must be a nonnegative integer, got {j!r}")
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta!r}")
    jp = float(j) + 1.0
    return 2.0 * beta / jp, (2.0 * j + 1.0) / jp, float(j) / jp


def _as_time_grid(t) -> tuple[np.ndarray, tuple[int, ...]]:
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ParameterError("t must be nonnegative")
    return np.atleast_1d(t_arr).ravel(), t_arr.shape


def eval_laguerre_polys(t, beta: float, P: int) -> np.ndarray:
    """First ``P`` orthonormal Laguerre polynomials at ``t`` by forward recursion.

    ``u_0 = sqrt(2/beta)``; returns shape ``(P,)`` for scalar ``t`` and
    ``(P,) + t.shape`` for array input.
    """
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta!r}")
    if P < 1:
        raise ParameterError(f"P must be >= 1, got {P!r}")
    flat, shape = _as_time_grid(t)
    u = np.empty((P, flat.size))
    u[0] = math.sqrt(2.0 / beta)
    if P > 1:
        u[1] = (2.0 * beta * flat - 1.0) * u[0]
    for j in range(1, P - 1):
        rho, kappa, gam = recursion_coeffs(j, beta)
        u[j + 1] = (rho * flat - kappa) * u[j] - gam * u[j - 1]
    return u.reshape((P,) + shape)


def eval_basis(t, basis: KernelBasis) -> np.ndarray:
    """Basis vector q(t): Laguerre h(t) = w(t)u(t) or Erlang gamma densities."""
    flat, shape = _as_time_grid(t)
    P, beta = basis.order_P, basis.beta
    w = beta * np.exp(-beta * flat)
    if basis.family == LAGUERRE:
        q = w * eval_laguerre_polys(flat, beta, P)
    else:
        q = np.empty((P, flat.size))
        q[0] = w
        for j in range(P - 1):
            q[j + 1] = q[j] * (beta * flat) / (j + 1.0)
    return q.reshape((P,) + shape)


def basis_laplace(omega, basis: KernelBasis) -> np.ndarray:
    """Laplace transform of the basis on the imaginary axis, q_bar(i*omega).

    For the Laguerre family each component is the common low-pass factor
    ``sqrt(2*beta)/(i*omega+beta)`` times a power of the all-pass ratio
    ``(beta-i*omega)/(beta+i*omega)``, so every component has the same modulus.
    """
    om = np.asarray(omega, dtype=float)
    shape = om.shape
    flat = np.atleast_1d(om).ravel()
    P, beta = basis.order_P, basis.beta
    s = 1j * flat
    out = np.empty((P, flat.size), dtype=complex)
    if basis.family == LAGUERRE:
        val = math.sqrt(2.0 * beta) / (s + beta)
        ratio = (beta - s) / (beta + s)
    else:
        val = beta / (s + beta)
        ratio = beta / (s + beta)
    for j in range(P):
        out[j] = val
        if j < P - 1:
            val = val * ratio
    return out.reshape((P,) + shape)


def basis_mass(basis: KernelBasis) -> np.ndarray:
    """Componentwise integral over [0, inf): sqrt(2/beta) for Laguerre, 1 for Erlang."""
    if basis.family == LAGUERRE:
        return np.full(basis.order_P, math.sqrt(2.0 / basis.beta))
    return np.ones(basis.order_P)


def jacobi_matrix(m: int, beta: float) -> np.ndarray:
    """Symmetric tridiagonal matrix of the three-term recursion in vector form.

    Satisfies ``t*u(t) = J_m u(t) + u_m(t)/rho_{m-1} * e_m`` with main diagonal
    ``kappa_j/rho_j`` and off-diagonals ``1/rho_j``.
    """
    if not (isinstance(m, (int, np.integer)) and m >= 1):
        raise ParameterError(f"m must be a positive integer, got {m!r}")
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta!r}")
    j = np.arange(m, dtype=float)
    rho = 2.0 * beta / (j + 1.0)
    kappa = (2.0 * j + 1.0) / (j + 1.0)
    J = np.diag(kappa / rho)
    if m > 1:
        off = 1.0 / rho[: m - 1]
        J += np.diag(off, 1) + np.diag(off, -1)
    return J


def erlang_transform(P: int, beta: float) -> ErlangTransform:
    """Closed-form L with L[i, j] = sqrt(beta/2) * C(i, j) / 2^i (0-indexed, j <= i).

    Binomial rows use the multiplicative recurrence; entries stay exact in
    double precision up to P ~ 25, beyond which C(P-1, k)/2^(P-1) loses bits.
    """
    if not (isinstance(P, (int, np.integer)) and P >= 1):
        raise ParameterError(f"P must be a positive integer, got {P!r}")
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta!r}")
    L = np.zeros((P, P))
    Li = np.zeros((P, P))
    sl = math.sqrt(beta / 2.0)
    sli = math.sqrt(2.0 / beta)
    for i in range(P):
        comb = np.empty(i + 1)
        comb[0] = 1.0
        for k in range(1, i + 1):
            comb[k] = comb[k - 1] * (i - k + 1) / k
        cols = np.arange(i + 1)
        L[i, : i + 1] = sl * comb / 2.0**i
        Li[i, : i + 1] = sli * (-1.0) ** (i - cols) * 2.0**cols * comb
    return ErlangTransform(L=L, L_inverse=Li)
