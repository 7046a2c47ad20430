"""Continuous-time state-space realizations of the kernel bases.

Each basis vector q satisfies dq/dt = A q with q(0) = B, where A places every
eigenvalue at -beta. Since A + beta*I is strictly lower triangular (nilpotent),
the matrix exponential is a terminating series and Lyapunov equations reduce
to a forward sweep with the fixed divisor 2*beta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .basis import LAGUERRE, KernelBasis
from .errors import ParameterError

__all__ = ["StateSpaceModel", "build_state_space", "expm", "solve_lyapunov"]

_SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class StateSpaceModel:
    """Realization (A, B) of a kernel basis: dq/dt = A q, q(0) = B."""

    A: np.ndarray
    B: np.ndarray
    basis: KernelBasis

    @property
    def order(self) -> int:
        return self.basis.order_P

    @property
    def beta(self) -> float:
        return self.basis.beta

    @cached_property
    def nilpotent(self) -> np.ndarray:
        """A + beta*I; strictly lower triangular, so its order-th power vanishes."""
        return self.A + self.beta * np.eye(self.order)


def build_state_space(basis: KernelBasis) -> StateSpaceModel:
    """Construct (A, B) for the Laguerre or Erlang basis.

    Laguerre: A is lower triangular with -beta on the diagonal and the k-th
    lower subdiagonal constant at (-1)^(k+1)*2*beta; B alternates +-sqrt(2*beta).
    Erlang: A is lower bidiagonal (-beta diagonal, +beta first subdiagonal);
    B = [beta, 0, ..., 0].
    """
    P, beta = basis.order_P, basis.beta
    A = -beta * np.eye(P)
    if basis.family == LAGUERRE:
        for k in range(1, P):
            A += np.diag(np.full(P - k, (-1.0) ** (k + 1) * 2.0 * beta), -k)
        B = math.sqrt(2.0 * beta) * (-1.0) ** np.arange(P)
    else:
        if P > 1:
            A += np.diag(np.full(P - 1, beta), -1)
        B = np.zeros(P)
        B[0] = beta
    return StateSpaceModel(A=A, B=B, basis=basis)


def expm(model: StateSpaceModel, dt: float) -> np.ndarray:
    """exp(A*dt), exact up to rounding.

    Factors as exp(-beta*dt) times the terminating series in the nilpotent
    part, evaluated in nested (Horner) form; no squaring or truncation.
    """
    if dt < 0:
        raise ParameterError(f"dt must be nonnegative, got {dt!r}")
    P = model.order
    eye = np.eye(P)
    N = model.nilpotent
    S = eye
    for k in range(P - 1, 0, -1):
        S = eye + (dt / k) * (N @ S)
    return math.exp(-model.beta * dt) * S


def solve_lyapunov(model: StateSpaceModel, Q: np.ndarray) -> np.ndarray:
    """Solve A X + X A^T + Q = 0 for symmetric Q.

    A is lower triangular with every diagonal entry -beta, so each entry of X
    follows from previously computed ones:
    ``X[i, j] = (Q[i, j] + A[i, :i] @ X[:i, j] + X[i, :j] @ A[j, :j]) / (2*beta)``
    swept over i >= j with the symmetric mirror filled as it goes. The result
    is symmetric bit-for-bit by construction.
    """
    Q = np.asarray(Q, dtype=float)
    P = model.order
    if Q.shape != (P, P):
        raise ParameterError(f"Q must have shape {(P, P)}, got {Q.shape}")
    asym = float(np.abs(Q - Q.T).max()) if P > 1 else 0.0
    if asym > _SYMMETRY_RTOL * max(1.0, float(np.abs(Q).max())):
        raise ParameterError(f"Q is not symmetric (max asymmetry {asym:.3e})")
    A = model.A
    denom = 2.0 * model.beta
    X = np.zeros((P, P))
    for i in range(P):
        for j in range(i + 1):
            acc = Q[i, j]
            if i:
                acc += A[i, :i] @ X[:i, j]
            if j:
                acc += X[i, :j] @ A[j, :j]
            x = acc / denom
            X[i, j] = x
            X[j, i] = x
    return X
