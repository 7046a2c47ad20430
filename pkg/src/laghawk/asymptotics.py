"""Population (infinite-horizon) quantities by spectral quadrature.

The stationary Gram matrix and cross covariance of the memory regressor are
integrals of the basis transforms against the spectral density
``C_bar(omega) = Lambda / |1 - phi_bar(i omega)|^2``. The substitution
``omega = beta * tan(theta)`` maps the real line onto ``(-pi/2, pi/2)`` and
turns the Laguerre integrand into a bounded trigonometric one, so a single
adaptive quadrature on [0, pi/2] covers the whole line with no truncation.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad_vec
from scipy.linalg import cho_factor, cho_solve

from .basis import ERLANG, LAGUERRE, KernelBasis, basis_laplace, basis_mass, erlang_transform
from .errors import DegenerateGramError, ParameterError
from .statespace import StateSpaceModel

__all__ = [
    "SpectralModel",
    "AsymptoticResult",
    "ClosedLoopCheck",
    "spectral_gram",
    "spectral_cross",
    "pseudo_true",
    "conditioning_study",
    "closed_loop_check",
    "study_csv",
    "INDEFINITE_IN_DOUBLE",
]

DEFAULT_QUAD_TOL = 1e-9
COND_CAP = 1e15
INDEFINITE_IN_DOUBLE = "indefinite-in-double"
_PD_RTOL = 1e-12


@dataclass(frozen=True)
class SpectralModel:
    """True kernel seen through its transform phi_bar(i omega), plus (Lambda, Gamma)."""

    phi_bar: Callable[[np.ndarray], np.ndarray]
    Lambda: float
    Gamma: float

    def __post_init__(self) -> None:
        if not (isinstance(self.Lambda, (int, float)) and math.isfinite(self.Lambda) and self.Lambda > 0):
            raise ParameterError(f"Lambda must be positive and finite, got {self.Lambda!r}")
        if not (0.0 <= self.Gamma < 1.0):
            raise ParameterError(f"Gamma must be in [0, 1), got {self.Gamma!r}")
        at_zero = complex(self.phi_bar(0.0))
        if abs(at_zero - self.Gamma) > 1e-8 * (1.0 + self.Gamma):
            raise ParameterError(
                f"phi_bar(0) = {at_zero:.8g} does not equal the branching ratio {self.Gamma:.8g}"
            )

    @classmethod
    def exponential(cls, Lambda: float, Gamma: float, beta: float) -> "SpectralModel":
        """phi(t) = Gamma * beta * exp(-beta t)."""
        if not beta > 0:
            raise ParameterError(f"beta must be positive, got {beta!r}")

        def phi_bar(omega):
            return Gamma * beta / (1j * np.asarray(omega, dtype=float) + beta)

        return cls(phi_bar=phi_bar, Lambda=float(Lambda), Gamma=float(Gamma))

    @classmethod
    def exponential_mixture(cls, Lambda: float, amplitudes, rates) -> "SpectralModel":
        """phi(t) = sum_k a_k * exp(-b_k t) with a_k >= 0, b_k > 0."""
        a = np.asarray(amplitudes, dtype=float)
        b = np.asarray(rates, dtype=float)
        if a.shape != b.shape or a.ndim != 1 or a.size == 0:
            raise ParameterError("amplitudes and rates must be 1-D arrays of equal length")
        if np.any(a < 0) or np.any(b <= 0):
            raise ParameterError("mixture requires amplitudes >= 0 and rates > 0")
        gamma = float(np.sum(a / b))
        if not gamma < 1.0:
            raise ParameterError(f"mixture branching ratio {gamma:.6g} must be < 1")

        def phi_bar(omega):
            om = np.asarray(omega, dtype=float)
            vals = np.sum(a[:, None] / (1j * np.atleast_1d(om).ravel()[None, :] + b[:, None]), axis=0)
            return vals.reshape(om.shape)

        return cls(phi_bar=phi_bar, Lambda=float(Lambda), Gamma=gamma)

    @classmethod
    def from_expansion(cls, Lambda: float, alpha, basis: KernelBasis) -> "SpectralModel":
        """phi(t) = alpha^T q(t) for an in-model truth."""
        alpha = np.asarray(alpha, dtype=float)
        if alpha.shape != (basis.order_P,):
            raise ParameterError(f"alpha must have shape ({basis.order_P},), got {alpha.shape}")
        gamma = float(basis_mass(basis) @ alpha)
        if not gamma < 1.0:
            raise ParameterError(f"expansion branching ratio {gamma:.6g} must be < 1")

        def phi_bar(omega):
            return alpha @ basis_laplace(omega, basis)

        return cls(phi_bar=phi_bar, Lambda=float(Lambda), Gamma=gamma)

    def covariance_ft(self, omega) -> np.ndarray:
        """Fourier transform of the covariance density: Lambda / |1 - phi_bar|^2."""
        pb = self.phi_bar(omega)
        return self.Lambda / np.abs(1.0 - pb) ** 2


def _laguerre_twin(basis: KernelBasis) -> KernelBasis:
    return KernelBasis(LAGUERRE, basis.beta, basis.order_P)


def _quad_halfline(integrand, beta: float, tol: float):
    """(1/pi) * Re int_0^inf f(omega) d omega via omega = beta*tan(theta).

    Conjugate symmetry of the spectral integrands makes this equal to the
    full-line integral with the 1/(2*pi) prefactor; the imaginary part cancels
    exactly between the two half-lines and is dropped analytically.
    """

    def f(theta):
        om = beta * math.tan(theta)
        jac = beta / math.cos(theta) ** 2
        return integrand(om) * (jac / math.pi)

    return quad_vec(f, 0.0, math.pi / 2.0, epsabs=tol, epsrel=1e-13, norm="max")


def spectral_gram(spec: SpectralModel, basis: KernelBasis, tol: float = DEFAULT_QUAD_TOL,
                  return_error: bool = False):
    """Asymptotic Gram matrix of the memory regressor for the given basis.

    The Erlang matrix is the exact congruence ``L R_laguerre L^T`` of the
    Laguerre one, so only one quadrature ever runs.
    """
    if not spec.Gamma < 1.0:
        raise ParameterError("spectral model requires Gamma < 1")
    if basis.family == ERLANG:
        R_h, err = spectral_gram(spec, _laguerre_twin(basis), tol=tol, return_error=True)
        L = erlang_transform(basis.order_P, basis.beta).L
        R = L @ R_h @ L.T
        err = err * float(np.linalg.norm(L, 2)) ** 2
        return (R, err) if return_error else R

    def integrand(om):
        q = basis_laplace(om, basis)
        return np.real(np.outer(q, q.conj())) * float(spec.covariance_ft(om))

    R, err = _quad_halfline(integrand, basis.beta, tol)
    R = 0.5 * (R + R.T)
    return (R, err) if return_error else R


def spectral_cross(spec: SpectralModel, basis: KernelBasis, tol: float = DEFAULT_QUAD_TOL,
                   return_error: bool = False):
    """Asymptotic cross covariance between the regressor and the true intensity."""
    if not spec.Gamma < 1.0:
        raise ParameterError("spectral model requires Gamma < 1")
    if basis.family == ERLANG:
        r_h, err = spectral_cross(spec, _laguerre_twin(basis), tol=tol, return_error=True)
        L = erlang_transform(basis.order_P, basis.beta).L
        r = L @ r_h
        err = err * float(np.linalg.norm(L, 2))
        return (r, err) if return_error else r

    def integrand(om):
        q = basis_laplace(om, basis)
        pb = complex(spec.phi_bar(om))
        return np.real(q * np.conj(pb)) * float(spec.covariance_ft(om))

    r, err = _quad_halfline(integrand, basis.beta, tol)
    return (r, err) if return_error else r


@dataclass(frozen=True)
class AsymptoticResult:
    """Population Gram system and the pseudo-true parameters it implies."""

    R_star: np.ndarray
    R_star_cross: np.ndarray
    alpha_star: np.ndarray
    c_star: float
    gamma_star: float
    eig_min: float
    eig_max: float
    cond: float
    Lambda: float
    basis: KernelBasis


def pseudo_true(spec: SpectralModel, basis: KernelBasis, tol: float = DEFAULT_QUAD_TOL) -> AsymptoticResult:
    """Limit of the least-squares estimator: the population projection of the truth."""
    R = spectral_gram(spec, basis, tol=tol)
    eigs = np.linalg.eigvalsh(R)
    if eigs[0] <= _PD_RTOL * abs(eigs[-1]):
        raise DegenerateGramError(
            f"asymptotic Gram matrix for {basis.family} order {basis.order_P} is not "
            f"positive definite in double precision (eigenvalues in [{eigs[0]:.3e}, {eigs[-1]:.3e}])"
        )
    cross = spectral_cross(spec, basis, tol=tol)
    alpha_star = cho_solve(cho_factor(R, lower=True), cross)
    gamma_star = float(basis_mass(basis) @ alpha_star)
    c_star = spec.Lambda * (1.0 - gamma_star)
    return AsymptoticResult(
        R_star=R,
        R_star_cross=cross,
        alpha_star=alpha_star,
        c_star=c_star,
        gamma_star=gamma_star,
        eig_min=float(eigs[0]),
        eig_max=float(eigs[-1]),
        cond=float(eigs[-1] / eigs[0]),
        Lambda=spec.Lambda,
        basis=basis,
    )


def conditioning_study(Gamma: float, beta: float, Lambda: float, P_list,
                       tol: float = DEFAULT_QUAD_TOL) -> list[dict]:
    """Laguerre-vs-Erlang conditioning sweep for an exponential truth.

    The Laguerre condition number stays below ((1+Gamma)/(1-Gamma))^2 at every
    order, while the Erlang one grows at least like 4^(P-1); Erlang results
    beyond double precision (or with a nonpositive computed eigenvalue) are
    recorded as the string ``indefinite-in-double``.
    """
    P_list = [int(P) for P in P_list]
    if not P_list or min(P_list) < 1:
        raise ParameterError("P_list must contain integers >= 1")
    spec = SpectralModel.exponential(Lambda, Gamma, beta)
    P_max = max(P_list)
    R_h = spectral_gram(spec, KernelBasis(LAGUERRE, beta, P_max), tol=tol)
    L = erlang_transform(P_max, beta).L
    bound_laguerre = ((1.0 + Gamma) / (1.0 - Gamma)) ** 2
    rows: list[dict] = []
    for P in P_list:
        eig_h = np.linalg.eigvalsh(R_h[:P, :P])
        L_P = L[:P, :P]
        eig_g = np.linalg.eigvalsh(L_P @ R_h[:P, :P] @ L_P.T)
        if eig_g[0] <= 0.0 or eig_g[-1] / eig_g[0] > COND_CAP:
            cond_erlang: float | str = INDEFINITE_IN_DOUBLE
        else:
            cond_erlang = float(eig_g[-1] / eig_g[0])
        svals = np.linalg.svd(L_P, compute_uv=False)
        rows.append(
            {
                "P": P,
                "cond_laguerre": float(eig_h[-1] / eig_h[0]),
                "cond_erlang": cond_erlang,
                "bound_laguerre": bound_laguerre,
                "bound_erlang": 4.0 ** (P - 1) / bound_laguerre,
                "sigma_min_sq_L": float(svals[-1] ** 2),
                "sigma_max_sq_L": float(svals[0] ** 2),
            }
        )
    return rows


@dataclass(frozen=True)
class ClosedLoopCheck:
    """Spectrum of A + B alpha_star^T and the stationary Lyapunov residual."""

    eigenvalues: np.ndarray
    is_hurwitz: bool
    lyapunov_residual: float


def closed_loop_check(result: AsymptoticResult, model: StateSpaceModel) -> ClosedLoopCheck:
    """Check that the pseudo-true weights act as stabilizing state feedback.

    In the stationary limit the Gram matrix satisfies
    ``A_cl R + R A_cl^T + Lambda B B^T = 0`` with ``A_cl = A + B alpha_star^T``,
    which forces A_cl to be Hurwitz.
    """
    A_cl = model.A + np.outer(model.B, result.alpha_star)
    eigs = np.linalg.eigvals(A_cl)
    residual = float(
        np.linalg.norm(
            A_cl @ result.R_star + result.R_star @ A_cl.T + result.Lambda * np.outer(model.B, model.B)
        )
    )
    return ClosedLoopCheck(
        eigenvalues=eigs,
        is_hurwitz=bool(np.all(eigs.real < 0.0)),
        lyapunov_residual=residual,
    )


_STUDY_COLUMNS = (
    "P",
    "cond_laguerre",
    "cond_erlang",
    "bound_laguerre",
    "bound_erlang",
    "sigma_min_sq_L",
    "sigma_max_sq_L",
)


def _csv_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def study_csv(rows: list[dict], metadata: dict) -> str:
    """Serialize study rows as CSV with a '#'-prefixed JSON metadata line."""
    lines = ["# " + json.dumps(metadata, sort_keys=True)]
    lines.append(",".join(_STUDY_COLUMNS))
    for row in rows:
        lines.append(",".join(_csv_cell(row[col]) for col in _STUDY_COLUMNS))
    return "\n".join(lines) + "\n"
