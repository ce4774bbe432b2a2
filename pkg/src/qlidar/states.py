"""Single-mode Gaussian states in shot-noise units.

Conventions used throughout the package:

* the vacuum covariance matrix is the 2x2 identity, so a thermal state with
  occupation n_th has sigma = (2*n_th + 1) * I and a squeezed vacuum has
  sigma = diag(exp(-2r), exp(2r));
* the mean vector stores mu = sqrt(2) * (Re alpha, Im alpha), so a coherent
  amplitude alpha carries N_disp = |alpha|^2 = |mu|^2 / 2 photons;
* mean photon number bookkeeping: N = (tr(sigma) - 2) / 4 + |mu|^2 / 2.

The squeezed (low-variance) quadrature is fixed to the first axis; the
displacement direction is controlled by a phase angle and defaults to that
same axis, which is the configuration that maximises the homodyne SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

LAMBDA_MAX_DEFAULT = 0.95
DET_TOLERANCE = 1e-12


@dataclass(frozen=True)
class GaussianState:
    """First moment vector and 2x2 quadrature covariance of one bosonic mode.

    The covariance matrix is symmetrised and both arrays are frozen on
    construction.  Construction only checks shape and finiteness; physics
    (positivity, uncertainty relation) is checked by :func:`validate` so that
    deliberately unphysical matrices can still be inspected.
    """

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).reshape(-1)
        sigma = np.asarray(self.sigma, dtype=float)
        if mu.shape != (2,):
            raise InvalidParameterError(f"mu must be a 2-vector, got shape {mu.shape}")
        if sigma.shape != (2, 2):
            raise InvalidParameterError(f"sigma must be 2x2, got shape {sigma.shape}")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
            raise InvalidParameterError("state moments must be finite")
        sigma = 0.5 * (sigma + sigma.T)
        mu = mu.copy()
        mu.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def photon_number(self) -> float:
        """Mean photon number (tr(sigma) - 2) / 4 + |mu|^2 / 2."""
        return (np.trace(self.sigma) - 2.0) / 4.0 + 0.5 * float(self.mu @ self.mu)


@dataclass(frozen=True)
class ValidationResult:
    """Pass/fail verdict with the violated invariant named on failure."""

    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate(state: GaussianState, det_tol: float = DET_TOLERANCE) -> ValidationResult:
    """Check symmetry, positive definiteness and det(sigma) >= 1.

    The determinant bound is the single-mode uncertainty relation in the
    vacuum-variance-1 convention; ``det_tol`` absorbs floating-point
    undershoot from channel arithmetic.
    """
    s = state.sigma
    if abs(s[0, 1] - s[1, 0]) != 0.0:
        return ValidationResult(False, "sigma is not symmetric")
    det = s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0]
    tr = s[0, 0] + s[1, 1]
    if not (det > 0.0 and tr > 0.0):
        return ValidationResult(False, f"sigma is not positive definite (det={det:g}, tr={tr:g})")
    if det < 1.0 - det_tol:
        return ValidationResult(False, f"det(sigma)={det:.15g} violates the uncertainty bound det >= 1")
    return ValidationResult(True)


@dataclass(frozen=True)
class ProbeBudget:
    """Total photon budget and its split between squeezing and displacement.

    ``lam`` is the squeezing fraction: N_sq = lam * n_tot photons go into the
    squeezed vacuum, N_disp = (1 - lam) * n_tot into the coherent
    displacement.  ``displacement_phase`` orients the displacement in phase
    space (0 aligns it with the squeezed quadrature).  ``lam_max`` caps the
    admissible fraction; the default mirrors the usual cap used in allocation
    searches.
    """

    n_tot: float
    lam: float
    displacement_phase: float = 0.0
    lam_max: float = LAMBDA_MAX_DEFAULT

    def __post_init__(self):
        for name in ("n_tot", "lam", "displacement_phase", "lam_max"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise InvalidParameterError(f"{name} must be a finite real, got {v!r}")
        if self.n_tot < 0:
            raise InvalidParameterError(f"n_tot must be >= 0, got {self.n_tot}")
        if not 0.0 <= self.lam_max <= 1.0:
            raise InvalidParameterError(f"lam_max must be in [0, 1], got {self.lam_max}")
        if not 0.0 <= self.lam <= self.lam_max:
            raise InvalidParameterError(
                f"lam must be in [0, {self.lam_max}], got {self.lam}"
            )

    @property
    def n_squeeze(self) -> float:
        return self.lam * self.n_tot

    @property
    def n_disp(self) -> float:
        return (1.0 - self.lam) * self.n_tot


@dataclass(frozen=True)
class SqueezeParams:
    """Squeezing parameter r and coherent photon number |alpha|^2."""

    r: float
    alpha_mag_sq: float

    @classmethod
    def from_budget(cls, budget: ProbeBudget) -> "SqueezeParams":
        # invert N_sq = sinh^2(r)
        return cls(r=math.asinh(math.sqrt(budget.n_squeeze)), alpha_mag_sq=budget.n_disp)


def squeezed_vacuum(r: float) -> GaussianState:
    """Squeezed vacuum with sigma = diag(exp(-2r), exp(2r)) and zero mean."""
    if not (isinstance(r, (int, float)) and math.isfinite(r)):
        raise InvalidParameterError(f"squeezing parameter must be finite, got {r!r}")
    if r < 0:
        raise InvalidParameterError(f"squeezing parameter must be >= 0, got {r}")
    return GaussianState(np.zeros(2), np.diag([math.exp(-2.0 * r), math.exp(2.0 * r)]))


def thermal_state(n_th: float) -> GaussianState:
    """Thermal state with sigma = (2*n_th + 1) * I and zero mean."""
    if not (isinstance(n_th, (int, float)) and math.isfinite(n_th)):
        raise InvalidParameterError(f"thermal occupation must be finite, got {n_th!r}")
    if n_th < 0:
        raise InvalidParameterError(f"thermal occupation must be >= 0, got {n_th}")
    return GaussianState(np.zeros(2), (2.0 * n_th + 1.0) * np.eye(2))


def probe_from_budget(budget: ProbeBudget) -> GaussianState:
    """Displaced squeezed vacuum realising the given photon budget.

    The returned state satisfies sinh^2(r) + |mu|^2 / 2 = n_tot: the budget is
    exhausted exactly between squeezing and displacement.
    """
    sq = SqueezeParams.from_budget(budget)
    amp = math.sqrt(2.0 * sq.alpha_mag_sq)
    mu = amp * np.array([math.cos(budget.displacement_phase), math.sin(budget.displacement_phase)])
    sigma = np.diag([math.exp(-2.0 * sq.r), math.exp(2.0 * sq.r)])
    return GaussianState(mu, sigma)


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotate(state: GaussianState, theta: float) -> GaussianState:
    """Rotate a state in phase space: mu -> R mu, sigma -> R sigma R^T."""
    rot = rotation_matrix(theta)
    return GaussianState(rot @ state.mu, rot @ state.sigma @ rot.T)
