"""Lossy thermal bosonic channel acting on Gaussian moments.

The channel is the beam-splitter mixing of the signal with a thermal
environment, expressed directly on the first and second moments:

    mu_out    = sqrt(eta_eff) * mu_in
    sigma_out = eta_eff * sigma_in + (1 - eta_eff) * (2*n_th + 1) * I

with eta_eff = eta * eta_det folding the detector efficiency into the line
transmissivity.  Electronic noise of a realistic homodyne detector is not
injected into the map; it is exposed separately through
:func:`effective_noise` so that ideal-detector runs stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, SingularityError
from .states import GaussianState, validate


@dataclass(frozen=True)
class ChannelParams:
    """Transmissivity, thermal occupation and detector imperfections."""

    eta: float
    n_th: float
    eta_det: float = 1.0
    v_el: float = 0.0

    def __post_init__(self):
        for name in ("eta", "n_th", "eta_det", "v_el"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise InvalidParameterError(f"{name} must be a finite real, got {v!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidParameterError(f"eta must be in [0, 1], got {self.eta}")
        if not 0.0 < self.eta_det <= 1.0:
            raise InvalidParameterError(f"eta_det must be in (0, 1], got {self.eta_det}")
        if self.n_th < 0:
            raise InvalidParameterError(f"n_th must be >= 0, got {self.n_th}")
        if self.v_el < 0:
            raise InvalidParameterError(f"v_el must be >= 0, got {self.v_el}")

    @property
    def eta_eff(self) -> float:
        """Effective transmissivity eta * eta_det."""
        return self.eta * self.eta_det


def apply_loss(state: GaussianState, params: ChannelParams) -> GaussianState:
    """Propagate a state through the lossy thermal channel."""
    verdict = validate(state)
    if not verdict:
        raise InvalidParameterError(f"input state is unphysical: {verdict.reason}")
    e = params.eta_eff
    mu_out = math.sqrt(e) * state.mu
    sigma_out = e * state.sigma + (1.0 - e) * (2.0 * params.n_th + 1.0) * np.eye(2)
    return GaussianState(mu_out, sigma_out)


def effective_noise(params: ChannelParams) -> float:
    """Thermal occupation with detector electronic noise folded in.

    n_eff = n_th + v_el / (2 * (1 - eta_eff)).  Equals n_th exactly when
    v_el = 0.  A lossless channel with v_el > 0 has no finite equivalent and
    raises :class:`SingularityError`; that case has to be treated on its own.
    """
    if params.v_el == 0.0:
        return params.n_th
    e = params.eta_eff
    if e >= 1.0:
        raise SingularityError(
            "effective noise diverges at unit transmissivity with v_el > 0"
        )
    return params.n_th + params.v_el / (2.0 * (1.0 - e))
