"""Thermodynamic states described by a Massieu-Planck potential phi(v, T).

A state is fully determined by phi and the gas constant R:

    p = R T phi_v,    e = R T^2 phi_T,    s = R (phi + T phi_T)

and the restriction of the pseudo-Riemannian form kappa to the state manifold
reads ``R^{-1} kappa = -(phi_TT + 2 phi_T / T) dT.dT + phi_vv dv.dv``.
Points where both coefficients are negative are *applicable* states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError

Scalar = Callable[[float, float], float]


@dataclass(frozen=True)
class PotentialModel:
    """Massieu-Planck potential with closed-form partial derivatives.

    ``phi_vT`` is optional; when present, adiabatic process curves get an
    analytic p'(rho) through the chain rule instead of finite differences.
    """

    name: str
    R: float
    phi: Scalar
    phi_v: Scalar
    phi_T: Scalar
    phi_vv: Scalar
    phi_TT: Scalar
    phi_vT: Optional[Scalar] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.R > 0:
            raise DomainError(f"gas constant R must be positive, got {self.R!r}")

    def check_domain(self, v, T):
        if not (np.all(np.asarray(v) > 0) and np.all(np.asarray(T) > 0)):
            raise DomainError(f"state ({v!r}, {T!r}) outside v>0, T>0")


@dataclass(frozen=True)
class StatePoint:
    v: float
    T: float
    p: float
    e: float
    s: float

    @property
    def rho(self) -> float:
        return 1.0 / self.v


@dataclass(frozen=True)
class KappaSignature:
    """Coefficients of kappa restricted to the state manifold, in the (dT, dv) basis."""

    coeff_TT: float
    coeff_vv: float

    @property
    def applicable(self) -> bool:
        return self.coeff_TT < 0 and self.coeff_vv < 0


def eval_state(model: PotentialModel, v: float, T: float) -> StatePoint:
    model.check_domain(v, T)
    R = model.R
    phi = model.phi(v, T)
    phi_T = model.phi_T(v, T)
    return StatePoint(
        v=v,
        T=T,
        p=R * T * model.phi_v(v, T),
        e=R * T**2 * phi_T,
        s=R * (phi + T * phi_T),
    )


def kappa_at(model: PotentialModel, v: float, T: float) -> KappaSignature:
    model.check_domain(v, T)
    R = model.R
    return KappaSignature(
        coeff_TT=-R * (model.phi_TT(v, T) + 2.0 * model.phi_T(v, T) / T),
        coeff_vv=R * model.phi_vv(v, T),
    )


def ideal_gas_model(n: float = 3, R: float = 1.0) -> PotentialModel:
    """Ideal gas with ``n`` degrees of freedom: p = RT/v, e = nRT/2.

    The potential carries the constant ``-n/2`` so that the entropy comes out
    as ``R ln(T^{n/2} v)`` with no additive offset.
    """
    if n < 3:
        raise DomainError(f"ideal gas needs n >= 3 degrees of freedom, got {n!r}")
    h = 0.5 * n
    return PotentialModel(
        name="ideal",
        R=float(R),
        phi=lambda v, T: np.log(v) + h * np.log(T) - h,
        phi_v=lambda v, T: 1.0 / v,
        phi_T=lambda v, T: h / T,
        phi_vv=lambda v, T: -1.0 / v**2,
        phi_TT=lambda v, T: -h / T**2,
        phi_vT=lambda v, T: 0.0 * v * T,
        params={"n": n},
    )


def van_der_waals_model(a: float, b: float, n: float = 3, R: float = 1.0) -> PotentialModel:
    """Van der Waals gas, p = RT/(v-b) - a/v^2, e = nRT/2 - a/v.

    Below the critical temperature the isotherms have a spinodal interval
    where phi_vv > 0, so it doubles as the non-applicable test model.
    """
    if not (a >= 0 and b >= 0):
        raise DomainError("van der Waals constants must be non-negative")
    h = 0.5 * n

    def phi(v, T):
        return np.log(v - b) + a / (R * T * v) + h * np.log(T) - h

    return PotentialModel(
        name="vdw",
        R=float(R),
        phi=phi,
        phi_v=lambda v, T: 1.0 / (v - b) - a / (R * T * v**2),
        phi_T=lambda v, T: -a / (R * T**2 * v) + h / T,
        phi_vv=lambda v, T: -1.0 / (v - b) ** 2 + 2.0 * a / (R * T * v**3),
        phi_TT=lambda v, T: 2.0 * a / (R * T**3 * v) - h / T**2,
        phi_vT=lambda v, T: a / (R * T**2 * v**2),
        params={"a": a, "b": b, "n": n},
    )


def zero_model(R: float = 1.0) -> PotentialModel:
    zero = lambda v, T: 0.0 * v * T  # noqa: E731
    return PotentialModel("zero", float(R), zero, zero, zero, zero, zero, zero)


MODEL_REGISTRY: dict[str, Callable[..., PotentialModel]] = {
    "ideal": ideal_gas_model,
    "vdw": van_der_waals_model,
    "zero": zero_model,
}


def model_from_config(block: dict) -> PotentialModel:
    """Build a model from a config block such as ``{"model": "ideal", "n": 3, "R": 1.0}``.

    ``{"model": "custom", "name": "vdw", ...}`` looks the builder up by name in
    :data:`MODEL_REGISTRY`; remaining keys are passed as keyword arguments.
    """
    block = dict(block)
    kind = block.pop("model", "ideal")
    if kind == "custom":
        kind = block.pop("name")
    try:
        builder = MODEL_REGISTRY[kind]
    except KeyError:
        raise DomainError(f"unknown thermodynamic model {kind!r}; known: {sorted(MODEL_REGISTRY)}") from None
    return builder(**block)


def critical_point_vdw(a: float, b: float, R: float = 1.0) -> tuple[float, float]:
    """(v_c, T_c) of the van der Waals model."""
    return 3.0 * b, 8.0 * a / (27.0 * R * b)


def finite_difference_partials(model: PotentialModel, v: float, T: float, rel_step: float = 1e-3) -> dict:
    """Five-point central-difference partials of phi, independent of the closed forms."""
    f = model.phi
    hv, hT = rel_step * v, rel_step * T

    def d1(g, h):
        return (-g(2 * h) + 8 * g(h) - 8 * g(-h) + g(-2 * h)) / (12 * h)

    def d2(g, h):
        return (-g(2 * h) + 16 * g(h) - 30 * g(0.0) + 16 * g(-h) - g(-2 * h)) / (12 * h**2)

    along_v = lambda d: f(v + d, T)  # noqa: E731
    along_T = lambda d: f(v, T + d)  # noqa: E731
    return {
        "phi_v": d1(along_v, hv),
        "phi_T": d1(along_T, hT),
        "phi_vv": d2(along_v, hv),
        "phi_TT": d2(along_T, hT),
    }


def partials_consistent(model: PotentialModel, v: float, T: float, rtol: float = 1e-6) -> bool:
    """True when every closed-form partial agrees with finite differences of phi."""
    for key, value in finite_difference_partials(model, v, T).items():
        if not math.isclose(getattr(model, key)(v, T), value, rel_tol=rtol, abs_tol=1e-9):
            return False
    return True
