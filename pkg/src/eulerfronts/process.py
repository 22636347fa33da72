"""Thermodynamic process curves rho -> (T, p, e, s) closing the flow equations.

Along a process the pressure becomes a function of density alone and the
system reduces to the barotropic pair

    rho_t + (rho u)_x = 0,    u_t + u u_x + p'(rho)/rho rho_x = 0,

whose type is decided by the sign of p'(rho).  Everything downstream only
needs p'(rho) through ``A(rho) = sqrt(p'(rho)) / rho`` and its derivative.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import AmbiguityError, DomainError
from .thermo import PotentialModel, StatePoint, eval_state

DEFAULT_RHO_DOMAIN = (1e-3, 1e3)

Func = Callable[[np.ndarray], np.ndarray]


def five_point_derivative(f: Func, x, rel_step: float = 1e-5):
    """Central 5-point first derivative with step ``h = x * rel_step``."""
    x = np.asarray(x, dtype=float)
    h = rel_step * np.abs(x)
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


@dataclass(frozen=True)
class ProcessCurve:
    """One-parameter process with barotropic pressure law p(rho).

    ``power_law = (A0, m)`` is set when ``A(rho) = A0 rho**m`` holds exactly;
    the solution family then uses closed-form antiderivatives.
    """

    p: Func
    dp: Func
    d2p: Optional[Func] = None
    rho_domain: tuple[float, float] = DEFAULT_RHO_DOMAIN
    T: Optional[Func] = None
    model: Optional[PotentialModel] = None
    power_law: Optional[tuple[float, float]] = None
    name: str = "custom"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = self.rho_domain
        if not (0 < lo < hi):
            raise DomainError(f"rho_domain must satisfy 0 < lo < hi, got {self.rho_domain!r}")

    def check(self, rho):
        lo, hi = self.rho_domain
        r = np.asarray(rho)
        if np.any(r < lo) or np.any(r > hi):
            raise DomainError(f"rho={rho!r} outside process domain [{lo}, {hi}]")

    def second_derivative(self, rho):
        if self.d2p is not None:
            return self.d2p(rho)
        return five_point_derivative(self.dp, rho)

    def A(self, rho):
        if self.power_law is not None:
            A0, m = self.power_law
            return A0 * np.asarray(rho, dtype=float) ** m
        return np.sqrt(self.dp(rho)) / rho

    def dA(self, rho):
        if self.power_law is not None:
            A0, m = self.power_law
            return A0 * m * np.asarray(rho, dtype=float) ** (m - 1)
        c = np.sqrt(self.dp(rho))
        return self.second_derivative(rho) / (2.0 * rho * c) - c / rho**2

    def sound_speed(self, rho):
        return np.sqrt(self.dp(rho))

    def state(self, rho) -> StatePoint:
        """Full thermodynamic state at ``rho``; needs a model and T(rho)."""
        if self.model is None or self.T is None:
            raise DomainError(f"process {self.name!r} carries no thermodynamic model")
        return eval_state(self.model, 1.0 / rho, float(self.T(rho)))


@dataclass(frozen=True)
class HyperbolicityReport:
    rho: float
    P_matrix: np.ndarray
    det: float
    classification: str


def _ideal_adiabatic(model: PotentialModel, s0: float, rho_domain) -> ProcessCurve:
    n, R = model.params["n"], model.R
    K = math.exp(2.0 * s0 / (R * n))
    k = 2.0 / n
    A0 = math.sqrt(R * (1.0 + k) * K)
    m = 1.0 / n - 1.0
    return ProcessCurve(
        p=lambda r: R * K * np.asarray(r, dtype=float) ** (k + 1),
        dp=lambda r: R * K * (k + 1) * np.asarray(r, dtype=float) ** k,
        d2p=lambda r: R * K * (k + 1) * k * np.asarray(r, dtype=float) ** (k - 1),
        rho_domain=tuple(rho_domain),
        T=lambda r: K * np.asarray(r, dtype=float) ** k,
        model=model,
        power_law=(A0, m),
        name="adiabatic",
        meta={"s0": s0, "A0": A0, "m": m},
    )


def _solve_temperature(model: PotentialModel, s0: float, rho: float, log_bracket, probes: int = 96) -> float:
    v = 1.0 / rho
    R = model.R
    taus = np.linspace(*log_bracket, probes)
    Ts = np.exp(taus)
    s_T = R * (2.0 * model.phi_T(v, Ts) + Ts * model.phi_TT(v, Ts))
    if np.any(s_T <= 0) and np.any(s_T > 0):
        raise AmbiguityError(f"entropy is not monotone in T at rho={rho} on the bracket")

    def resid(tau):
        T = math.exp(tau)
        return R * (model.phi(v, T) + T * model.phi_T(v, T)) - s0

    lo, hi = log_bracket
    f_lo, f_hi = resid(lo), resid(hi)
    if f_lo * f_hi > 0:
        raise DomainError(f"no temperature with s={s0} at rho={rho} in T-bracket")
    tau = brentq(resid, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return math.exp(tau)


def _numeric_adiabatic(model: PotentialModel, s0: float, rho_domain, T_bracket) -> ProcessCurve:
    log_bracket = (math.log(T_bracket[0]), math.log(T_bracket[1]))
    R = model.R
    solve = np.vectorize(lambda r: _solve_temperature(model, s0, float(r), log_bracket), otypes=[float])

    def T(rho):
        out = solve(rho)
        return out if np.ndim(out) else float(out)

    def p(rho):
        return R * T(rho) * model.phi_v(1.0 / np.asarray(rho, dtype=float), T(rho))

    if model.phi_vT is not None:

        def dp(rho):
            rho = np.asarray(rho, dtype=float)
            v, Tr = 1.0 / rho, T(rho)
            dv = -1.0 / rho**2
            s_v = R * (model.phi_v(v, Tr) + Tr * model.phi_vT(v, Tr))
            s_T = R * (2.0 * model.phi_T(v, Tr) + Tr * model.phi_TT(v, Tr))
            dT = -s_v * dv / s_T
            return R * (dT * model.phi_v(v, Tr) + Tr * (model.phi_vv(v, Tr) * dv + model.phi_vT(v, Tr) * dT))

    else:

        def dp(rho):
            return five_point_derivative(p, rho)

    return ProcessCurve(
        p=p, dp=dp, rho_domain=tuple(rho_domain), T=T, model=model, name="adiabatic", meta={"s0": s0}
    )


def adiabatic_process(
    model: PotentialModel,
    s0: float,
    rho_domain=DEFAULT_RHO_DOMAIN,
    numeric: bool = False,
    T_bracket=(1e-12, 1e12),
) -> ProcessCurve:
    """Constant-entropy process s(1/rho, T) = s0.

    The ideal gas gets the closed form ``T = exp(2 s0/(R n)) rho^{2/n}``.
    Any other model, or ``numeric=True``, solves for T by bracketed root
    finding in log T.
    """
    if model.name == "ideal" and not numeric:
        return _ideal_adiabatic(model, s0, rho_domain)
    return _numeric_adiabatic(model, s0, rho_domain, T_bracket)


def isothermal_process(model: PotentialModel, T0: float, rho_domain=DEFAULT_RHO_DOMAIN) -> ProcessCurve:
    """Constant-temperature process; p'(rho) = -R T0 phi_vv / rho^2 in closed form."""
    R = model.R

    def p(rho):
        return R * T0 * model.phi_v(1.0 / np.asarray(rho, dtype=float), T0)

    def dp(rho):
        rho = np.asarray(rho, dtype=float)
        return -R * T0 * model.phi_vv(1.0 / rho, T0) / rho**2

    return ProcessCurve(
        p=p,
        dp=dp,
        rho_domain=tuple(rho_domain),
        T=lambda r: T0 + 0.0 * np.asarray(r, dtype=float),
        model=model,
        name="isothermal",
        meta={"T0": T0},
    )


def pressure_process(p: Func, dp: Optional[Func] = None, d2p: Optional[Func] = None, rho_domain=DEFAULT_RHO_DOMAIN, name="pressure"):
    """Process given directly as a pressure law; missing derivatives fall back to finite differences."""
    if dp is None:
        dp = lambda r: five_point_derivative(p, r)  # noqa: E731
    return ProcessCurve(p=p, dp=dp, d2p=d2p, rho_domain=tuple(rho_domain), name=name)


def cubic_pressure(c0: float, c1: float, rho_domain=DEFAULT_RHO_DOMAIN) -> ProcessCurve:
    """p = c0 rho^3 + c1, the pressure law with integrable characteristic distributions."""
    return ProcessCurve(
        p=lambda r: c0 * np.asarray(r, dtype=float) ** 3 + c1,
        dp=lambda r: 3.0 * c0 * np.asarray(r, dtype=float) ** 2,
        d2p=lambda r: 6.0 * c0 * np.asarray(r, dtype=float),
        rho_domain=tuple(rho_domain),
        power_law=(math.sqrt(3.0 * c0), 0.0) if c0 > 0 else None,
        name="cubic",
        meta={"c0": c0, "c1": c1},
    )


def table_process(path_or_rows, rho_domain=None) -> ProcessCurve:
    """Pressure law from a ``rho,p`` table, interpolated by a cubic spline."""
    if isinstance(path_or_rows, (str, Path)):
        with open(path_or_rows, newline="") as fh:
            rows = [r for r in csv.DictReader(line for line in fh if not line.startswith("#"))]
        rho = np.array([float(r["rho"]) for r in rows])
        pv = np.array([float(r["p"]) for r in rows])
    else:
        rho, pv = (np.asarray(c, dtype=float) for c in zip(*path_or_rows))
    order = np.argsort(rho)
    rho, pv = rho[order], pv[order]
    if len(rho) < 4 or np.any(np.diff(rho) <= 0):
        raise DomainError("pressure table needs at least 4 distinct rho values")
    spline = CubicSpline(rho, pv)
    dspline, d2spline = spline.derivative(1), spline.derivative(2)
    domain = tuple(rho_domain) if rho_domain is not None else (float(rho[0]), float(rho[-1]))
    return ProcessCurve(p=spline, dp=dspline, d2p=d2spline, rho_domain=domain, name="table")


def process_from_config(model: PotentialModel, block: dict) -> ProcessCurve:
    kind = block.get("process", "adiabatic")
    domain = (block.get("rho_min", DEFAULT_RHO_DOMAIN[0]), block.get("rho_max", DEFAULT_RHO_DOMAIN[1]))
    if kind == "adiabatic":
        return adiabatic_process(model, block.get("s0", 0.0), domain, numeric=block.get("numeric", False))
    if kind == "isothermal":
        return isothermal_process(model, block["T0"], domain)
    if kind == "table":
        has_bounds = "rho_min" in block or "rho_max" in block
        return table_process(block["file"], domain if has_bounds else None)
    if kind == "cubic":
        return cubic_pressure(block["c0"], block.get("c1", 0.0), domain)
    raise DomainError(f"unknown process {kind!r}")


def classify_at(curve: ProcessCurve, rho: float, atol: float = 0.0) -> HyperbolicityReport:
    """Type of the barotropic system at ``rho`` from the pairing matrix of its 2-forms."""
    curve.check(rho)
    dp = float(curve.dp(rho))
    P = np.array([[2.0 * rho, 0.0], [0.0, -2.0 * dp / rho]])
    det = -4.0 * dp
    if det < -atol:
        kind = "hyperbolic"
    elif det > atol:
        kind = "elliptic"
    else:
        kind = "parabolic"
    return HyperbolicityReport(rho=float(rho), P_matrix=P, det=det, classification=kind)


def fit_cubic_law(curve: ProcessCurve, samples: int = 64) -> tuple[float, float, float]:
    """Fit p = c0 rho^3 + c1 and report the worst relative misfit.

    c0 comes from p'/(3 rho^2) at two interior points and c1 from p at the
    lower domain end; taking c1 where p is smallest keeps cancellation out of
    the residual on wide domains.  Returns ``(c0, c1, worst)`` with ``worst``
    the largest ``|p - c0 rho^3 - c1| / |p|`` on a log-spaced grid.
    """
    lo, hi = curve.rho_domain
    grid = np.geomspace(lo, hi, samples)
    r1, r2 = grid[samples // 4], grid[(3 * samples) // 4]
    c0 = 0.5 * float(curve.dp(r1) / (3 * r1**2) + curve.dp(r2) / (3 * r2**2))
    c1 = float(curve.p(lo)) - c0 * lo**3
    pg = np.asarray(curve.p(grid), dtype=float)
    resid = np.abs(pg - c0 * grid**3 - c1) / np.maximum(np.abs(pg), np.finfo(float).tiny)
    return c0, c1, float(np.max(resid))


def is_characteristically_integrable(curve: ProcessCurve, tol: float = 1e-8) -> bool:
    _, _, worst = fit_cubic_law(curve)
    return worst < tol
