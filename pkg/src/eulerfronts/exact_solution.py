"""Closed-form multivalued solutions of the barotropic flow equations.

The four-parameter ansatz ``alpha0 + alpha1 rho + alpha2 rho t - u (rho + alpha3) = 0``
fixes the velocity as a function of density and time,

    u = U(rho, t) = (alpha2 rho t + alpha1 rho + alpha0) / (rho + alpha3),

and the density follows implicitly from ``x = g(rho, t)`` with

    g = -I(rho)/alpha2 + N(rho, t) / (2 alpha2 (rho + alpha3)^2),
    I(rho) = integral of A(rho)^2 (rho + alpha3) d rho.

Because x is explicit in (rho, t), the surface is parametrized by (rho, t)
and folds wherever g_rho = 0.  Inverting at a point (t, x) can give several
densities; :func:`branches` finds them all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import DomainError, NumericalError, SingularParameterError
from .process import ProcessCurve

SCAN_POINTS = 2048


def _power_integral(rho, k: float):
    """Antiderivative of rho**k with zero constant; the log branch covers k = -1."""
    rho = np.asarray(rho, dtype=float)
    if abs(k + 1.0) < 1e-14:
        return np.log(rho)
    return rho ** (k + 1.0) / (k + 1.0)


@dataclass(frozen=True)
class SolutionFamily:
    """Solution surface for parameters ``alpha = (a0, a1, a2, a3)`` on a process curve.

    ``antiderivative`` selects how I and J are evaluated: ``"closed"`` needs a
    power-law curve, ``"quad"`` integrates numerically from ``rho_ref``,
    ``"auto"`` picks closed form when it exists.
    """

    alpha0: float
    alpha1: float
    alpha2: float
    alpha3: float
    curve: ProcessCurve
    antiderivative: str = "auto"
    rho_ref: Optional[float] = None
    _anchor: tuple = field(init=False, repr=False, compare=False, default=(0.0, 0.0))

    def __post_init__(self):
        if self.antiderivative not in ("auto", "closed", "quad"):
            raise ValueError(f"antiderivative must be auto|closed|quad, got {self.antiderivative!r}")
        if self.antiderivative == "closed" and self.curve.power_law is None:
            raise ValueError("closed-form antiderivatives need a power-law process curve")
        if self.rho_ref is None:
            lo, hi = self.curve.rho_domain
            object.__setattr__(self, "rho_ref", math.sqrt(lo * hi))
        if self.curve.power_law is not None:
            anchor = (float(self._I_closed(self.rho_ref)), float(self._J_closed(self.rho_ref)))
        else:
            anchor = (0.0, 0.0)
        object.__setattr__(self, "_anchor", anchor)

    @classmethod
    def from_alpha(cls, alpha, curve: ProcessCurve, **kw) -> "SolutionFamily":
        a0, a1, a2, a3 = (float(a) for a in alpha)
        return cls(a0, a1, a2, a3, curve, **kw)

    @property
    def alpha(self) -> tuple[float, float, float, float]:
        return (self.alpha0, self.alpha1, self.alpha2, self.alpha3)

    @property
    def uses_closed_form(self) -> bool:
        return self.antiderivative == "closed" or (self.antiderivative == "auto" and self.curve.power_law is not None)

    def with_antiderivative(self, mode: str) -> "SolutionFamily":
        return SolutionFamily(*self.alpha, self.curve, antiderivative=mode, rho_ref=self.rho_ref)

    # -- guards -------------------------------------------------------------

    def _denominator(self, rho):
        D = np.asarray(rho, dtype=float) + self.alpha3
        if np.any(D == 0):
            raise SingularParameterError(f"rho + alpha3 vanishes (alpha3={self.alpha3})")
        return D

    def _require_alpha2(self):
        if self.alpha2 == 0:
            raise SingularParameterError("alpha2 = 0: the implicit density relation divides by alpha2")

    # -- antiderivatives ----------------------------------------------------

    def _I_closed(self, rho):
        A0, m = self.curve.power_law
        return A0**2 * (_power_integral(rho, 2 * m + 1) + self.alpha3 * _power_integral(rho, 2 * m))

    def _J_closed(self, rho):
        A0, m = self.curve.power_law
        return A0**2 * (_power_integral(rho, 2 * m + 2) + self.alpha3 * _power_integral(rho, 2 * m + 1))

    def dI(self, rho):
        return self.curve.A(rho) ** 2 * (np.asarray(rho, dtype=float) + self.alpha3)

    def dJ(self, rho):
        rho = np.asarray(rho, dtype=float)
        return rho * self.dI(rho)

    def _quad(self, integrand, rho, anchor):
        # integrate in log(rho): the domain spans decades and A may blow up as a power
        rho = np.asarray(rho, dtype=float)
        flat = rho.ravel()
        out = np.empty_like(flat)
        lref = math.log(self.rho_ref)

        def f(tau):
            r = math.exp(tau)
            return float(integrand(r)) * r

        order = np.argsort(flat)
        logs = np.log(flat[order])
        # walk outward from the anchor so every segment is short
        below = np.nonzero(logs < lref)[0][::-1]
        above = np.nonzero(logs >= lref)[0]
        for idx in (below, above):
            acc, prev = anchor, lref
            for j in idx:
                val, err = quad(f, prev, logs[j], epsabs=0.0, epsrel=1e-13, limit=200)
                if not np.isfinite(val):
                    raise NumericalError(f"quadrature diverged near rho={flat[order][j]}")
                acc += val
                prev = logs[j]
                out[order[j]] = acc
        return out.reshape(rho.shape) if rho.ndim else float(out[0])

    def I(self, rho):
        if self.uses_closed_form:
            return self._I_closed(rho)
        return self._quad(self.dI, rho, self._anchor[0])

    def J(self, rho):
        if self.uses_closed_form:
            return self._J_closed(rho)
        return self._quad(self.dJ, rho, self._anchor[1])

    # -- the surface --------------------------------------------------------

    def g(self, rho, t):
        self._require_alpha2()
        a0, a1, a2, a3 = self.alpha
        D = self._denominator(rho)
        q = D**2 - a3**2  # rho (rho + 2 a3)
        N = a2**2 * t**2 * q + 2 * t * a2 * (a1 * q + a0 * a3) - (a0 - a1 * a3) ** 2
        return -self.I(rho) / a2 + N / (2 * a2 * D**2)

    def g_rho(self, rho, t):
        self._require_alpha2()
        a0, a1, a2, a3 = self.alpha
        D = self._denominator(rho)
        return -self.dI(rho) / a2 + (a3 * (a1 + a2 * t) - a0) ** 2 / (a2 * D**3)

    def g_t(self, rho, t):
        a0, a1, a2, a3 = self.alpha
        D = self._denominator(rho)
        return (a2 * t + a1) * (1.0 - a3**2 / D**2) + a0 * a3 / D**2

    def U(self, rho, t):
        a0, a1, a2, a3 = self.alpha
        D = self._denominator(rho)
        return (a2 * np.asarray(rho, dtype=float) * t + a1 * rho + a0) / D

    def U_rho(self, rho, t):
        a0, a1, a2, a3 = self.alpha
        D = self._denominator(rho)
        return ((a2 * t + a1) * a3 - a0) / D**2

    def U_t(self, rho, t):
        D = self._denominator(rho)
        return self.alpha2 * np.asarray(rho, dtype=float) / D

    def H(self, rho, t):
        """Potential of the mass-flux form rho dx - rho u dt restricted to the surface."""
        self._require_alpha2()
        a0, a1, a2, a3 = self.alpha
        rho = np.asarray(rho, dtype=float)
        D = self._denominator(rho)
        first = (a2 * rho * t - a1 * a3 + a0) * (a1 * a3**2 + a3 * ((t * a2 + 2 * a1) * rho - a0) - 2 * rho * a0)
        return first / (2 * a2 * D**2) - self.J(rho) / a2

    def H_rho(self, rho, t):
        return np.asarray(rho, dtype=float) * self.g_rho(rho, t)

    def H_t(self, rho, t):
        return np.asarray(rho, dtype=float) * (self.g_t(rho, t) - self.U(rho, t))

    def ansatz(self, t, u, rho):
        return self.alpha0 + self.alpha1 * rho + self.alpha2 * rho * t - u * (rho + self.alpha3)


def g(family: SolutionFamily, rho, t):
    """Position x at which density ``rho`` sits at time ``t``."""
    return family.g(rho, t)


def velocity_U(family: SolutionFamily, rho, t):
    return family.U(rho, t)


@dataclass(frozen=True)
class BranchSet:
    t: float
    x: float
    roots: tuple[float, ...]
    near_caustic: tuple[bool, ...]
    edge_root: bool = False

    def __len__(self):
        return len(self.roots)

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "x": self.x,
            "count": len(self.roots),
            "roots": list(self.roots),
            "near_caustic": list(self.near_caustic),
            "edge_root": self.edge_root,
        }


def scan_grid(window, points: int = SCAN_POINTS) -> np.ndarray:
    lo, hi = window
    if hi / lo > 10.0:
        return np.geomspace(lo, hi, points)
    return np.linspace(lo, hi, points)


def fold_points(family: SolutionFamily, t: float, window, points: int = SCAN_POINTS) -> np.ndarray:
    """Densities where g_rho(., t) changes sign inside ``window`` (the fold of the profile at t)."""
    grid = scan_grid(window, points)
    d = family.g_rho(grid, t)
    out = []
    for i in np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)[0]:
        out.append(brentq(lambda r: family.g_rho(r, t), grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15))
    return np.array(out)


def branches(
    family: SolutionFamily,
    t: float,
    x: float,
    rho_window=None,
    caustic_tol: float = 1e-3,
    points: int = SCAN_POINTS,
) -> BranchSet:
    """All densities rho in ``rho_window`` with ``g(rho, t) = x``, sorted ascending.

    The scan grid is augmented by the fold points of the profile, so between
    consecutive grid nodes g is monotone and each sign change holds exactly
    one root.
    """
    family._require_alpha2()
    if rho_window is None:
        rho_window = family.curve.rho_domain
    lo, hi = rho_window
    if not hi > lo:
        return BranchSet(t, x, (), ())
    family.curve.check([lo, hi])
    grid = np.union1d(scan_grid((lo, hi), points), fold_points(family, t, (lo, hi), points))
    F = family.g(grid, t) - x
    scale = max(1.0, abs(x))

    roots = []
    exact = np.nonzero(F == 0)[0]
    roots.extend(grid[exact].tolist())
    for i in np.nonzero(np.sign(F[:-1]) * np.sign(F[1:]) < 0)[0]:
        r = brentq(lambda s: family.g(s, t) - x, grid[i], grid[i + 1], xtol=1e-15 * grid[i + 1], rtol=1e-15)
        # one Newton step, kept only if it improves the residual
        d = family.g_rho(r, t)
        if d != 0:
            r2 = r - (family.g(r, t) - x) / d
            if grid[i] <= r2 <= grid[i + 1] and abs(family.g(r2, t) - x) < abs(family.g(r, t) - x):
                r = r2
        roots.append(float(r))

    roots.sort()
    merged = []
    for r in roots:
        if merged and abs(r - merged[-1]) <= 1e-9 * max(1.0, abs(r)):
            continue
        merged.append(r)
    for r in merged:
        if abs(family.g(r, t) - x) > 1e-9 * scale:
            raise NumericalError(f"root polish failed at rho={r}")
    near = tuple(bool(abs(family.g_rho(r, t)) < caustic_tol) for r in merged)
    edge = bool(abs(F[0]) < 1e-9 * scale or abs(F[-1]) < 1e-9 * scale)
    return BranchSet(float(t), float(x), tuple(merged), near, edge)


def profile_section(family: SolutionFamily, t: float, rho_grid) -> np.ndarray:
    """Rows ``(x, rho, u)`` of the density profile at time ``t``, parametrized by rho.

    No root solving is involved, so overturned (multivalued) profiles come out
    as a single curve that doubles back in x.
    """
    rho = np.asarray(rho_grid, dtype=float).ravel()
    if rho.size == 0:
        return np.empty((0, 3))
    return np.column_stack([family.g(rho, t), rho, family.U(rho, t)])


def pde_residuals(family: SolutionFamily, rho, t) -> tuple[np.ndarray, np.ndarray]:
    """Residuals of the mass and momentum equations on the branch through (rho, t).

    Derivatives of the implicit density come from differentiating x = g(rho, t):
    rho_x = 1/g_rho and rho_t = -g_t/g_rho.
    """
    rho = np.asarray(rho, dtype=float)
    gr = family.g_rho(rho, t)
    rho_x = 1.0 / gr
    rho_t = -family.g_t(rho, t) / gr
    u = family.U(rho, t)
    u_x = family.U_rho(rho, t) * rho_x
    u_t = family.U_t(rho, t) + family.U_rho(rho, t) * rho_t
    mass = rho_t + u * rho_x + rho * u_x
    momentum = u_t + u * u_x + family.curve.dp(rho) / rho * rho_x
    return mass, momentum
