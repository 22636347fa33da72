"""Caustics, the cusp, the mass-flux potential H and the shock front.

The caustic is the fold locus g_rho = 0 of the solution surface over the
(t, x) plane.  Using the identity

    g_rho = -A^2 (rho + a3)/a2 + (a3 (a1 + a2 t) - a0)^2 / (a2 (rho + a3)^3)

it is parametrized by rho with two sign branches,
t(rho) = (+-A (rho + a3)^2 - a1 a3 + a0) / (a3 a2).

A front replaces the fold by a jump between densities rho1 < rho2 chosen so
that both the position and the potential H agree on the two sides:
g(rho1, t) = g(rho2, t) and H(rho1, t) = H(rho2, t).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar

from .errors import DomainError, MonotoneCausticError, NumericalError
from .exact_solution import SCAN_POINTS, SolutionFamily, fold_points, scan_grid

log = logging.getLogger(__name__)


def _sign(branch) -> int:
    if branch in ("+", 1, "plus"):
        return 1
    if branch in ("-", -1, "minus"):
        return -1
    raise ValueError(f"caustic branch must be '+' or '-', got {branch!r}")


@dataclass(frozen=True)
class CausticCurve:
    branch: str
    rho: np.ndarray
    t: np.ndarray
    x: np.ndarray

    def __len__(self):
        return len(self.rho)

    def residual(self, family: SolutionFamily) -> float:
        """Largest |g_rho| over the samples; zero on an exact fold locus."""
        if len(self.rho) == 0:
            return 0.0
        return float(np.max(np.abs(family.g_rho(self.rho, self.t))))


def caustic_times(family: SolutionFamily, rho, branch="+"):
    """Time at which density ``rho`` reaches the fold on the given branch.

    g_rho is a polynomial of degree <= 2 in t, recovered exactly from three
    evaluations; its roots are assigned to branches by the sign of
    ``a3 (a1 + a2 t) - a0`` relative to ``A (rho + a3)^2``.  Returns NaN where
    the branch has no real time (always the case when a3 = 0).
    """
    s = _sign(branch)
    a0, a1, a2, a3 = family.alpha
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    out = np.full(rho.shape, np.nan)
    for i, r in enumerate(rho):
        gm, g0, gp = (float(family.g_rho(r, tt)) for tt in (-1.0, 0.0, 1.0))
        c2, c1, c0 = 0.5 * (gp + gm) - g0, 0.5 * (gp - gm), g0
        roots = np.roots([c2, c1, c0]) if (c2 or c1) else np.array([])
        for root in roots:
            if abs(root.imag) > 1e-9 * max(1.0, abs(root.real)):
                continue
            tt = root.real
            lhs = a3 * (a1 + a2 * tt) - a0
            if np.sign(lhs) == s or lhs == 0:
                out[i] = tt
    return out


def caustic(family: SolutionFamily, branch="+", rho_grid=None) -> CausticCurve:
    """Sampled caustic on one sign branch.

    With a3 != 0 the closed-form parametrization is used; a3 = 0 falls back to
    solving g_rho(rho, t) = 0 for t at each rho.
    """
    family._require_alpha2()
    s = _sign(branch)
    if rho_grid is None:
        rho_grid = scan_grid(family.curve.rho_domain, 512)
    rho = np.asarray(rho_grid, dtype=float).ravel()
    a0, a1, a2, a3 = family.alpha
    if a3 != 0:
        A = family.curve.A(rho)
        D = family._denominator(rho)
        t = (s * A * D**2 - a1 * a3 + a0) / (a3 * a2)
        x = -family.I(rho) / a2 + (
            rho * (rho + 2 * a3) * D**2 * A**2 - a3**2 * a1**2 + a0**2 + s * 2 * a0 * D**2 * A
        ) / (2 * a3**2 * a2)
    else:
        t = caustic_times(family, rho, branch)
        keep = np.isfinite(t)
        rho, t = rho[keep], t[keep]
        x = family.g(rho, t) if rho.size else np.empty(0)
    return CausticCurve("+" if s > 0 else "-", rho, np.asarray(t, dtype=float), np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Cusp:
    """Interior extremum of t along a caustic branch.

    ``opens == "forward"`` for a minimum of t (the fold, and the shock, exist
    after ``t``); ``"backward"`` for a maximum.
    """

    rho: float
    t: float
    x: float
    branch: str
    opens: str

    def as_dict(self) -> dict:
        return {"rho": self.rho, "t": self.t, "x": self.x, "branch": self.branch, "opens": self.opens}


def cusp(family: SolutionFamily, branch="+", rho_window=None) -> Cusp:
    """Locate the cusp: golden-section on t(rho), then a root polish of dt/drho = 0."""
    family._require_alpha2()
    s = _sign(branch)
    if family.alpha3 == 0:
        raise MonotoneCausticError("alpha3 = 0: the fold does not move in time, no cusp")
    window = rho_window if rho_window is not None else family.curve.rho_domain
    grid = scan_grid(window, SCAN_POINTS)
    curve = caustic(family, branch, grid)
    t = curve.t
    interior = np.arange(1, len(t) - 1)
    minima = interior[(t[interior] < t[interior - 1]) & (t[interior] <= t[interior + 1])]
    maxima = interior[(t[interior] > t[interior - 1]) & (t[interior] >= t[interior + 1])]
    if minima.size:
        i = minima[np.argmin(t[minima])]
        sign, opens = 1.0, "forward"
    elif maxima.size:
        i = maxima[np.argmax(t[maxima])]
        sign, opens = -1.0, "backward"
    else:
        raise MonotoneCausticError(f"caustic branch {branch} is monotone in t on rho in {tuple(window)}")

    a0, a1, a2, a3 = family.alpha

    def t_of(r):
        return float((s * family.curve.A(r) * (r + a3) ** 2 - a1 * a3 + a0) / (a3 * a2))

    lo, mid, hi = grid[i - 1], grid[i], grid[i + 1]
    res = minimize_scalar(lambda r: sign * t_of(r), bracket=(lo, mid, hi), method="golden", tol=1e-10)
    rho_star = float(res.x)

    # dt/drho is proportional to A'(rho) (rho + a3) + 2 A(rho)
    def slope(r):
        return float(family.curve.dA(r) * (r + a3) + 2.0 * family.curve.A(r))

    if slope(lo) * slope(hi) < 0:
        rho_star = brentq(slope, lo, hi, xtol=1e-16, rtol=1e-15)
    t_star = t_of(rho_star)
    return Cusp(rho_star, t_star, float(family.g(rho_star, t_star)), "+" if s > 0 else "-", opens)


def potential_H(family: SolutionFamily, rho, t):
    return family.H(rho, t)


def loop_integral(family: SolutionFamily, t: float, rho1: float, rho2: float) -> float:
    """Integral of the mass-flux form around the loop cut out of the profile at time t.

    The profile leg contributes the integral of rho g_rho d rho from rho1 to
    rho2; the straight return leg lies at constant (t, x) where the form
    vanishes.  Computed by quadrature, independently of H.
    """
    val, _ = quad(lambda r: r * float(family.g_rho(r, t)), rho1, rho2, epsabs=1e-12, epsrel=1e-10, limit=200)
    return val


@dataclass(frozen=True)
class FrontCurve:
    t: np.ndarray
    x: np.ndarray
    rho1: np.ndarray
    rho2: np.ndarray
    cusp: Cusp
    residual_g: np.ndarray = field(repr=False, default=None)
    residual_H: np.ndarray = field(repr=False, default=None)

    def __len__(self):
        return len(self.t)

    def rows(self):
        return list(zip(self.t.tolist(), self.x.tolist(), self.rho1.tolist(), self.rho2.tolist()))

    def speed(self, family: SolutionFamily) -> np.ndarray:
        """Jump-condition speed [rho u] / [rho] at every sample."""
        r1, r2 = self.rho1, self.rho2
        return (r2 * family.U(r2, self.t) - r1 * family.U(r1, self.t)) / (r2 - r1)


def _front_newton(family, t, r1, r2, x_scale=1.0, H_scale=1.0, tol=1e-12, max_iter=80):
    """Damped Newton on the divided-difference form of the jump system.

    Dividing both equations by rho2 - rho1 removes the trivial solution
    rho1 = rho2.  Jacobian entries use the exact gradients g_rho and
    H_rho = rho g_rho.
    """

    def system(a, b):
        d = b - a
        return np.array([(family.g(b, t) - family.g(a, t)) / d, (family.H(b, t) - family.H(a, t)) / d])

    def raw_ok(a, b):
        return (
            abs(family.g(b, t) - family.g(a, t)) <= tol * x_scale
            and abs(family.H(b, t) - family.H(a, t)) <= tol * H_scale
        )

    F = system(r1, r2)
    for _ in range(max_iter):
        d = r2 - r1
        gp1, gp2 = family.g_rho(r1, t), family.g_rho(r2, t)
        Jm = np.array(
            [
                [(F[0] - gp1) / d, (gp2 - F[0]) / d],
                [(F[1] - r1 * gp1) / d, (r2 * gp2 - F[1]) / d],
            ]
        )
        try:
            step = np.linalg.solve(Jm, -F)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"singular front Jacobian at t={t}") from exc
        norm0 = np.linalg.norm(F)
        lam = 1.0
        while True:
            n1, n2 = r1 + lam * step[0], r2 + lam * step[1]
            if 0 < n1 < n2:
                Fn = system(n1, n2)
                if np.linalg.norm(Fn) < norm0:
                    break
            lam *= 0.5
            if lam < 1e-6:
                # no descent left: either converged to roundoff or stuck
                if raw_ok(r1, r2):
                    return float(r1), float(r2)
                raise NumericalError(f"damped Newton stalled at t={t}")
        r1, r2, F = n1, n2, Fn
        small_step = abs(lam * step[0]) <= 1e-13 * r1 and abs(lam * step[1]) <= 1e-13 * r2
        if small_step and raw_ok(r1, r2):
            return float(r1), float(r2)
    if raw_ok(r1, r2):
        return float(r1), float(r2)
    raise NumericalError(f"front Newton did not converge at t={t}")


def _seed_from_fold(family, t, c: Cusp):
    """Cusp normal form: the jump spans sqrt(3) times the fold width about its middle."""
    lo, hi = family.curve.rho_domain
    window = (max(lo, c.rho * 0.05), min(hi, c.rho * 20.0))
    folds = fold_points(family, t, window)
    below, above = folds[folds < c.rho], folds[folds > c.rho]
    if below.size and above.size:
        ra, rb = below.max(), above.min()
        mid, half = 0.5 * (ra + rb), 0.5 * (rb - ra)
        return max(mid - math.sqrt(3.0) * half, 0.5 * ra), mid + math.sqrt(3.0) * half
    delta = 1e-3 * c.rho
    return c.rho - delta, c.rho + delta


def shock_front(family: SolutionFamily, t_range, steps: int = 50, branch="+", rho_window=None) -> FrontCurve:
    """Front positions for ``steps`` times in ``t_range`` by Newton continuation from the cusp.

    The march starts just after the cusp and adapts its time step: it grows
    after each converged solve and is halved after a failure.  Requested times
    at or before the cusp are dropped; the cusp itself is kept as the birth point.
    """
    c = cusp(family, branch, rho_window)
    if c.opens != "forward":
        raise MonotoneCausticError("caustic branch opens backward in time; no forward front")
    t_min, t_max = t_range
    times = np.linspace(max(t_min, c.t), t_max, steps) if steps > 1 else np.array([max(t_min, c.t)])
    times = times[times > c.t + 1e-12 * max(1.0, abs(c.t))]
    lo, hi = family.curve.rho_domain

    x_scale = max(1.0, abs(c.x))
    H_scale = max(1.0, abs(float(family.H(c.rho, c.t))))
    hist = []
    out = []
    t_cur = c.t
    dt = 1e-4 * max(1.0, abs(c.t))
    for target in times:
        while t_cur < target:
            t_try = min(t_cur + dt, target)
            seed = None
            if len(hist) >= 2:
                (ta, p1, p2), (tb, q1, q2) = hist[-2], hist[-1]
                w = (t_try - tb) / (tb - ta)
                seed = (q1 + w * (q1 - p1), q2 + w * (q2 - p2))
                if not (0 < seed[0] < c.rho < seed[1]):
                    seed = None
            if seed is None:
                seed = _seed_from_fold(family, t_try, c)
            try:
                r1, r2 = _front_newton(family, t_try, *seed, x_scale=x_scale, H_scale=H_scale)
                if not (r1 < c.rho < r2):
                    raise NumericalError("front collapsed or left the fold")
            except NumericalError as exc:
                log.debug("front step to t=%g failed (%s); halving", t_try, exc)
                dt *= 0.5
                if dt < 1e-12 * max(1.0, abs(c.t)):
                    raise NumericalError(f"front continuation failed beyond t={t_cur}") from exc
                continue
            if r1 < lo or r2 > hi:
                raise DomainError(f"front densities ({r1:.3g}, {r2:.3g}) left the process domain at t={t_try}")
            hist.append((t_try, r1, r2))
            t_cur = t_try
            dt *= 1.5
        out.append(hist[-1])

    if not out:
        empty = np.empty(0)
        return FrontCurve(empty, empty, empty, empty, c, empty, empty)
    t_arr, r1_arr, r2_arr = (np.array(v, dtype=float) for v in zip(*out))
    x_arr = family.g(r1_arr, t_arr)
    res_g = np.abs(family.g(r2_arr, t_arr) - x_arr) / x_scale
    res_H = np.abs(family.H(r2_arr, t_arr) - family.H(r1_arr, t_arr)) / H_scale
    if res_g.max() > 1e-10 or res_H.max() > 1e-10:
        raise NumericalError(f"front residuals too large: g {res_g.max():.3g}, H {res_H.max():.3g}")
    return FrontCurve(t_arr, x_arr, r1_arr, r2_arr, c, res_g, res_H)


def fold_x_range(family: SolutionFamily, t: float, c: Cusp):
    """x-extent of the fold at time t around the cusp density, i.e. both caustic branches' x."""
    lo, hi = family.curve.rho_domain
    folds = fold_points(family, t, (max(lo, 0.05 * c.rho), min(hi, 20.0 * c.rho)))
    below, above = folds[folds < c.rho], folds[folds > c.rho]
    if not (below.size and above.size):
        return None
    xa, xb = family.g(below.max(), t), family.g(above.min(), t)
    return min(xa, xb), max(xa, xb)
