"""Pointwise numerical checks of the 2-form description of the barotropic system.

Everything lives on the 4-dimensional space with coordinates (t, x, u, rho);
vectors and 2-form matrices use that ordering throughout.  A 2-form is stored
as an antisymmetric 4x4 array ``M`` with ``w(a, b) = a @ M @ b`` and the
contraction ``X _| w = X @ M``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import null_space, subspace_angles

from .errors import DomainError, SingularParameterError
from .exact_solution import SolutionFamily
from .process import ProcessCurve

BASIS = ("t", "x", "u", "rho")
T, X, U, RHO = range(4)

# tolerances for exact algebra vs. quantities built on quadrature-backed g
ALGEBRAIC_TOL = 1e-12
SOLUTION_TOL = 1e-8


@dataclass(frozen=True)
class TwoForm:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (4, 4) or np.any(m != -m.T):
            raise DomainError("a 2-form needs an exactly antisymmetric 4x4 coefficient matrix")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_components(cls, comps: dict) -> "TwoForm":
        """Build from ``{(i, j): c}`` meaning ``c dx_i ^ dx_j`` with i < j."""
        m = np.zeros((4, 4))
        for (i, j), c in comps.items():
            m[i, j] += c
            m[j, i] -= c
        return cls(m)

    def __call__(self, a, b) -> float:
        return float(np.asarray(a) @ self.matrix @ np.asarray(b))

    def contract(self, vec) -> np.ndarray:
        return np.asarray(vec, dtype=float) @ self.matrix

    def scaled(self, c: float) -> "TwoForm":
        return TwoForm(c * self.matrix)

    def wedge(self, other: "TwoForm") -> float:
        """Coefficient of dt^dx^du^drho in self ^ other."""
        a, b = self.matrix, other.matrix
        return float(
            a[0, 1] * b[2, 3] - a[0, 2] * b[1, 3] + a[0, 3] * b[1, 2]
            + a[1, 2] * b[0, 3] - a[1, 3] * b[0, 2] + a[2, 3] * b[0, 1]
        )


def _unpack(point):
    t, x, u, rho = (float(c) for c in point)
    return t, x, u, rho


def raw_forms(curve: ProcessCurve, point) -> tuple[TwoForm, TwoForm]:
    """Mass and momentum 2-forms before normalization (second one carries p'/rho)."""
    _, _, u, rho = _unpack(point)
    w1 = TwoForm.from_components({(T, U): rho, (T, RHO): u, (X, RHO): -1.0})
    w2 = TwoForm.from_components({(T, U): u, (T, RHO): float(curve.dp(rho)) / rho, (X, U): -1.0})
    return w1, w2


def build_normalized_forms(curve: ProcessCurve, point) -> tuple[TwoForm, TwoForm]:
    _, _, u, rho = _unpack(point)
    if not float(curve.dp(rho)) > 0:
        raise DomainError(f"not hyperbolic at rho={rho}: p'={float(curve.dp(rho))}")
    A = float(curve.A(rho))
    w1 = TwoForm.from_components({(T, U): A * rho, (T, RHO): A * u, (X, RHO): -A})
    w2 = TwoForm.from_components({(T, U): u, (T, RHO): rho * A * A, (X, U): -1.0})
    return w1, w2


def pairing_matrix(w1: TwoForm, w2: TwoForm) -> np.ndarray:
    """Symmetric pairing ``P_ij = (w_i ^ w_j) / q`` on the span of the two forms."""
    forms = (w1, w2)
    return np.array([[a.wedge(b) for b in forms] for a in forms])


@dataclass(frozen=True)
class OperatorW:
    point: tuple
    matrix: np.ndarray

    def apply(self, vec) -> np.ndarray:
        return self.matrix @ np.asarray(vec, dtype=float)


def operator_W(curve: ProcessCurve, point) -> OperatorW:
    """Closed-form matrix of the operator defined by ``X _| w2 = W(X) _| w1``."""
    _, _, u, rho = _unpack(point)
    A = float(curve.A(rho))
    if rho * A == 0:
        raise SingularParameterError("rho A(rho) vanishes; the operator is undefined")
    c = 1.0 / (rho * A)
    W = np.zeros((4, 4))
    W[T, T], W[T, X] = c * u, -c
    W[X, T], W[X, X] = c * (u * u - rho * rho * A * A), -c * u
    W[U, RHO] = c * rho * A * A
    W[RHO, U] = c * rho
    return OperatorW(tuple(point), W)


def operator_W_from_forms(w1: TwoForm, w2: TwoForm) -> np.ndarray:
    """Solve the contraction identity column by column: ``M1^T W = M2^T``."""
    return np.linalg.solve(w1.matrix.T, w2.matrix.T)


@dataclass(frozen=True)
class CharFields:
    X_plus: np.ndarray
    X_minus: np.ndarray
    Y_plus: np.ndarray
    Y_minus: np.ndarray

    def pair(self, sign: int) -> tuple[np.ndarray, np.ndarray]:
        return (self.X_plus, self.Y_plus) if sign > 0 else (self.X_minus, self.Y_minus)


def characteristic_fields(curve: ProcessCurve, point) -> CharFields:
    _, _, u, rho = _unpack(point)
    A = float(curve.A(rho))
    out = {}
    for s, tag in ((1, "plus"), (-1, "minus")):
        den = u - s * rho * A
        if den == 0:
            raise SingularParameterError(f"u = {'+' if s > 0 else '-'}rho A at {point}; Y field undefined")
        out["X_" + tag] = np.array([0.0, 0.0, s * A, 1.0])
        out["Y_" + tag] = np.array([1.0 / den, 1.0, 0.0, 0.0])
    return CharFields(**out)


def bracket_XY(curve: ProcessCurve, point, sign: int) -> np.ndarray:
    """[X, Y] from analytic coefficient derivatives.

    X depends on rho only and has no t/x components; Y^t = 1/(u - s rho A) is
    the only non-constant coefficient of Y, and Y has no u/rho components, so
    the bracket reduces to X(Y^t) d/dt.
    """
    _, _, u, rho = _unpack(point)
    A, dA = float(curve.A(rho)), float(curve.dA(rho))
    den = u - sign * rho * A
    dYt_du = -1.0 / den**2
    dYt_drho = sign * (A + rho * dA) / den**2
    return np.array([sign * A * dYt_du + dYt_drho, 0.0, 0.0, 0.0])


def span_rank(vectors, tol: float = 1e-8) -> int:
    """Numerical rank after normalizing each vector; singular values below ``tol`` count as zero."""
    rows = []
    for v in vectors:
        v = np.asarray(v, dtype=float)
        n = np.linalg.norm(v)
        if n > 0:
            rows.append(v / n)
    if not rows:
        return 0
    s = np.linalg.svd(np.array(rows), compute_uv=False)
    return int(np.sum(s > tol * s[0]))


def lie_bracket_integrability(curve: ProcessCurve, points, tol: float = 1e-8) -> dict:
    """Whether each characteristic distribution is involutive at every sample point.

    A zero bracket counts as lying in the span.  The bracket is compared with
    the field magnitudes, so the test is scale-free.
    """
    result = {}
    for sign, tag in ((1, "+"), (-1, "-")):
        ok = True
        for pt in points:
            fields = characteristic_fields(curve, pt)
            Xs, Ys = fields.pair(sign)
            br = bracket_XY(curve, pt, sign)
            size = np.linalg.norm(Xs) * np.linalg.norm(Ys)
            if np.linalg.norm(br) <= tol * size:
                continue
            if span_rank([Xs, Ys, br], tol) > span_rank([Xs, Ys], tol):
                ok = False
                break
        result[tag] = ok
    return result


# ---------------------------------------------------------------- ansatz


def ansatz_partials(family: SolutionFamily, t, u, rho) -> dict:
    """Partials of f = a0 + a1 rho + a2 rho t - u (rho + a3) up to second order."""
    a0, a1, a2, a3 = family.alpha
    z = 0.0 * np.asarray(t + u + rho, dtype=float)
    return {
        "f": family.ansatz(t, u, rho),
        "f_t": a2 * rho + z,
        "f_u": -(rho + a3) + z,
        "f_rho": a1 + a2 * t - u + z,
        "f_tt": z,
        "f_uu": z,
        "f_rhorho": z,
        "f_ut": z,
        "f_rhot": a2 + z,
        "f_urho": -1.0 + z,
    }


def mutated_ansatz_partials(family: SolutionFamily, t, u, rho) -> dict:
    """Negative control: the a1 rho term replaced by (a1 + 1) rho^2."""
    d = ansatz_partials(family, t, u, rho)
    a1 = family.alpha1
    d["f"] = d["f"] - a1 * rho + (a1 + 1.0) * rho**2
    d["f_rho"] = d["f_rho"] - a1 + 2.0 * (a1 + 1.0) * rho
    d["f_rhorho"] = d["f_rhorho"] + 2.0 * (a1 + 1.0)
    return d


def ansatz_pde_terms(d: dict, rho, A) -> list:
    A2 = A * A
    ft, fu, fr = d["f_t"], d["f_u"], d["f_rho"]
    return [
        -2.0 * rho * A2 * fu * ft * d["f_ut"],
        -rho * fr**2 * d["f_tt"],
        -rho * ft**2 * d["f_rhorho"],
        rho * A2 * fu**2 * d["f_tt"],
        rho * A2 * ft**2 * d["f_uu"],
        2.0 * rho * fr * ft * d["f_rhot"],
        -2.0 * fr * ft**2,
    ]


def ansatz_pde_residual(family: SolutionFamily, t, u, rho, partials: Optional[Callable] = None):
    """(residual, scale) of the compatibility PDE for f(t, u, rho); scale = sum of |terms|."""
    d = (partials or ansatz_partials)(family, t, u, rho)
    terms = ansatz_pde_terms(d, rho, family.curve.A(rho))
    return sum(terms), sum(np.abs(x) for x in terms)


def check_ansatz_pde(family: SolutionFamily, points, partials: Optional[Callable] = None) -> float:
    """Largest |residual| over sample points given as rows (t, u, rho)."""
    pts = np.asarray(points, dtype=float)
    res, _ = ansatz_pde_residual(family, pts[:, 0], pts[:, 1], pts[:, 2], partials)
    return float(np.max(np.abs(res))) if len(pts) else 0.0


# ---------------------------------------------------------------- solutions


@dataclass(frozen=True)
class SurfaceChart:
    """A surface in (t, x, u, rho) given by a point map and two tangent vectors over a 2-parameter chart."""

    point: Callable
    tangents: Callable


def family_chart(family: SolutionFamily, x_shift: Optional[Callable] = None) -> SurfaceChart:
    """Chart (rho, t) -> (t, g, U, rho); ``x_shift(rho, t)`` returns (dx, dx_rho, dx_t) for mutation tests."""

    def shift(r, t):
        return (0.0, 0.0, 0.0) if x_shift is None else x_shift(r, t)

    def point(r, t):
        return np.array([t, family.g(r, t) + shift(r, t)[0], family.U(r, t), r])

    def tangents(r, t):
        _, sr, st = shift(r, t)
        Tr = np.array([0.0, family.g_rho(r, t) + sr, family.U_rho(r, t), 1.0])
        Tt = np.array([1.0, family.g_t(r, t) + st, family.U_t(r, t), 0.0])
        return Tr, Tt

    return SurfaceChart(point, tangents)


def constant_chart(rho0: float, u0: float) -> SurfaceChart:
    """Graph of a constant state, charted by (t, x)."""
    return SurfaceChart(
        point=lambda t, x: np.array([t, x, u0, rho0]),
        tangents=lambda t, x: (np.array([1.0, 0.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0, 0.0])),
    )


def pullback_residual(curve: ProcessCurve, chart: SurfaceChart, a, b) -> tuple[float, float]:
    """(max |w_i(T1, T2)|, scale) for both normalized forms at chart parameters (a, b)."""
    p = chart.point(a, b)
    T1, T2 = chart.tangents(a, b)
    worst, scale = 0.0, 0.0
    for w in build_normalized_forms(curve, p):
        worst = max(worst, abs(w(T1, T2)))
        scale = max(scale, float(np.abs(T1) @ np.abs(w.matrix) @ np.abs(T2)))
    return worst, scale


def check_solution_annihilates_forms(
    family: SolutionFamily, points, chart: Optional[SurfaceChart] = None, caustic_tol: float = 1e-3
) -> float:
    """Largest pullback coefficient relative to its term scale, over (rho, t) samples off the caustic."""
    chart = chart or family_chart(family)
    worst = 0.0
    for r, t in points:
        if abs(family.g_rho(r, t)) < caustic_tol:
            continue
        res, scale = pullback_residual(family.curve, chart, r, t)
        worst = max(worst, res / max(scale, 1.0))
    return worst


def V_fields(curve: ProcessCurve, point, dF) -> tuple[np.ndarray, np.ndarray]:
    """Fields of the two characteristic distributions tangent to {F = 0}.

    ``dF = (F_t, F_x, F_u, F_rho)``.  The u component carries a factor A so
    that the fields are genuine eigenvectors of W.
    """
    _, _, u, rho = _unpack(point)
    Ft, Fx, Fu, Fr = (float(c) for c in dF)
    A = float(curve.A(rho))
    out = []
    for s in (1, -1):
        out.append(np.array([
            Fu * A + s * Fr,
            (u * Fu - rho * Fr) * A + s * (u * Fr - rho * A * A * Fu),
            -A * (Ft + u * Fx - s * rho * A * Fx),
            rho * A * Fx - s * (Ft + u * Fx),
        ]))
    return out[0], out[1]


def Z_fields(family: SolutionFamily, rho: float, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Restrictions of the V fields to {f = 0} in (t, x, rho) coordinates."""
    a0, a1, a2, a3 = family.alpha
    A = float(family.curve.A(rho))
    D = rho + a3
    out = []
    for s in (1, -1):
        zt = (A * D * D - s * a3 * (a1 + t * a2) + s * a0) / D**2
        zx = zt * (-s * A * rho * D + rho * (t * a2 + a1) + a0) / D
        zr = s * a2 * rho / D
        out.append(np.array([zt, zx, zr]))
    return out[0], out[1]


# ---------------------------------------------------------------- driver


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float
    passed: bool
    note: str = ""

    def row(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<38s} {self.value:11.3e}  (tol {self.tol:.0e}){'  ' + self.note if self.note else ''}"


def sample_points(seed: int = 0, samples: int = 100, rho_range=(0.2, 5.0)) -> np.ndarray:
    """Rows (t, x, u, rho): t, x in [-5, 5], u in [-3, 3], rho in ``rho_range``."""
    rng = np.random.default_rng(seed)
    pts = np.empty((samples, 4))
    pts[:, T] = rng.uniform(-5, 5, samples)
    pts[:, X] = rng.uniform(-5, 5, samples)
    pts[:, U] = rng.uniform(-3, 3, samples)
    pts[:, RHO] = rng.uniform(*rho_range, samples)
    return pts


def identity_residuals(curve: ProcessCurve, points) -> dict:
    """Worst scaled residual of each algebraic identity over the sample points."""
    out = {k: 0.0 for k in ("w1^w2", "w1^w1+w2^w2", "detP", "W^2", "W closed vs contraction", "W eigvec", "trace W", "eigenspace angle", "eigenvalues")}
    for pt in points:
        rho = pt[RHO]
        dp = float(curve.dp(rho))
        w1, w2 = build_normalized_forms(curve, pt)
        size = abs(w1.wedge(w1)) + abs(w2.wedge(w2))
        out["w1^w2"] = max(out["w1^w2"], abs(w1.wedge(w2)) / size)
        out["w1^w1+w2^w2"] = max(out["w1^w1+w2^w2"], abs(w1.wedge(w1) + w2.wedge(w2)) / size)
        P = pairing_matrix(*raw_forms(curve, pt))
        out["detP"] = max(out["detP"], abs(np.linalg.det(P) + 4.0 * dp) / (4.0 * dp))

        W = operator_W(curve, pt).matrix
        wn = max(1.0, np.max(np.abs(W)))
        out["W^2"] = max(out["W^2"], np.max(np.abs(W @ W - np.eye(4))) / wn**2)
        Wc = operator_W_from_forms(w1, w2)
        out["W closed vs contraction"] = max(out["W closed vs contraction"], np.max(np.abs(W - Wc)) / wn)
        out["trace W"] = max(out["trace W"], abs(np.trace(W)) / wn)
        ev = np.sort(np.linalg.eigvals(W).real)
        out["eigenvalues"] = max(out["eigenvalues"], np.max(np.abs(ev - [-1, -1, 1, 1])))

        fields = characteristic_fields(curve, pt)
        for s in (1, -1):
            for v in fields.pair(s):
                r = np.linalg.norm(W @ v - s * v) / (wn * np.linalg.norm(v))
                out["W eigvec"] = max(out["W eigvec"], r)
            E = null_space(W - s * np.eye(4), rcond=1e-10)
            F = np.column_stack(fields.pair(s))
            ang = np.max(subspace_angles(E, F)) if E.shape[1] == 2 else np.pi / 2
            out["eigenspace angle"] = max(out["eigenspace angle"], ang)
    return out


def V_residuals(family: SolutionFamily, points) -> dict:
    """Tangency V(F)=0, eigen-membership W V = +-V, and agreement of Z with V restricted to {f=0}."""
    curve = family.curve
    a0, a1, a2, a3 = family.alpha
    out = {"V(F)": 0.0, "W V = +-V": 0.0, "Z = V|N1": 0.0, "Z tangent to N": 0.0}
    for t, x, u, rho in points:
        d = ansatz_partials(family, t, u, rho)
        dF = (d["f_t"], 0.0, d["f_u"], d["f_rho"])
        Vp, Vm = V_fields(curve, (t, x, u, rho), dF)
        W = operator_W(curve, (t, x, u, rho)).matrix
        wn = max(1.0, np.max(np.abs(W)))
        for s, V in ((1, Vp), (-1, Vm)):
            scale = float(np.abs(V) @ np.abs(dF)) or 1.0
            out["V(F)"] = max(out["V(F)"], abs(V @ np.asarray(dF)) / scale)
            out["W V = +-V"] = max(out["W V = +-V"], np.linalg.norm(W @ V - s * V) / (wn * np.linalg.norm(V)))

        # on N1 itself (u = U), compare with Z and with the solution surface
        if abs(family.g_rho(rho, t)) < 1e-3:
            continue
        uN = float(family.U(rho, t))
        d = ansatz_partials(family, t, uN, rho)
        dF = (d["f_t"], 0.0, d["f_u"], d["f_rho"])
        D = rho + a3
        Zs = Z_fields(family, rho, t)
        for V, Z in zip(V_fields(curve, (t, 0.0, uN, rho), dF), Zs):
            restricted = -np.array([V[T], V[X], V[RHO]]) / D
            out["Z = V|N1"] = max(out["Z = V|N1"], np.max(np.abs(restricted - Z)) / max(1.0, np.max(np.abs(Z))))
            # u component must follow u = U(rho, t) along the field
            du = -V[U] / D - (family.U_t(rho, t) * Z[0] + family.U_rho(rho, t) * Z[2])
            # x component must follow x = g(rho, t)
            dx = Z[1] - (family.g_t(rho, t) * Z[0] + family.g_rho(rho, t) * Z[2])
            big = max(1.0, np.max(np.abs(Z)) * (1.0 + abs(family.g_t(rho, t)) + abs(family.g_rho(rho, t))))
            out["Z tangent to N"] = max(out["Z tangent to N"], abs(du) / big, abs(dx) / big)
    return out


def run_verification(family: SolutionFamily, seed: int = 0, samples: int = 100, integrable_curve: Optional[ProcessCurve] = None) -> list[CheckResult]:
    """Full pass/fail table for one solution family and its process curve."""
    from .process import cubic_pressure, is_characteristically_integrable

    curve = family.curve
    pts = sample_points(seed, samples)
    started = time.perf_counter()
    ids = identity_residuals(curve, pts)
    elapsed = time.perf_counter() - started
    rows = [CheckResult(k, float(v), ALGEBRAIC_TOL, bool(v < ALGEBRAIC_TOL)) for k, v in ids.items() if k != "eigenspace angle"]
    rows.append(CheckResult("eigenspace angle", ids["eigenspace angle"], 1e-8, bool(ids["eigenspace angle"] < 1e-8)))
    rows.append(CheckResult("identity suite runtime [s]", elapsed, 1.0, elapsed < 1.0))

    for k, v in V_residuals(family, pts).items():
        note = "V+ <-> eigenvalue +1" if k == "W V = +-V" else ""
        rows.append(CheckResult(k, float(v), ALGEBRAIC_TOL, bool(v < ALGEBRAIC_TOL), note))

    cubic = integrable_curve or cubic_pressure(2.0, 5.0, (0.2, 5.0))
    for name, c in (("bracket: cubic law integrable", cubic), ("bracket: process curve", curve)):
        verdict = lie_bracket_integrability(c, pts)
        fit = is_characteristically_integrable(c)
        agree = verdict["+"] == verdict["-"] == fit
        rows.append(CheckResult(name, float(verdict["+"]), 0.0, agree, f"bracket={verdict['+']} fit={fit}"))

    tur = pts[:, [T, U, RHO]]
    res = check_ansatz_pde(family, tur)
    rows.append(CheckResult("ansatz PDE residual", res, 1e-9, res < 1e-9))
    mut = check_ansatz_pde(family, tur, mutated_ansatz_partials)
    rows.append(CheckResult("ansatz PDE mutant (must exceed)", mut, 1e-3, mut > 1e-3))

    rt = np.column_stack([pts[:, RHO], pts[:, T]])
    pb = check_solution_annihilates_forms(family, rt)
    rows.append(CheckResult("pullback of forms to solution", pb, SOLUTION_TOL, pb < SOLUTION_TOL))
    mut_chart = family_chart(family, lambda r, t: (0.01 * r, 0.01, 0.0))
    pbm = check_solution_annihilates_forms(family, rt, mut_chart)
    rows.append(CheckResult("pullback mutant g+0.01rho (must exceed)", pbm, SOLUTION_TOL, pbm > SOLUTION_TOL))
    const = constant_chart(1.0, 0.5)
    pbc = max(pullback_residual(curve, const, t, x)[0] for t, x in pts[:, [T, X]])
    rows.append(CheckResult("pullback to constant state", pbc, ALGEBRAIC_TOL, pbc < ALGEBRAIC_TOL))
    return rows

