"""Laplace transforms of bounded signals and a numerical harness for the
effective Tauberian bound.

A signal ``f`` on ``[0, inf)`` has Laplace transform ``g(z) = int_0^inf f e^{-zt} dt``
(Re z > 0) and truncated transform ``g_T(z) = int_0^T f e^{-zt} dt`` (entire).
The boundary function is ``g~(t) = g(it)``.

Contour integrals carry the factor ``e^{T(z - sigma)}``, which reaches
``e^{T(R - sigma)}`` on the right half circle while the final value is O(1),
so they are evaluated in mpmath with the working precision raised by the
number of digits that cancel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import mpmath as mp
import numpy as np

from .pvariation import PiecewiseFunction, p_variation
from .reports import BoundReport, csv_text

__all__ = [
    "BoundedSignal",
    "LaplaceValue",
    "TauberParams",
    "TauberStudy",
    "catalogue",
    "CATALOGUE_IDS",
    "psi_signal",
    "laplace",
    "finite_laplace",
    "circle_kernel_identity",
    "mollified_contour_integral",
    "contour_reconstruction",
    "tail_bound_check",
    "theorem3_bound",
    "boundary_statistics",
    "tauber_convergence_study",
    "boundary_growth_check",
    "study_csv",
]

POLE_DISTANCE = 1e-9
PATHS = ("right_half_circle", "imaginary_segment", "left_half_circle")

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


@dataclass(frozen=True, eq=False)
class BoundedSignal:
    """A bounded signal with optional closed forms.

    ``evaluator`` is vectorized over numpy arrays of ``t >= 0``;
    ``mp_evaluator`` is the scalar mpmath version used at raised precision.
    ``closed_g(z)`` and ``closed_gT(z, T)`` accept mpmath or Python complex.
    ``g0`` is ``int_0^inf f`` when it is known, ``primitive(T) = int_0^T f``.
    """

    evaluator: Callable
    sup_bound: float
    catalogue_id: str | None = None
    closed_g: Callable | None = None
    closed_gT: Callable | None = None
    mp_evaluator: Callable | None = None
    g0: complex | None = None
    primitive: Callable | None = None
    t_max: float = math.inf
    note: str = ""

    def __call__(self, t):
        return self.evaluator(np.asarray(t, dtype=float))

    def boundary(self, t):
        """``g~(t) = g(it)`` from the closed form."""
        if self.closed_g is None:
            raise ValueError(f"signal {self.catalogue_id!r} has no closed-form transform")
        return complex(self.closed_g(1j * float(t)))

    def check_sup(self, t_max: float = 50.0, n: int = 10**4) -> bool:
        t = np.linspace(0, min(t_max, self.t_max), n)
        return bool(np.all(np.abs(self(t)) <= self.sup_bound * (1 + 1e-12)))


def _exp_decay():
    return BoundedSignal(
        lambda t: np.exp(-t),
        1.0,
        "exp_decay",
        closed_g=lambda z: 1 / (1 + z),
        closed_gT=lambda z, T: (1 - mp.exp(-(1 + z) * T)) / (1 + z),
        mp_evaluator=lambda t: mp.exp(-t),
        g0=1.0,
    )


def _exp_linear_gT(z, T):
    w = 1 + z
    e = mp.exp(-w * T)
    return (1 - e) / w - (1 - e * (1 + w * T)) / (w * w)


def _exp_linear():
    # sup is attained at t = 0; the minimum -e^{-2} sits at t = 2
    return BoundedSignal(
        lambda t: np.exp(-t) * (1 - t),
        1.0,
        "exp_linear",
        closed_g=lambda z: z / (1 + z) ** 2,
        closed_gT=_exp_linear_gT,
        mp_evaluator=lambda t: mp.exp(-t) * (1 - t),
        g0=0.0,
    )


def _zero():
    return BoundedSignal(
        lambda t: np.zeros_like(t),
        0.0,
        "zero",
        closed_g=lambda z: 0 * z,
        closed_gT=lambda z, T: 0 * z,
        mp_evaluator=lambda t: mp.mpf(0),
        g0=0.0,
        primitive=lambda T: 0.0,
    )


def _sine():
    return BoundedSignal(
        np.sin,
        1.0,
        "sine",
        closed_g=lambda z: 1 / (1 + z * z),
        closed_gT=lambda z, T: (1 - mp.exp(-z * T) * (z * mp.sin(T) + mp.cos(T))) / (1 + z * z),
        mp_evaluator=mp.sin,
        g0=None,
        primitive=lambda T: 1 - math.cos(T),
        note="g has poles at z = +-i, so g~ is not locally integrable and int_0^T sin does not converge",
    )


_CATALOGUE = {"exp_decay": _exp_decay, "exp_linear": _exp_linear, "zero": _zero, "sine": _sine}
CATALOGUE_IDS = tuple(_CATALOGUE)


def catalogue(signal_id: str) -> BoundedSignal:
    """Signals with closed-form transforms.

    exp_decay   e^{-t}            g = 1/(1+z)
    exp_linear  e^{-t}(1-t)       g = z/(1+z)^2, g(0) = 0
    zero        0                 g = 0
    sine        sin t             g = 1/(1+z^2); violates the boundary hypotheses
    """
    try:
        return _CATALOGUE[signal_id]()
    except KeyError:
        raise ValueError(f"unknown signal {signal_id!r}; choose from {CATALOGUE_IDS}") from None


def psi_signal(table, g0: float | None = None) -> BoundedSignal:
    """``f(t) = psi(e^t) e^{-t} - 1`` from an element table, defined for ``t <= log x_max``.

    ``int_0^T f = sum_{|n| <= X} Λ(n)/|n| - psi(X)/X - T`` with ``X = e^T`` is exact
    on the table.  For the classical table the transform
    ``g(z) = -zeta'/zeta(1+z) / (1+z) - 1/z`` is evaluated with mpmath, and
    ``g(0) = -1 - Euler's constant``.
    """
    norms = table.norms
    lam = table.lam
    psi_at = np.cumsum(lam)
    # f jumps up at each norm; extremes are just after a jump or just before one
    before = np.concatenate([[0.0], psi_at[:-1]])
    sup = float(max(np.max(np.abs(psi_at / norms - 1)), np.max(np.abs(before / norms - 1))))
    cum_ratio = np.cumsum(lam / norms)
    t_max = math.log(table.x_max)

    def evaluator(t):
        t = np.asarray(t, dtype=float)
        if np.any(t > t_max * (1 + 1e-12)):
            raise ValueError(f"psi signal is only known for t <= {t_max}")
        x = np.exp(t)
        return table.psi_many(x) / x - 1

    def primitive(T):
        if T > t_max * (1 + 1e-12):
            raise ValueError(f"psi signal is only known for t <= {t_max}")
        X = math.exp(T)
        k = table.N(X)
        s = cum_ratio[k - 1] if k else 0.0
        return float(s - table.psi(X) / X - T)

    closed_g = None
    if table.primes.generator == "classical":
        if g0 is None:
            g0 = -1.0 - float(mp.euler)

        def closed_g(z):
            z = mp.mpmathify(z)
            # the pole of -zeta'/zeta at 1 cancels against 1/z
            extra = 10 + max(0, int(-mp.log10(abs(z))))
            with mp.workdps(mp.mp.dps + extra):
                s = 1 + z
                value = -mp.zeta(s, derivative=1) / mp.zeta(s) / s - 1 / z
            return +value

    return BoundedSignal(
        evaluator, sup, f"psi:{table.primes.generator}", closed_g=closed_g, g0=g0,
        primitive=primitive, t_max=t_max,
    )


@dataclass(frozen=True)
class LaplaceValue:
    value: complex
    error: float
    T_max: float


def _composite_gl(func, a, b, panels):
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    t = mid[:, None] + half[:, None] * _GL_X
    return complex(np.sum(half[:, None] * _GL_W * func(t)))


def _adaptive_gl(func, a, b, tol, panels):
    prev = _composite_gl(func, a, b, panels)
    while panels < 2**18:
        panels *= 2
        cur = _composite_gl(func, a, b, panels)
        if abs(cur - prev) <= tol:
            return cur, abs(cur - prev)
        prev = cur
    return cur, abs(cur - prev)


def _start_panels(a, b, z, dt):
    if dt is not None:
        return max(1, int(math.ceil((b - a) / dt)))
    return max(4, int(math.ceil((b - a) * (1 + abs(complex(z).imag) + abs(complex(z).real)) / 4)))


def laplace(f: BoundedSignal, z: complex, T_max: float | None = None, dt: float | None = None,
            tol: float = 1e-10) -> LaplaceValue:
    """``int_0^inf f e^{-zt} dt`` by composite Gauss-Legendre on ``[0, T_max]``.

    The discarded tail is bounded by ``sup_bound e^{-T_max Re z} / Re z``;
    ``T_max`` defaults to the smallest horizon making that bound ``tol / 2``.
    """
    z = complex(z)
    if not z.real > 0:
        raise ValueError(f"Re z must be positive, got {z}")
    if f.sup_bound == 0:
        T_need = 1.0
    else:
        T_need = max(1.0, math.log(2 * f.sup_bound / (tol * z.real)) / z.real)
    if T_max is None:
        T_max = T_need
    tail = f.sup_bound * math.exp(-T_max * z.real) / z.real
    if tail > tol:
        raise ValueError(f"tail bound {tail:.3g} at T_max = {T_max} exceeds tolerance {tol}")
    if T_max > f.t_max:
        raise ValueError(f"T_max = {T_max} beyond the signal's range {f.t_max}")
    value, err = _adaptive_gl(lambda t: f(t) * np.exp(-z * t), 0.0, T_max, tol / 2, _start_panels(0, T_max, z, dt))
    return LaplaceValue(value, err + tail, float(T_max))


def _mp_split_points(T):
    pts = [0.0] + [2.0**j for j in range(0, 64) if 2.0**j < T] + [float(T)]
    return sorted(set(pts))


def finite_laplace(f: BoundedSignal, z: complex, T: float, dt: float | None = None,
                   dps: int | str | None = None, tol: float = 1e-12):
    """``g_T(z) = int_0^T f e^{-zt} dt``.

    Double precision by default (a Python complex).  With ``dps`` set, mpmath
    quadrature at that precision returns an ``mpc``; ``dps="auto"`` doubles the
    precision until the quadrature error estimate is below ``1e-10`` of the value,
    which resolves results far below the double range such as ``T e^{-T}`` at
    ``T = 1000``.
    """
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    if T > f.t_max * (1 + 1e-12):
        raise ValueError(f"T = {T} beyond the signal's range {f.t_max}")
    if dps is None:
        z = complex(z)
        scale = max(1.0, f.sup_bound * T * math.exp(max(0.0, -z.real) * T))
        value, _ = _adaptive_gl(lambda t: f(t) * np.exp(-z * t), 0.0, float(T), tol * scale,
                                _start_panels(0, T, z, dt))
        return value
    if f.mp_evaluator is None:
        raise ValueError("high-precision evaluation needs an mpmath evaluator")
    pts = _mp_split_points(T)
    levels = [int(dps)] if dps != "auto" else [30 * 2**j for j in range(8)]
    for level in levels:
        with mp.workdps(level):
            zz = mp.mpmathify(z)
            rz = mp.re(zz)
            # size of int |f e^{-zt}|, against which rounding noise is measured
            scale = mp.mpf(f.sup_bound) * (T if rz == 0 else -mp.expm1(-rz * T) / rz)
            value, err = mp.quad(lambda t: f.mp_evaluator(t) * mp.exp(-zz * t), pts, error=True)
            resolved = value != 0 and err <= 1e-10 * abs(value) and abs(value) >= scale * mp.mpf(10) ** (20 - level)
            if dps != "auto" or resolved:
                return +value
    raise ArithmeticError("finite Laplace transform not resolved at the highest precision level")


def circle_kernel_identity(z: complex, R: float) -> tuple[complex, float]:
    """Both sides of ``1/z + z/R^2 = 2 Re z / |z|^2`` for ``|z| = R``."""
    z = complex(z)
    if abs(abs(z) - R) >= 1e-9 * R:
        raise ValueError(f"|z| = {abs(z)} is not on the circle of radius {R}")
    return 1 / z + z / R**2, 2 * z.real / abs(z) ** 2


def mollified_contour_integral(g: Callable, sigma: float, R: float, T: float, path: str,
                               dps: int | None = None, tol: float = 1e-10) -> complex:
    """``(1/2 pi i) int_path g(z) e^{T(z - sigma)} (1/(z - sigma) + z/R^2) dz``.

    Paths: ``right_half_circle`` z = R e^{i theta}, theta from -pi/2 to pi/2;
    ``imaginary_segment`` z = it, t from R down to -R;
    ``left_half_circle`` theta from pi/2 to 3 pi/2.
    Right half circle plus segment is a closed contour around ``sigma``.
    ``g`` must accept mpmath complex arguments.  Quadrature is Gauss-Legendre
    in mpmath with degree doubling; panel breaks on the segment are placed
    geometrically at distances ``sigma 2^j`` from the point nearest the pole.
    """
    if path not in PATHS:
        raise ValueError(f"unknown path {path!r}; choose from {PATHS}")
    if not R > sigma:
        raise ValueError("R must exceed sigma")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if path == "imaginary_segment" and sigma < POLE_DISTANCE:
        raise ValueError("the pole z = sigma lies on the imaginary segment")
    if path != "imaginary_segment" and R - sigma < POLE_DISTANCE:
        raise ValueError("the pole z = sigma lies on the circle")
    if dps is None:
        # rounded so that cached quadrature nodes are shared between calls
        dps = 20 + int(math.ceil(T * (R - sigma) / math.log(10)))
        dps = -(-dps // 16) * 16
    with mp.workdps(dps):
        s = mp.mpf(sigma)
        R2 = mp.mpf(R) ** 2

        def kernel(z):
            d = z - s
            if abs(d) < POLE_DISTANCE:
                raise ValueError(f"integrand evaluated within {POLE_DISTANCE} of the pole z = sigma")
            return g(z) * mp.exp(T * d) * (1 / d + z / R2)

        if path == "imaginary_segment":
            breaks = [mp.mpf(0)]
            step = s
            while step < R:
                breaks = [-step] + breaks + [step]
                step *= 2
            pts = [mp.mpf(R)] + list(reversed(breaks)) + [-mp.mpf(R)]
            integrand = lambda t: kernel(mp.mpc(0, t)) * mp.mpc(0, 1)
        else:
            lo, hi = (-mp.pi / 2, mp.pi / 2) if path == "right_half_circle" else (mp.pi / 2, 3 * mp.pi / 2)
            pts = [lo + (hi - lo) * j / 4 for j in range(5)]

            def integrand(th):
                z = R * mp.expjpi(th / mp.pi)
                return kernel(z) * mp.mpc(0, 1) * z

        value, err = mp.quad(integrand, pts, method="gauss-legendre", error=True, maxdegree=8)
        value = value / (2 * mp.pi * mp.mpc(0, 1))
        scale = max(1.0, abs(value))
        if err / (2 * math.pi) > tol * scale * 1e3:
            raise ArithmeticError(f"contour quadrature did not converge (error estimate {float(err):.3g})")
        return complex(value)


def contour_reconstruction(g: Callable, sigma: float, R: float, T: float) -> complex:
    """Right half circle plus imaginary segment; equals ``g(sigma)`` when ``g``
    is holomorphic on the closed right half disc."""
    return mollified_contour_integral(g, sigma, R, T, "right_half_circle") + \
        mollified_contour_integral(g, sigma, R, T, "imaginary_segment")


def tail_bound_check(f: BoundedSignal, z: complex, T: float, slack: float = 1e-6) -> BoundReport:
    """``|g_T(z) - g(z)| <= sup_bound e^{-T Re z} / Re z``.

    The left side is formed directly as ``e^{-zT} int_0^U f(T + u) e^{-zu} du``
    with ``U`` long enough that the remainder is 1e-12 of the bound, which
    avoids subtracting two nearly equal transforms.
    """
    z = complex(z)
    if not z.real > 0:
        raise ValueError(f"Re z must be positive, got {z}")
    if not T >= 0:
        raise ValueError("T must be >= 0")
    rhs = f.sup_bound * math.exp(-T * z.real) / z.real
    U = math.log(1e12) / z.real
    if f.sup_bound == 0:
        lhs = 0.0
    else:
        inner, _ = _adaptive_gl(lambda u: f(T + u) * np.exp(-z * u), 0.0, U, 1e-13,
                                _start_panels(0, U, z, None))
        lhs = abs(np.exp(-z * T) * inner)
    rep = BoundReport.make(z, lhs, rhs, T=float(T))
    rep.tags["violated"] = not lhs <= rhs * (1 + slack)
    return rep


@dataclass(frozen=True)
class TauberParams:
    """``(p, k, R, T)`` with optional hypothesis constants.

    ``r`` is the radius beyond which the bulk bound on g holds, ``delta2`` the
    radius of the near-zero estimate; runs with ``R <= max(r, 1)`` or
    ``T^-k >= delta2`` are flagged, not rejected.
    """

    p: float
    k: float
    R: float
    T: float
    delta1: float | None = None
    delta2: float | None = None
    r: float | None = None
    C: float | None = None
    K: float | None = None

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if not 0 < self.k < 1 / (2 * self.p):
            raise ValueError(f"k must lie in (0, 1/(2p)) = (0, {1 / (2 * self.p)}), got {self.k}")
        if not (self.R > 0 and self.T > 0):
            raise ValueError("R and T must be positive")

    @property
    def eps(self) -> float:
        return self.T ** -self.k

    def threshold_flags(self) -> list[str]:
        flags = []
        if self.R <= max(self.r or 0.0, 1.0):
            flags.append("R <= max(r, 1)")
        if self.delta2 is not None and self.eps >= self.delta2:
            flags.append("T^-k >= delta2")
        if self.eps >= self.R:
            flags.append("T^-k >= R")
        return flags


def theorem3_bound(params: TauberParams, sup_pos: float, sup_neg: float, vp_pos: float, vp_neg: float,
                   sup_f: float, implied_constant: float = 1.0) -> float:
    """Explicit error bound for ``|int_0^T f - g(0)|``.

    ``sup_*`` and ``vp_*`` are the sup norm and p-variation of the boundary
    function on ``[T^-k, R]`` (pos) and ``[-R, -T^-k]`` (neg).
    """
    p, k, R, T = params.p, params.k, params.R, params.T
    mid = T ** -(1 / p - 2 * k)
    far = T ** -(1 - k)

    def side(sup, vp):
        return mid * (sup**p + (vp / T**k) ** p) ** (1 / p) + sup * far

    return implied_constant * (sup_f / R + T**-k + side(sup_pos, vp_pos) + side(sup_neg, vp_neg))


def boundary_statistics(f: BoundedSignal, lo: float, hi: float, p: float, samples: int = 2001):
    """Sup norm and p-variation of ``g~`` sampled on ``[lo, hi]``.

    The variation of the piecewise-linear interpolant is a lower estimate of
    the true value that converges as ``samples`` grows.
    """
    t = np.linspace(lo, hi, samples)
    vals = np.array([f.boundary(v) for v in t])
    g = PiecewiseFunction.linear(t, vals, (lo, hi))
    return g.sup_norm(), p_variation(g, p).value


@dataclass
class TauberStudy:
    reports: list
    fitted_constant: float
    decreasing: bool
    flags: list = field(default_factory=list)


def _R_of(R_rule, T):
    if callable(R_rule):
        return float(R_rule(T))
    if isinstance(R_rule, dict):
        return float(R_rule.get("scale", 1.0)) * T ** float(R_rule["power"])
    return T ** float(R_rule)


def tauber_convergence_study(f: BoundedSignal, p: float, k: float, R_rule, T_grid: Iterable[float],
                             samples: int = 2001, implied_constant: float | None = None,
                             dps: int | str | None = "auto") -> TauberStudy:
    """Measured ``|int_0^T f - g(0)|`` against the explicit bound over ``T_grid``.

    ``R_rule`` is an exponent ``a`` (R = T^a), a mapping ``{"power", "scale"}``
    or a callable.  Without ``implied_constant`` the constant is fitted as the
    max of measured / structural bound, so that the bound dominates on the grid.
    The measured side uses the exact primitive when the signal has one,
    otherwise quadrature (mpmath at ``dps`` when available).
    """
    if f.g0 is None:
        raise ValueError(f"signal {f.catalogue_id!r} has no known g(0); the integral need not converge")
    rows = []
    flags = []
    for T in T_grid:
        T = float(T)
        params = TauberParams(p, k, _R_of(R_rule, T), T)
        eps = params.eps
        if f.primitive is not None:
            measured = mp.mpf(abs(f.primitive(T) - f.g0))
        elif f.mp_evaluator is not None and dps is not None:
            measured = abs(finite_laplace(f, 0, T, dps=dps) - f.g0)
        else:
            measured = mp.mpf(abs(finite_laplace(f, 0.0, T) - f.g0))
        sup_pos, vp_pos = boundary_statistics(f, eps, params.R, p, samples)
        sup_neg, vp_neg = boundary_statistics(f, -params.R, -eps, p, samples)
        structural = theorem3_bound(params, sup_pos, sup_neg, vp_pos, vp_neg, f.sup_bound)
        rows.append((T, params, measured, structural))
        flags.extend(f"T={T}: {fl}" for fl in params.threshold_flags())
    if implied_constant is None:
        implied_constant = max(float(m / s) for _, _, m, s in rows)
    reports = []
    for T, params, measured, structural in rows:
        rep = BoundReport.make(T, float(measured), implied_constant * structural, T=T, R=params.R,
                               structural=structural, fitted_constant=implied_constant, lhs_mp=measured)
        reports.append(rep)
    lhs = [r.tags["lhs_mp"] for r in reports]
    decreasing = all(b <= a for a, b in zip(lhs, lhs[1:]))
    return TauberStudy(reports, implied_constant, decreasing, flags)


def boundary_growth_check(f: BoundedSignal, delta: float, K: float | None = None, n: int = 1000) -> BoundReport:
    """Transfer of ``|g(z)| <= K|z|`` near 0 to ``|g~(t)| <= K|t|`` for ``0 < |t| <= delta``.

    Without ``K`` it is estimated as ``max |g(z)/z|`` on the circle ``|z| = delta``
    (the maximum over the disc when ``g(0) = 0``).  ``lhs`` is
    ``max |g~(t)| / |t|`` over the sampled boundary.
    """
    if f.closed_g is None:
        raise ValueError("need a closed-form transform")
    if K is None:
        th = np.linspace(0, 2 * np.pi, 4 * n, endpoint=False)
        K = max(abs(complex(f.closed_g(complex(delta * np.exp(1j * a))))) / delta for a in th)
    t = np.concatenate([-np.geomspace(delta, delta * 1e-6, n), np.geomspace(delta * 1e-6, delta, n)])
    ratio = max(abs(f.boundary(v)) / abs(v) for v in t)
    return BoundReport.make(delta, ratio, K, K=K)


def study_csv(study: TauberStudy) -> str:
    return csv_text(
        ["T", "lhs", "rhs", "ratio", "fitted_constant"],
        ([r.grid_point, mp.nstr(r.tags["lhs_mp"], 17) if r.lhs == 0 and r.tags["lhs_mp"] != 0 else r.lhs,
          r.rhs, r.ratio, r.tags["fitted_constant"]] for r in study.reports),
    )
