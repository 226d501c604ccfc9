"""Closed-form oscillatory integrals and the effective Riemann-Lebesgue bound.

Convention throughout the package: ``e(t) = exp(-2 pi i t)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .pvariation import PiecewiseFunction, p_variation
from .reports import BoundReport, csv_text

__all__ = [
    "OscillatoryResult",
    "oscillatory_integral",
    "riemann_lebesgue_bound",
    "oscillatory_check",
    "verify_rl",
    "rl_csv",
]

_SERIES_CUTOFF = 0.05


@dataclass(frozen=True)
class OscillatoryResult:
    integral: complex
    bound: float
    x: float
    p: float

    @property
    def holds(self) -> bool:
        return abs(self.integral) <= self.bound * (1 + 1e-9)


def _odd_moment_kernel(y: np.ndarray) -> np.ndarray:
    """(sin y - y cos y) / y^2, i.e. int_0^1 s sin(y s) ds, stable near 0."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    small = np.abs(y) < _SERIES_CUTOFF
    ys = y[small]
    y2 = ys * ys
    out[small] = ys * (1 / 3 - y2 * (1 / 30 - y2 * (1 / 840 - y2 / 45360)))
    yl = y[~small]
    out[~small] = (np.sin(yl) - yl * np.cos(yl)) / (yl * yl)
    return out


def _piece_integrals(f: PiecewiseFunction, omega: float) -> np.ndarray:
    left, right = f.nodes[:-1], f.nodes[1:]
    mid = 0.5 * (left + right)
    half = 0.5 * (right - left)
    y = omega * half
    phase = np.exp(-1j * omega * mid)
    # int_{-d}^{d} e^{-i omega u} du = 2 d sinc(omega d)
    even = 2 * half * np.sinc(y / np.pi)
    if f.kind == "step":
        return f.values * phase * even
    vl, vr = f.values[:-1], f.values[1:]
    centre = 0.5 * (vl + vr)
    slope = (vr - vl) / (2 * half)
    # int_{-d}^{d} u e^{-i omega u} du = -2i d^2 K(omega d)
    odd = -2j * half * half * _odd_moment_kernel(y)
    return phase * (centre * even + slope * odd)


def oscillatory_integral(f: PiecewiseFunction, x: float) -> complex:
    """``int f(t) e(x t) dt`` over the domain of ``f``, exact per piece.

    Constant and linear pieces use their antiderivatives written in
    midpoint form so that short pieces (small ``x * width``) do not cancel.
    """
    if not x > 0:
        raise ValueError(f"x must be positive, got {x}")
    if f.kind == "linear" and f.nodes.size == 1:
        return 0j
    return complex(np.sum(_piece_integrals(f, 2 * np.pi * float(x))))


def _check_unit_domain(f: PiecewiseFunction):
    if f.domain != (0.0, 1.0):
        raise ValueError(f"the Riemann-Lebesgue bound is stated on [0, 1], got domain {f.domain}")


def riemann_lebesgue_bound(f: PiecewiseFunction, x: float, p: float, vp: float | None = None) -> float:
    """``V_p(f) x^(-1/p) + |f|_inf / x``; pass ``vp`` to reuse a computed variation."""
    if not x > 0:
        raise ValueError(f"x must be positive, got {x}")
    _check_unit_domain(f)
    if vp is None:
        vp = p_variation(f, p).value
    return vp * x ** (-1.0 / p) + f.sup_norm() / x


def oscillatory_check(f: PiecewiseFunction, x: float, p: float) -> OscillatoryResult:
    return OscillatoryResult(oscillatory_integral(f, x), riemann_lebesgue_bound(f, x, p), float(x), float(p))


def verify_rl(fs, xs: Iterable[float], p: float, slack: float = 1e-9) -> list[BoundReport]:
    """One record per (f, x); complex ``f`` is checked on its real and imaginary parts.

    ``fs`` is a mapping ``id -> f`` or a sequence (ids are positions).
    Records carry ``tags = {f_id, x, p, violated}``.
    """
    items = fs.items() if isinstance(fs, Mapping) else enumerate(fs)
    xs = [float(x) for x in xs]
    if not xs:
        raise ValueError("empty x grid")
    reports = []
    for fid, f in items:
        parts = [(fid, f)]
        if f.is_complex:
            parts = [(f"{fid}.re", f.real), (f"{fid}.im", f.imag)]
        for pid, g in parts:
            vp = p_variation(g, p).value
            for x in xs:
                lhs = abs(oscillatory_integral(g, x))
                rhs = riemann_lebesgue_bound(g, x, p, vp=vp)
                rep = BoundReport.make(x, lhs, rhs, f_id=pid, x=x, p=float(p))
                rep.tags["violated"] = rep.violated(slack)
                reports.append(rep)
    if not reports:
        raise ValueError("no functions supplied")
    return reports


def rl_csv(reports: Iterable[BoundReport]) -> str:
    return csv_text(
        ["f_id", "x", "p", "lhs", "rhs", "ratio"],
        ([r.tags["f_id"], r.tags["x"], r.tags["p"], r.lhs, r.rhs, r.ratio] for r in reports),
    )
