"""Prime number theorem and Mertens experiments on semigroup tables."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .reports import BoundReport, csv_text
from .semigroup import ElementTable, fit_density


def _rational(gamma) -> Fraction:
    if isinstance(gamma, (int, Fraction)):
        return Fraction(gamma)
    # the shortest decimal repr keeps 2.006 as 1003/500
    return Fraction(str(float(gamma)))


def delta_pnt(gamma) -> Fraction:
    """Error exponent ``min((gamma - 2)/6, 1/198)`` for the prime counting error."""
    g = _rational(gamma)
    if not g > 2:
        raise ValueError(f"prime counting exponent needs gamma > 2, got {gamma}")
    return min((g - 2) / 6, Fraction(1, 198))


def delta_mertens(gamma) -> Fraction:
    """Error exponent ``(gamma - 3/2)^2 / 72`` for the Mertens function."""
    g = _rational(gamma)
    if not g > Fraction(3, 2):
        raise ValueError(f"Mertens exponent needs gamma > 3/2, got {gamma}")
    return (g - Fraction(3, 2)) ** 2 / 72


def contour_R_exponent(gamma: float) -> float:
    """Exponent ``a`` in ``R = T^a`` for the contour radius, ``(g-2)/(66(g-2)+1)``."""
    if not gamma > 2:
        raise ValueError(f"needs gamma > 2, got {gamma}")
    return (gamma - 2) / (66 * (gamma - 2) + 1)


def contour_R(T: float, gamma: float) -> float:
    return float(T) ** contour_R_exponent(gamma)


# --- fits -------------------------------------------------------------------


def exponent_fit(x_grid, errors, power: float = 1.0) -> tuple[float, float]:
    """Slope and r^2 of ``log(error log^power x / x)`` against ``log log x``.

    For ``error = x / log^(1+d) x`` and ``power = 1`` the slope is ``-d``.
    """
    x = np.asarray(x_grid, dtype=float)
    e = np.asarray(errors, dtype=float)
    if x.shape != e.shape or x.size < 5:
        raise ValueError("need at least 5 paired samples")
    if np.any(e <= 0) or np.any(x <= math.e):
        raise ValueError("errors must be positive and x > e; split signs first")
    L = np.log(x)
    y = np.log(e) + power * np.log(L) - L
    ll = np.log(L)
    slope, icept = np.polyfit(ll, y, 1)
    ss_res = float(np.sum((y - (slope * ll + icept)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def signed_exponent_fit(x_grid, errors, power: float = 1.0) -> tuple[float, float]:
    """Fit positive and negative excursions separately and keep the larger slope."""
    x = np.asarray(x_grid, dtype=float)
    e = np.asarray(errors, dtype=float)
    fits = []
    for part in (e > 0, e < 0):
        if np.count_nonzero(part) >= 5:
            fits.append(exponent_fit(x[part], np.abs(e[part]), power))
    if not fits:
        return math.nan, math.nan
    return max(fits)


# --- error profiles -----------------------------------------------------------


@dataclass(frozen=True)
class ErrorProfile:
    kind: str
    x_grid: np.ndarray
    count: np.ndarray
    main_term: np.ndarray
    raw_error: np.ndarray
    normalized: np.ndarray
    power: float
    delta_used: float
    fit: tuple[float, float]
    flags: tuple[str, ...] = field(default=())

    def bounded(self, factor: float = 2.0) -> bool:
        """No growth: the sup over the upper half of the grid stays within
        ``factor`` times the sup over the lower half."""
        a = np.abs(self.normalized)
        if not np.all(np.isfinite(a)):
            return False
        h = a.size // 2
        return bool(a[h:].max() <= factor * max(a[:h].max(), np.finfo(float).tiny))

    def to_csv(self) -> str:
        return csv_text(["x", "count", "main_term", "raw_error", "normalized"],
                        zip(self.x_grid, self.count.tolist(), self.main_term, self.raw_error, self.normalized))

    def summary(self) -> dict:
        return {"kind": self.kind, "delta_used": self.delta_used, "fitted_exponent": self.fit[0],
                "r_squared": self.fit[1], "bounded": self.bounded(), "flags": list(self.flags)}


def _grid(table: ElementTable, x_grid, points: int):
    if x_grid is None:
        if table.x_max < 1e3:
            raise ValueError("profiles need x_max >= 1e3")
        return np.geomspace(10.0, table.x_max, points)
    x = np.asarray(x_grid, dtype=float)
    if x.ndim != 1 or x.size == 0 or np.any(x < 1) or np.any(np.diff(x) <= 0):
        raise ValueError("x_grid must be increasing with x >= 1")
    return x


def _applicability(table: ElementTable) -> list[str]:
    if table.x_max < 1e3:
        return []
    fit = fit_density(table)
    if fit.A == 0:
        return [f"non_applicable: {fit.flag}"]
    return []


def _delta(fn, gamma, bound) -> tuple[float, list[str]]:
    try:
        return float(fn(gamma)), []
    except ValueError:
        return 0.0, [f"gamma_out_of_range: gamma = {gamma} <= {bound}, profile uses delta = 0"]


def pnt_profile(table: ElementTable, gamma: float, x_grid=None, points: int = 40) -> ErrorProfile:
    """``pi(x) - x/log x`` normalized by ``log^(1+delta) x / x``."""
    x = _grid(table, x_grid, points)
    delta, flags = _delta(delta_pnt, gamma, 2)
    flags += _applicability(table)
    count = table.pi_many(x)
    with np.errstate(divide="ignore"):
        main = np.where(x > 1, x / np.log(x), 0.0)
    raw = count - main
    L = np.log(x)
    normalized = raw * L ** (1 + delta) / x
    fit = _safe_fit(x, raw, 1.0)
    return ErrorProfile("pnt", x, count, main, raw, normalized, 1 + delta, delta, fit, tuple(flags))


def mertens_profile(table: ElementTable, gamma: float, x_grid=None, points: int = 40) -> ErrorProfile:
    """``M(x)`` normalized by ``log^delta x / x``."""
    x = _grid(table, x_grid, points)
    delta, flags = _delta(delta_mertens, gamma, 1.5)
    flags += _applicability(table)
    count = table.M_many(x)
    raw = count.astype(float)
    normalized = raw * np.log(x) ** delta / x
    fit = _safe_fit(x, raw, 0.0)
    return ErrorProfile("mertens", x, count, np.zeros_like(x), raw, normalized, delta, delta, fit, tuple(flags))


def _safe_fit(x, raw, power):
    keep = x > math.e
    return signed_exponent_fit(x[keep], raw[keep], power)


# --- psi bump argument --------------------------------------------------------


def psi_step_data(table: ElementTable) -> tuple[np.ndarray, np.ndarray]:
    """Jump points ``t = log n`` of ``psi(e^t)`` and the values from there on."""
    t = np.unique(table.norms[table.lam > 0])
    return np.concatenate([[0.0], np.log(t)]), np.concatenate([[0.0], table.psi_many(t)])


class _PsiData:
    """``t -> psi(e^t)`` from step data ``(t, values)`` or a callable."""

    def __init__(self, psi_data):
        if callable(psi_data):
            self.fn = psi_data
            self.t = self.v = None
            return
        t, v = (np.asarray(a, dtype=float) for a in psi_data)
        if t.shape != v.shape or t.ndim != 1 or np.any(np.diff(t) <= 0):
            raise ValueError("step data needs increasing t and matching values")
        if np.any(np.diff(v) < 0):
            raise ValueError("psi data must be non-decreasing")
        self.fn = None
        self.t, self.v = t, v

    def integral(self, a: float, b: float) -> float:
        """``int_a^b (psi(e^t) e^-t - 1) dt``."""
        if b <= a:
            return 0.0
        if self.fn is None:
            cuts = self.t[(self.t > a) & (self.t < b)]
            edges = np.concatenate([[a], cuts, [b]])
            idx = np.searchsorted(self.t, edges[:-1], side="right") - 1
            vals = np.where(idx >= 0, self.v[np.maximum(idx, 0)], 0.0)
            return float(np.sum(vals * (np.exp(-edges[:-1]) - np.exp(-edges[1:]))) - (b - a))
        nodes, weights = np.polynomial.legendre.leggauss(32)
        panels = np.linspace(a, b, 65)
        total = 0.0
        for lo, hi in zip(panels[:-1], panels[1:]):
            t = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
            f = np.array([float(self.fn(s)) for s in t]) * np.exp(-t) - 1.0
            total += 0.5 * (hi - lo) * float(weights @ f)
        return total


def psi_bump_width(psi_data, t0: float, I_tail: Callable[[float], float] | None = None,
                   h_grid: Sequence[float] | None = None, mode: str = "sharp") -> float:
    """Pointwise bound ``|psi(e^t0) e^-t0 - 1| <= delta(t0)`` from integrated data.

    With ``D(h) = I(t0) - I(t0 + h)`` where ``I(T) = int_T^oo (psi(e^t) e^-t - 1) dt``
    and ``psi`` non-decreasing, every ``h > 0`` gives
    ``psi(e^t0) e^-t0 <= (D(h) + h) / (1 - e^-h)``; the left window gives
    ``psi(e^t0) e^-t0 >= (D_left(h) + h) / (e^h - 1)``.  ``mode="sharp"``
    optimizes both over ``h_grid``.  ``mode="quadratic"`` returns the largest
    ``delta`` with ``D(delta/3) >= delta^2/6``, the cruder classical form.

    ``psi_data`` is step data ``(t, values)`` or a callable ``t -> psi(e^t)``;
    ``I_tail``, when given, supplies ``D`` on the right of ``t0``.
    """
    data = _PsiData(psi_data)
    if h_grid is None:
        h_grid = np.geomspace(1e-7, 1.0, 141)
    h = np.asarray(h_grid, dtype=float)
    if np.any(h <= 0):
        raise ValueError("h_grid must be positive")
    t_hi = math.inf if data.t is None or I_tail is not None else data.t[-1]

    def right(w):
        if I_tail is not None:
            return float(I_tail(t0) - I_tail(t0 + w))
        return data.integral(t0, t0 + w)

    if mode == "quadratic":
        d = np.geomspace(1e-6, 3.0, 400)
        d = d[t0 + d / 3 <= t_hi]
        ok = np.array([right(v / 3) >= v * v / 6 for v in d])
        if not ok.any():
            return 0.0
        return float(d[np.nonzero(ok)[0].max()])
    if mode != "sharp":
        raise ValueError(f"unknown mode {mode!r}")
    hr = h[t0 + h <= t_hi]
    if hr.size == 0:
        raise ValueError("no data to the right of t0")
    upper = min((right(w) + w) / -math.expm1(-w) for w in hr) - 1.0
    t_lo = 0.0 if data.t is None else data.t[0]
    hl = h[t0 - h >= t_lo]
    lower = 0.0
    if hl.size:
        lower = 1.0 - max((data.integral(t0 - w, t0) + w) / math.expm1(w) for w in hl)
    return max(upper, lower, 0.0)


# --- psi to pi chain ----------------------------------------------------------


def psi_to_pi_check(table: ElementTable, x: float) -> BoundReport:
    """``pi(x) log x - psi(x)`` against the chain bound via the cut ``y = x/log^2 x``.

    Steps, each checked on the table:
    ``psi(x) >= psi(x) - psi(y) >= (pi(x) - pi(y)) log y
    >= (pi(x) - N(y)) log x - 2 pi(x) log log x``.
    The report's ``rhs`` is ``C x log log x / log x`` with ``C`` the constant
    the chain implies at ``x``; ``tags["C_measured"]`` is the observed one.
    """
    x = float(x)
    if x < 16:
        raise ValueError(f"needs x >= 16 so that log log x > 0, got {x}")
    if x > table.x_max:
        raise ValueError(f"x = {x} exceeds the table bound {table.x_max}")
    L = math.log(x)
    LL = math.log(L)
    y = x / (L * L)
    flags = [] if y >= 1 else ["cutoff x/log^2 x below 1"]
    psi_x, psi_y = table.psi(x), table.psi(y)
    pi_x, pi_y, N_y = table.pi(x), table.pi(y), table.N(y)
    values = [
        psi_x,
        psi_x - psi_y,
        (pi_x - pi_y) * math.log(y),
        (pi_x - N_y) * L - 2 * pi_x * LL,
    ]
    tol = 1e-9 * max(abs(v) for v in values)
    steps = [a >= b - tol for a, b in zip(values, values[1:])]
    lhs = pi_x * L - psi_x
    bound = N_y * L + 2 * pi_x * LL
    structural = x * LL / L
    return BoundReport.make(
        x, lhs, bound, C=bound / structural, C_measured=lhs / structural, chain=tuple(values),
        steps=tuple(steps), chain_holds=all(steps), flags=tuple(flags),
    )


def psi_to_pi_scan(table: ElementTable, xs: Sequence[float]) -> list[BoundReport]:
    return [psi_to_pi_check(table, x) for x in xs]


def chain_csv(reports: Sequence[BoundReport]) -> str:
    return csv_text(["x", "lhs", "rhs", "ratio", "C", "C_measured", "chain_holds"],
                    ((r.grid_point, r.lhs, r.rhs, r.ratio, r.tags["C"], r.tags["C_measured"], r.tags["chain_holds"])
                     for r in reports))
