"""Zeta function of a semigroup table and numerical probes of its behaviour
near and on the line Re s = 1.

For an element table truncated at X, partial integration against the step
function N gives

    zeta(s) ~ sum_{|g| <= X} |g|^-s - N(X) X^-s + A s X^(1-s) / (s - 1),

which stays meaningful on Re s = 1 (s != 1) where the plain partial sum does
not converge.  Uncertainties of this form are the spread of its value over the
truncation levels X, X/2, X/4, ... .
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .reports import csv_text
from .semigroup import fit_density

__all__ = [
    "ZetaEvaluation",
    "LemmaDiagnostic",
    "LEMMA_IDS",
    "zeta_partial",
    "zeta_euler",
    "zeta_stieltjes",
    "zeta_line",
    "zeta_derivatives",
    "fejer_kernel",
    "fejer_quotient",
    "positivity_inequality",
    "positivity_scan",
    "lemma_diagnostic",
    "H_near_1",
    "lemma_grid",
    "DEFAULT_GAMMA",
    "diagnostic_csv",
]

LEVELS = 4

LEMMA_IDS = (
    "growth",
    "dprime_1",
    "dprime_2_log",
    "ddprime",
    "ddprime_log",
    "line_growth",
    "vallee_poussin",
    "inv_lower",
    "continuity_zeta",
    "continuity_zeta_prime",
    "ratio_hoelder",
    "continuity_inverse",
)


@dataclass(frozen=True)
class ZetaEvaluation:
    s: complex
    value: complex
    method: str
    truncation: float
    tail_estimate: float


@dataclass
class LemmaDiagnostic:
    """Per-grid-point ``lhs`` against structural ``rhs``; ``fitted_constant`` is
    the max ratio (for lower-bound lemmas the ratio is rhs / lhs).

    ``tail_flags`` mark points whose evaluation uncertainty exceeds 10% of the
    quantity measured.  ``flag`` is a table-level note such as non-applicability.
    """

    lemma_id: str
    grid: list
    lhs: np.ndarray
    rhs: np.ndarray
    fitted_constant: float
    tail_flags: np.ndarray
    flag: str = ""
    lower_bound: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def ratios(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.rhs / self.lhs if self.lower_bound else self.lhs / self.rhs

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.fitted_constant))


@lru_cache(maxsize=8)
def _log_norms(table) -> np.ndarray:
    return np.log(table.norms)


@lru_cache(maxsize=8)
def _default_density(table) -> float:
    # zero-density systems such as a finite prime list get A = 0; otherwise the
    # endpoint density N(X)/X
    if table.x_max >= 1e3 and fit_density(table).flag.startswith("zero-density"):
        return 0.0
    return float(table.N(table.x_max)) / table.x_max


def _density(table, A):
    if A is not None:
        return float(A)
    if isinstance(table, _Truncated):
        return _default_density(table._parent)
    return _default_density(table)


def _levels(table, levels):
    X = table.x_max / 2.0 ** np.arange(levels)
    return X, table.N_many(X)


def _weights(table, s):
    return np.exp(-complex(s) * _log_norms(table))


def _stieltjes_levels(table, s, A, order, levels, w=None):
    """Stieltjes-form values of zeta^(k)(s), k = 0..order, at each truncation level.

    Returns an array of shape (order + 1, levels).
    """
    s = complex(s)
    if s == 1:
        raise ValueError("s = 1 is the pole")
    if w is None:
        w = _weights(table, s)
    logn = _log_norms(table)
    X, counts = _levels(table, levels)
    L = np.log(X)
    out = np.empty((order + 1, levels), dtype=complex)
    term = w
    for k in range(order + 1):
        if k:
            term = term * -logn
        # partial sums at every level from one pass over the slices
        bounds = np.concatenate([[0], counts[::-1]])
        pieces = np.array([term[a:b].sum() for a, b in zip(bounds[:-1], bounds[1:])])
        partial = np.cumsum(pieces)[::-1]
        mL = -L
        Xs = np.exp(-s * L)
        X1s = X * Xs
        boundary = counts * mL**k * Xs
        # d^k [X^(1-s) + X^(1-s)/(s-1)]
        analytic = mL**k * X1s
        for j in range(k + 1):
            analytic = analytic + math.comb(k, j) * mL ** (k - j) * X1s * (-1) ** j * math.factorial(j) / (s - 1) ** (j + 1)
        out[k] = partial - boundary + A * analytic
    return out


def _spread(vals):
    return float(np.max(np.abs(vals[1:] - vals[0]))) if vals.size > 1 else 0.0


def zeta_partial(table, s: complex, A: float | None = None) -> ZetaEvaluation:
    """Plain partial sum over the table.

    Tail estimate ``A X^(1 - Re s) / (Re s - 1)`` with ``A`` defaulting to the
    table's density, floored by ``N(X) X^(-Re s)`` for zero-density systems;
    infinite when Re s <= 1.
    """
    s = complex(s)
    value = complex(np.sum(_weights(table, s)))
    X = table.x_max
    if s.real > 1:
        tail = max(_density(table, A) * X ** (1 - s.real) / (s.real - 1), table.N(X) * X ** -s.real)
    else:
        tail = math.inf
    return ZetaEvaluation(s, value, "partial_sum", X, tail)


def zeta_euler(primes, s: complex, K: int | None = None) -> ZetaEvaluation:
    """Euler product over the first ``K`` primes, accumulated in log space.

    The tail estimate bounds the omitted factors by
    ``q_K^(1-sigma) / ((sigma - 1) log q_K)`` relative, and is zero when the
    product exhausts a complete finite prime list.
    """
    s = complex(s)
    if not s.real > 1:
        raise ValueError(f"Euler product needs Re s > 1, got {s}")
    q = primes.norms if K is None else primes.norms[: int(K)]
    if K is not None and int(K) < 0:
        raise ValueError("K must be >= 0")
    value = complex(np.exp(-np.sum(np.log1p(-np.exp(-s * np.log(q)))))) if q.size else 1.0 + 0j
    exhausted = q.size == primes.norms.size and math.isinf(primes.q_max)
    if exhausted:
        tail = 0.0
    else:
        Q = q[-1] if q.size else 2.0
        if q.size == primes.norms.size:
            Q = max(Q, primes.q_max)
        tail = abs(value) * Q ** (1 - s.real) / ((s.real - 1) * math.log(Q))
    return ZetaEvaluation(s, value, "euler_product", float(q[-1]) if q.size else 1.0, tail)


def zeta_stieltjes(table, s: complex, X: float | None = None, A: float | None = None) -> ZetaEvaluation:
    """``s int_1^X N(x) x^(-s-1) dx + s A X^(1-s)/(s-1)`` for Re s > 1.

    The integral is exact for the step function N and equals
    ``sum_{|g| <= X} |g|^-s - N(X) X^-s``.
    """
    s = complex(s)
    if not s.real > 1:
        raise ValueError(f"Stieltjes form is certified for Re s > 1, got {s}; use zeta_line on the boundary")
    return _stieltjes_eval(table, s, X, A, "stieltjes")


def _stieltjes_eval(table, s, X, A, method):
    A = _density(table, A)
    if X is not None and X < table.x_max:
        sub = _truncated(table, X)
        vals = _stieltjes_levels(sub, s, A, 0, LEVELS)[0]
        trunc = X
    else:
        vals = _stieltjes_levels(table, s, A, 0, LEVELS)[0]
        trunc = table.x_max
    return ZetaEvaluation(s, complex(vals[0]), method, trunc, _spread(vals))


class _Truncated:
    """A read-only view of the first records of a table, used for smaller X."""

    def __init__(self, table, X):
        k = table.N(X)
        self.norms = table.norms[:k]
        self.x_max = float(X)
        self._parent = table

    def N(self, x):
        return int(np.searchsorted(self.norms, x, side="right"))

    def N_many(self, xs):
        return np.searchsorted(self.norms, np.asarray(xs, dtype=float), side="right")


def _truncated(table, X):
    return _Truncated(table, X)


def zeta_line(table, s: complex, A: float | None = None, order: int = 0,
              levels: int = LEVELS) -> ZetaEvaluation:
    """Stieltjes-form value of ``zeta^(order)(s)`` for ``Re s >= 1``, ``s != 1``."""
    s = complex(s)
    if s.real < 1:
        raise ValueError("only Re s >= 1 is supported")
    vals = _stieltjes_levels(table, s, _density(table, A), order, levels)[order]
    return ZetaEvaluation(s, complex(vals[0]), "stieltjes", table.x_max, _spread(vals))


def zeta_derivatives(table, s: complex, order: int = 1) -> complex:
    """``-sum log|g| |g|^-s`` (order 1) or ``sum log^2|g| |g|^-s`` (order 2), truncated."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    logn = _log_norms(table)
    return complex(np.sum((-logn) ** order * _weights(table, s)))


def fejer_kernel(n: int, x):
    """``1 + 2 sum_{j<=n} (1 - j/n) cos(jx)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    x = np.asarray(x, dtype=float)
    j = np.arange(1, n + 1)
    out = 1 + 2 * np.tensordot(np.cos(np.multiply.outer(x, j)), 1 - j / n, axes=([-1], [0]))
    return float(out) if out.ndim == 0 else out


def fejer_quotient(n: int, x):
    """``(1/n) (sin(nx/2) / sin(x/2))^2``; undefined on 2 pi Z."""
    x = np.asarray(x, dtype=float)
    return np.sin(n * x / 2) ** 2 / (n * np.sin(x / 2) ** 2)


def _positivity_terms(table, sigma, t, n, A):
    """Stieltjes values of zeta(sigma + i j t) for j = 0..n, with spreads."""
    logn = _log_norms(table)
    base = np.exp(-sigma * logn)
    rot = np.exp(-1j * t * logn)
    vals, spreads = [], []
    w = base.astype(complex)
    for j in range(n + 1):
        lv = _stieltjes_levels(table, complex(sigma, j * t), A, 0, LEVELS, w=w)[0]
        vals.append(lv[0])
        spreads.append(_spread(lv))
        w = w * rot
    return np.array(vals), np.array(spreads)


def positivity_inequality(table, sigma: float, t: float, n: int, A: float | None = None) -> LemmaDiagnostic:
    """``log zeta(sigma) + sum_j 2(1 - j/n) log|zeta(sigma + ijt)| >= 0``.

    ``lhs`` is the left side, ``rhs`` the tolerance propagated from the
    evaluation spreads; ``fitted_constant`` is the margin ``lhs``.  The point is
    flagged when the tolerance exceeds the margin.
    """
    if not sigma > 1:
        raise ValueError("sigma must exceed 1")
    return positivity_scan(table, [sigma], [t], [n], A)


def positivity_scan(table, sigmas, ts, ns, A: float | None = None) -> LemmaDiagnostic:
    A = _density(table, A)
    nmax = max(ns)
    grid, lhs, tol = [], [], []
    for sigma in sigmas:
        if not sigma > 1:
            raise ValueError("sigma must exceed 1")
        for t in ts:
            vals, spreads = _positivity_terms(table, float(sigma), float(t), nmax, A)
            logs = np.log(np.abs(vals))
            dlog = spreads / np.abs(vals)
            for n in ns:
                a = 2 * (1 - np.arange(1, n + 1) / n)
                value = float(np.real(np.log(vals[0])) + np.dot(a, logs[1 : n + 1]))
                grid.append((float(sigma), float(t), int(n)))
                lhs.append(value)
                tol.append(float(dlog[0] + np.dot(a, dlog[1 : n + 1])))
    lhs, tol = np.array(lhs), np.array(tol)
    return LemmaDiagnostic(
        "vallee_poussin_positivity", grid, lhs, tol, float(np.min(lhs)), tol > np.abs(lhs),
        extra={"holds": bool(np.all(lhs >= -tol)), "min_margin": float(np.min(lhs))},
    )


def _require(lemma_id, gamma, lo, hi, lo_open=True, hi_open=True):
    ok_lo = gamma > lo if lo_open else gamma >= lo
    ok_hi = gamma < hi if hi_open else gamma <= hi
    if not (ok_lo and ok_hi):
        raise ValueError(f"{lemma_id} needs gamma in {'(' if lo_open else '['}{lo}, {hi}{')' if hi_open else ']'}, got {gamma}")


_RANGES = {
    "growth": (1, math.inf, True, True),
    "dprime_1": (1, 2, False, True),
    "dprime_2_log": (2, 2, False, False),
    "ddprime": (1, 3, False, True),
    "ddprime_log": (3, 3, False, False),
    "line_growth": (1, 2, True, False),
    "vallee_poussin": (1.5, 2, True, True),
    "inv_lower": (1.5, 2, True, False),
    "continuity_zeta": (1.5, 2, True, True),
    "continuity_zeta_prime": (2, 3, True, True),
    "ratio_hoelder": (2, 3, True, True),
    "continuity_inverse": (1.5, 2, True, False),
}


def _values(table, points, A, order):
    """zeta^(k) at each point for k = 0..order: values (order+1, m) and spreads."""
    vals = np.empty((order + 1, len(points)), dtype=complex)
    spreads = np.empty((order + 1, len(points)))
    for i, s in enumerate(points):
        lv = _stieltjes_levels(table, s, A, order, LEVELS)
        vals[:, i] = lv[:, 0]
        spreads[:, i] = [_spread(r) for r in lv]
    return vals, spreads


def lemma_diagnostic(table, lemma_id: str, grid, gamma: float, A: float | None = None,
                     n: int = 5, c: float = 1.0) -> LemmaDiagnostic:
    """Measured side against the structural bound of a boundary lemma.

    ``grid`` holds ``(sigma, t)`` pairs for growth, derivative and
    vallee_poussin lemmas, ``t`` values for line_growth, inv_lower and
    ratio_hoelder, and ``(t1, t2)`` pairs for the continuity lemmas.
    ``gamma`` is the declared regularity exponent and must lie in the lemma's
    range.  ``n`` and ``c`` parametrize the vallee_poussin lower bound.
    """
    if lemma_id not in _RANGES:
        raise ValueError(f"unknown lemma {lemma_id!r}; choose from {LEMMA_IDS}")
    _require(lemma_id, gamma, *_RANGES[lemma_id])
    A = _density(table, A)
    grid = [tuple(np.atleast_1d(np.asarray(g, dtype=float))) for g in grid]
    lower = lemma_id in ("vallee_poussin", "inv_lower")

    if lemma_id in ("growth", "dprime_1", "dprime_2_log", "ddprime", "ddprime_log", "vallee_poussin"):
        order = {"growth": 0, "vallee_poussin": 0, "dprime_1": 1, "dprime_2_log": 1}.get(lemma_id, 2)
        pts = [complex(sg, t) for sg, t in grid]
        vals, sp = _values(table, pts, A, order)
        lhs = np.abs(vals[order])
        unc = sp[order]
        sig = np.array([g[0] for g in grid])
        t = np.abs(np.array([g[1] for g in grid]))
        with np.errstate(divide="ignore"):
            if lemma_id == "growth":
                rhs = 1 + 1 / np.abs(np.array(pts) - 1) + t
            elif lemma_id == "dprime_1":
                rhs = 1 + t * (sig - 1) ** (gamma - 2)
            elif lemma_id == "ddprime":
                # the second-derivative analogue loses one more power of sigma - 1
                rhs = 1 + t * (sig - 1) ** (gamma - 3)
            elif lemma_id in ("dprime_2_log", "ddprime_log"):
                rhs = 1 + t * np.abs(np.log(sig - 1))
            else:
                rhs = (sig - 1) ** (0.5 + 2 / (n - 1)) * (1 + c * n * t ** (1 / gamma)) ** -n
    elif lemma_id in ("line_growth", "inv_lower"):
        t = np.array([g[0] for g in grid])
        vals, sp = _values(table, [complex(1, v) for v in t], A, 0)
        lhs, unc = np.abs(vals[0]), sp[0]
        if lemma_id == "line_growth":
            rhs = np.sqrt(t * np.log(t)) if gamma == 2 else t ** (1 / gamma)
        else:
            rhs = t ** (-8 / (gamma - 1.5) ** 2)
    elif lemma_id in ("continuity_zeta", "continuity_zeta_prime", "continuity_inverse"):
        t1 = np.array([g[0] for g in grid])
        t2 = np.array([g[1] for g in grid])
        order = 1 if lemma_id == "continuity_zeta_prime" else 0
        v1, s1 = _values(table, [complex(1, v) for v in t1], A, order)
        v2, s2 = _values(table, [complex(1, v) for v in t2], A, order)
        a, b = v1[order], v2[order]
        d = np.abs(t1 - t2)
        if lemma_id == "continuity_inverse":
            lhs = np.abs(1 / a - 1 / b)
            unc = s1[0] / np.abs(a) ** 2 + s2[0] / np.abs(b) ** 2
            rhs = d ** (gamma - 1) * t1 ** (17 / (gamma - 1.5) ** 2)
        else:
            lhs = np.abs(a - b)
            unc = s1[order] + s2[order]
            rhs = d ** (gamma - 1) * t1 ** (2 - gamma) if order == 0 else d ** (gamma - 2) * t1 ** (3 - gamma)
    else:  # ratio_hoelder
        lhs, unc, rhs = _ratio_hoelder(table, [g[0] for g in grid], gamma, A)
    lhs = np.asarray(lhs, dtype=float)
    unc = np.asarray(unc, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = rhs / lhs if lower else lhs / rhs
        flags = unc > 0.1 * lhs
    finite = ratios[np.isfinite(ratios)]
    fitted = float(np.max(ratios)) if ratios.size else math.nan
    return LemmaDiagnostic(lemma_id, grid, lhs, np.asarray(rhs, dtype=float), fitted, flags, lower_bound=lower,
                           extra={"gamma": gamma, "finite_points": int(finite.size)})


def _ratio_hoelder(table, ts, gamma, A, depth=6, anchors=5):
    """Local Hölder-(gamma-2) quotient of zeta'/zeta on [t, t+1].

    Pairs ``(t1, t1 + 2^-j)`` with ``t1`` on ``anchors`` points of the interval
    and ``j = 1..depth``; pairs below the evaluation resolution are dropped.
    """
    lhs, unc, rhs = [], [], []
    for t in ts:
        best, best_unc = 0.0, 0.0
        starts = np.linspace(t, t + 0.5, anchors)
        hs = 2.0 ** -np.arange(1, depth + 1)
        pts = sorted({float(a) for a in starts} | {float(a + h) for a in starts for h in hs})
        vals, sp = _values(table, [complex(1, v) for v in pts], A, 1)
        q = vals[1] / vals[0]
        qu = sp[1] / np.abs(vals[0]) + np.abs(vals[1]) * sp[0] / np.abs(vals[0]) ** 2
        where = {v: i for i, v in enumerate(pts)}
        for a in starts:
            for h in hs:
                i, k = where[float(a)], where[float(a + h)]
                diff = abs(q[k] - q[i])
                noise = qu[k] + qu[i]
                if diff <= 10 * noise:
                    continue
                quot = diff / h ** (gamma - 2)
                if quot > best:
                    best, best_unc = quot, noise / h ** (gamma - 2)
        lhs.append(best)
        unc.append(best_unc)
        rhs.append(t**66)
    return np.array(lhs), np.array(unc), np.array(rhs)


def H_near_1(table, js=range(1, 11), A: float | None = None, gamma: float | None = None) -> LemmaDiagnostic:
    """Difference quotient ``(H(s) - H(1+)) / (s - 1)`` along ``s = 1 + 2^-j``,
    with ``H = -zeta'/zeta - 1/(s-1)``.

    ``H(1+)`` is the intercept of a quadratic fit of H in ``s - 1``.  The
    diagnostic is non-applicable when the declared ``gamma`` is <= 2 or when
    the table has primes but zero density; with no primes at all zeta = 1
    exactly and the quotient is evaluated (and blows up).
    """
    A_used = _density(table, A)
    flag = ""
    if gamma is not None and gamma <= 2:
        flag = "non_applicable: requires gamma > 2"
    elif A_used == 0 and len(table.primes) > 0:
        flag = "non_applicable: zero density (A = 0)"
    eps = 2.0 ** -np.asarray(list(js), dtype=float)
    if flag:
        nan = np.full(eps.size, np.nan)
        return LemmaDiagnostic("H_near_1", [(1 + e,) for e in eps], nan, nan, math.nan,
                               np.zeros(eps.size, bool), flag)
    vals, sp = _values(table, [complex(1 + e, 0) for e in eps], A_used, 1)
    z, dz = vals[0].real, vals[1].real
    H = -dz / z - 1 / eps
    Hunc = sp[1] / np.abs(z) + np.abs(dz) * sp[0] / z**2
    coeffs = np.polyfit(eps, H, 2)
    H1 = coeffs[-1]
    Q = (H - H1) / eps
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = Hunc / np.abs(H - H1)
    mags = np.abs(Q)
    # blow-up: |Q| grows at least like (s - 1)^-1/2 over the points nearest 1
    near = np.argsort(eps)[: max(3, eps.size // 2)]
    slope = float(np.polyfit(-np.log(eps[near]), np.log(np.maximum(mags[near], 1e-300)), 1)[0])
    unbounded = bool(slope > 0.5)
    if unbounded:
        flag = "unbounded: quotient grows without bound as s -> 1"
    return LemmaDiagnostic("H_near_1", [(1 + e,) for e in eps], mags, np.ones_like(mags),
                           float(np.max(mags)), rel > 0.1, flag,
                           extra={"H1": float(H1), "bounded": not unbounded, "growth_exponent": slope})


# declared gamma per lemma for tables that satisfy every regularity exponent
# (the classical semigroup); each lies inside the lemma's range
DEFAULT_GAMMA = {
    "growth": 1.5,
    "dprime_1": 1.9,
    "dprime_2_log": 2.0,
    "ddprime": 2.5,
    "ddprime_log": 3.0,
    "line_growth": 1.9,
    "vallee_poussin": 1.9,
    "inv_lower": 2.0,
    "continuity_zeta": 1.9,
    "continuity_zeta_prime": 2.5,
    "ratio_hoelder": 2.5,
    "continuity_inverse": 2.0,
}


def lemma_grid(lemma_id: str, level: int = 0) -> list:
    """Standard scan grid; each ``level`` halves every grid spacing."""
    m = 2**level
    sig = 1 + 2.0 ** -np.linspace(1, 10, 9 * m + 1)
    if lemma_id == "growth":
        return [(a, b) for a in sig for b in np.linspace(0, 20, 4 * m + 1)]
    if lemma_id in ("dprime_1", "dprime_2_log", "ddprime", "ddprime_log", "vallee_poussin"):
        return [(a, b) for a in sig for b in np.linspace(2, 20, 4 * m + 1)]
    if lemma_id in ("line_growth", "inv_lower"):
        return [(b,) for b in np.linspace(2, 200, 11 * m - (m - 1))]
    if lemma_id in ("continuity_zeta", "continuity_zeta_prime", "continuity_inverse"):
        hs = 2.0 ** -np.linspace(1, 6, 5 * m + 1)
        return [(a, a + h) for a in np.linspace(2, 10, 16 * m + 1) for h in hs]
    if lemma_id == "ratio_hoelder":
        return [(b,) for b in np.linspace(2, 10, 2 * m + 1)]
    raise ValueError(f"unknown lemma {lemma_id!r}")


def diagnostic_csv(diags) -> str:
    rows = []
    for d in diags:
        for g, lhs, rhs, r, f in zip(d.grid, d.lhs, d.rhs, d.ratios, d.tail_flags):
            coords = list(g) + [""] * (3 - len(g))
            rows.append([d.lemma_id, *coords, lhs, rhs, r, bool(f)])
    return csv_text(["lemma_id", "x1", "x2", "x3", "lhs", "rhs", "ratio", "tail_flag"], rows)
