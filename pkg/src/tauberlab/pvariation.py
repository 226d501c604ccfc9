"""p-variation of step and piecewise-linear functions.

For a function f on [a, b] the p-variation is

    V_p(f) = ( sup over partitions a <= x_0 < ... < x_n <= b of sum |f(x_k) - f(x_{k-1})|^p )^(1/p).

For the two carriers supported here the supremum is attained on the stored
ordinates (step functions: one value per piece; piecewise-linear functions:
extrema of |f(x) - f(y)| sit at nodes), so an O(n^2) dynamic program over the
discrete value sequence is exact.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "PiecewiseFunction",
    "VariationResult",
    "p_variation",
    "p_variation_bruteforce",
    "holder_variation_bound",
    "product_variation_bound",
]

BRUTEFORCE_MAX_NODES = 20


@dataclass(frozen=True, eq=False)
class PiecewiseFunction:
    """Step or piecewise-linear function on ``domain = (a, b)``.

    ``kind == "step"``: ``values[i]`` is the value on ``[nodes[i], nodes[i+1])``
    (the last piece is closed on the right), so ``len(values) == len(nodes) - 1``.
    ``kind == "linear"``: ``values[i]`` is the ordinate at ``nodes[i]``.

    Outside ``[nodes[0], nodes[-1]]`` but inside the domain the function is 0.
    """

    kind: str
    nodes: np.ndarray
    values: np.ndarray
    domain: tuple[float, float]

    def __post_init__(self):
        if self.kind not in ("step", "linear"):
            raise ValueError(f"kind must be 'step' or 'linear', got {self.kind!r}")
        nodes = np.asarray(self.nodes, dtype=float).ravel()
        values = np.asarray(self.values).ravel()
        if values.dtype.kind not in "fc":
            values = values.astype(float)
        if nodes.size == 0:
            raise ValueError("empty node set")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("nodes must be finite")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("ordinates must be finite")
        expected = nodes.size - 1 if self.kind == "step" else nodes.size
        if values.size != expected:
            raise ValueError(
                f"{self.kind} function with {nodes.size} nodes needs {expected} values, got {values.size}"
            )
        if self.kind == "step" and nodes.size < 2:
            raise ValueError("a step function needs at least two nodes")
        a, b = (float(self.domain[0]), float(self.domain[1]))
        if a > b or (a == b and nodes.size > 1):
            raise ValueError("domain must satisfy a < b")
        if nodes[0] < a or nodes[-1] > b:
            raise ValueError("nodes must lie inside the domain")
        nodes.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "domain", (a, b))

    # -- constructors -----------------------------------------------------
    @classmethod
    def step(cls, nodes, values, domain=None) -> "PiecewiseFunction":
        nodes = np.asarray(nodes, dtype=float)
        return cls("step", nodes, values, domain if domain is not None else (nodes[0], nodes[-1]))

    @classmethod
    def linear(cls, nodes, values, domain=None) -> "PiecewiseFunction":
        nodes = np.asarray(nodes, dtype=float)
        return cls("linear", nodes, values, domain if domain is not None else (nodes[0], nodes[-1]))

    @classmethod
    def sampled(cls, func: Callable, a: float, b: float, n: int) -> "PiecewiseFunction":
        """Piecewise-linear interpolant of ``func`` on ``n`` equispaced nodes."""
        t = np.linspace(a, b, n)
        return cls.linear(t, func(t), (a, b))

    @classmethod
    def indicator(cls, lo: float, hi: float, domain=(0.0, 1.0)) -> "PiecewiseFunction":
        a, b = domain
        nodes = sorted({a, lo, hi, b})
        vals = [1.0 if lo <= left < hi else 0.0 for left in nodes[:-1]]
        return cls.step(nodes, vals, domain)

    # -- structure --------------------------------------------------------
    @property
    def is_complex(self) -> bool:
        return self.values.dtype.kind == "c"

    def value_sequence(self) -> np.ndarray:
        """Ordinates in left-to-right order, with zeros for uncovered domain ends."""
        a, b = self.domain
        parts = []
        if self.nodes[0] > a:
            parts.append(np.zeros(1, dtype=self.values.dtype))
        parts.append(self.values)
        if self.nodes[-1] < b:
            parts.append(np.zeros(1, dtype=self.values.dtype))
        return np.concatenate(parts) if len(parts) > 1 else self.values

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.value_sequence())))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "linear":
            re = np.interp(t, self.nodes, self.values.real, left=0.0, right=0.0)
            if self.is_complex:
                return re + 1j * np.interp(t, self.nodes, self.values.imag, left=0.0, right=0.0)
            return re
        idx = np.searchsorted(self.nodes, t, side="right") - 1
        idx = np.where(t == self.nodes[-1], self.values.size - 1, idx)
        inside = (idx >= 0) & (idx < self.values.size)
        out = np.where(inside, self.values[np.clip(idx, 0, self.values.size - 1)], 0)
        return out

    def map_values(self, func: Callable) -> "PiecewiseFunction":
        return PiecewiseFunction(self.kind, self.nodes, func(self.values), self.domain)

    @property
    def real(self) -> "PiecewiseFunction":
        return self.map_values(np.real)

    @property
    def imag(self) -> "PiecewiseFunction":
        return self.map_values(np.imag)

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        if self.is_complex:
            values = [[float(v.real), float(v.imag)] for v in self.values]
        else:
            values = [float(v) for v in self.values]
        return {
            "kind": self.kind,
            "nodes": [float(x) for x in self.nodes],
            "values": values,
            "domain": [self.domain[0], self.domain[1]],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewiseFunction":
        values = d["values"]
        if values and isinstance(values[0], (list, tuple)):
            values = [complex(re, im) for re, im in values]
        return cls(d["kind"], d["nodes"], values, tuple(d.get("domain") or (d["nodes"][0], d["nodes"][-1])))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PiecewiseFunction":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class VariationResult:
    """``value = V_p``; ``witness_partition`` indexes :meth:`PiecewiseFunction.value_sequence`."""

    p: float
    value: float
    witness_partition: tuple[int, ...]

    def resum(self, values: Sequence) -> float:
        """Recompute sum |Δf|^p along the witness (equals ``value**p``)."""
        v = np.asarray(values)[list(self.witness_partition)]
        return float(np.sum(np.abs(np.diff(v)) ** self.p))


def _check_p(p):
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")


def _pvar_dp(values: np.ndarray, p: float) -> tuple[float, tuple[int, ...]]:
    n = values.size
    if n == 1:
        return 0.0, (0,)
    best = np.zeros(n)
    link = np.zeros(n, dtype=np.int64)
    for j in range(1, n):
        cand = best[:j] + np.abs(values[j] - values[:j]) ** p
        i = int(np.argmax(cand))
        best[j] = cand[i]
        link[j] = i
    end = int(np.argmax(best))
    witness = [end]
    while witness[-1] != 0:
        witness.append(int(link[witness[-1]]))
    return float(best[end]), tuple(reversed(witness))


def p_variation(f: PiecewiseFunction, p: float) -> VariationResult:
    """Exact ``V_p(f)`` via ``best[j] = max_{i<j} best[i] + |f_j - f_i|^p``.

    Ties go to the smallest index (first maximizer), so output is deterministic.
    """
    _check_p(p)
    values = f.value_sequence()
    total, witness = _pvar_dp(values, float(p))
    return VariationResult(float(p), total ** (1.0 / p), witness)


def p_variation_bruteforce(f: PiecewiseFunction, p: float) -> float:
    """Exhaustive search over every subsequence; reference oracle for :func:`p_variation`."""
    _check_p(p)
    values = f.value_sequence()
    n = values.size
    if n > BRUTEFORCE_MAX_NODES:
        raise ValueError(f"brute force limited to {BRUTEFORCE_MAX_NODES} values, got {n}")
    best = 0.0
    for size in range(2, n + 1):
        for idx in itertools.combinations(range(n), size):
            s = 0.0
            for i, j in zip(idx, idx[1:]):
                s += abs(values[j] - values[i]) ** p
            if s > best:
                best = s
    return best ** (1.0 / p)


def holder_variation_bound(L: float, alpha: float) -> tuple[float, float]:
    """An ``L``-Hölder-``alpha`` function on [0, 1] has ``V_{1/alpha} <= L``.

    Returns ``(p, bound) = (1/alpha, L)``.
    """
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if L < 0:
        raise ValueError("Hölder constant must be non-negative")
    return 1.0 / alpha, float(L)


def product_variation_bound(sup_g, sup_fprime, sup_f, vp_g, p, length=1.0) -> float:
    """Upper bound for ``V_p(f g)`` with ``f`` differentiable and ``g`` of finite p-variation.

    ``2 (|g|_inf^p |f'|_inf^p L^p + |f|_inf^p V_p(g)^p)^(1/p)`` where ``L`` is the
    interval length (1 on the unit interval).
    """
    _check_p(p)
    if min(sup_g, sup_fprime, sup_f, vp_g, length) < 0:
        raise ValueError("all statistics must be non-negative")
    lip = sup_g * sup_fprime * length
    return 2.0 * (lip ** p + (sup_f * vp_g) ** p) ** (1.0 / p)
