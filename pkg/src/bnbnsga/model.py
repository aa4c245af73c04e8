"""Mixed-variable multi-objective problem representation and dominance rules.

Decision vectors are plain float arrays with one slot per variable. Integer
and categorical slots hold exact integers; a categorical slot stores an index
into the variable's catalog, and only the problem evaluator maps that index to
a physical value. Everything is minimized.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, replace

import numpy as np

TOL_FEAS = 1e-6

CONTINUOUS = "continuous"
INTEGER = "integer"
CATEGORICAL = "categorical"


class ContractError(ValueError):
    """Raised when a caller breaks an operation's preconditions."""


class EvaluationError(RuntimeError):
    """Raised when the evaluator fails; carries the offending decision vector."""

    def __init__(self, x: np.ndarray, cause: BaseException):
        super().__init__(f"evaluation failed for x={np.asarray(x).tolist()}: {cause!r}")
        self.x = np.asarray(x, dtype=float).copy()
        self.cause = cause


@dataclass(frozen=True)
class VariableSpec:
    """One decision variable.

    For categorical variables ``lo``/``hi`` are index bounds into ``values``;
    restricting a categorical variable narrows these bounds and never
    re-indexes the catalog.
    """

    name: str
    kind: str
    lo: float
    hi: float
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, INTEGER, CATEGORICAL):
            raise ContractError(f"unknown variable kind {self.kind!r}")
        if self.lo > self.hi:
            raise ContractError(f"{self.name}: lo={self.lo} > hi={self.hi}")
        if self.kind == CATEGORICAL:
            vals = self.values
            if not vals:
                raise ContractError(f"{self.name}: empty categorical catalog")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ContractError(f"{self.name}: catalog must be strictly increasing")
            if not (0 <= self.lo and self.hi <= len(vals) - 1):
                raise ContractError(f"{self.name}: index range outside catalog")
        if self.kind != CONTINUOUS and (self.lo != int(self.lo) or self.hi != int(self.hi)):
            raise ContractError(f"{self.name}: integer bounds must be integral")

    @property
    def is_integer(self) -> bool:
        return self.kind != CONTINUOUS

    @property
    def cardinality(self) -> int:
        return int(self.hi - self.lo + 1) if self.is_integer else 0

    def with_bounds(self, lo: float, hi: float) -> VariableSpec:
        return replace(self, lo=lo, hi=hi)


def Continuous(name: str, lo: float, hi: float) -> VariableSpec:
    return VariableSpec(name, CONTINUOUS, float(lo), float(hi))


def Integer(name: str, lo: int, hi: int) -> VariableSpec:
    return VariableSpec(name, INTEGER, float(lo), float(hi))


def Categorical(name: str, values: Sequence[float]) -> VariableSpec:
    values = tuple(float(v) for v in values)
    return VariableSpec(name, CATEGORICAL, 0.0, float(len(values) - 1), values)


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """Pareto dominance for minimization."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ContractError(f"objective length mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def violation(c: Sequence[float], tol: float = TOL_FEAS) -> float:
    """Sum of constraint excesses above ``tol``; zero means feasible."""
    c = np.asarray(c, dtype=float)
    return float(np.sum(np.maximum(0.0, c - tol)))


def violation_rows(C: np.ndarray, tol: float = TOL_FEAS) -> np.ndarray:
    C = np.asarray(C, dtype=float)
    if C.shape[-1] == 0:
        return np.zeros(C.shape[0])
    return np.sum(np.maximum(0.0, C - tol), axis=-1)


@dataclass
class Individual:
    x: np.ndarray
    f: np.ndarray
    c: np.ndarray
    violation: float
    rank: int | None = None
    crowding: float | None = None

    @property
    def feasible(self) -> bool:
        return self.violation == 0.0


def constrained_dominates(a: Individual, b: Individual) -> bool:
    """Feasibility-first dominance (Deb's constraint handling rules)."""
    if a.feasible and not b.feasible:
        return True
    if not a.feasible and not b.feasible:
        return a.violation < b.violation
    if a.feasible and b.feasible:
        return dominates(a.f, b.f)
    return False


def dominance_matrix(F: np.ndarray) -> np.ndarray:
    """``D[i, j]`` is True when row i Pareto-dominates row j."""
    F = np.asarray(F, dtype=float)
    n = len(F)
    le = np.ones((n, n), dtype=bool)
    lt = np.zeros((n, n), dtype=bool)
    for col in F.T:
        le &= col[:, None] <= col[None, :]
        lt |= col[:, None] < col[None, :]
    return le & lt


def constrained_dominance_matrix(F: np.ndarray, V: np.ndarray) -> np.ndarray:
    feas = V == 0.0
    both_feas = feas[:, None] & feas[None, :]
    both_inf = ~feas[:, None] & ~feas[None, :]
    D = feas[:, None] & ~feas[None, :]
    D |= both_inf & (V[:, None] < V[None, :])
    if both_feas.any():
        D |= both_feas & dominance_matrix(F)
    return D


@dataclass(frozen=True)
class ProblemDef:
    """A mixed-variable constrained multi-objective problem.

    ``evaluator`` maps a decision vector to ``(f, c)``. When ``vectorized`` is
    set it instead maps an ``(n, d)`` batch to ``(F, C)`` arrays of shape
    ``(n, p)`` and ``(n, m)``; either way it must be pure.
    """

    specs: tuple[VariableSpec, ...]
    p: int
    m: int
    evaluator: Callable
    vectorized: bool = False
    name: str = "problem"
    tol_feas: float = TOL_FEAS

    def __post_init__(self):
        object.__setattr__(self, "specs", tuple(self.specs))

    @property
    def n_vars(self) -> int:
        return len(self.specs)

    @property
    def lower(self) -> np.ndarray:
        return np.array([s.lo for s in self.specs], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([s.hi for s in self.specs], dtype=float)

    @property
    def int_mask(self) -> np.ndarray:
        return np.array([s.is_integer for s in self.specs], dtype=bool)

    @property
    def int_slots(self) -> np.ndarray:
        return np.flatnonzero(self.int_mask)

    def restrict(self, int_domains: np.ndarray) -> ProblemDef:
        """Copy with integer/categorical slots narrowed to ``int_domains``.

        ``int_domains`` has one ``(lo, hi)`` row per integer-like slot, in
        slot order.
        """
        int_domains = np.asarray(int_domains)
        specs = list(self.specs)
        for (lo, hi), slot in zip(int_domains, self.int_slots):
            specs[slot] = specs[slot].with_bounds(float(lo), float(hi))
        return replace(self, specs=tuple(specs))

    def check(self, x: np.ndarray) -> None:
        """Raise ContractError if ``x`` lies outside the variable domains."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_vars,):
            raise ContractError(f"expected {self.n_vars} slots, got shape {x.shape}")
        for i, s in enumerate(self.specs):
            v = x[i]
            if not (s.lo <= v <= s.hi):
                raise ContractError(f"slot {i} ({s.name}) = {v} outside [{s.lo}, {s.hi}]")
            if s.is_integer and v != np.round(v):
                raise ContractError(f"slot {i} ({s.name}) = {v} is not integral")

    def evaluate(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate a batch ``X`` of shape ``(n, d)``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.vectorized:
            try:
                F, C = self.evaluator(X)
            except Exception as exc:
                for x in X:  # locate the offending row
                    try:
                        self.evaluator(x[None, :])
                    except Exception as row_exc:
                        raise EvaluationError(x, row_exc) from row_exc
                raise EvaluationError(X[0], exc) from exc
            F = np.asarray(F, dtype=float).reshape(len(X), self.p)
            C = np.asarray(C, dtype=float).reshape(len(X), self.m)
            return F, C
        F = np.empty((len(X), self.p))
        C = np.empty((len(X), self.m))
        for i, x in enumerate(X):
            try:
                f, c = self.evaluator(x)
            except Exception as exc:
                raise EvaluationError(x, exc) from exc
            F[i] = f
            C[i] = c
        return F, C

    def individual(self, x: Sequence[float]) -> Individual:
        x = np.asarray(x, dtype=float)
        F, C = self.evaluate(x[None, :])
        return Individual(x.copy(), F[0], C[0], violation(C[0], self.tol_feas))


def round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)
