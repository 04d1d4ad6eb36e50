"""Synthetic targets with known coefficient tails.

Two regularity families are provided:

* ``W(C, alpha, beta)``: ``rho(N) ~ C N^{-2 beta} (log N)^alpha``, built from the
  shifted profile ``C (N + 1)^{-2 beta} log(N + e)^alpha`` so that it is finite
  and monotone from ``N = 0``.
* ``Z(alpha, beta)``: ``rho(N) = alpha beta^N`` (geometric tail, analytic targets).

Coefficient magnitudes are read off the profile as ``c_j^2 = rho(j-1) - rho(j)``
with deterministic alternating signs ``(-1)^j``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .trig_basis import (
    FourierSeries,
    lipschitz_bound,
    synthesize_grid,
    tail_profile,
)

CONSTRAINTS = ("none", "nonnegative", "even")
NONNEG_MARGIN = 0.01


class TargetParameterError(ValueError):
    pass


class InfeasibleTargetError(ValueError):
    pass


@dataclass(frozen=True)
class TargetSpec:
    series: FourierSeries
    class_tag: str
    params: dict = field(default_factory=dict)
    gamma_limit: float = 0.0
    constraints: str = "none"

    @property
    def J(self) -> int:
        return self.series.J

    @property
    def coeffs(self) -> np.ndarray:
        return self.series.coeffs

    def __call__(self, x):
        return self.series(x)

    def is_density(self, tol: float = 1e-8) -> bool:
        return abs(self.coeffs[0] - 1.0) <= tol and grid_minimum(self.coeffs) >= -1e-10

    def is_even(self) -> bool:
        return bool(np.all(self.coeffs[2::2] == 0.0))

    def to_json(self) -> str:
        doc = {
            "class_tag": self.class_tag,
            "params": self.params,
            "gamma_limit": self.gamma_limit,
            "constraints": self.constraints,
            "coeffs": [float(c) for c in self.coeffs],
        }
        return json.dumps(doc, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TargetSpec":
        doc = json.loads(text)
        for key in ("class_tag", "coeffs"):
            if key not in doc:
                raise KeyError(key)
        return cls(
            series=FourierSeries(np.asarray(doc["coeffs"], dtype=float)),
            class_tag=doc["class_tag"],
            params=dict(doc.get("params", {})),
            gamma_limit=float(doc.get("gamma_limit", 0.0)),
            constraints=doc.get("constraints", "none"),
        )


def custom_target(coeffs, constraints: str = "none") -> TargetSpec:
    """Wrap explicit coefficients; no class assumptions are made."""
    return TargetSpec(FourierSeries(coeffs), "custom", {}, 0.0, constraints)


def uniform_target() -> TargetSpec:
    return custom_target([1.0], constraints="nonnegative")


def _grid_size(J: int) -> int:
    L = J // 2
    return max(8192, 1 << int(np.ceil(np.log2(32 * (L + 1)))))


def grid_minimum(coeffs) -> float:
    """Certified lower bound on ``min f`` (FFT grid minimum minus Lipschitz slack)."""
    G = _grid_size(len(coeffs))
    vals = synthesize_grid(coeffs, G)
    return float(vals.min() - lipschitz_bound(coeffs) / (2 * G))


def grid_maximum(coeffs) -> float:
    """Certified upper bound on ``sup f``."""
    G = _grid_size(len(coeffs))
    vals = synthesize_grid(coeffs, G)
    return float(vals.max() + lipschitz_bound(coeffs) / (2 * G))


def _from_profile(profile: Callable[[np.ndarray], np.ndarray], J: int, even: bool):
    N = np.arange(J + 1, dtype=float)
    rho = profile(N)
    coeffs = np.zeros(J)
    if not even:
        sq = rho[:-1] - rho[1:]
        if np.any(sq < 0):
            raise TargetParameterError("tail profile is not monotone for these parameters")
        coeffs = np.sqrt(sq)
    else:
        # cosine slots j = 2l absorb rho(2l-1) - rho(2l+1); sine slots stay zero
        coeffs[0] = np.sqrt(rho[0] - rho[1])
        for j in range(2, J + 1, 2):
            hi = min(j + 1, J)
            d = rho[j - 1] - rho[hi]
            if d < 0:
                raise TargetParameterError("tail profile is not monotone for these parameters")
            coeffs[j - 1] = np.sqrt(d)
    signs = (-1.0) ** np.arange(1, J + 1)
    return coeffs * signs


def _make_density(coeffs: np.ndarray, margin: float) -> tuple[np.ndarray, float]:
    """Shift ``c_1`` so that ``f >= margin`` and rescale so ``int f = 1``."""
    c = coeffs.copy()
    low = grid_minimum(c)
    c[0] += max(0.0, margin - low)
    if c[0] <= 0:
        raise InfeasibleTargetError("cannot make the target a density")
    scale = 1.0 / c[0]
    c *= scale
    c[0] = 1.0
    if grid_minimum(c) < -1e-10:
        raise InfeasibleTargetError("nonnegativity could not be enforced at this J")
    return c, scale


def _finish(coeffs, tag, params, gamma, constraints):
    if constraints not in CONSTRAINTS:
        raise TargetParameterError(f"unknown constraints {constraints!r}")
    params = dict(params)
    params["scale"] = 1.0
    if constraints != "none":
        coeffs, scale = _make_density(coeffs, NONNEG_MARGIN)
        params["scale"] = scale
    return TargetSpec(FourierSeries(coeffs), tag, params, gamma, constraints)


def w_profile(C: float, alpha: float, beta: float):
    def rho_bar(N):
        N = np.asarray(N, dtype=float)
        return C * (N + 1.0) ** (-2.0 * beta) * np.log(N + np.e) ** alpha

    return rho_bar


def make_W_target(
    C: float = 1.0,
    alpha: float = 0.0,
    beta: float = 1.0,
    J: int = 256,
    constraints: str = "none",
) -> TargetSpec:
    """Target in ``W(C, alpha, beta)``.

    Without constraints ``tail_rho(series, N) = rho_bar(N) - rho_bar(J)``.
    ``nonnegative`` and ``even`` both produce a density (``f >= 0``, ``c_1 = 1``);
    the tail is then multiplied by ``params["scale"]**2``.  ``even`` also puts all
    the mass on cosine slots, which is what a spectral density needs.
    """
    if C <= 0:
        raise TargetParameterError("C must be positive")
    if beta <= 0:
        raise TargetParameterError("beta must be positive")
    if J < 16:
        raise TargetParameterError("J must be at least 16")
    coeffs = _from_profile(w_profile(C, alpha, beta), J, constraints == "even")
    gamma = 2.0 ** (-2.0 * beta)
    return _finish(
        coeffs, "W", {"C": C, "alpha": alpha, "beta": beta}, gamma, constraints
    )


def make_Z_target(
    alpha: float = 1.0, beta: float = 0.5, J: int = 256, constraints: str = "none"
) -> TargetSpec:
    """Target in ``Z(alpha, beta)``: ``c_j^2 = alpha beta^{j-1} (1 - beta)``."""
    if alpha <= 0:
        raise TargetParameterError("alpha must be positive")
    if not 0.0 < beta < 1.0:
        raise TargetParameterError("beta must lie in (0, 1)")
    if J < 16:
        raise TargetParameterError("J must be at least 16")

    def rho_bar(N):
        return alpha * beta ** np.asarray(N, dtype=float)

    coeffs = _from_profile(rho_bar, J, constraints == "even")
    return _finish(coeffs, "Z", {"alpha": alpha, "beta": beta}, 0.0, constraints)


@dataclass
class GammaCurve:
    N: np.ndarray
    ratio: np.ndarray
    violated: bool


def empirical_gamma_curve(t: TargetSpec, N_max: int) -> GammaCurve:
    """``rho(2N) / rho(N)`` for ``N = 1..N_max``; ``nan`` where ``rho(N) = 0``."""
    if 2 * N_max > t.J:
        raise IndexError(f"2*N_max={2 * N_max} exceeds J={t.J}")
    rho = tail_profile(t.series)
    N = np.arange(1, N_max + 1)
    num, den = rho[2 * N], rho[N]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > 0, num / den, np.nan)
    violated = bool(np.any(~np.isfinite(ratio)) or np.any(ratio >= 1.0))
    return GammaCurve(N, ratio, violated)
