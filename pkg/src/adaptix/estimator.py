"""The adaptive projection estimate and its exact L2 error."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .empirical import EmpiricalCoeffs, empirical_coeffs
from .samplers import Dataset
from .selector import SelectionResult, select
from .targets import TargetSpec
from .trig_basis import FourierSeries, synthesize, tail_rho


class TruncationError(ValueError):
    pass


@dataclass(frozen=True)
class AdaptiveEstimate:
    problem: str
    n: int
    N_selected: int
    coeffs: np.ndarray
    tau_star: float
    selection: SelectionResult
    empirical: EmpiricalCoeffs

    @property
    def series(self) -> FourierSeries:
        return FourierSeries(self.coeffs)

    def __call__(self, x):
        return evaluate(self, x)

    def negativity(self, grid_size: int = 4096) -> dict:
        """Extent of negative values; only meaningful for densities and spectra."""
        x = np.arange(grid_size) / grid_size
        v = evaluate(self, x)
        return {"min": float(v.min()), "negative_mass": float(np.mean(np.clip(-v, 0, None)))}

    def to_json(self) -> str:
        doc = {
            "problem": self.problem,
            "n": self.n,
            "N": self.N_selected,
            "coeffs": [float(c) for c in self.coeffs],
            "tau_star": self.tau_star,
        }
        return json.dumps(doc, indent=1)


def adaptive_estimate(d: Dataset, **empirical_options) -> AdaptiveEstimate:
    """Empirical coefficients, tau curve, largest argmin, truncation."""
    if d.n < 9:
        raise ValueError("the adaptive estimate needs n >= 9")
    e = empirical_coeffs(d, **empirical_options)
    sel = select(e)
    N = sel.N_selected
    return AdaptiveEstimate(d.problem, d.n, N, e.coeffs[:N].copy(), sel.tau_star, sel, e)


def l2_error(est: AdaptiveEstimate, t: TargetSpec) -> float:
    """``||f_hat - f||^2`` by Parseval, with the target truncated at ``J``.

    Custom targets are exact trigonometric polynomials and are zero-padded;
    class targets are truncated series, so ``N(n) > J`` is an error.
    """
    N = est.N_selected
    if N > t.J:
        if t.class_tag != "custom":
            raise TruncationError(f"target has J={t.J} < N(n)={N} coefficients")
        c = np.zeros(N)
        c[: t.J] = t.coeffs
        diff = est.coeffs - c
        return float(np.dot(diff, diff))
    diff = est.coeffs - t.coeffs[:N]
    return float(np.dot(diff, diff)) + tail_rho(t.series, N)


def evaluate(est: AdaptiveEstimate, grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        return np.empty(0)
    return np.asarray(synthesize(est.coeffs, grid))


def grid_csv(est: AdaptiveEstimate, grid_size: int = 512) -> str:
    x = np.arange(grid_size + 1) / grid_size
    y = evaluate(est, x)
    rows = ["x,f_hat"] + [f"{a:.16e},{b:.16e}" for a, b in zip(x, y)]
    return "\n".join(rows) + "\n"
