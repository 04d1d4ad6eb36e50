"""Empirical Fourier coefficients for the three problems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .samplers import Dataset
from .trig_basis import BasisDomainError, from_sums, trig_sums

SQRT2 = np.sqrt(2.0)


class ProblemMismatch(ValueError):
    pass


@dataclass(frozen=True)
class EmpiricalCoeffs:
    problem: str
    n: int
    coeffs: np.ndarray

    @property
    def K(self) -> int:
        return self.coeffs.size

    def to_csv(self) -> str:
        rows = ["j,c_hat"]
        rows += [f"{j},{c:.16e}" for j, c in enumerate(self.coeffs, start=1)]
        return "\n".join(rows) + "\n"


def default_K(n: int) -> int:
    return 2 * (n // 3)


def _check(d: Dataset, problem: str, K: int | None, capped: bool = True) -> int:
    if d.problem != problem:
        raise ProblemMismatch(f"expected a {problem} dataset, got {d.problem}")
    K = max(1, default_K(d.n)) if K is None else int(K)
    if K < 1 or (capped and K > max(1, default_K(d.n))):
        raise ValueError(f"K={K} outside 1..2*floor(n/3)={default_K(d.n)}")
    return K


def coefficient_sums(points, values, K: int) -> np.ndarray:
    """``n^-1 sum_i values_i phi_j(points_i)`` for ``j = 1..K``."""
    points = np.asarray(points, dtype=float)
    if points.size and (points.min() < 0.0 or points.max() > 1.0):
        raise BasisDomainError("observations must lie in [0, 1]")
    sums = trig_sums(points, K // 2, values)
    return from_sums(sums, K, points.size)


def empirical_coeffs_regression(d: Dataset, K: int | None = None) -> EmpiricalCoeffs:
    K = _check(d, "R", K)
    return EmpiricalCoeffs("R", d.n, coefficient_sums(d.xs, d.values, K))


def empirical_coeffs_density(d: Dataset, K: int | None = None) -> EmpiricalCoeffs:
    # density coefficients are plain sample means, so any K is meaningful
    K = _check(d, "D", K, capped=False)
    c = coefficient_sums(d.values, None, K)
    c[0] = 1.0
    return EmpiricalCoeffs("D", d.n, c)


def lag_products(xi: np.ndarray, max_lag: int) -> np.ndarray:
    """``sum_{i=1}^{n-l} xi_i xi_{i+l}`` for ``l = 0..max_lag`` via zero-padded FFT."""
    n = xi.size
    size = 1 << int(np.ceil(np.log2(2 * n)))
    F = np.fft.rfft(xi, size)
    acf = np.fft.irfft(F * np.conj(F), size)[: max_lag + 1]
    return acf


def empirical_coeffs_spectral(
    d: Dataset, K: int | None = None, divisor: str = "unbiased"
) -> EmpiricalCoeffs:
    """Lag-``l`` covariance estimates placed on cosine slots.

    ``c_1 = n^-1 sum xi_i^2``, ``c_{2l} = sqrt(2) (n - l)^-1 sum xi_i xi_{i+l}`` and
    every sine slot is zero.  ``divisor="biased"`` divides by ``n`` instead.
    """
    K = _check(d, "S", K)
    if divisor not in ("unbiased", "biased"):
        raise ValueError("divisor must be 'unbiased' or 'biased'")
    n = d.n
    L = K // 2
    sums = lag_products(d.values, L)
    lags = np.arange(L + 1)
    div = (n - lags) if divisor == "unbiased" else np.full(L + 1, n)
    cov = sums / div
    c = np.zeros(K)
    c[0] = cov[0]
    c[1::2] = SQRT2 * cov[1 : c[1::2].size + 1]
    return EmpiricalCoeffs("S", n, c)


def empirical_coeffs(d: Dataset, K: int | None = None, **kw) -> EmpiricalCoeffs:
    if d.problem == "R":
        return empirical_coeffs_regression(d, K)
    if d.problem == "D":
        return empirical_coeffs_density(d, K)
    return empirical_coeffs_spectral(d, K, **kw)
