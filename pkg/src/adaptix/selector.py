"""Data-driven harmonic count and the oracle risk curves it is measured against."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .empirical import EmpiricalCoeffs, coefficient_sums
from .samplers import regression_design
from .targets import TargetSpec
from .trig_basis import synthesize, tail_profile


class SelectionError(ValueError):
    pass


@dataclass(frozen=True)
class SelectionResult:
    tau: np.ndarray  # tau[N - 1] = tau(n, N)
    N_selected: int
    tau_star: float

    def to_csv(self) -> str:
        rows = ["N,tau"] + [f"{N},{v:.16e}" for N, v in enumerate(self.tau, start=1)]
        return "\n".join(rows) + "\n"


def max_order(n: int) -> int:
    return n // 3


def tau_curve(e: EmpiricalCoeffs | np.ndarray, n: int | None = None) -> np.ndarray:
    """``tau(n, N) = sum_{k=N+1}^{2N} c_k^2`` for ``N = 1..floor(n/3)``."""
    if isinstance(e, EmpiricalCoeffs):
        c, n = e.coeffs, e.n if n is None else n
    else:
        c = np.asarray(e, dtype=float)
        if n is None:
            raise SelectionError("n is required for a raw coefficient array")
    Nmax = max_order(n)
    if Nmax < 1:
        raise SelectionError("n too small: floor(n/3) < 1")
    if c.size < 2 * Nmax:
        raise SelectionError(f"need {2 * Nmax} coefficients, have {c.size}")
    # c_1 never enters tau; leaving it out of the running sum keeps precision
    S = np.concatenate([[0.0, 0.0], np.cumsum(c[1 : 2 * Nmax] ** 2)])
    N = np.arange(1, Nmax + 1)
    return np.maximum(S[2 * N] - S[N], 0.0)


def argmin_largest(curve) -> int:
    """1-based position of the minimum, ties resolved to the largest index."""
    curve = np.asarray(curve, dtype=float)
    if curve.size == 0:
        raise SelectionError("empty curve")
    return int(np.flatnonzero(curve == curve.min())[-1]) + 1


def select_N(tau) -> tuple[int, float]:
    N = argmin_largest(tau)
    return N, float(np.asarray(tau)[N - 1])


def select(e: EmpiricalCoeffs) -> SelectionResult:
    tau = tau_curve(e)
    N, tmin = select_N(tau)
    return SelectionResult(tau, N, tmin)


@dataclass(frozen=True)
class OracleCurves:
    A: np.ndarray
    B: np.ndarray
    A_min: float
    B_min: float
    N0: int
    delta_s: float

    def to_csv(self, tau=None) -> str:
        head = "N,tau,A,B" if tau is not None else "N,A,B"
        rows = [head]
        for i, (a, b) in enumerate(zip(self.A, self.B)):
            cells = [str(i + 1)]
            if tau is not None:
                cells.append(f"{tau[i]:.16e}")
            cells += [f"{a:.16e}", f"{b:.16e}"]
            rows.append(",".join(cells))
        return "\n".join(rows) + "\n"


def population_coeffs(t: TargetSpec, problem: str, n: int) -> np.ndarray:
    """Coefficients entering ``B(n, N)``.

    Regression uses the design-discretized ``n^-1 sum_i f(x_i) phi_j(x_i)``;
    density and spectral problems use the true coefficients.
    """
    K = 2 * max_order(n)
    if problem == "R":
        xs = regression_design(n)
        return coefficient_sums(xs, synthesize(t.coeffs, xs), K)
    if t.J < K:
        raise SelectionError(f"target truncated at J={t.J} < 2*floor(n/3)={K}")
    return np.asarray(t.coeffs[:K], dtype=float)


def default_delta(problem: str, t: TargetSpec, noise_variance: float = 1.0) -> float:
    if problem == "R":
        return float(noise_variance)
    if problem == "D":
        return 1.0
    return t.series.norm2()


def oracle_curves(t: TargetSpec, problem: str, n: int, delta_s: float) -> OracleCurves:
    if delta_s <= 0:
        raise SelectionError("delta_s must be positive")
    Nmax = max_order(n)
    if problem != "R" and t.J < 2 * Nmax:
        raise SelectionError(f"target truncated at J={t.J} < 2*floor(n/3)={2 * Nmax}")
    c = population_coeffs(t, problem, n)
    N = np.arange(1, Nmax + 1)
    penalty = delta_s * N / n
    B = tau_curve(c, n) + penalty
    rho = tail_profile(t.series)
    rho_N = np.where(N <= t.J, rho[np.minimum(N, t.J)], 0.0)
    A = rho_N + penalty
    N0 = argmin_largest(B)
    return OracleCurves(A, B, float(A.min()), float(B[N0 - 1]), N0, float(delta_s))


@dataclass
class ConditionVFit:
    C1: float
    C2: float
    v: np.ndarray
    excess_left: np.ndarray
    excess_right: np.ndarray
    margin_left: np.ndarray
    margin_right: np.ndarray

    @property
    def satisfied(self) -> bool:
        m = np.concatenate([self.margin_left, self.margin_right])
        m = m[np.isfinite(m)]
        return bool(m.size and np.all(m > 0))


def _model(w, C1, C2):
    return C1 * w**2 / (1.0 + C2 * w)


def condition_v_fit(
    curve,
    v_grid=None,
    slack: float = 0.5,
    N0: int | None = None,
) -> ConditionVFit:
    """Fit ``B(N)/B(n) - 1 ~ C1 w^2 / (1 + C2 w)`` with ``w = max(N/N0, N0/N) - 1``.

    ``curve`` is ``B(n, .)`` (an :class:`OracleCurves` or any array indexed from
    ``N = 1``; a tau curve works as a data-driven proxy).  For every factor
    ``v`` in ``v_grid`` the smallest excess over ``N < N0/v`` and ``N >= v N0``
    is compared with ``slack`` times the fitted lower bound; an empty interval
    gives a ``nan`` margin.
    """
    B = np.asarray(curve.B if isinstance(curve, OracleCurves) else curve, dtype=float)
    if N0 is None:
        N0 = argmin_largest(B)
    Bmin = B[N0 - 1]
    if not Bmin > 0:
        raise SelectionError("curve minimum must be positive")
    N = np.arange(1, B.size + 1)
    w = np.maximum(N / N0, N0 / N) - 1.0
    y = B / Bmin - 1.0
    use = N != N0
    if use.sum() < 4:
        raise SelectionError("fewer than 4 usable points for the curve-shape fit")
    (C1, C2), _ = curve_fit(
        _model,
        w[use],
        y[use],
        p0=(1.0, 1.0),
        bounds=([0.0, 0.0], [np.inf, 1e8]),
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
        maxfev=20000,
    )
    if v_grid is None:
        v_grid = 1.0 + np.geomspace(0.05, 4.0, 24)
    v_grid = np.asarray(v_grid, dtype=float)
    ex_l = np.full(v_grid.size, np.nan)
    ex_r = np.full(v_grid.size, np.nan)
    for i, v in enumerate(v_grid):
        left = N < N0 / v
        right = N >= N0 * v
        if left.any():
            ex_l[i] = y[left].min()
        if right.any():
            ex_r[i] = y[right].min()
    bound = slack * _model(v_grid - 1.0, C1, C2)
    return ConditionVFit(float(C1), float(C2), v_grid, ex_l, ex_r, ex_l - bound, ex_r - bound)
