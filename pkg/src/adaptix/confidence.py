"""Adaptive confidence bounds for ``||f_hat - f||^2`` and tail-bound evaluators.

The unknown constants inside the exponential bounds are not determined by the
theory; they are exposed as ``c_free`` (default 1), so the evaluators give the
shape of a bound rather than a certified probability.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .estimator import AdaptiveEstimate
from .selector import condition_v_fit

GAMMA_MAX = 0.99


class DegenerateError(ArithmeticError):
    """The tau triple does not determine a decay ratio."""

    def __init__(self, msg, values=()):
        super().__init__(msg)
        self.values = tuple(values)


class BelowThresholdError(ValueError):
    pass


def _den_guard(tau_M: float) -> float:
    return 1e-12 * max(1.0, abs(tau_M))


def raw_gamma(tau_M: float, tau_2M: float, tau_4M: float) -> float:
    den = tau_2M - 2.0 * tau_M
    if abs(den) <= _den_guard(tau_M):
        raise DegenerateError(
            "tau(2M) - 2 tau(M) vanishes", (tau_M, tau_2M, tau_4M)
        )
    return (tau_4M - 2.0 * tau_2M) / den


def estimate_gamma(tau_M: float, tau_2M: float, tau_4M: float, clip: bool = True) -> float:
    """Decay-ratio estimate ``(tau(4M) - 2 tau(2M)) / (tau(2M) - 2 tau(M))``.

    Exact for ``tau(kM) = k a + gamma^{log2 k} r``; clipped to ``[0, 0.99]``.
    """
    g = raw_gamma(tau_M, tau_2M, tau_4M)
    return float(min(max(g, 0.0), GAMMA_MAX)) if clip else float(g)


def choose_M(n: int) -> tuple[int, bool]:
    """``M = floor(exp(sqrt(ln n)))``, clamped so that ``4M <= floor(n/3)``.

    Returns ``(M, clamped)``.
    """
    if n < 9:
        raise ValueError("n must be at least 9")
    M = int(math.floor(math.exp(math.sqrt(math.log(n)))))
    if 4 * M <= n // 3:
        return M, False
    return max(1, n // 12), True


def aci_simple(tau_star: float, tau_M: float, tau_2M: float, tau_4M: float) -> float:
    """``tau* / (1 - gamma_hat)`` with the clipped ratio."""
    g = estimate_gamma(tau_M, tau_2M, tau_4M)
    return tau_star / (1.0 - g)


def u_delta(delta: float, r: float, c_free: float = 1.0) -> float:
    """Solve ``2 exp(-c u^{r/2}) = delta``."""
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    if r <= 0 or c_free <= 0:
        raise ValueError("r and c_free must be positive")
    return (math.log(2.0 / delta) / c_free) ** (2.0 / r)


def aci_refined(
    tau_star: float,
    gamma_hat: float,
    N_selected: int,
    delta: float,
    r: float = 1.0,
    c_free: float = 1.0,
) -> float:
    if N_selected < 1:
        raise ValueError("N_selected must be >= 1")
    u = u_delta(delta, r, c_free)
    return tau_star / (1.0 - gamma_hat) + tau_star * u / math.sqrt(N_selected)


def _objective(X: float) -> float:
    return X / (0.5 - X) ** 2 + 1.0 / X


def r1_constants() -> tuple[float, float]:
    """``(min, argmin)`` of ``X (0.5 - X)^-2 + 1/X`` over ``(0, 1/2)``."""
    res = minimize_scalar(
        _objective, bounds=(1e-9, 0.5 - 1e-9), method="bounded", options={"xatol": 1e-13}
    )
    return float(res.fun), float(res.x)


_R1 = r1_constants()


def tail_bound_R1(u: float, mu4: float) -> float:
    C1, C2 = _R1
    if u <= math.e / C2:
        raise BelowThresholdError(f"u must exceed e/C2 = {math.e / C2:.6f}")
    return min(1.0, C1 * mu4 / u * math.log(C2 * u) ** 2)


def tail_bound_R2(u: float, k: int, mu_2k: float) -> float:
    """``2^{2k} k^k mu_{2k} u^{-k/2}``; stated for ``k >= 3``, ``k = 2`` is accepted."""
    if u <= 0:
        raise BelowThresholdError("u must be positive")
    if int(k) != k or k < 2:
        raise ValueError("k must be an integer >= 2")
    if mu_2k <= 0:
        raise ValueError("mu_2k must be positive")
    k = int(k)
    return min(1.0, 4.0**k * k**k * mu_2k * u ** (-k / 2.0))


@dataclass
class TailBoundParams:
    problem: str
    gamma: float
    N0: int
    B_n: float
    k: int = 3
    mu_2k: float = 15.0
    q: float = 2.0
    Q: float = math.sqrt(2.0)
    c_free: float = 1.0

    def __post_init__(self):
        if self.problem not in ("R", "D", "S"):
            raise ValueError(f"unknown problem {self.problem!r}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if self.N0 < 1 or not 0 < self.B_n < 1:
            raise ValueError("need N0 >= 1 and 0 < B(n) < 1")
        if self.q <= 0 or self.Q <= 0 or self.c_free <= 0:
            raise ValueError("q, Q, c_free must be positive")

    @property
    def threshold(self) -> float:
        if self.problem == "R":
            return 2.0 * self.Q / (1.0 - self.gamma)
        return 1.0 / (1.0 - self.gamma)


def tail_bound_exponential(u: float, p: TailBoundParams) -> float:
    """``5 exp(-c g(u))`` capped at 1.

    Regression: ``g = N0 ((u - C)/Q)^{q/(2q+4)} / |log B(n)|`` with ``C = 2Q/(1-gamma)``.
    Density, spectral: ``g = sqrt((u - C) N0) / |log B(n)|`` with ``C = 1/(1-gamma)``.
    """
    C = p.threshold
    if u < C:
        raise BelowThresholdError(f"u={u} is below the threshold {C}")
    logB = abs(math.log(p.B_n))
    if p.problem == "R":
        g = p.N0 * ((u - C) / p.Q) ** (p.q / (2 * p.q + 4)) / logB
    else:
        g = math.sqrt((u - C) * p.N0) / logB
    return min(1.0, 5.0 * math.exp(-p.c_free * g))


def theorem_tau_bound(u: float, phi: Callable[[float], float], c_free: float = 1.0) -> float:
    """``2 exp(-phi(c sqrt(u)))`` for the self-normalized ratio ``||f_hat - f||^2 / tau*``."""
    return min(1.0, 2.0 * math.exp(-phi(c_free * math.sqrt(max(u, 0.0)))))


def default_r(problem: str, q: float = 2.0) -> float:
    return q / (q + 2.0) if problem == "R" else 1.0


@dataclass
class ConfidenceReport:
    M: int
    M_clamped: bool
    gamma_raw: float
    gamma_hat: float
    degenerate: bool
    aci_simple: float
    aci_refined: float
    delta: float
    u_delta: float
    r_exponent: float
    tau_M: float = math.nan
    tau_2M: float = math.nan
    tau_4M: float = math.nan
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> str:
        def clean(v):
            if isinstance(v, float) and not math.isfinite(v):
                return repr(v)
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            return v

        return json.dumps(clean(asdict(self)), indent=1, sort_keys=True)


def confidence_report(
    est: AdaptiveEstimate,
    delta: float = 0.05,
    r: float | None = None,
    c_free: float = 1.0,
    diagnostics: bool = False,
) -> ConfidenceReport:
    """Simple and refined bounds for one estimate.

    A vanishing denominator or a ratio clipped at 0.99 marks the report as
    degenerate; in the first case both bounds are infinite.
    """
    tau = est.selection.tau
    n = est.n
    r = default_r(est.problem) if r is None else r
    u = u_delta(delta, r, c_free)
    M, clamped = choose_M(n)
    if 4 * M > tau.size:
        return ConfidenceReport(
            M, True, math.nan, math.nan, True, math.inf, math.inf, delta, u, r
        )
    tM, t2M, t4M = (float(tau[k * M - 1]) for k in (1, 2, 4))
    try:
        g_raw = raw_gamma(tM, t2M, t4M)
    except DegenerateError:
        if not np.any(est.empirical.coeffs[1:]):
            # exactly flat data: every admissible ratio gives the same zero bound
            return ConfidenceReport(
                M, clamped, math.nan, 0.0, False, 0.0, 0.0, delta, u, r, tM, t2M, t4M
            )
        return ConfidenceReport(
            M, clamped, math.nan, math.nan, True, math.inf, math.inf, delta, u, r, tM, t2M, t4M
        )
    g = min(max(g_raw, 0.0), GAMMA_MAX)
    simple = est.tau_star / (1.0 - g)
    refined = aci_refined(est.tau_star, g, est.N_selected, delta, r, c_free)
    rep = ConfidenceReport(
        M, clamped, g_raw, g, g_raw >= GAMMA_MAX, simple, refined, delta, u, r, tM, t2M, t4M
    )
    if diagnostics:
        rep.diagnostics = _diagnostics(est, rep, c_free)
    return rep


def _diagnostics(est: AdaptiveEstimate, rep: ConfidenceReport, c_free: float) -> dict:
    out = {"tau_star": est.tau_star, "N_selected": est.N_selected}
    if est.tau_star > 0:
        ratio = rep.aci_refined / est.tau_star
        out["theorem_tau_at_refined"] = theorem_tau_bound(ratio, lambda s: s, c_free)
    if est.tau_star > 0 and est.tau_star < 1 and rep.gamma_hat < 1:
        p = TailBoundParams(
            "D" if est.problem != "R" else "R",
            rep.gamma_hat,
            est.N_selected,
            est.tau_star,
            c_free=c_free,
        )
        u = 2.0 * p.threshold
        out["tail_bound_plugin_u"] = u
        out["tail_bound_plugin"] = tail_bound_exponential(u, p)
    try:
        fit = condition_v_fit(est.selection.tau)
        out["condition_v_C1"] = fit.C1
        out["condition_v_C2"] = fit.C2
    except Exception as exc:  # the proxy fit is advisory only
        out["condition_v_error"] = str(exc)
    return out
