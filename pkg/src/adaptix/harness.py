"""Monte Carlo experiments: risk rates, ratio diagnostics and confidence coverage.

Every replication draws from its own Philox stream keyed by
``(base_seed, rep, n)``, so the report does not depend on execution order or
on the number of worker threads (``ADAPTIX_THREADS``).
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .confidence import confidence_report, default_r
from .estimator import adaptive_estimate, l2_error
from .samplers import (
    PROBLEMS,
    DensitySampler,
    GaussianSequenceSampler,
    NoiseSpec,
    gen_density_sample,
    gen_regression,
    gen_stationary_gaussian,
)
from .selector import default_delta, max_order, oracle_curves
from .targets import TargetSpec, make_W_target, make_Z_target, uniform_target


class ConfigError(ValueError):
    def __init__(self, field_name: str, msg: str):
        super().__init__(f"{field_name}: {msg}")
        self.field = field_name


def default_J(n_max: int) -> int:
    return max(256, 4 * (n_max // 3))


def build_target(doc: dict, problem: str, n_max: int) -> TargetSpec:
    """Target from its config entry: a class spec, explicit coefficients or a file."""
    if "path" in doc:
        with open(doc["path"]) as fh:
            return TargetSpec.from_json(fh.read())
    if "coeffs" in doc:
        return TargetSpec.from_json(json.dumps({"class_tag": "custom", **doc}))
    cls = doc.get("class")
    if cls is None:
        raise ConfigError("target.class", "missing required field")
    default_constraints = {"R": "none", "D": "nonnegative", "S": "even"}[problem]
    constraints = doc.get("constraints", default_constraints)
    J = int(doc.get("J", default_J(n_max)))
    try:
        if cls == "W":
            return make_W_target(
                doc.get("C", 1.0), doc.get("alpha", 0.0), doc.get("beta", 1.0), J, constraints
            )
        if cls == "Z":
            return make_Z_target(doc.get("alpha", 1.0), doc.get("beta", 0.5), J, constraints)
    except ValueError as exc:
        raise ConfigError("target", str(exc)) from None
    if cls == "uniform":
        return uniform_target()
    raise ConfigError("target.class", f"unknown class {cls!r}")


@dataclass
class ExperimentConfig:
    problem: str
    target: TargetSpec
    n_grid: list
    reps: int
    noise: NoiseSpec | None = None
    delta: float = 0.05
    base_seed: int = 0
    r: float | None = None
    c_free: float = 1.0
    tau_probes: list = field(default_factory=list)
    outputs: dict = field(default_factory=dict)
    target_doc: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ConfigError("problem", f"must be one of {PROBLEMS}")
        if int(self.reps) != self.reps or self.reps < 1:
            raise ConfigError("reps", "must be a positive integer")
        ns = list(self.n_grid)
        if not ns:
            raise ConfigError("n_grid", "must not be empty")
        if any(int(n) != n or n < 9 for n in ns):
            raise ConfigError("n_grid", "every n must be an integer >= 9")
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigError("n_grid", "must be strictly increasing")
        if not 0 < self.delta <= 1:
            raise ConfigError("delta", "must lie in (0, 1]")
        if self.problem == "R" and self.noise is None:
            self.noise = NoiseSpec()
        self.n_grid = [int(n) for n in ns]
        self.reps = int(self.reps)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        for key in ("problem", "target", "n_grid", "reps"):
            if key not in doc:
                raise ConfigError(key, "missing required field")
        problem = str(doc["problem"]).upper()
        if problem not in PROBLEMS:
            raise ConfigError("problem", f"must be one of {PROBLEMS}")
        if not isinstance(doc["n_grid"], list) or not doc["n_grid"]:
            raise ConfigError("n_grid", "must be a non-empty list")
        if not isinstance(doc["target"], dict):
            raise ConfigError("target", "must be an object")
        noise = None
        if "noise" in doc:
            try:
                noise = NoiseSpec(**doc["noise"])
            except (TypeError, ValueError) as exc:
                raise ConfigError("noise", str(exc)) from None
        target = build_target(doc["target"], problem, max(doc["n_grid"]))
        return cls(
            problem=problem,
            target=target,
            n_grid=doc["n_grid"],
            reps=doc["reps"],
            noise=noise,
            delta=float(doc.get("delta", 0.05)),
            base_seed=int(doc.get("base_seed", 0)),
            r=doc.get("r"),
            c_free=float(doc.get("c_free", 1.0)),
            tau_probes=list(doc.get("tau_probes", [])),
            outputs=dict(doc.get("outputs", {})),
            target_doc=dict(doc["target"]),
        )

    def describe(self) -> dict:
        return {
            "problem": self.problem,
            "target": {
                "class_tag": self.target.class_tag,
                "params": {k: float(v) for k, v in self.target.params.items()},
                "J": self.target.J,
                "constraints": self.target.constraints,
            },
            "n_grid": self.n_grid,
            "reps": self.reps,
            "noise": self.noise.to_dict() if self.noise else None,
            "delta": self.delta,
            "base_seed": self.base_seed,
            "r": self.r_value,
            "c_free": self.c_free,
            "tau_probes": self.tau_probes,
        }

    @property
    def r_value(self) -> float:
        if self.r is not None:
            return float(self.r)
        if self.problem == "R":
            return default_r("R", self.noise.q_exponent if self.noise.family != "student_t" else 2.0)
        return default_r(self.problem)


ROW_FIELDS = (
    "n",
    "rep",
    "risk",
    "tau_star",
    "N_sel",
    "N0",
    "ratio",
    "covered_simple",
    "covered_refined",
    "gamma_hat",
    "degenerate",
    "aci_simple",
    "aci_refined",
    "B_n",
)


class _Context:
    """Per-experiment objects shared read-only by all replications."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        t = cfg.target
        variance = cfg.noise.variance if cfg.noise else 1.0
        self.delta_s = default_delta(cfg.problem, t, variance)
        self.oracle = {}
        for n in cfg.n_grid:
            # a noiseless experiment has no penalty term and hence no oracle
            if self.delta_s > 0 and (cfg.problem == "R" or t.J >= 2 * max_order(n)):
                self.oracle[n] = oracle_curves(t, cfg.problem, n, self.delta_s)
            else:
                self.oracle[n] = None
        self.density = DensitySampler(t) if cfg.problem == "D" else None
        self.sequence = (
            {n: GaussianSequenceSampler(t, n) for n in cfg.n_grid} if cfg.problem == "S" else {}
        )

    def data(self, n: int, rep: int):
        cfg = self.cfg
        stream = (rep, n)
        if cfg.problem == "R":
            return gen_regression(cfg.target, n, cfg.noise, cfg.base_seed, stream)
        if cfg.problem == "D":
            return gen_density_sample(cfg.target, n, cfg.base_seed, stream, self.density)
        return gen_stationary_gaussian(cfg.target, n, cfg.base_seed, stream, self.sequence[n])


def replicate(ctx: _Context, n: int, rep: int) -> dict:
    cfg = ctx.cfg
    d = ctx.data(n, rep)
    est = adaptive_estimate(d)
    risk = l2_error(est, cfg.target)
    conf = confidence_report(est, cfg.delta, cfg.r_value, cfg.c_free)
    oc = ctx.oracle[n]
    B_n = oc.B_min if oc else math.nan
    N0 = oc.N0 if oc else -1
    row = {
        "n": n,
        "rep": rep,
        "risk": risk,
        "tau_star": est.tau_star,
        "N_sel": est.N_selected,
        "N0": N0,
        "ratio": est.tau_star / B_n if oc else math.nan,
        "covered_simple": bool(conf.aci_simple >= risk),
        "covered_refined": bool(conf.aci_refined >= risk),
        "gamma_hat": conf.gamma_hat,
        "degenerate": bool(conf.degenerate),
        "aci_simple": conf.aci_simple,
        "aci_refined": conf.aci_refined,
        "B_n": B_n,
    }
    for N in cfg.tau_probes:
        row[f"tau_{N}"] = float(est.selection.tau[N - 1]) if N <= est.selection.tau.size else math.nan
    return row


def _se(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1) / np.sqrt(x.size)) if x.size > 1 else 0.0


def _iqr(x: np.ndarray) -> float:
    q75, q25 = np.percentile(x, [75, 25])
    return float(q75 - q25)


def aggregate(rows: list, n: int, probes=()) -> dict:
    """Summary record for one sample size (rows must all share ``n``)."""
    rows = sorted(rows, key=lambda r: r["rep"])
    col = lambda k: np.array([r[k] for r in rows], dtype=float)  # noqa: E731
    risk = col("risk")
    ratio = col("ratio")
    nratio = col("N_sel") / col("N0")
    deg = col("degenerate").astype(bool)
    cs, cr = col("covered_simple").astype(bool), col("covered_refined").astype(bool)
    gam = col("gamma_hat")
    rec = {
        "n": n,
        "reps": len(rows),
        "mean_risk": float(risk.mean()),
        "se_risk": _se(risk),
        "median_risk": float(np.median(risk)),
        "B_n": rows[0]["B_n"],
        "N0": rows[0]["N0"],
        "mean_tau_over_B": float(ratio.mean()),
        "median_tau_over_B": float(np.median(ratio)),
        "median_abs_tau_over_B_minus_1": float(np.median(np.abs(ratio - 1.0))),
        "mean_N_over_N0": float(nratio.mean()),
        "median_N_over_N0": float(np.median(nratio)),
        "iqr_N_over_N0": _iqr(nratio),
        "mean_N_sel": float(col("N_sel").mean()),
        "coverage_simple": float(cs.mean()),
        "coverage_refined": float(cr.mean()),
        "degenerate_count": int(deg.sum()),
        "coverage_simple_nondegenerate": float(cs[~deg].mean()) if (~deg).any() else math.nan,
        "coverage_refined_nondegenerate": float(cr[~deg].mean()) if (~deg).any() else math.nan,
        "mean_gamma_hat": float(np.nanmean(gam)) if np.isfinite(gam).any() else math.nan,
    }
    for N in probes:
        v = col(f"tau_{N}")
        rec[f"mean_tau_{N}"] = float(v.mean())
        rec[f"se_tau_{N}"] = _se(v)
    return rec


def fit_rate(ns, risks) -> float:
    """Least-squares slope of ``log(risk)`` against ``log(n)``."""
    ns = np.asarray(ns, dtype=float)
    risks = np.asarray(risks, dtype=float)
    if ns.size < 3 or ns.size != risks.size:
        raise ValueError("need at least 3 (n, risk) pairs")
    if np.any(ns <= 0) or np.any(risks <= 0) or not np.all(np.isfinite(risks)):
        raise ValueError("n and risk values must be positive and finite")
    slope, _ = np.polyfit(np.log(ns), np.log(risks), 1)
    return float(slope)


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, (np.floating, np.integer)):
        return _json_safe(v.item())
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


@dataclass
class ExperimentReport:
    records: list
    rows: list
    slope: float | None
    metadata: dict

    def record(self, n: int) -> dict:
        return next(r for r in self.records if r["n"] == n)

    def to_json(self) -> str:
        doc = {"metadata": self.metadata, "records": self.records, "rate_slope": self.slope}
        return json.dumps(_json_safe(doc), indent=1, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        extra = sorted({k for r in self.rows for k in r} - set(ROW_FIELDS))
        fields = list(ROW_FIELDS) + extra
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        for r in self.rows:
            w.writerow(_fmt(r[k]) for k in fields)
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.16e}"


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("ADAPTIX_THREADS", "1")))
    except ValueError:
        return 1


def run_experiment(cfg: ExperimentConfig, threads: int | None = None) -> ExperimentReport:
    ctx = _Context(cfg)
    tasks = [(n, rep) for n in cfg.n_grid for rep in range(cfg.reps)]
    threads = thread_count() if threads is None else threads
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(lambda nr: replicate(ctx, *nr), tasks))
    else:
        rows = [replicate(ctx, n, rep) for n, rep in tasks]
    records = [
        aggregate([r for r in rows if r["n"] == n], n, cfg.tau_probes) for n in cfg.n_grid
    ]
    slope = None
    means = [r["mean_risk"] for r in records]
    if len(records) >= 3 and all(m > 0 for m in means):
        slope = fit_rate(cfg.n_grid, means)
    return ExperimentReport(records, rows, slope, {"config": cfg.describe()})


def coverage_experiment(cfg: ExperimentConfig, threads: int | None = None) -> dict:
    """Coverage of each bound type per sample size, with degenerate counts."""
    rep = run_experiment(cfg, threads)
    out = {}
    for r in rep.records:
        out[r["n"]] = {
            "simple": r["coverage_simple"],
            "refined": r["coverage_refined"],
            "simple_nondegenerate": r["coverage_simple_nondegenerate"],
            "refined_nondegenerate": r["coverage_refined_nondegenerate"],
            "degenerate_count": r["degenerate_count"],
            "reps": r["reps"],
            "binomial_se_refined": math.sqrt(
                max(r["coverage_refined"] * (1 - r["coverage_refined"]), 0.0) / r["reps"]
            ),
        }
    return out
