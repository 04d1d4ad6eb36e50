"""Data generation for the regression (R), density (D) and spectral (S) problems."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .targets import TargetSpec, grid_maximum, grid_minimum
from .trig_basis import lipschitz_bound, synthesize, synthesize_grid

PROBLEMS = ("R", "D", "S")
NOISE_FAMILIES = ("gaussian", "student_t", "symmetric_weibull")
ENVELOPE_SAFETY = 1.01


class SamplerError(ValueError):
    pass


class EmbeddingError(RuntimeError):
    pass


def make_rng(seed: int, stream: int | tuple = ()) -> np.random.Generator:
    """Philox generator for ``(seed, stream)``; streams are independent of each other."""
    key = stream if isinstance(stream, tuple) else (int(stream),)
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class NoiseSpec:
    """Centered i.i.d. noise with variance ``sigma**2``.

    ``student_t`` is the t distribution with ``df > 2`` rescaled to unit variance;
    ``symmetric_weibull`` is ``s * Q * E**(1/q)`` with a random sign ``s`` and a
    standard exponential ``E``, so ``P(|xi| > x) = exp(-(x/Q)**q)`` exactly.
    """

    family: str = "gaussian"
    sigma: float = 1.0
    df: float | None = None
    q: float | None = None

    def __post_init__(self):
        if self.family not in NOISE_FAMILIES:
            raise SamplerError(f"unknown noise family {self.family!r}")
        if not self.sigma >= 0:
            raise SamplerError("sigma must be nonnegative")
        if self.family == "student_t" and (self.df is None or self.df <= 2):
            raise SamplerError("student_t noise needs df > 2 for a finite variance")
        if self.family == "symmetric_weibull" and (self.q is None or self.q <= 0):
            raise SamplerError("symmetric_weibull noise needs q > 0")

    @property
    def variance(self) -> float:
        return self.sigma**2

    @property
    def Q(self) -> float:
        """Tail scale of the (Rq) bound; only meaningful for ``symmetric_weibull``."""
        if self.family == "gaussian":
            return self.sigma * math.sqrt(2.0)
        if self.family != "symmetric_weibull":
            raise SamplerError("Q is defined for exponential-tail families only")
        return self.sigma / math.sqrt(math.gamma(1.0 + 2.0 / self.q))

    @property
    def q_exponent(self) -> float:
        if self.family == "gaussian":
            return 2.0
        if self.family == "symmetric_weibull":
            return float(self.q)
        raise SamplerError("student_t noise has only power moments")

    def moment(self, order: int) -> float:
        """``E xi^order`` for even ``order`` (``inf`` when it does not exist)."""
        if order % 2:
            return 0.0
        s = self.sigma
        if self.family == "gaussian":
            return s**order * float(np.prod(np.arange(order - 1, 0, -2)))
        if self.family == "student_t":
            nu = self.df
            if order >= nu:
                return math.inf
            scale2 = (nu - 2) / nu
            k = order // 2
            m = math.prod((2 * i - 1) * nu / (nu - 2 * i) for i in range(1, k + 1))
            return (s**2 * scale2) ** k * m
        return self.Q**order * math.gamma(1.0 + order / self.q)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.sigma == 0:
            return np.zeros(size)
        if self.family == "gaussian":
            return self.sigma * rng.standard_normal(size)
        if self.family == "student_t":
            scale = self.sigma * math.sqrt((self.df - 2) / self.df)
            return scale * rng.standard_t(self.df, size)
        signs = np.where(rng.random(size) < 0.5, -1.0, 1.0)
        return signs * self.Q * rng.standard_exponential(size) ** (1.0 / self.q)

    def to_dict(self) -> dict:
        d = {"family": self.family, "sigma": self.sigma}
        if self.df is not None:
            d["df"] = self.df
        if self.q is not None:
            d["q"] = self.q
        return d


@dataclass
class Dataset:
    problem: str
    n: int
    values: np.ndarray
    xs: np.ndarray | None = None
    seed: int | None = None
    truth: TargetSpec | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise SamplerError(f"unknown problem {self.problem!r}")
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.n,):
            raise SamplerError("values must have length n")
        if self.problem == "R":
            if self.xs is None:
                self.xs = regression_design(self.n)
            self.xs = np.asarray(self.xs, dtype=float)
            if self.xs.shape != (self.n,):
                raise SamplerError("design must have length n")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# problem={self.problem} n={self.n} seed={self.seed}\n")
        w = csv.writer(buf, lineterminator="\n")
        if self.problem == "R":
            w.writerow(["x", "y"])
            w.writerows((f"{x:.16e}", f"{y:.16e}") for x, y in zip(self.xs, self.values))
        else:
            w.writerow(["value"])
            w.writerows((f"{v:.16e}",) for v in self.values)
        return buf.getvalue()


def regression_design(n: int) -> np.ndarray:
    return np.arange(1, n + 1) / n


def gen_regression(t: TargetSpec, n: int, noise: NoiseSpec, seed: int, stream=()) -> Dataset:
    if n < 9:
        raise SamplerError("regression needs n >= 9")
    xs = regression_design(n)
    rng = make_rng(seed, stream)
    y = synthesize(t.coeffs, xs) + noise.draw(rng, n)
    return Dataset("R", n, y, xs, seed, t)


class DensitySampler:
    """Rejection sampler from a bounded trigonometric-polynomial density.

    The density is tabulated exactly on a fine FFT grid.  The grid value at the
    nearest node, plus or minus ``sup|f'| h / 2``, brackets ``f`` at any point,
    so most proposals are decided from the table and only the ambiguous ones
    are evaluated exactly.  The uniform envelope is the certified upper bound
    of ``f`` times a 1.01 safety factor.
    """

    def __init__(self, t: TargetSpec):
        c = t.coeffs
        if abs(c[0] - 1.0) > 1e-8:
            raise SamplerError("target does not integrate to one")
        if grid_minimum(c) < -1e-10:
            raise SamplerError("target is negative somewhere on [0, 1]")
        self.coeffs = c
        L = c.size // 2
        self.G = max(8192, 1 << int(np.ceil(np.log2(64 * (L + 1)))))
        self.table = synthesize_grid(c, self.G)
        self.slack = lipschitz_bound(c) / (2 * self.G)
        self.envelope = ENVELOPE_SAFETY * grid_maximum(c)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        out = np.empty(n)
        filled = 0
        while filled < n:
            m = int(1.2 * (n - filled) * self.envelope) + 16
            x = rng.random(m)
            u = rng.random(m) * self.envelope
            near = self.table[np.rint(x * self.G).astype(np.int64) % self.G]
            accept = u < near - self.slack
            unsure = np.flatnonzero(~accept & (u <= near + self.slack))
            if unsure.size:
                accept[unsure] = u[unsure] < synthesize(self.coeffs, x[unsure])
            got = x[accept][: n - filled]
            out[filled : filled + got.size] = got
            filled += got.size
        return out


def gen_density_sample(
    t: TargetSpec, n: int, seed: int, stream=(), sampler: DensitySampler | None = None
) -> Dataset:
    if n < 1:
        raise SamplerError("n must be positive")
    if sampler is None:
        sampler = DensitySampler(t)
    return Dataset("D", n, sampler.sample(n, make_rng(seed, stream)), None, seed, t)


def autocovariances(t: TargetSpec, max_lag: int) -> np.ndarray:
    """``R(l) = int f(x) cos(2 pi l x) dx``: ``R(0) = c_1``, ``R(l) = c_{2l} / sqrt 2``."""
    c = t.coeffs
    R = np.zeros(max_lag + 1)
    R[0] = c[0]
    cos_c = c[1::2] / np.sqrt(2.0)
    k = min(max_lag, cos_c.size)
    R[1 : k + 1] = cos_c[:k]
    return R


class GaussianSequenceSampler:
    """Circulant embedding for the stationary sequence with spectral density ``t``."""

    def __init__(self, t: TargetSpec, n: int, max_doublings: int = 6, tol: float = 1e-10):
        if not t.is_even():
            raise SamplerError("spectral targets must have zero sine coefficients")
        L = t.J // 2
        m = 1 << int(np.ceil(np.log2(max(n, L + 1, 2))))
        for _ in range(max_doublings + 1):
            R = autocovariances(t, m)
            row = np.concatenate([R, R[-2:0:-1]])
            lam = np.fft.fft(row).real
            if lam.min() >= -tol * max(1.0, lam.max()):
                break
            m *= 2
        else:
            raise EmbeddingError(
                f"circulant embedding has negative eigenvalue {lam.min():.3e} at size {2 * m}"
            )
        self.n = n
        self.size = row.size
        self.sqrt_lam = np.sqrt(np.clip(lam, 0.0, None) / self.size)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal(self.size) + 1j * rng.standard_normal(self.size)
        return np.fft.fft(self.sqrt_lam * z).real[: self.n]


def gen_stationary_gaussian(
    t: TargetSpec, n: int, seed: int, stream=(), sampler: GaussianSequenceSampler | None = None
) -> Dataset:
    if sampler is None or sampler.n != n:
        sampler = GaussianSequenceSampler(t, n)
    return Dataset("S", n, sampler.sample(make_rng(seed, stream)), None, seed, t)


def read_dataset_csv(text: str, problem: str | None = None) -> Dataset:
    """Parse the CSV layout written by :meth:`Dataset.to_csv`.

    Raises ``SamplerError`` with a 1-based line number on malformed rows.
    """
    lines = text.splitlines()
    meta = {}
    start = 0
    if lines and lines[0].startswith("#"):
        for tok in lines[0][1:].split():
            if "=" in tok:
                k, v = tok.split("=", 1)
                meta[k] = v
        start = 1
    prob = (problem or meta.get("problem", "")).upper()
    if prob not in PROBLEMS:
        raise SamplerError("problem tag missing or unknown")
    if start >= len(lines):
        raise SamplerError(f"line {start + 1}: missing header row")
    header = [h.strip() for h in lines[start].split(",")]
    expected = ["x", "y"] if prob == "R" else ["value"]
    if header != expected:
        raise SamplerError(f"line {start + 1}: expected header {','.join(expected)}")
    rows = []
    for lineno, line in enumerate(lines[start + 1 :], start=start + 2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(expected):
            raise SamplerError(f"line {lineno}: expected {len(expected)} fields")
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise SamplerError(f"line {lineno}: not a number: {line!r}") from None
        if not all(np.isfinite(vals)):
            raise SamplerError(f"line {lineno}: non-finite value")
        if prob == "R" and not 0.0 <= vals[0] <= 1.0:
            raise SamplerError(f"line {lineno}: design point {vals[0]} outside [0, 1]")
        if prob == "D" and not 0.0 <= vals[0] <= 1.0:
            raise SamplerError(f"line {lineno}: observation {vals[0]} outside [0, 1]")
        rows.append(vals)
    if not rows:
        raise SamplerError("no observations")
    arr = np.asarray(rows)
    seed = meta.get("seed")
    seed = int(seed) if seed not in (None, "None") else None
    if prob == "R":
        return Dataset("R", len(arr), arr[:, 1], arr[:, 0], seed)
    return Dataset(prob, len(arr), arr[:, 0], None, seed)
