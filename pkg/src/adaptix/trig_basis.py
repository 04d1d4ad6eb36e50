"""Orthonormal trigonometric system on [0, 1].

Indexing is 1-based: ``phi_1 = 1``, ``phi_{2l} = sqrt(2) cos(2 pi l x)``,
``phi_{2l+1} = sqrt(2) sin(2 pi l x)``.  Coefficient vectors are stored as
0-based numpy arrays, so ``coeffs[j - 1]`` holds ``c_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

SQRT2 = np.sqrt(2.0)
TWO_PI = 2.0 * np.pi

# Above this many frequencies the factorized kernels beat dense matrices.
_DENSE_LIMIT = 64
_CHUNK = 8192


class BasisDomainError(ValueError):
    pass


@dataclass(frozen=True)
class FourierSeries:
    """Finite coefficient sequence ``c_1..c_J`` on the trigonometric basis."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float)).copy()
        if c.ndim != 1 or c.size < 1:
            raise ValueError("a FourierSeries needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def J(self) -> int:
        return self.coeffs.size

    def norm2(self) -> float:
        return float(np.dot(self.coeffs, self.coeffs))

    def __call__(self, x):
        return synthesize(self.coeffs, x)

    def truncate(self, N: int) -> "FourierSeries":
        if not 1 <= N <= self.J:
            raise IndexError(f"truncation order {N} outside 1..{self.J}")
        return FourierSeries(self.coeffs[:N])


def frequency(j: int) -> int:
    return j // 2


def _check_x(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.size and (np.any(x < 0.0) or np.any(x > 1.0) or np.any(~np.isfinite(x))):
        raise BasisDomainError("basis functions are defined on [0, 1] only")
    return x


def eval_basis(j: int, x):
    """Evaluate ``phi_j`` at ``x`` (scalar or array)."""
    if int(j) != j or j < 1:
        raise BasisDomainError(f"basis index must be a positive integer, got {j!r}")
    x = _check_x(x)
    j = int(j)
    if j == 1:
        out = np.ones_like(x)
    elif j % 2 == 0:
        out = SQRT2 * np.cos(TWO_PI * (j // 2) * x)
    else:
        out = SQRT2 * np.sin(TWO_PI * (j // 2) * x)
    return float(out) if out.ndim == 0 else out


def basis_matrix(J: int, x) -> np.ndarray:
    """Dense design matrix with ``[i, j-1] = phi_j(x_i)``, shape ``(len(x), J)``."""
    x = np.atleast_1d(_check_x(x))
    out = np.empty((x.size, J))
    out[:, 0] = 1.0
    L = J // 2
    if L:
        arg = TWO_PI * np.outer(x, np.arange(1, L + 1))
        out[:, 1::2] = SQRT2 * np.cos(arg)[:, : J // 2]
        out[:, 2::2] = SQRT2 * np.sin(arg)[:, : (J - 1) // 2]
    return out


def to_complex(coeffs) -> np.ndarray:
    """Amplitudes ``a_l`` with ``f(x) = Re sum_l a_l exp(2 pi i l x)``."""
    c = np.asarray(coeffs, dtype=float)
    J = c.size
    L = J // 2
    a = np.zeros(L + 1, dtype=complex)
    a[0] = c[0]
    if L:
        a[1:] = SQRT2 * c[1::2][:L]
        s = c[2::2]
        a[1 : s.size + 1] -= 1j * SQRT2 * s
    return a


def from_sums(sums: np.ndarray, K: int, n: int) -> np.ndarray:
    """Turn ``S_l = sum_i w_i exp(2 pi i l x_i)`` into ``n^-1 sum_i w_i phi_j(x_i)``."""
    out = np.empty(K)
    out[0] = sums[0].real / n
    cos_slots = out[1::2]
    sin_slots = out[2::2]
    cos_slots[:] = SQRT2 * sums[1 : cos_slots.size + 1].real / n
    sin_slots[:] = SQRT2 * sums[1 : sin_slots.size + 1].imag / n
    return out


def _phase(x: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    # reduce mod 1 before scaling by 2 pi to keep large-frequency phases accurate
    return np.exp(1j * TWO_PI * np.mod(np.outer(x, freqs), 1.0))


def _powers(x: np.ndarray, B: int) -> np.ndarray:
    """``exp(2 pi i k x)`` for ``k = 0..B-1`` by running products (error ~ B eps)."""
    out = np.empty((x.size, B), dtype=complex)
    out[:, 0] = 1.0
    if B > 1:
        out[:, 1:] = np.exp(1j * TWO_PI * x)[:, None]
        np.cumprod(out, axis=1, out=out)
    return out


def _split(L: int) -> tuple[int, int]:
    # wide inner blocks are cheap (running products); outer phases use exp
    block = max(1, int(np.ceil(2.0 * np.sqrt(L + 1))))
    nblocks = -(-(L + 1) // block)
    return block, nblocks


def trig_sums(x, L: int, weights=None) -> np.ndarray:
    """Complex sums ``S_l = sum_i w_i exp(2 pi i l x_i)`` for ``l = 0..L``.

    Frequencies are split as ``l = b * B + k`` so the whole table costs one
    ``(L/B, n) @ (n, B)`` complex product instead of ``n * L`` exponentials.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    if L < _DENSE_LIMIT:
        return w @ _phase(x, np.arange(L + 1))
    B, nb = _split(L)
    out = np.zeros(nb * B, dtype=complex)
    for s in range(0, x.size, _CHUNK):
        xs = x[s : s + _CHUNK]
        inner = _powers(xs, B) * w[s : s + _CHUNK, None]
        outer = _phase(xs, B * np.arange(nb))
        out += (outer.T @ inner).ravel()
    return out[: L + 1]


def synthesize(coeffs, x):
    """Evaluate ``sum_j c_j phi_j(x)`` at every point of ``x``."""
    x_arr = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x_arr).ravel()
    a = to_complex(coeffs)
    L = a.size - 1
    if L < _DENSE_LIMIT:
        vals = (_phase(flat, np.arange(L + 1)) @ a).real
    else:
        B, nb = _split(L)
        A = np.zeros(nb * B, dtype=complex)
        A[: L + 1] = a
        A = A.reshape(nb, B)
        vals = np.empty(flat.size)
        for s in range(0, flat.size, _CHUNK):
            xs = flat[s : s + _CHUNK]
            partial = _powers(xs, B) @ A.T
            vals[s : s + _CHUNK] = np.einsum(
                "ib,ib->i", partial, _phase(xs, B * np.arange(nb))
            ).real
    if x_arr.ndim == 0:
        return float(vals[0])
    return vals.reshape(x_arr.shape)


def synthesize_grid(coeffs, G: int) -> np.ndarray:
    """Exact values of the series on the grid ``k / G``, ``k = 0..G-1``, via FFT."""
    a = to_complex(coeffs)
    if G <= 2 * (a.size - 1):
        raise ValueError("grid too coarse for the series bandwidth")
    spec = np.zeros(G, dtype=complex)
    spec[: a.size] = a
    return (np.fft.ifft(spec) * G).real


def lipschitz_bound(coeffs) -> float:
    """Upper bound on ``sup |f'|`` for the synthesized series."""
    a = to_complex(coeffs)
    return float(TWO_PI * np.sum(np.arange(a.size) * np.abs(a)))


def partial_sum(s: FourierSeries, N: int, x):
    """``sum_{j<=N} c_j phi_j(x)``."""
    if not 1 <= N <= s.J:
        raise IndexError(f"partial sum order {N} outside 1..{s.J}")
    _check_x(x)
    return synthesize(s.coeffs[:N], x)


def dirichlet_kernel(N: int, x, y):
    if N < 1:
        raise BasisDomainError("kernel order must be >= 1")
    x = np.atleast_1d(_check_x(x))
    y = np.atleast_1d(_check_x(y))
    out = np.einsum("ij,ij->i", basis_matrix(N, x), basis_matrix(N, y))
    return float(out[0]) if out.size == 1 else out


def fourier_coefficients(
    f: Callable[[np.ndarray], np.ndarray], J: int, Q: int | None = None
) -> FourierSeries:
    """Coefficients ``c_j = int_0^1 phi_j f`` by the composite trapezoid rule.

    For periodic integrands the trapezoid and rectangle rules coincide and are
    exact below the aliasing frequency; the endpoint halves make the rule
    second-order accurate for non-periodic ``f`` such as ``f(x) = x``.
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    if Q is None:
        Q = max(4 * J, 8192)
    if Q < 4 * J:
        raise ValueError(f"Q={Q} nodes is below the anti-aliasing floor 4J={4 * J}")
    x = np.linspace(0.0, 1.0, Q + 1)
    w = np.full(Q + 1, 1.0 / Q)
    w[0] = w[-1] = 0.5 / Q
    fx = np.asarray(f(x), dtype=float) * w
    return FourierSeries(basis_matrix(J, x).T @ fx)


def tail_profile(s: FourierSeries) -> np.ndarray:
    """``rho(N)`` for ``N = 0..J`` (reverse cumulative sum of squares)."""
    sq = s.coeffs**2
    rho = np.zeros(s.J + 1)
    rho[:-1] = np.cumsum(sq[::-1])[::-1]
    return rho


def tail_rho(s: FourierSeries, N: int) -> float:
    """``sum_{j=N+1}^{J} c_j^2``; the truncated tail beyond ``J`` counts as zero."""
    if not 0 <= N <= s.J:
        raise IndexError(f"tail index {N} outside 0..{s.J}")
    tail = s.coeffs[N:]
    return float(np.dot(tail, tail))
