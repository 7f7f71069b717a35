"""Dense univariate polynomials with complex coefficients.

Coefficients are stored in descending degree order.  A polynomial may carry
zero leading coefficients when it is deliberately padded to a higher nominal
degree (a constant treated as ``c + 0*x`` when building a Sylvester matrix).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Polynomial", "ConvergenceError", "sylvester_matrix", "sylvester_resultant",
           "aberth_roots"]


class ConvergenceError(ArithmeticError):
    """An iterative solver hit its iteration or sample cap."""


@dataclass(frozen=True, eq=False)
class Polynomial:
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coefficients, dtype=complex))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty 1-D sequence")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def degree(self) -> int:
        """Nominal degree, counting padded leading zeros."""
        return self.coefficients.size - 1

    @property
    def effective_degree(self) -> int:
        nz = np.flatnonzero(self.coefficients)
        return self.degree - int(nz[0]) if nz.size else 0

    def __call__(self, x):
        # Horner
        x = np.asarray(x, dtype=complex)
        out = np.zeros_like(x) + self.coefficients[0]
        for a in self.coefficients[1:]:
            out = out * x + a
        return out

    def derivative(self) -> "Polynomial":
        n = self.degree
        if n == 0:
            return Polynomial([0.0])
        return Polynomial(self.coefficients[:-1] * np.arange(n, 0, -1))

    def padded(self, degree: int) -> "Polynomial":
        """Same polynomial with zero leading coefficients up to ``degree``."""
        extra = degree - self.degree
        if extra < 0:
            raise ValueError("cannot pad to a lower degree")
        return Polynomial(np.concatenate([np.zeros(extra, dtype=complex), self.coefficients]))

    def trimmed(self) -> "Polynomial":
        nz = np.flatnonzero(self.coefficients)
        return Polynomial(self.coefficients[nz[0]:] if nz.size else [0.0])

    def allclose(self, other: "Polynomial", rtol=1e-12, atol=1e-12) -> bool:
        n = max(self.degree, other.degree)
        return np.allclose(self.padded(n).coefficients, other.padded(n).coefficients,
                           rtol=rtol, atol=atol)

    def __repr__(self):
        return f"Polynomial({np.array2string(self.coefficients, precision=6)})"


def sylvester_matrix(p: Polynomial, q: Polynomial) -> np.ndarray:
    """(m+n) x (m+n) Sylvester matrix: m shifted rows of ``p``, then n of ``q``.

    ``p`` has nominal degree n and ``q`` nominal degree m.
    """
    n, m = p.degree, q.degree
    size = m + n
    s = np.zeros((size, size), dtype=complex)
    for row in range(m):
        s[row, row:row + n + 1] = p.coefficients
    for row in range(n):
        s[m + row, row:row + m + 1] = q.coefficients
    return s


def sylvester_resultant(p: Polynomial, q: Polynomial) -> complex:
    """Determinant of the Sylvester matrix of ``p`` and ``q``.

    A constant must be passed padded to degree 1 (``Polynomial([0, c])``);
    an unpadded degree-0 input is padded automatically when the other
    polynomial is non-constant.
    """
    if p.degree == 0 and q.degree == 0:
        raise ValueError("resultant of two constant polynomials is undefined")
    if p.degree == 0:
        p = p.padded(1)
    if q.degree == 0:
        q = q.padded(1)
    return complex(np.linalg.det(sylvester_matrix(p, q)))


def _root_radius(c: np.ndarray) -> float:
    # Fujiwara bound on the root moduli
    n = c.size - 1
    ratios = [abs(c[k] / c[0]) ** (1.0 / k) for k in range(1, n)]
    ratios.append(abs(c[n] / (2 * c[0])) ** (1.0 / n))
    return 2.0 * max(ratios + [0.0])


def aberth_roots(poly: Polynomial, max_iter: int = 500) -> np.ndarray:
    """All roots of ``poly`` with multiplicity by Aberth-Ehrlich iteration.

    Iterates until every correction is at the level of rounding, then checks
    the residual ``|P(z)| < 1e-12 * max|a_k|`` (floored at the rounding
    error of evaluating P at z).  Raises :class:`ConvergenceError` when
    ``max_iter`` sweeps are exhausted or the residual check fails.
    """
    c = poly.trimmed().coefficients
    n = c.size - 1
    if n < 1:
        raise ValueError("polynomial must have degree >= 1")
    if n == 1:
        return np.array([-c[1] / c[0]])
    dp = Polynomial(c).derivative()
    p = Polynomial(c)
    centre = -c[1] / (n * c[0])
    radius = _root_radius(c) or 1.0
    # irrational angle offset keeps the start off any symmetry axis
    z = centre + radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))

    converged = False
    for _ in range(max_iter):
        pz, dpz = p(z), dp(z)
        finished = pz == 0
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pz / dpz
            w = ratio / (1.0 - ratio * inv.sum(axis=1))
        w = np.where(finished | ~np.isfinite(w), 0.0, w)
        z = z - w
        if np.all(np.abs(w) <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(z))):
            converged = True
            break
    scale = np.abs(c).max()
    powers = np.abs(z)[:, None] ** np.arange(n, -1, -1)[None, :]
    floor = 16 * np.finfo(float).eps * (powers * np.abs(c)[None, :]).sum(axis=1)
    resid = np.abs(p(z))
    ok = resid <= np.maximum(1e-12 * scale, floor)
    if not np.all(ok):
        raise ConvergenceError(
            f"root iteration did not reach the residual target "
            f"(max |P(z)| = {resid.max():.3e}, converged={converged})")
    return z
