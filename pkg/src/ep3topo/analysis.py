"""Entanglement of single-excitation states and eigenenergy extraction from traces.

Mode labels in this module are 1-based (mode 1 is the decaying mode), in
line with how pairs such as (1, 2) are usually quoted.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dynamics import TimeTrace
from .io import format_float
from .polynomials import Polynomial
from .spectra import StateVector, characteristic_polynomial, polynomial_roots, sort_energies

__all__ = [
    "SymmetryFitError",
    "ExtractionError",
    "SymmetricParametrization",
    "PerturbationRatios",
    "reduced_pair_state",
    "pairwise_concurrence",
    "wootters_concurrence",
    "validate_density_matrix",
    "extract_eigenenergies",
    "matrix_pencil",
    "population_beats",
    "beat_exponents",
    "fit_symmetric_parametrization",
    "perturbation_ratios",
    "write_extraction_csv",
    "EXTRACTION_HEADER",
]

SIGMA_YY = np.array([[0, 0, 0, -1],
                     [0, 0, 1, 0],
                     [0, 1, 0, 0],
                     [-1, 0, 0, 0]], dtype=complex)


class SymmetryFitError(ValueError):
    """The spectrum does not have the ``{-iI1, +-R - iI2}`` shape."""


class ExtractionError(ValueError):
    """Matrix-pencil extraction failed (aliasing or rank deficiency)."""


def _amplitudes(psi) -> np.ndarray:
    if isinstance(psi, StateVector):
        return np.array(psi.amplitudes)
    return np.asarray(psi, dtype=complex).ravel()


def reduced_pair_state(psi, pair: tuple[int, int]) -> np.ndarray:
    """Two-mode reduced density matrix of a single-excitation pure state.

    Basis order is |0_i 0_j>, |0_i 1_j>, |1_i 0_j>, |1_i 1_j>.  Tracing out the
    other modes leaves the weight of excitations elsewhere on |00>.
    """
    c = _amplitudes(psi)
    i, j = _pair_indices(pair, c.size)
    rest = 1.0 - abs(c[i]) ** 2 - abs(c[j]) ** 2
    phi = np.array([0, c[j], c[i], 0], dtype=complex)
    rho = np.outer(phi, phi.conj())
    rho[0, 0] += max(rest, 0.0)
    return rho


def _pair_indices(pair, n):
    i, j = pair
    if not (1 <= i <= n and 1 <= j <= n) or i == j:
        raise ValueError(f"invalid mode pair {pair} for {n} modes")
    return i - 1, j - 1


def pairwise_concurrence(psi, pair: tuple[int, int], check: bool = True,
                         tol: float = 1e-10) -> float:
    """Concurrence of modes ``pair`` (1-based) in a normalized single-excitation state.

    Equals ``2 |c_i| |c_j|``.  With ``check`` the Wootters value of the
    reduced state is also computed and must agree within ``tol``.
    """
    c = _amplitudes(psi)
    if abs(np.linalg.norm(c) - 1.0) > 1e-10:
        raise ValueError("state must be normalized")
    i, j = _pair_indices(pair, c.size)
    closed = 2.0 * abs(c[i]) * abs(c[j])
    if check:
        general = wootters_concurrence(reduced_pair_state(c, pair))
        if abs(general - closed) > tol:
            raise ArithmeticError(
                f"closed-form concurrence {closed} disagrees with Wootters value {general}")
    return float(closed)


def validate_density_matrix(rho, herm_tol=1e-12, trace_tol=1e-10, pos_tol=1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.abs(rho - rho.conj().T).max() > herm_tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > trace_tol:
        raise ValueError("density matrix does not have unit trace")
    if np.linalg.eigvalsh(rho).min() < -pos_tol:
        raise ValueError("density matrix has negative eigenvalues")
    return rho


def _deflated_roots(poly: Polynomial, rtol: float = 1e-14) -> np.ndarray:
    # Roots of a polynomial whose roots are known to be real and >= 0.
    # Trailing coefficients at rounding level are exact zero roots; keeping
    # them would scatter a multiple zero root by eps**(1/k).
    c = poly.trimmed().coefficients / poly.trimmed().coefficients[0]
    n = c.size - 1
    scale = abs(c[1]) if n >= 1 else 0.0
    zeros = 0
    while zeros < n and abs(c[n - zeros]) <= rtol * max(scale, 1e-300) ** (n - zeros):
        zeros += 1
    roots = np.zeros(zeros, dtype=complex)
    if zeros < n:
        roots = np.concatenate([roots, polynomial_roots(Polynomial(c[: n - zeros + 1]))])
    return roots


def wootters_concurrence(rho) -> float:
    """Wootters concurrence ``max(0, s1 - s2 - s3 - s4)`` of a two-qubit state.

    ``s_k`` are square roots, in decreasing order, of the eigenvalues of
    ``rho (sy x sy) rho* (sy x sy)``, found as roots of its characteristic
    polynomial.
    """
    rho = validate_density_matrix(rho)
    if rho.shape != (4, 4):
        raise ValueError("concurrence needs a 4x4 density matrix")
    r = rho @ SIGMA_YY @ rho.conj() @ SIGMA_YY
    poly = characteristic_polynomial(r)
    mu = np.clip(_deflated_roots(poly).real, 0.0, None)
    s = np.sort(np.sqrt(mu))[::-1]
    return float(max(0.0, s[0] - s[1:].sum()))


def matrix_pencil(samples, dt: float, model_order: int, prune: float = 1e-8
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Poles and amplitudes of ``x_k = sum_n a_n z_n^k`` by the matrix-pencil method.

    Uses a Hankel matrix with pencil length ``round(N/2)``, keeps the leading
    ``model_order`` right singular vectors and reads the poles from the
    least-squares shift relation between them.  Returns ``(z, a)`` with
    terms whose relative amplitude is below ``prune`` removed.
    """
    x = np.asarray(samples, dtype=complex).ravel()
    n = x.size
    if model_order < 1:
        raise ValueError("model_order must be positive")
    if n < 4 * model_order:
        raise ExtractionError(f"need at least {4 * model_order} samples, got {n}")
    pencil = int(round(n / 2))
    hankel = np.lib.stride_tricks.sliding_window_view(x, pencil + 1)
    _, sv, vh = np.linalg.svd(hankel, full_matrices=False)
    if sv[0] == 0 or sv[model_order - 1] <= 1e-12 * sv[0]:
        raise ExtractionError("signal rank is below the requested model order")
    # rows of the Hankel matrix lie in the span of the leading rows of vh,
    # which inherit the shift invariance of the poles
    v = vh[:model_order].T
    v1, v2 = v[:-1], v[1:]
    z = np.linalg.eigvals(np.linalg.lstsq(v1, v2, rcond=None)[0])
    vander = z[None, :] ** np.arange(n)[:, None]
    amp = np.linalg.lstsq(vander, x, rcond=None)[0]
    keep = np.abs(amp) >= prune * np.abs(amp).max()
    return z[keep], amp[keep]


def _uniform_step(times: np.ndarray) -> float:
    d = np.diff(times)
    if d.size == 0 or np.ptp(d) > 1e-9 * d.mean():
        raise ExtractionError("trace samples must be uniformly spaced")
    return float(d.mean())


def extract_eigenenergies(trace: TimeTrace, component: int, model_order: int) -> np.ndarray:
    """Eigenenergies from the complex amplitude of mode ``component`` (1-based).

    Each pole ``z`` gives ``E = i ln(z) / dt``.  Raises
    :class:`ExtractionError` when ``|E| dt >= pi`` (aliased) or the signal
    has lower rank than ``model_order``.
    """
    if model_order not in (1, 2, 3):
        raise ValueError("model_order must be 1, 2 or 3")
    if not 1 <= component <= trace.n_modes:
        raise ValueError(f"component must be in 1..{trace.n_modes}")
    dt = _uniform_step(trace.times)
    z, _ = matrix_pencil(trace.states[:, component - 1], dt, model_order)
    e = 1j * np.log(z) / dt
    if np.any(np.abs(e) * dt >= np.pi):
        raise ExtractionError("sampling step aliases the extracted energies")
    return sort_energies(e)


def beat_exponents(energies, tol: float = 1e-9) -> np.ndarray:
    """Distinct ``E_n - conj(E_m)``: the exponents present in a raw population."""
    e = np.asarray(energies, dtype=complex).ravel()
    scale = max(1.0, float(np.abs(e).max()))
    out: list[complex] = []
    for a in e:
        for b in e:
            d = a - np.conj(b)
            if all(abs(d - q) > tol * scale for q in out):
                out.append(d)
    return sort_energies(out)


def population_beats(trace: TimeTrace, component: int, model_order: int) -> np.ndarray:
    """Exponents ``E_n - conj(E_m)`` recovered from the raw population ``|c|^2``.

    This is the measurement-style route: populations only carry differences
    of eigenenergies.  The un-renormalized population is used because
    renormalization destroys the exponential-sum structure.  ``model_order``
    is the number of distinct exponents (see :func:`beat_exponents`).
    """
    dt = _uniform_step(trace.times)
    pop = np.abs(trace.states[:, component - 1]) ** 2
    z, _ = matrix_pencil(pop, dt, model_order)
    e = 1j * np.log(z) / dt
    if np.any(np.abs(e) * dt >= np.pi):
        raise ExtractionError("sampling step aliases the population beats")
    return sort_energies(e)


@dataclass(frozen=True)
class SymmetricParametrization:
    """Spectrum ``{-i i1, r - i i2, -r - i i2}`` and the residual of the fit."""

    r: float
    i1: float
    i2: float
    residual: float = 0.0

    @property
    def delta_i(self) -> float:
        return abs(self.i1 - self.i2)

    def energies(self) -> np.ndarray:
        return sort_energies([-1j * self.i1, self.r - 1j * self.i2, -self.r - 1j * self.i2])


def fit_symmetric_parametrization(energies: Sequence[complex], re_tol: float | None = None,
                                  kappa: float | None = None) -> SymmetricParametrization:
    """Fit ``{-i I1, +-R - i I2}`` to three energies.

    ``re_tol`` (default ``0.02 * kappa``) decides which energy is the purely
    imaginary one.  Raises :class:`SymmetryFitError` unless exactly one
    energy has ``|Re| < re_tol`` and the other two have real parts of
    opposite sign.
    """
    e = np.asarray(energies, dtype=complex).ravel()
    if e.size != 3:
        raise ValueError("need exactly three energies")
    if re_tol is None:
        if kappa is None:
            raise ValueError("give re_tol or kappa")
        re_tol = 0.02 * kappa
    centre = np.flatnonzero(np.abs(e.real) < re_tol)
    if centre.size != 1:
        raise SymmetryFitError(
            f"{centre.size} energies have |Re| < {re_tol}; expected exactly one")
    k = int(centre[0])
    pair = np.delete(e, k)
    if not pair[0].real * pair[1].real < 0:
        raise SymmetryFitError("the remaining pair does not have opposite real parts")
    fit = SymmetricParametrization(r=float(np.abs(pair.real).mean()), i1=float(-e[k].imag),
                                   i2=float(-pair.imag.mean()))
    model = fit.energies()
    resid = float(np.abs(sort_energies(e) - model).max())
    return SymmetricParametrization(fit.r, fit.i1, fit.i2, resid)


@dataclass(frozen=True)
class PerturbationRatios:
    """Off-diagonal to gap ratios in the dressed (Hermitian eigen-) basis.

    ``ratio_12 = |H^ndg_12| / |H^0_11 - H^0_22|`` and
    ``ratio_23 = |H^ndg_23| / |H^0_22 - H^0_33|``; ``kappa_over_8lambda`` is
    the reference scale ``kappa / (8 lambda)``.
    """

    theta: float
    lam: float
    ratio_12: float
    ratio_23: float
    kappa_over_8lambda: float


def perturbation_ratios(lambda1: float, lambda2: float, kappa: float) -> PerturbationRatios:
    """Perturbation diagnostics at ``tan(theta) = lambda1 / lambda2``.

    The decay term is split into a diagonal part, kept in ``H^0`` together
    with the Hermitian energies ``0, +-lambda``, and the off-diagonal
    remainder ``H^ndg``.  Small ratios mean the symmetric parametrization
    of the spectrum is accurate.
    """
    lam = math.hypot(lambda1, lambda2)
    if lam == 0:
        raise ValueError("lambda1 and lambda2 cannot both vanish")
    theta = math.atan2(lambda1, lambda2)
    s, c = math.sin(theta), math.cos(theta)
    h11 = -0.5j * kappa * c * c
    h22 = lam - 0.25j * kappa * s * s
    h33 = -lam - 0.25j * kappa * s * s
    off12 = kappa * abs(math.sin(2 * theta)) / (4 * math.sqrt(2))
    off23 = kappa * s * s / 4
    return PerturbationRatios(theta, lam, off12 / abs(h11 - h22), off23 / abs(h22 - h33),
                              kappa / (8 * lam))


EXTRACTION_HEADER = ("lambda1", "lambda2", "re_E1", "im_E1", "re_E2", "im_E2",
                     "re_E3", "im_E3", "R", "I1", "I2", "residual")


def write_extraction_csv(rows: Iterable[tuple], fh=None) -> str | None:
    """Rows of ``(lambda1, lambda2, energies, fit_or_None)``; missing fields stay empty."""
    own = fh is None
    fh = io.StringIO() if own else fh
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(EXTRACTION_HEADER)
    for l1, l2, energies, fit in rows:
        out = [format_float(l1), format_float(l2)]
        e = list(energies)
        for k in range(3):
            out += ([format_float(e[k].real), format_float(e[k].imag)] if k < len(e)
                    else ["", ""])
        if fit is None:
            out += ["", "", "", ""]
        else:
            out += [format_float(fit.r), format_float(fit.i1), format_float(fit.i2),
                    format_float(fit.residual)]
        w.writerow(out)
    return fh.getvalue() if own else None
