"""Eigenenergies, eigenvectors and degeneracy maps of the three-mode chain."""
from __future__ import annotations

import csv
import enum
import io
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import MAX_DENSE_DIM, build_chain_hamiltonian, three_mode_chain
from .polynomials import Polynomial, aberth_roots

__all__ = [
    "Ordering",
    "ComplexSpectrum",
    "StateVector",
    "PointKind",
    "EpClassification",
    "MapRecord",
    "eigenvalues_closed_form",
    "eigenvalues_two_mode",
    "characteristic_polynomial",
    "polynomial_roots",
    "sort_energies",
    "eigenvector_for",
    "classify_point",
    "locate_ep3",
    "ep3_analytic",
    "max_pairwise_gap",
    "scan_spectral_map",
    "write_map_csv",
    "SPECTRAL_MAP_HEADER",
]


class Ordering(str, enum.Enum):
    BY_REAL = "ByRealPart"
    BY_IMAG = "ByImaginaryPart"
    UNORDERED = "Unordered"


@dataclass(frozen=True, eq=False)
class ComplexSpectrum:
    energies: np.ndarray
    ordering: Ordering = Ordering.BY_IMAG

    def __post_init__(self):
        e = np.array(self.energies, dtype=complex).ravel()
        e.setflags(write=False)
        object.__setattr__(self, "energies", e)

    def __len__(self):
        return self.energies.size

    def __iter__(self):
        return iter(self.energies)

    def __getitem__(self, i):
        return self.energies[i]

    def pairwise_gaps(self) -> np.ndarray:
        e = self.energies
        return np.array([e[i] - e[j] for i, j in itertools.combinations(range(e.size), 2)])


@dataclass(frozen=True, eq=False)
class StateVector:
    """Amplitudes in the single-excitation basis (mode 1, ..., mode N).

    ``defective`` is an advisory flag: the eigenvalue this vector belongs to
    has algebraic multiplicity above its geometric multiplicity.
    """

    amplitudes: np.ndarray
    defective: bool = False

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex).ravel()
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.amplitudes / self.norm, self.defective)

    def __len__(self):
        return self.amplitudes.size


def sort_energies(energies, rtol: float = 1e-9) -> np.ndarray:
    """Descending imaginary part, then descending real part.

    Imaginary parts closer than ``rtol * max(1, max|E|)`` count as equal so
    that symmetric pairs ``+-R - iI`` sort reproducibly.
    """
    e = np.asarray(energies, dtype=complex).ravel()
    tol = rtol * max(1.0, float(np.abs(e).max(initial=0.0)))
    order = sorted(range(e.size), key=lambda k: -e[k].imag)
    # group runs of nearly-equal imaginary parts and order each by real part
    out, run = [], [order[0]] if order else []
    for k in order[1:]:
        if abs(e[k].imag - e[run[0]].imag) <= tol:
            run.append(k)
        else:
            out.extend(sorted(run, key=lambda q: -e[q].real))
            run = [k]
    out.extend(sorted(run, key=lambda q: -e[q].real))
    return e[out]


def _cubic_residual(e, lambda1, lambda2, kappa):
    # det(E - H) for the three-mode chain, normalized to a monic cubic
    return e ** 3 + 0.5j * kappa * e ** 2 - (lambda1 ** 2 + lambda2 ** 2) * e \
        - 0.5j * kappa * lambda2 ** 2


def eigenvalues_closed_form(lambda1: float, lambda2: float, kappa: float) -> ComplexSpectrum:
    """Cardano-type closed form for the three eigenenergies.

    With ``xi = 3 l1^2 + 3 l2^2 - k^2/4`` and
    ``eta = -(i k / 4)(18 l2^2 - 9 l1^2 + k^2 / 2)``, the roots are
    ``-ik/6 - (w xi/alpha + w^2 alpha)/3`` for the three cube roots of unity
    ``w``, where ``alpha^3 = eta + sqrt(eta^2 - xi^3)``.  All three cube
    roots of ``alpha^3`` are tried and the one with the smallest worst-case
    residual on the characteristic cubic is kept.
    """
    l1, l2, k = float(lambda1), float(lambda2), float(kappa)
    xi = 3 * l1 ** 2 + 3 * l2 ** 2 - k ** 2 / 4
    eta = -0.25j * k * (18 * l2 ** 2 - 9 * l1 ** 2 + k ** 2 / 2)
    disc = np.sqrt(complex(eta * eta - xi ** 3))
    # the larger of eta +- sqrt avoids cancellation; both give the same roots
    cube = eta + disc if abs(eta + disc) >= abs(eta - disc) else eta - disc
    shift = -1j * k / 6
    if cube == 0:
        # xi = eta = 0: triple root
        return ComplexSpectrum(sort_energies(np.full(3, shift)))

    w = np.exp(2j * np.pi / 3)
    alpha0 = complex(cube) ** (1.0 / 3.0)
    best, best_res = None, np.inf
    for branch in range(3):
        alpha = alpha0 * w ** branch
        r = xi / alpha
        # E3 = shift - (r + alpha)/3; E1,2 use the conjugate unit-root pairs
        e3 = shift - (r + alpha) / 3
        e1 = shift - ((-0.5 - 0.5j * np.sqrt(3)) * r + (-0.5 + 0.5j * np.sqrt(3)) * alpha) / 3
        e2 = shift - ((-0.5 + 0.5j * np.sqrt(3)) * r + (-0.5 - 0.5j * np.sqrt(3)) * alpha) / 3
        roots = np.array([e1, e2, e3])
        res = np.abs(_cubic_residual(roots, l1, l2, k)).max()
        if res < best_res:
            best, best_res = roots, res
    return ComplexSpectrum(sort_energies(best))


def eigenvalues_two_mode(lambda1: float, kappa: float) -> tuple[complex, complex]:
    """``E'_+- = -ik/4 +- sqrt(l1^2 - k^2/16)`` for the decaying two-mode pair.

    A negative radicand gives a positive-imaginary square root, so
    ``E'_+`` is the less damped root below the exceptional point.
    """
    rad = lambda1 ** 2 - kappa ** 2 / 16
    root = np.sqrt(rad) if rad >= 0 else 1j * np.sqrt(-rad)
    base = -0.25j * kappa
    return complex(base + root), complex(base - root)


def characteristic_polynomial(matrix) -> Polynomial:
    """``det(H - E I)`` as a polynomial in E (Faddeev-LeVerrier recursion)."""
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    if n > MAX_DENSE_DIM:
        raise ValueError(f"dimension {n} exceeds {MAX_DENSE_DIM}")
    # coefficients of det(E I - A), descending
    c = np.zeros(n + 1, dtype=complex)
    c[0] = 1.0
    m = np.zeros_like(a)
    eye = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        m = a @ m + c[k - 1] * eye
        c[k] = -np.trace(a @ m) / k
    return Polynomial((-1) ** n * c)


def polynomial_roots(poly: Polynomial, max_iter: int = 500) -> np.ndarray:
    """Roots via simultaneous Aberth-Ehrlich iteration, sorted like spectra.

    The leading coefficient must be nonzero.  Raises
    :class:`~ep3topo.polynomials.ConvergenceError` after ``max_iter`` sweeps
    without meeting the residual target.
    """
    if poly.degree < 1:
        raise ValueError("polynomial must have degree >= 1")
    if poly.coefficients[0] == 0:
        raise ValueError("leading coefficient must be nonzero")
    return sort_energies(aberth_roots(poly, max_iter=max_iter))


def eigenvector_for(matrix, energy: complex, rtol: float = 1e-9,
                    cluster_tol: float = 1e-4) -> StateVector:
    """Unit null vector of ``H - E I`` by fully pivoted Gaussian elimination.

    The pivot left for last is the most singular direction; its variable is
    set to one and the rest follow by back substitution.  The global phase
    makes the largest component real and positive.  Raises ``ValueError``
    if ``||(H - E)v|| > rtol * ||H||``.

    ``defective`` is set when at least two characteristic roots lie within
    ``cluster_tol * max(1, ||H||)`` of ``energy`` but elimination finds a
    single null direction.
    """
    h = np.asarray(matrix, dtype=complex)
    n = h.shape[0]
    a = h - energy * np.eye(n)
    scale = max(np.linalg.norm(h), np.finfo(float).tiny)
    rows = list(range(n))
    cols = list(range(n))
    u = a.copy()
    pivots = []
    for k in range(n - 1):
        sub = np.abs(u[k:, k:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        i += k
        j += k
        u[[k, i]] = u[[i, k]]
        rows[k], rows[i] = rows[i], rows[k]
        u[:, [k, j]] = u[:, [j, k]]
        cols[k], cols[j] = cols[j], cols[k]
        piv = u[k, k]
        pivots.append(abs(piv))
        if piv == 0:
            break
        u[k + 1:, k:] -= np.outer(u[k + 1:, k] / piv, u[k, k:])
    pivots.append(abs(u[n - 1, n - 1]))

    # unknowns in pivoted column order: free variable is the last one,
    # plus any trailing columns whose pivots vanished
    small = np.array(pivots) <= 1e3 * np.finfo(float).eps * scale
    rank = n - int(small[: n - 1].sum()) - 1
    rank = max(rank, 0)
    y = np.zeros(n, dtype=complex)
    y[rank] = 1.0
    for k in range(rank - 1, -1, -1):
        y[k] = -(u[k, k + 1:] @ y[k + 1:]) / u[k, k]
    v = np.zeros(n, dtype=complex)
    v[cols] = y
    v /= np.linalg.norm(v)
    big = np.argmax(np.abs(v))
    v *= abs(v[big]) / v[big]

    resid = np.linalg.norm(a @ v)
    if resid > rtol * scale:
        raise ValueError(
            f"energy {energy} is not an eigenvalue (residual {resid:.3e})")
    geometric = n - rank
    roots = polynomial_roots(characteristic_polynomial(h))
    algebraic = int(np.sum(np.abs(roots - energy) <= cluster_tol * max(1.0, scale)))
    return StateVector(v, defective=algebraic > geometric)


class PointKind(str, enum.Enum):
    REGULAR = "Regular"
    EP2 = "EP2"
    EP3 = "EP3"
    DP = "DP"


@dataclass(frozen=True)
class EpClassification:
    kind: PointKind
    degenerate_energy: complex | None
    min_gap: float


def classify_point(lambda1: float, lambda2: float, kappa: float,
                   gap_tol: float | None = None) -> EpClassification:
    """Label a parameter point as Regular, EP2, EP3 or DP.

    ``gap_tol`` defaults to ``1e-6 * kappa`` (``1e-6`` when kappa is zero).
    A degeneracy counts as diabolical when the matrix is Hermitian or the
    eigenvectors of the coalescing pair stay orthogonal.
    """
    if gap_tol is None:
        gap_tol = 1e-6 * kappa if kappa > 0 else 1e-6
    if gap_tol <= 0:
        raise ValueError("gap_tol must be positive")
    e = eigenvalues_closed_form(lambda1, lambda2, kappa).energies
    pairs = list(itertools.combinations(range(3), 2))
    gaps = np.array([abs(e[i] - e[j]) for i, j in pairs])
    close = [p for p, g in zip(pairs, gaps) if g < gap_tol]
    min_gap = float(gaps.min())
    if not close:
        return EpClassification(PointKind.REGULAR, None, min_gap)
    members = sorted({k for p in close for k in p})
    degenerate = complex(np.mean(e[members]))
    if _is_diabolical(lambda1, lambda2, kappa, e, close):
        return EpClassification(PointKind.DP, degenerate, min_gap)
    kind = PointKind.EP3 if len(close) == 3 else PointKind.EP2
    return EpClassification(kind, degenerate, min_gap)


def _is_diabolical(lambda1, lambda2, kappa, energies, close_pairs) -> bool:
    if kappa == 0:
        return True
    h = build_chain_hamiltonian(three_mode_chain(lambda1, lambda2, kappa))
    # a degenerate level with a two-dimensional eigenspace (e.g. a decoupled
    # Hermitian block) has orthogonal eigenvectors
    i, j = close_pairs[0]
    e = complex(np.mean(energies[[i, j]]))
    s = np.linalg.svd(h - e * np.eye(3), compute_uv=False)
    return bool(s[-2] <= 1e-8 * max(1.0, np.linalg.norm(h)))


def ep3_analytic(kappa: float) -> list[tuple[float, float]]:
    """The four EP3 locations ``(+-sqrt(2) k / (3 sqrt 3), +-k / (6 sqrt 3))``."""
    l1 = np.sqrt(2.0) * kappa / (3 * np.sqrt(3.0))
    l2 = kappa / (6 * np.sqrt(3.0))
    return [(s1 * l1, s2 * l2) for s1, s2 in ((1, 1), (-1, 1), (-1, -1), (1, -1))]


def max_pairwise_gap(lambda1: float, lambda2: float, kappa: float) -> float:
    e = eigenvalues_closed_form(lambda1, lambda2, kappa).energies
    return float(max(abs(e[i] - e[j]) for i, j in itertools.combinations(range(3), 2)))


def _refine_ep3(l1: float, l2: float, kappa: float, span: int = 6) -> tuple[float, float]:
    # The EP3 is where xi = eta = 0.  One Newton step on that system puts
    # the point within rounding of the exact location; the remaining search
    # scans neighbouring floats for the smallest closed-form gap, since a
    # triple root turns O(eps) parameter rounding into O(eps^(1/3)) splitting.
    a = l1 * l1
    b = l2 * l2
    # xi: 3a + 3b = k^2/4 ; eta: 18b - 9a = -k^2/2  (linear in a, b)
    mat = np.array([[3.0, 3.0], [-9.0, 18.0]])
    rhs = np.array([kappa ** 2 / 4, -kappa ** 2 / 2])
    a, b = np.linalg.solve(mat, rhs)
    l1 = np.copysign(np.sqrt(a), l1)
    l2 = np.copysign(np.sqrt(b), l2)
    best = (max_pairwise_gap(l1, l2, kappa), l1, l2)
    if best[0] == 0.0:
        return float(l1), float(l2)
    grid1 = [l1]
    grid2 = [l2]
    x1 = x2 = l1
    y1 = y2 = l2
    for _ in range(span):
        x1, x2 = np.nextafter(x1, np.inf), np.nextafter(x2, -np.inf)
        y1, y2 = np.nextafter(y1, np.inf), np.nextafter(y2, -np.inf)
        grid1 += [x1, x2]
        grid2 += [y1, y2]
    for p in grid1:
        for q in grid2:
            g = max_pairwise_gap(p, q, kappa)
            if g < best[0]:
                best = (g, p, q)
    return float(best[1]), float(best[2])


def locate_ep3(kappa: float) -> list[tuple[float, float]]:
    """The four EP3s, refined numerically from the analytic seeds.

    Order: first quadrant, then counter-clockwise.  Raises
    ``RuntimeError`` if a refined point moves more than ``1e-3 * kappa``
    from its seed.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    out = []
    for seed in ep3_analytic(kappa):
        p = _refine_ep3(seed[0], seed[1], kappa)
        if max(abs(p[0] - seed[0]), abs(p[1] - seed[1])) > 1e-3 * kappa:
            raise RuntimeError(f"EP3 refinement diverged from seed {seed}")
        out.append(p)
    return out


SPECTRAL_MAP_HEADER = ("lambda1", "lambda2", "max_re_gap", "max_im_gap", "min_gap",
                       "isofrequency", "ifermi")


@dataclass(frozen=True)
class MapRecord:
    lambda1: float
    lambda2: float
    max_re_gap: float
    max_im_gap: float
    min_gap: float
    isofrequency: bool
    ifermi: bool


def _map_record(l1, l2, kappa, tol) -> MapRecord:
    e = eigenvalues_closed_form(l1, l2, kappa).energies
    d = np.array([e[i] - e[j] for i, j in itertools.combinations(range(3), 2)])
    return MapRecord(
        float(l1), float(l2),
        float(np.abs(d.real).max()),
        float(np.abs(d.imag).max()),
        float(np.abs(d).min()),
        bool(np.all(np.abs(e.real) < tol)),
        bool(np.all(np.abs(d.imag) < tol)),
    )


def scan_spectral_map(kappa: float, lambda1_values: Sequence[float],
                      lambda2_values: Sequence[float], tol: float | None = None,
                      workers: int = 1) -> list[MapRecord]:
    """Gap statistics on the grid ``lambda1_values x lambda2_values``.

    Rows are ordered with ``lambda1`` as the outer (slow) index.  ``tol``
    for the isofrequency and i-Fermi flags defaults to ``1e-9 * max(1, kappa)``.
    """
    l1s = np.asarray(lambda1_values, dtype=float).ravel()
    l2s = np.asarray(lambda2_values, dtype=float).ravel()
    if l1s.size == 0 or l2s.size == 0:
        raise ValueError("grid must be non-empty")
    if tol is None:
        tol = 1e-9 * max(1.0, kappa)
    points = [(a, b) for a in l1s for b in l2s]
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda p: _map_record(p[0], p[1], kappa, tol), points))
    return [_map_record(a, b, kappa, tol) for a, b in points]


def write_map_csv(records: Iterable[MapRecord], fh=None) -> str | None:
    from .io import format_float
    own = fh is None
    fh = io.StringIO() if own else fh
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SPECTRAL_MAP_HEADER)
    for r in records:
        w.writerow([format_float(r.lambda1), format_float(r.lambda2),
                    format_float(r.max_re_gap), format_float(r.max_im_gap),
                    format_float(r.min_gap), int(r.isofrequency), int(r.ifermi)])
    return fh.getvalue() if own else None
