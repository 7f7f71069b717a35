"""Resultant vectors and their winding along loops in the (lambda1, lambda2) plane."""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .io import format_float
from .model import ReferenceModelParams, build_reference_model
from .polynomials import ConvergenceError, Polynomial, sylvester_resultant
from .spectra import ComplexSpectrum, characteristic_polynomial, eigenvalues_closed_form

__all__ = [
    "ResultantVector",
    "RealnessError",
    "ResultantZeroError",
    "LoopKind",
    "Orientation",
    "ParameterLoop",
    "WindingResult",
    "resultant_vector",
    "resultant_from_polynomial",
    "chain_resultant_field",
    "reference_resultant_field",
    "sylvester_resultant",
    "square_loop_point",
    "circle_loop",
    "winding_number",
    "write_winding_trace_csv",
    "WINDING_TRACE_HEADER",
]


class RealnessError(ValueError):
    """A resultant component expected to be real has a sizeable imaginary part."""


class ResultantZeroError(ArithmeticError):
    """Both resultant components vanish on the loop."""


@dataclass(frozen=True)
class ResultantVector:
    r1: complex
    r2: complex
    norm: float
    phase: float

    @classmethod
    def from_components(cls, r1: complex, r2: complex) -> "ResultantVector":
        norm = float(np.hypot(abs(r1), abs(r2)))
        phase = float(np.arctan2(np.real(r2), np.real(r1)))
        if phase == -np.pi:
            phase = np.pi
        return cls(complex(r1), complex(r2), norm, phase)

    @property
    def unit(self) -> complex:
        """``(r1 + i r2) / norm`` using the real parts."""
        return complex(self.r1.real, self.r2.real) / self.norm if self.norm else 0j


def resultant_vector(spectrum, check_real: bool = True, real_tol: float = 1e-6
                     ) -> ResultantVector:
    """Resultant vector of a three-level spectrum from the product formulas.

    ``r1 = (E1-E2)^2 (E1-E3)^2 (E2-E3)^2`` and
    ``r2 = 8i (E1+E3-2E2)(E1+E2-2E3)(E2+E3-2E1)``.  Both are symmetric in the
    energies, so the ordering of ``spectrum`` does not matter.  For spectra of
    the real-parameter chain both are real; with ``check_real`` a
    :class:`RealnessError` is raised when ``|Im r| > real_tol * norm`` plus
    the rounding level of each product.
    """
    e = np.asarray(spectrum.energies if isinstance(spectrum, ComplexSpectrum) else spectrum,
                   dtype=complex).ravel()
    if e.size != 3:
        raise ValueError("resultant vector needs exactly three energies")
    e1, e2, e3 = e
    r1 = ((e1 - e2) * (e1 - e3) * (e2 - e3)) ** 2
    r2 = 8j * (e1 + e3 - 2 * e2) * (e1 + e2 - 2 * e3) * (e2 + e3 - 2 * e1)
    v = ResultantVector.from_components(r1, r2)
    # rounding floor: the products are bounded by (2S)^6 and 8 (4S)^3
    scale = float(np.abs(e).max())
    eps = 16 * np.finfo(float).eps
    floor1, floor2 = eps * (2 * scale) ** 6, eps * 8 * (4 * scale) ** 3
    if check_real and (abs(r1.imag) > real_tol * v.norm + floor1
                       or abs(r2.imag) > real_tol * v.norm + floor2):
        raise RealnessError(f"resultant components are not real: r1={r1}, r2={r2}")
    return v


def resultant_from_polynomial(poly: Polynomial) -> tuple[complex, complex]:
    """``(R[P, P'], R[P, P''])`` from Sylvester determinants.

    ``P''`` of a quadratic is a constant and is padded to degree one.
    """
    d1 = poly.derivative()
    d2 = d1.derivative()
    return sylvester_resultant(poly, d1), sylvester_resultant(poly, d2)


Field = Callable[[float, float], "tuple[float, float]"]


def chain_resultant_field(kappa: float, real_tol: float = 1e-6) -> Field:
    """(r1, r2) of the three-mode chain as a function of (lambda1, lambda2)."""
    def f(l1, l2):
        v = resultant_vector(eigenvalues_closed_form(l1, l2, kappa), real_tol=real_tol)
        return v.r1.real, v.r2.real
    return f


def reference_resultant_field(params: ReferenceModelParams, axes: tuple[str, str]) -> Field:
    """Sylvester resultants of a reference model over two of its parameters.

    ``axes`` names the two fields swept by the loop, e.g. ``("j_x", "j_y")``.
    The components are ``(R[P, P'], R[P, P''])`` of ``P(E) = det(H - E)``;
    imaginary parts are dropped after checking they vanish.
    """
    def f(x, y):
        h = build_reference_model(params.replace(**{axes[0]: x, axes[1]: y}))
        r1, r2 = resultant_from_polynomial(characteristic_polynomial(h))
        norm = np.hypot(abs(r1), abs(r2))
        if max(abs(r1.imag), abs(r2.imag)) > 1e-6 * norm:
            raise RealnessError(f"complex resultant ({r1}, {r2}) at ({x}, {y})")
        return r1.real, r2.real
    return f


def square_loop_point(theta: float, lambda_m: float) -> tuple[float, float]:
    """Point on the square loop with parameter ``theta`` in [0, 2pi].

    theta = 0, pi/2, pi, 3pi/2 hit the corners (0,0), (m,0), (m,m), (0,m).
    """
    c, s = np.cos(theta), np.sin(theta)
    a = c * abs(c)
    b = s * abs(s)
    return lambda_m * 0.5 * (1 - a + b), lambda_m * 0.5 * (1 - a - b)


class LoopKind(str, enum.Enum):
    SQUARE = "Square"
    THETA = "ParametricTheta"
    POLYLINE = "Polyline"


class Orientation(str, enum.Enum):
    FORWARD = "Forward"
    REVERSED = "Reversed"


@dataclass(frozen=True, eq=False)
class ParameterLoop:
    """Closed path in the parameter plane.

    ``Square`` and ``ParametricTheta`` both trace the square with corners
    (0,0) -> (m,0) -> (m,m) -> (0,m) -> (0,0); the first by straight edges
    at uniform speed, the second through the theta parametrization.
    ``Polyline`` uses ``vertices`` whose first and last entries coincide.
    """

    kind: LoopKind
    lambda_m: float | None = None
    vertices: np.ndarray | None = None
    orientation: Orientation = Orientation.FORWARD

    def __post_init__(self):
        object.__setattr__(self, "kind", LoopKind(self.kind))
        object.__setattr__(self, "orientation", Orientation(self.orientation))
        if self.kind is LoopKind.POLYLINE:
            if self.vertices is None:
                raise ValueError("polyline loop needs vertices")
            v = np.array(self.vertices, dtype=float)
            if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
                raise ValueError("vertices must be at least three (lambda1, lambda2) pairs")
            if not np.all(np.isfinite(v)):
                raise ValueError("vertices must be finite")
            if not np.array_equal(v[0], v[-1]):
                raise ValueError("polyline loop is not closed (first vertex != last)")
            v.setflags(write=False)
            object.__setattr__(self, "vertices", v)
        else:
            if self.lambda_m is None or not np.isfinite(self.lambda_m) or self.lambda_m <= 0:
                raise ValueError(f"lambda_m must be positive, got {self.lambda_m!r}")

    @classmethod
    def square(cls, lambda_m: float, orientation=Orientation.FORWARD) -> "ParameterLoop":
        return cls(LoopKind.SQUARE, lambda_m=lambda_m, orientation=orientation)

    @classmethod
    def polyline(cls, vertices, orientation=Orientation.FORWARD) -> "ParameterLoop":
        return cls(LoopKind.POLYLINE, vertices=vertices, orientation=orientation)

    def reversed(self) -> "ParameterLoop":
        other = (Orientation.REVERSED if self.orientation is Orientation.FORWARD
                 else Orientation.FORWARD)
        return ParameterLoop(self.kind, self.lambda_m, self.vertices, other)

    def _corners(self) -> np.ndarray:
        if self.kind is LoopKind.POLYLINE:
            return self.vertices
        m = self.lambda_m
        return np.array([[0, 0], [m, 0], [m, m], [0, m], [0, 0]], dtype=float)

    @property
    def n_edges(self) -> int:
        return len(self._corners()) - 1

    def edge_breaks(self) -> np.ndarray:
        """Values of the loop parameter s at the vertices (0 ... 1)."""
        if self.kind is LoopKind.THETA:
            return np.linspace(0.0, 1.0, 5)
        v = self._corners()
        seg = np.hypot(*np.diff(v, axis=0).T)
        if self.kind is LoopKind.SQUARE:
            seg = np.ones_like(seg)
        total = seg.sum()
        if total == 0:
            raise ValueError("degenerate loop with zero length")
        return np.concatenate([[0.0], np.cumsum(seg) / total])

    def point(self, s) -> np.ndarray:
        """Points at loop parameters ``s`` in [0, 1]; shape (..., 2)."""
        s = np.asarray(s, dtype=float)
        if self.orientation is Orientation.REVERSED:
            s = 1.0 - s
        if self.kind is LoopKind.THETA:
            l1, l2 = square_loop_point(2 * np.pi * s, self.lambda_m)
            return np.stack([l1, l2], axis=-1)
        v = self._corners()
        breaks = self.edge_breaks()
        idx = np.clip(np.searchsorted(breaks, s, side="right") - 1, 0, len(v) - 2)
        span = breaks[idx + 1] - breaks[idx]
        frac = np.where(span > 0, (s - breaks[idx]) / np.where(span > 0, span, 1), 0.0)
        return v[idx] + frac[..., None] * (v[idx + 1] - v[idx])


def circle_loop(center: Sequence[float], radius: float, n_vertices: int = 16,
                orientation=Orientation.FORWARD) -> ParameterLoop:
    """Counter-clockwise regular polygon inscribed in a circle, as a polyline."""
    ang = 2 * np.pi * np.arange(n_vertices) / n_vertices
    v = np.column_stack([center[0] + radius * np.cos(ang), center[1] + radius * np.sin(ang)])
    return ParameterLoop.polyline(np.vstack([v, v[:1]]), orientation)


@dataclass
class WindingResult:
    raw: float
    rounded: int
    s: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)
    r: np.ndarray = field(repr=False)
    phase: np.ndarray = field(repr=False)

    def __iter__(self):
        # allows ``raw, w = winding_number(...)``
        return iter((self.raw, self.rounded))


def _wrap(d):
    return (d + np.pi) % (2 * np.pi) - np.pi


def winding_number(loop: ParameterLoop, kappa: float | None = None, *,
                   field: Field | None = None,
                   samples_per_edge: int = 512,
                   max_samples: int = 2 ** 20,
                   max_step: float = np.pi / 2,
                   zero_tol: float = 1e-12,
                   quantization_tol: float = 1e-3) -> WindingResult:
    """Winding of ``r1 + i r2`` along ``loop``, in turns.

    The resultant field defaults to the three-mode chain at ``kappa``.  The
    loop is sampled with ``samples_per_edge`` points per edge (per quarter
    turn of theta for the parametric square, so 512 per 2pi for each),
    and intervals are bisected until every wrapped phase step is below
    ``max_step``.

    Raises
    ------
    ResultantZeroError
        A sample has ``norm < zero_tol * max norm`` on the loop.
    ConvergenceError
        Refinement needs more than ``max_samples`` points, or the accumulated
        phase is not within ``quantization_tol`` of a whole number of turns.
    """
    if field is None:
        if kappa is None:
            raise ValueError("either kappa or field must be given")
        field = chain_resultant_field(kappa)
    if loop.kind is LoopKind.THETA:
        n0 = max(samples_per_edge, 8)
        s = np.linspace(0.0, 1.0, n0 + 1)
    else:
        breaks = loop.edge_breaks()
        s = np.unique(np.concatenate([
            np.linspace(a, b, samples_per_edge + 1) for a, b in zip(breaks[:-1], breaks[1:])
        ]))

    def evaluate(svals):
        pts = loop.point(svals)
        vals = np.array([field(p[0], p[1]) for p in pts], dtype=float).reshape(-1, 2)
        return pts, vals

    pts, r = evaluate(s)
    while True:
        norms = np.hypot(r[:, 0], r[:, 1])
        scale = norms.max()
        if scale == 0 or np.any(norms < zero_tol * scale):
            k = int(np.argmin(norms))
            raise ResultantZeroError(
                f"resultant zero on loop near (lambda1, lambda2) = "
                f"({pts[k, 0]:.6g}, {pts[k, 1]:.6g})")
        ang = np.arctan2(r[:, 1], r[:, 0])
        bad = np.flatnonzero(np.abs(_wrap(np.diff(ang))) >= max_step)
        if bad.size == 0:
            break
        if s.size + bad.size > max_samples:
            raise ConvergenceError(
                f"phase refinement exceeded {max_samples} samples; an exceptional "
                "point is probably on or extremely close to the loop")
        mids = 0.5 * (s[bad] + s[bad + 1])
        if np.any(mids <= s[bad]) or np.any(mids >= s[bad + 1]):
            k = int(bad[0])
            raise ResultantZeroError(
                f"phase jump cannot be resolved near ({pts[k, 0]:.6g}, {pts[k, 1]:.6g})")
        new_pts, new_r = evaluate(mids)
        order = np.argsort(np.concatenate([s, mids]), kind="stable")
        s = np.concatenate([s, mids])[order]
        pts = np.concatenate([pts, new_pts])[order]
        r = np.concatenate([r, new_r])[order]

    steps = _wrap(np.diff(ang))
    phase = ang[0] + np.concatenate([[0.0], np.cumsum(steps)])
    raw = float((phase[-1] - phase[0]) / (2 * np.pi))
    rounded = int(round(raw))
    if abs(raw - rounded) >= quantization_tol:
        raise ConvergenceError(f"winding {raw} is not quantized")
    return WindingResult(raw, rounded, s, pts, r, phase)


WINDING_TRACE_HEADER = ("s", "lambda1", "lambda2", "r1_normalized", "r2_normalized",
                        "phase_unwrapped")


def write_winding_trace_csv(result: WindingResult, fh=None) -> str | None:
    """CSV trace of the unit resultant vector along the loop."""
    own = fh is None
    fh = io.StringIO() if own else fh
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(WINDING_TRACE_HEADER)
    norms = np.hypot(result.r[:, 0], result.r[:, 1])
    for s, p, r, n, ph in zip(result.s, result.points, result.r, norms, result.phase):
        w.writerow([format_float(s), format_float(p[0]), format_float(p[1]),
                    format_float(r[0] / n), format_float(r[1] / n), format_float(ph)])
    return fh.getvalue() if own else None
