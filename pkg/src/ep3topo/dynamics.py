"""No-jump dynamics of the chain and of the frequency-modulated circuit.

Times are in us, rates in 1/us.  States live in the single-excitation
subspace with components ordered (mode 1, ..., mode N).  For the modulated
three-mode circuit that is (readout resonator, qubit, bus resonator).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .io import format_float
from .spectra import ComplexSpectrum, StateVector

__all__ = [
    "IntegrationError",
    "TimeTrace",
    "ModulationConfig",
    "bessel_j",
    "effective_couplings",
    "design_modulation",
    "experimental_modulation",
    "evolve_nh",
    "evolve_modulated",
    "population_rms",
    "StabilizationReport",
    "stabilization_metrics",
    "EXPERIMENT",
]


class IntegrationError(RuntimeError):
    """The fixed-step integration became unstable or under-resolved."""


@dataclass(frozen=True, eq=False)
class TimeTrace:
    """Sampled no-jump trajectory.

    ``norms`` holds the success probability ``||psi||^2``; ``populations``
    the renormalized ``|c_j|^2 / ||psi||^2``.
    """

    times: np.ndarray
    states: np.ndarray
    norms: np.ndarray = field(init=False)
    populations: np.ndarray = field(init=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        psi = np.asarray(self.states, dtype=complex)
        if psi.ndim != 2 or psi.shape[0] != t.size:
            raise ValueError("states must have one row per time")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be increasing")
        p = np.abs(psi) ** 2
        n2 = p.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            pops = p / n2[:, None]
        for a in (t, psi, n2, pops):
            a.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", psi)
        object.__setattr__(self, "norms", n2)
        object.__setattr__(self, "populations", pops)

    def __len__(self):
        return self.times.size

    @property
    def n_modes(self) -> int:
        return self.states.shape[1]

    def state(self, k: int) -> StateVector:
        return StateVector(self.states[k])

    def to_csv(self, fh=None, stride: int = 1) -> str | None:
        """CSV with ``t, re_c1, im_c1, ..., norm2, p1, ...`` every ``stride`` samples."""
        own = fh is None
        fh = io.StringIO() if own else fh
        n = self.n_modes
        header = ["t"]
        for j in range(1, n + 1):
            header += [f"re_c{j}", f"im_c{j}"]
        header += ["norm2"] + [f"p{j}" for j in range(1, n + 1)]
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k in range(0, len(self), stride):
            row = [format_float(self.times[k])]
            for c in self.states[k]:
                row += [format_float(c.real), format_float(c.imag)]
            row.append(format_float(self.norms[k]))
            row += [format_float(p) for p in self.populations[k]]
            w.writerow(row)
        return fh.getvalue() if own else None


def _as_vector(psi0) -> np.ndarray:
    if isinstance(psi0, StateVector):
        return np.array(psi0.amplitudes)
    return np.array(psi0, dtype=complex).ravel()


def _steps(dt: float, t_final: float) -> int:
    if not dt > 0 or not t_final > 0:
        raise ValueError("dt and t_final must be positive")
    n = int(round(t_final / dt))
    if n < 1 or abs(n * dt - t_final) > 1e-9 * t_final:
        raise ValueError(f"t_final={t_final} is not a whole number of steps dt={dt}")
    return n


def evolve_nh(matrix, psi0, dt: float = 1e-3, t_final: float = 1.0,
              stride: int = 1) -> TimeTrace:
    """Integrate ``i dpsi/dt = H psi`` with classical RK4 at fixed step.

    For constant ``H`` the four RK4 stages collapse to multiplying by
    ``sum_{k<=4} (-i H dt)^k / k!`` each step, which is what is done here.
    A sample is recorded every ``stride`` steps, plus ``t = 0``.

    Raises :class:`IntegrationError` when ``H`` is purely dissipative
    (``(H - H^dagger)/2i`` negative semidefinite) yet the norm grows by more
    than 1e-6, the signature of an unstable step.
    """
    h = np.asarray(matrix, dtype=complex)
    psi = _as_vector(psi0)
    if h.shape != (psi.size, psi.size):
        raise ValueError("initial state does not match the matrix dimension")
    n = _steps(dt, t_final)
    a = -1j * dt * h
    step = np.eye(psi.size, dtype=complex)
    term = np.eye(psi.size, dtype=complex)
    for k in range(1, 5):
        term = term @ a / k
        step = step + term
    out = [psi]
    for k in range(1, n + 1):
        psi = step @ psi
        if k % stride == 0 or k == n:
            out.append(psi)
    times = np.array([0.0] + [k * dt for k in range(1, n + 1) if k % stride == 0 or k == n])
    trace = TimeTrace(times, np.array(out))
    gain = 0.5j * (h.conj().T - h)     # (H - H^dagger)/2i
    if np.linalg.eigvalsh(gain).max() <= 1e-12 * max(1.0, np.abs(h).max()):
        if np.any(trace.norms > trace.norms[0] * (1 + 1e-6)):
            raise IntegrationError(f"norm grew under a dissipative Hamiltonian; dt={dt} is unstable")
    return trace


@dataclass(frozen=True)
class ModulationConfig:
    """Two-tone frequency modulation of the qubit.

    The qubit frequency is ``omega_0 + epsilon1 cos(nu1 t) + epsilon2 cos(nu2 t)``
    and ``delta_b``, ``delta_r`` are the bus and readout detunings from
    ``omega_0``.  ``kappa`` is the readout-resonator decay used in the
    no-jump simulation.  Nominal sideband resonance is ``nu1 = delta_r`` and
    ``nu2 = -delta_b``; other values are allowed (see ``resonance_offsets``).
    """

    g_b: float
    g_r: float
    epsilon1: float
    epsilon2: float
    nu1: float
    nu2: float
    delta_b: float
    delta_r: float
    kappa: float = 0.0

    @property
    def mu1(self) -> float:
        if self.nu1 == 0:
            raise ValueError("modulation frequency nu1 is zero")
        return self.epsilon1 / self.nu1

    @property
    def mu2(self) -> float:
        if self.nu2 == 0:
            raise ValueError("modulation frequency nu2 is zero")
        return self.epsilon2 / self.nu2

    @property
    def resonance_offsets(self) -> tuple[float, float]:
        """``(nu1 - delta_r, nu2 + delta_b)``; both zero at nominal resonance."""
        return self.nu1 - self.delta_r, self.nu2 + self.delta_b

    @property
    def nominally_resonant(self) -> bool:
        o1, o2 = self.resonance_offsets
        return abs(o1) <= 1e-12 * abs(self.nu1) and abs(o2) <= 1e-12 * abs(self.nu2)

    def fastest_rate(self) -> float:
        return max(abs(self.nu1), abs(self.nu2), abs(self.delta_b), abs(self.delta_r))


def bessel_j(n: int, x: float) -> float:
    """Bessel function of the first kind ``J_n(x)`` for ``0 <= n <= 20``, ``|x| <= 30``.

    Small arguments use the ascending series, truncated once a term drops
    below 1e-15 of the running sum.  Larger arguments use Miller's downward
    recurrence normalized by ``J_0 + 2 sum J_2k = 1``.
    """
    if int(n) != n or n < 0 or n > 20:
        raise ValueError(f"order must be an integer in [0, 20], got {n!r}")
    if not math.isfinite(x) or abs(x) > 30:
        raise ValueError(f"argument must satisfy |x| <= 30, got {x!r}")
    n = int(n)
    sign = -1.0 if (x < 0 and n % 2) else 1.0
    x = abs(float(x))
    if x == 0:
        return 1.0 if n == 0 else 0.0
    if x <= 5.0:
        return sign * _bessel_series(n, x)
    return sign * _bessel_miller(n, x)


def _bessel_series(n: int, x: float) -> float:
    half = 0.5 * x
    term = half ** n / math.factorial(n)
    total = term
    q = -half * half
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + n))
        total += term
        if abs(term) <= 1e-15 * abs(total) or k > 200:
            break
    return total


def _bessel_miller(n: int, x: float) -> float:
    start = 2 * ((max(n, int(x)) + 20 + int(math.sqrt(40 * max(n, int(x) + 1)))) // 2)
    j_next, j_cur = 0.0, 1e-30
    norm = 0.0
    result = 0.0
    for k in range(start, 0, -1):
        j_prev = 2 * k / x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            result *= 1e-250
            norm *= 1e-250
        if k - 1 == n:
            result = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2 * j_cur
    norm += j_cur  # J_0 term
    return result / norm


def effective_couplings(cfg: ModulationConfig) -> tuple[float, float]:
    """Sideband couplings ``(g_r J1(mu1) J0(mu2), g_b J0(mu1) J1(mu2))``.

    In the simulated interaction picture the bus sideband enters through
    ``J_{-1} = -J_1``, so the second coupling appears with opposite sign;
    that is a phase convention for mode 3 and leaves populations unchanged.
    """
    mu1, mu2 = cfg.mu1, cfg.mu2
    lam1 = cfg.g_r * bessel_j(1, mu1) * bessel_j(0, mu2)
    lam2 = cfg.g_b * bessel_j(0, mu1) * bessel_j(1, mu2)
    return lam1, lam2


def _dressed_splittings(g_b, g_r, delta_b, delta_r, carrier):
    # Hermitian carrier Hamiltonian in the frame where the bare readout,
    # qubit and bus sit at delta_r, 0, delta_b; eigenvalues are matched to
    # the bare mode with the largest overlap
    h = np.array([[delta_r, g_r * carrier, 0.0],
                  [g_r * carrier, 0.0, g_b * carrier],
                  [0.0, g_b * carrier, delta_b]])
    w, v = np.linalg.eigh(h)
    e = [w[int(np.argmax(np.abs(v[i, :])))] for i in range(3)]
    return e[0] - e[1], e[1] - e[2]


def design_modulation(lambda1: float, lambda2: float, g_b: float, g_r: float,
                      delta_b: float, delta_r: float, kappa: float = 0.0,
                      stark_compensate: bool = True) -> ModulationConfig:
    """Modulation amplitudes and frequencies giving target sideband couplings.

    Modulation indices come from inverting :func:`effective_couplings`
    numerically.  With ``stark_compensate`` each modulation frequency is set
    to the dressed splitting of the carrier Hamiltonian instead of the bare
    detuning, which cancels the dispersive shift ``~ g^2 / delta`` that
    otherwise detunes the sidebands by several times the target coupling.
    """
    from scipy.optimize import fsolve

    def residual(mu):
        return [g_r * bessel_j(1, mu[0]) * bessel_j(0, mu[1]) - lambda1,
                g_b * bessel_j(0, mu[0]) * bessel_j(1, mu[1]) - lambda2]

    guess = [2 * lambda1 / g_r, 2 * lambda2 / g_b]
    mu1, mu2 = fsolve(residual, guess, xtol=1e-14)
    if max(abs(r) for r in residual([mu1, mu2])) > 1e-9 * max(1.0, abs(lambda1), abs(lambda2)):
        raise ValueError("target couplings are not reachable with these coupling strengths")
    nu1, nu2 = delta_r, -delta_b
    if stark_compensate:
        carrier = bessel_j(0, mu1) * bessel_j(0, mu2)
        nu1, nu2 = _dressed_splittings(g_b, g_r, delta_b, delta_r, carrier)
    return ModulationConfig(g_b=g_b, g_r=g_r, epsilon1=mu1 * nu1, epsilon2=mu2 * nu2,
                            nu1=nu1, nu2=nu2, delta_b=delta_b, delta_r=delta_r,
                            kappa=kappa)


TWO_PI = 2 * math.pi

EXPERIMENT = {
    # on-resonance couplings, readout decay and the target working point
    "g_b": TWO_PI * 20, "g_r": TWO_PI * 41, "kappa": 5.0,
    "lambda1": TWO_PI * 0.21, "lambda2": TWO_PI * 0.31,
    # bus 5.58 GHz, readout 6.66 GHz, mean qubit frequency 5.90 GHz (chosen)
    "delta_b": TWO_PI * (5580 - 5900), "delta_r": TWO_PI * (6660 - 5900),
}


def experimental_modulation(stark_compensate: bool = True) -> ModulationConfig:
    """Modulation reproducing the working point of the population measurement."""
    p = EXPERIMENT
    return design_modulation(p["lambda1"], p["lambda2"], p["g_b"], p["g_r"],
                             p["delta_b"], p["delta_r"], p["kappa"], stark_compensate)


def evolve_modulated(cfg: ModulationConfig, psi0, dt: float | None = None,
                     t_final: float = 1.0, stride: int = 1) -> TimeTrace:
    """RK4 integration of the modulated interaction-picture Hamiltonian.

    Couplings are ``g_r f(t) e^{i delta_r t}`` (readout-qubit) and
    ``g_b f(t) e^{i delta_b t}`` (bus-qubit) with
    ``f(t) = exp(-i mu1 sin(nu1 t) - i mu2 sin(nu2 t))``; the readout mode
    carries ``-i kappa/2`` on the diagonal.  No rotating-wave truncation is
    made.  ``dt`` defaults to the largest step with ``t_final/dt`` integral
    and ``dt <= 0.02 / fastest rate``; a larger ``dt`` raises
    :class:`IntegrationError`.
    """
    fastest = cfg.fastest_rate()
    dt_max = 0.02 / fastest if fastest > 0 else t_final / 1000
    if dt is None:
        dt = t_final / math.ceil(t_final / dt_max)
    if dt > dt_max * (1 + 1e-12):
        raise IntegrationError(
            f"dt={dt} under-resolves the modulation; need dt <= {dt_max:.3e}")
    n = _steps(dt, t_final)
    psi = _as_vector(psi0)
    if psi.size != 3:
        raise ValueError("the modulated model has three modes")

    # couplings on the half-step grid t_j = j dt / 2
    tt = 0.5 * dt * np.arange(2 * n + 1)
    f = np.exp(-1j * cfg.mu1 * np.sin(cfg.nu1 * tt) - 1j * cfg.mu2 * np.sin(cfg.nu2 * tt))
    ar = (cfg.g_r * f * np.exp(1j * cfg.delta_r * tt)).tolist()
    ab = (cfg.g_b * f * np.exp(1j * cfg.delta_b * tt)).tolist()
    half_k = 0.5 * cfg.kappa

    def deriv(c1, c2, c3, a, b):
        # -i H psi, H = [[-i k/2, a, 0], [a*, 0, b*], [0, b, 0]]
        return (-half_k * c1 - 1j * a * c2,
                -1j * (a.conjugate() * c1 + b.conjugate() * c3),
                -1j * b * c2)

    c1, c2, c3 = (complex(z) for z in psi)
    h2, h6 = dt / 2, dt / 6
    out = [(c1, c2, c3)]
    times = [0.0]
    for k in range(n):
        j = 2 * k
        a0, b0, am, bm, a1, b1 = ar[j], ab[j], ar[j + 1], ab[j + 1], ar[j + 2], ab[j + 2]
        k1 = deriv(c1, c2, c3, a0, b0)
        k2 = deriv(c1 + h2 * k1[0], c2 + h2 * k1[1], c3 + h2 * k1[2], am, bm)
        k3 = deriv(c1 + h2 * k2[0], c2 + h2 * k2[1], c3 + h2 * k2[2], am, bm)
        k4 = deriv(c1 + dt * k3[0], c2 + dt * k3[1], c3 + dt * k3[2], a1, b1)
        c1 += h6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        c2 += h6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        c3 += h6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if (k + 1) % stride == 0 or k + 1 == n:
            out.append((c1, c2, c3))
            times.append((k + 1) * dt)
    trace = TimeTrace(np.array(times), np.array(out))
    if np.any(trace.norms > trace.norms[0] * (1 + 1e-6)):
        raise IntegrationError("norm grew during modulated evolution; dt is too coarse")
    return trace


def population_rms(trace: TimeTrace, reference: TimeTrace) -> np.ndarray:
    """Per-mode RMS over time of the renormalized population difference.

    ``reference`` populations are linearly interpolated onto the sample
    times of ``trace``.
    """
    if trace.n_modes != reference.n_modes:
        raise ValueError("traces have different numbers of modes")
    ref = np.column_stack([np.interp(trace.times, reference.times, reference.populations[:, j])
                           for j in range(reference.n_modes)])
    d = trace.populations - ref
    return np.sqrt(np.mean(d ** 2, axis=0))


@dataclass
class StabilizationReport:
    """Overlap of a trajectory with each eigenvector.

    ``fidelities[k, n] = |<Phi_n|psi(t_k)>|^2 / ||psi(t_k)||^2``.
    ``dominant`` is the index of the eigenvalue with the largest imaginary
    part, or ``None`` when no eigenvalue is strictly least damped.
    """

    times: np.ndarray
    fidelities: np.ndarray
    dominant: int | None
    threshold: float
    threshold_time: float | None
    defective: bool

    @property
    def dominant_fidelity(self) -> np.ndarray | None:
        return None if self.dominant is None else self.fidelities[:, self.dominant]


def stabilization_metrics(trace: TimeTrace, spectrum, eigenvectors: Sequence,
                          threshold: float = 0.99, imag_tol: float = 1e-9
                          ) -> StabilizationReport:
    """Fidelity of the trajectory with each eigenvector over time.

    ``threshold_time`` is the first sample at which the dominant fidelity
    reaches ``threshold`` (``None`` if never).  ``defective`` is an advisory:
    some eigenvector belongs to an exceptional point, so fidelities refer to
    the single coalesced vector.
    """
    e = np.asarray(spectrum.energies if isinstance(spectrum, ComplexSpectrum) else spectrum,
                   dtype=complex)
    vecs = [v.normalized() if isinstance(v, StateVector) else StateVector(v).normalized()
            for v in eigenvectors]
    if len(vecs) != e.size:
        raise ValueError("need one eigenvector per energy")
    phi = np.array([v.amplitudes for v in vecs])
    overlaps = np.abs(trace.states @ phi.conj().T) ** 2 / trace.norms[:, None]

    order = np.argsort(-e.imag)
    dominant = None
    scale = max(1.0, float(np.abs(e).max()))
    if e.size == 1 or e.imag[order[0]] - e.imag[order[1]] > imag_tol * scale:
        dominant = int(order[0])
    t_hit = None
    if dominant is not None:
        hit = np.flatnonzero(overlaps[:, dominant] >= threshold)
        if hit.size:
            t_hit = float(trace.times[hit[0]])
    return StabilizationReport(trace.times, overlaps, dominant, threshold, t_hit,
                               any(v.defective for v in vecs))
