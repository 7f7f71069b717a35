"""Chain parameters and the single-excitation matrices built from them.

All rates and couplings are angular frequencies in 1/us.  The basis of the
single-excitation subspace is ordered (mode 1 excited, ..., mode N excited),
with mode 1 the decaying mode.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChainParams",
    "ModelKind",
    "ReferenceModelParams",
    "build_chain_hamiltonian",
    "build_reference_model",
    "three_mode_chain",
    "MAX_DENSE_DIM",
]

MAX_DENSE_DIM = 8


@dataclass(frozen=True)
class ChainParams:
    """Nearest-neighbour chain with per-mode decay.

    Parameters
    ----------
    n_modes : int
        Number of modes, at least 2.
    kappas : sequence of float
        Decay rate of each mode (length ``n_modes``, all >= 0).
    lambdas : sequence of float
        Coupling between mode j and j+1 (length ``n_modes - 1``).
    """

    n_modes: int
    kappas: tuple[float, ...]
    lambdas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "kappas", tuple(float(k) for k in self.kappas))
        object.__setattr__(self, "lambdas", tuple(float(l) for l in self.lambdas))
        if int(self.n_modes) != self.n_modes or self.n_modes < 2:
            raise ValueError(f"n_modes must be an integer >= 2, got {self.n_modes!r}")
        if len(self.kappas) != self.n_modes:
            raise ValueError(
                f"expected {self.n_modes} decay rates, got {len(self.kappas)}")
        if len(self.lambdas) != self.n_modes - 1:
            raise ValueError(
                f"expected {self.n_modes - 1} couplings, got {len(self.lambdas)}")
        if any(k < 0 for k in self.kappas):
            raise ValueError("decay rates must be non-negative")
        if not all(np.isfinite(self.kappas)) or not all(np.isfinite(self.lambdas)):
            raise ValueError("parameters must be finite")

    def to_json(self) -> str:
        return json.dumps({"n_modes": self.n_modes,
                           "kappas": list(self.kappas),
                           "lambdas": list(self.lambdas)})

    @classmethod
    def from_json(cls, text: str) -> "ChainParams":
        doc = json.loads(text)
        if not isinstance(doc, dict):
            raise ValueError("chain parameters must be a JSON object")
        unknown = set(doc) - {"n_modes", "kappas", "lambdas"}
        if unknown:
            raise ValueError(f"unknown keys: {sorted(unknown)}")
        missing = {"n_modes", "kappas", "lambdas"} - set(doc)
        if missing:
            raise ValueError(f"missing keys: {sorted(missing)}")
        return cls(doc["n_modes"], doc["kappas"], doc["lambdas"])


def three_mode_chain(lambda1: float, lambda2: float, kappa: float) -> ChainParams:
    """The three-mode chain with only mode 1 decaying."""
    return ChainParams(3, (kappa, 0.0, 0.0), (lambda1, lambda2))


def build_chain_hamiltonian(params: ChainParams) -> np.ndarray:
    """Single-excitation matrix of the chain.

    Diagonal entries are ``-i kappa_j / 2``; the first super- and
    sub-diagonals hold the couplings.  The result is complex symmetric.
    """
    n = params.n_modes
    if n > MAX_DENSE_DIM:
        raise ValueError(f"at most {MAX_DENSE_DIM} modes are supported")
    h = np.zeros((n, n), dtype=complex)
    h[np.diag_indices(n)] = -0.5j * np.asarray(params.kappas)
    lam = np.asarray(params.lambdas, dtype=float)
    idx = np.arange(n - 1)
    h[idx, idx + 1] = lam
    h[idx + 1, idx] = lam
    return h


class ModelKind(str, enum.Enum):
    DP2D = "DP2D"
    DP3D = "DP3D"
    EP2QUBIT = "EP2Qubit"


_KIND_FIELDS = {
    ModelKind.DP2D: ("omega_x", "omega_y"),
    ModelKind.DP3D: ("lambda1", "lambda2"),
    ModelKind.EP2QUBIT: ("j_x", "j_y", "gamma"),
}


@dataclass(frozen=True)
class ReferenceModelParams:
    """Parameters of the zero-winding reference models.

    Only the fields belonging to ``kind`` may be nonzero:
    ``DP2D`` uses (omega_x, omega_y), ``DP3D`` uses (lambda1, lambda2) and
    ``EP2Qubit`` uses (j_x, j_y, gamma).
    """

    kind: ModelKind
    omega_x: float = 0.0
    omega_y: float = 0.0
    lambda1: float = 0.0
    lambda2: float = 0.0
    j_x: float = 0.0
    j_y: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        try:
            kind = ModelKind(self.kind)
        except ValueError:
            raise ValueError(f"unknown reference model kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        used = _KIND_FIELDS[kind]
        for name in ("omega_x", "omega_y", "lambda1", "lambda2", "j_x", "j_y", "gamma"):
            if name not in used and getattr(self, name) != 0:
                raise ValueError(f"field {name} is not used by {kind.value}")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")

    def replace(self, **changes) -> "ReferenceModelParams":
        values = {name: getattr(self, name) for name in _KIND_FIELDS[self.kind]}
        values.update(changes)
        return ReferenceModelParams(self.kind, **values)


def build_reference_model(params: ReferenceModelParams) -> np.ndarray:
    kind = params.kind
    if kind is ModelKind.DP2D:
        wx, wy = params.omega_x, params.omega_y
        return np.array([[0, wx - 1j * wy], [wx + 1j * wy, 0]], dtype=complex)
    if kind is ModelKind.DP3D:
        l1, l2 = params.lambda1, params.lambda2
        return np.array([[0, l2, 0], [l2, 0, l1], [0, l1, 0]], dtype=complex)
    if kind is ModelKind.EP2QUBIT:
        jx, jy, g = params.j_x, params.j_y, params.gamma
        return np.array([[0, jx - 1j * jy], [jx + 1j * jy, -0.5j * g]], dtype=complex)
    raise ValueError(f"unknown reference model kind {kind!r}")
