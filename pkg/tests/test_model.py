import json

import numpy as np
import pytest

from ep3topo.model import (ChainParams, ModelKind, ReferenceModelParams,
                           build_chain_hamiltonian, build_reference_model, three_mode_chain)


def test_three_mode_matrix_layout():
    h = build_chain_hamiltonian(three_mode_chain(1.5, 0.7, 2.0))
    want = np.array([[-1j, 1.5, 0], [1.5, 0, 0.7], [0, 0.7, 0]])
    np.testing.assert_array_equal(h, want)


def test_hermitian_limit_is_real_symmetric():
    h = build_chain_hamiltonian(ChainParams(3, (0, 0, 0), (1, 1)))
    assert np.all(h.imag == 0)
    np.testing.assert_array_equal(h, h.T)


def test_two_mode_reduction():
    h = build_chain_hamiltonian(ChainParams(2, (3.0, 0.0), (0.4,)))
    np.testing.assert_array_equal(h, [[-1.5j, 0.4], [0.4, 0]])


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_complex_symmetric_and_trace(n):
    rng = np.random.default_rng(n)
    p = ChainParams(n, rng.uniform(0, 3, n), rng.normal(size=n - 1))
    h = build_chain_hamiltonian(p)
    np.testing.assert_array_equal(h, h.T)
    assert np.trace(h) == pytest.approx(-0.5j * sum(p.kappas))


@pytest.mark.parametrize("args", [
    (1, (0,), ()),
    (3, (0, 0), (1, 1)),
    (3, (0, 0, 0), (1,)),
    (3, (-1, 0, 0), (1, 1)),
    (3, (0, 0, float("nan")), (1, 1)),
])
def test_invalid_chain_params(args):
    with pytest.raises(ValueError):
        ChainParams(*args)


def test_dense_limit():
    with pytest.raises(ValueError):
        build_chain_hamiltonian(ChainParams(9, [0] * 9, [1] * 8))


def test_json_round_trip_and_unknown_keys():
    p = three_mode_chain(1.0, 2.0, 5.0)
    assert ChainParams.from_json(p.to_json()) == p
    doc = json.loads(p.to_json())
    doc["extra"] = 1
    with pytest.raises(ValueError, match="unknown"):
        ChainParams.from_json(json.dumps(doc))
    with pytest.raises(ValueError, match="missing"):
        ChainParams.from_json('{"n_modes": 2, "kappas": [0, 0]}')


def test_reference_models():
    np.testing.assert_array_equal(
        build_reference_model(ReferenceModelParams(ModelKind.DP2D, omega_x=1)), [[0, 1], [1, 0]])
    np.testing.assert_array_equal(
        build_reference_model(ReferenceModelParams(ModelKind.DP3D)), np.zeros((3, 3)))
    g = 2.0
    h = build_reference_model(ReferenceModelParams(ModelKind.EP2QUBIT, j_x=g / 4, gamma=g))
    # trace and determinant of a doubly degenerate 2x2 at -i g/4
    assert np.trace(h) == pytest.approx(-0.5j * g)
    assert np.linalg.det(h) == pytest.approx((-0.25j * g) ** 2)


def test_reference_model_field_validation():
    with pytest.raises(ValueError):
        ReferenceModelParams(ModelKind.DP2D, lambda1=1.0)
    with pytest.raises(ValueError):
        ReferenceModelParams(ModelKind.EP2QUBIT, gamma=-1)
    with pytest.raises(ValueError):
        ReferenceModelParams("nope")
    p = ReferenceModelParams("EP2Qubit", gamma=1.0).replace(j_x=0.3)
    assert p.kind is ModelKind.EP2QUBIT and p.j_x == 0.3 and p.gamma == 1.0
