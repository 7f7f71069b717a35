import math

import numpy as np
import pytest

from ep3topo.model import (ModelKind, ReferenceModelParams, build_chain_hamiltonian,
                           build_reference_model, three_mode_chain)
from ep3topo.polynomials import ConvergenceError
from ep3topo.spectra import characteristic_polynomial, eigenvalues_closed_form, locate_ep3
from ep3topo.topology import (LoopKind, Orientation, ParameterLoop, RealnessError,
                              ResultantZeroError, circle_loop, resultant_from_polynomial,
                              resultant_vector, square_loop_point, winding_number,
                              write_winding_trace_csv)

TWO_PI = 2 * math.pi


def test_resultant_vector_examples():
    v = resultant_vector([-1j / 6] * 3)
    assert v.r1 == 0 and v.r2 == 0 and v.norm == 0
    v = resultant_vector([0, 1, -1])
    assert v.r1 == pytest.approx(4) and v.r2 == pytest.approx(0)
    v = resultant_vector(eigenvalues_closed_form(0, 0, 1.0))
    assert v.r1 == pytest.approx(0) and v.r2 == pytest.approx(2)
    assert v.norm == pytest.approx(math.hypot(abs(v.r1), abs(v.r2)))
    assert -math.pi < v.phase <= math.pi


def test_resultant_realness_check():
    with pytest.raises(RealnessError):
        resultant_vector([1, 2j, 0.5])
    with pytest.raises(ValueError):
        resultant_vector([1, 2])


def test_product_formulas_match_sylvester_resultants():
    # r1 = R[P, P'] and r2 = -i R[P, P''] with P(E) = det(H - E)
    rng = np.random.default_rng(42)
    for _ in range(100):
        k = rng.uniform(0, 6)
        l1, l2 = rng.uniform(-5, 5, 2)
        v = resultant_vector(eigenvalues_closed_form(l1, l2, k))
        poly = characteristic_polynomial(build_chain_hamiltonian(three_mode_chain(l1, l2, k)))
        s1, s2 = resultant_from_polynomial(poly)
        assert abs(v.r1 - s1) <= 1e-8 * max(abs(s1), 1e-300) + 1e-12 * v.norm
        assert abs(v.r2 + 1j * s2) <= 1e-8 * max(abs(s2), 1e-300) + 1e-12 * v.norm


def test_reference_model_resultants():
    w = 0.7
    p = characteristic_polynomial(build_reference_model(
        ReferenceModelParams(ModelKind.DP2D, omega_x=w)))
    r1, r2 = resultant_from_polynomial(p)
    assert r1 == pytest.approx(-4 * w ** 2) and r2 == pytest.approx(4)
    g, jx, jy = 1.0, 0.2, 0.1
    p = characteristic_polynomial(build_reference_model(
        ReferenceModelParams(ModelKind.EP2QUBIT, j_x=jx, j_y=jy, gamma=g)))
    r1, r2 = resultant_from_polynomial(p)
    assert r1 == pytest.approx(g ** 2 / 4 - 4 * (jx ** 2 + jy ** 2)) and r2 == pytest.approx(4)


@pytest.mark.parametrize("theta, point", [(0, (0, 0)), (math.pi / 2, (1, 0)),
                                          (math.pi, (1, 1)), (1.5 * math.pi, (0, 1))])
def test_square_loop_point(theta, point):
    np.testing.assert_allclose(square_loop_point(theta, 3.0), 3.0 * np.array(point), atol=1e-15)


def test_loop_shapes_and_validation():
    sq = ParameterLoop.square(2.0)
    np.testing.assert_allclose(sq.point([0, 0.25, 0.5, 0.75, 1]),
                               [[0, 0], [2, 0], [2, 2], [0, 2], [0, 0]])
    np.testing.assert_allclose(sq.reversed().point(0.25), [0, 2])
    assert sq.reversed().orientation is Orientation.REVERSED
    th = ParameterLoop(LoopKind.THETA, lambda_m=2.0)
    np.testing.assert_allclose(th.point(0.5), [2, 2], atol=1e-15)
    with pytest.raises(ValueError):
        ParameterLoop.square(-1)
    with pytest.raises(ValueError):
        ParameterLoop.polyline([[0, 0], [1, 0], [1, 1]])
    assert ParameterLoop.polyline([[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]]).n_edges == 4


def test_square_and_theta_loops_wind_once():
    for kind in (LoopKind.SQUARE, LoopKind.THETA):
        loop = ParameterLoop(kind, lambda_m=TWO_PI)
        res = winding_number(loop, 5.0)
        assert res.rounded == 1 and abs(res.raw - 1) < 1e-9
        raw, w = winding_number(loop.reversed(), 5.0)
        assert w == -1


def test_other_quadrants_follow_reflection_symmetry():
    # The spectrum depends on lambda1^2 and lambda2^2 only: a mirrored vertex
    # list traces the same resultant path, so counter-clockwise loops pick up
    # the sign of the reflection.
    unit = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]], dtype=float)
    for sx, sy in [(1, 1), (-1, 1), (-1, -1), (1, -1)]:
        mirrored = ParameterLoop.polyline(unit * [sx, sy] * TWO_PI)
        assert winding_number(mirrored, 5.0).rounded == 1
        ccw = mirrored if sx * sy > 0 else mirrored.reversed()
        assert winding_number(ccw, 5.0).rounded == sx * sy


def test_additivity_and_homotopy():
    m = TWO_PI
    corners = np.array([[0, 0], [m, 0], [m, m], [0, m], [0, 0]])
    twice = np.vstack([corners, corners[1:]])
    assert winding_number(ParameterLoop.polyline(twice), 5.0).rounded == 2
    rng = np.random.default_rng(1)
    for _ in range(5):
        v = corners + rng.uniform(-0.05, 0.05, corners.shape) * m
        v[-1] = v[0]
        assert winding_number(ParameterLoop.polyline(v), 5.0).rounded == 1


def test_loop_not_enclosing_ep3():
    k = 5.0
    l1, l2 = locate_ep3(k)[0]
    loop = circle_loop((l1 + 3, l2 + 3), 0.5)
    assert winding_number(loop, k).rounded == 0


def test_loop_through_ep3_is_rejected():
    k = 5.0
    l1, l2 = locate_ep3(k)[0]
    v = [[0, 0], [l1, l2], [2, 0.0], [2, 2], [0, 2], [0, 0]]
    with pytest.raises((ResultantZeroError, ConvergenceError)):
        winding_number(ParameterLoop.polyline(v), k)


def test_winding_requires_field_or_kappa():
    with pytest.raises(ValueError):
        winding_number(ParameterLoop.square(1.0))


def test_sign_structure_on_grid():
    k = 5.0
    for l1 in np.linspace(0.05, 8, 12):
        for l2 in np.linspace(0.05, 8, 12):
            e = eigenvalues_closed_form(l1, l2, k).energies
            v = resultant_vector(e)
            if np.all(np.abs(e.real) < 1e-9):
                assert v.r1.real <= 1e-9 * v.norm
            elif np.abs(e.real).max() > 1e-6:
                assert v.r1.real >= -1e-9 * v.norm


def test_trace_csv():
    res = winding_number(ParameterLoop.square(TWO_PI), 5.0, samples_per_edge=16)
    text = write_winding_trace_csv(res)
    lines = text.splitlines()
    assert lines[0] == "s,lambda1,lambda2,r1_normalized,r2_normalized,phase_unwrapped"
    first, last = lines[1].split(","), lines[-1].split(",")
    assert float(first[0]) == 0 and float(last[0]) == 1
    assert (float(last[5]) - float(first[5])) / TWO_PI == pytest.approx(1)
    assert write_winding_trace_csv(res) == text
