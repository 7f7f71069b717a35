import numpy as np
import pytest

from ep3topo.polynomials import (ConvergenceError, Polynomial, aberth_roots, sylvester_matrix,
                                 sylvester_resultant)


def test_horner_and_derivative():
    p = Polynomial([1, -3, 2])
    assert p(1) == 0 and p(2) == 0 and p(0) == 2
    assert p.derivative().allclose(Polynomial([2, -3]))
    assert p.degree == 2


def test_padding_keeps_values():
    p = Polynomial([2]).padded(1)
    assert p.degree == 1 and p.effective_degree == 0
    assert p(7.0) == 2
    assert p.trimmed().degree == 0


def test_sylvester_examples():
    p = Polynomial([1, 0, -1])
    assert sylvester_resultant(p, p.derivative()) == pytest.approx(-4)
    assert abs(sylvester_resultant(Polynomial([1, -3, 2]), Polynomial([1, -1]))) < 1e-14


def test_sylvester_matrix_layout():
    s = sylvester_matrix(Polynomial([1, 2, 3]), Polynomial([4, 5]))
    np.testing.assert_array_equal(s, [[1, 2, 3], [4, 5, 0], [0, 4, 5]])


def test_sylvester_constant_padding():
    # DP2D: P = E^2 - w^2 with w = 1, P'' = 2 padded to degree one
    p = Polynomial([1, 0, -1])
    assert sylvester_resultant(p, Polynomial([2])) == pytest.approx(4)
    with pytest.raises(ValueError):
        sylvester_resultant(Polynomial([1]), Polynomial([2]))


def test_resultant_matches_root_product():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = rng.normal(size=3) + 1j * rng.normal(size=3)
        b = rng.normal(size=2) + 1j * rng.normal(size=2)
        p, q = Polynomial(np.poly(a)), Polynomial(np.poly(b))
        want = np.prod([ai - bj for ai in a for bj in b])
        assert sylvester_resultant(p, q) == pytest.approx(want, rel=1e-10)


@pytest.mark.parametrize("coeffs, roots", [
    ([1, 0, 1], [1j, -1j]),
    ([1, -10, 31, -30], [2, 3, 5]),
    ([2, -4], [2]),
])
def test_aberth_examples(coeffs, roots):
    got = np.sort_complex(aberth_roots(Polynomial(coeffs)))
    np.testing.assert_allclose(got, np.sort_complex(np.array(roots, dtype=complex)), atol=1e-12)


def test_aberth_multiple_root_cluster():
    got = aberth_roots(Polynomial(np.poly([1j, 1j, 1j])))
    assert np.abs(got - 1j).max() < 1e-4


def test_aberth_rejects_constants_and_iteration_cap():
    with pytest.raises(ValueError):
        aberth_roots(Polynomial([3]))
    with pytest.raises(ConvergenceError):
        aberth_roots(Polynomial(np.poly(np.arange(1, 9) * 1.7 + 0.3j)), max_iter=1)
