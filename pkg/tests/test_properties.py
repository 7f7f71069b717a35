"""Property-based checks of invariants that hold across parameter space."""
import itertools

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from ep3topo.io import format_float
from ep3topo.model import ChainParams, build_chain_hamiltonian
from ep3topo.spectra import eigenvalues_closed_form
from ep3topo.topology import resultant_vector

coupling = st.floats(-20, 20, allow_nan=False)
decay = st.floats(0, 20, allow_nan=False)


@given(coupling, coupling, decay)
@settings(max_examples=300, deadline=None)
def test_spectral_symmetry_and_vieta(l1, l2, k):
    e = eigenvalues_closed_form(l1, l2, k).energies
    scale = max(1.0, k, abs(l1), abs(l2))
    mirrored = -np.conj(e)
    assert max(np.abs(mirrored - x).min() for x in e) < 1e-10 * scale
    assert abs(e.sum() + 0.5j * k) < 1e-9 * scale
    assert abs(np.prod(e) - 0.5j * k * l2 ** 2) < 1e-8 * scale ** 3


@given(coupling, coupling)
@settings(max_examples=100, deadline=None)
def test_hermitian_limit_is_real(l1, l2):
    e = eigenvalues_closed_form(l1, l2, 0.0).energies
    assert np.abs(e.imag).max() < 1e-12 * max(1.0, abs(l1), abs(l2))


@given(coupling, coupling, decay)
@settings(max_examples=100, deadline=None)
def test_resultant_permutation_invariant(l1, l2, k):
    e = eigenvalues_closed_form(l1, l2, k).energies
    ref = resultant_vector(e)
    for perm in itertools.permutations(e):
        v = resultant_vector(np.array(perm))
        assert abs(v.r1 - ref.r1) <= 1e-9 * ref.norm + 1e-300
        assert abs(v.r2 - ref.r2) <= 1e-9 * ref.norm + 1e-300


@given(st.integers(2, 8).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(decay, min_size=n, max_size=n),
    st.lists(coupling, min_size=n - 1, max_size=n - 1))))
def test_chain_json_round_trip(args):
    p = ChainParams(*args)
    assert ChainParams.from_json(p.to_json()) == p
    h = build_chain_hamiltonian(p)
    assert np.array_equal(h, h.T)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_format_round_trip(x):
    text = format_float(x)
    assert float(text) == x
    assert "," not in text
    digits = text.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
    assert len(digits) <= 17
