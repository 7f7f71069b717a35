"""
Reading eigenenergies off a trajectory, and the entanglement of the EP3 state
=============================================================================

A single mode amplitude is a sum of damped exponentials, one per
eigenenergy.  The matrix-pencil method recovers them.  The last part looks
at how the coalesced eigenvector at an EP3 spreads its excitation across
the three modes.
"""
import numpy as np

from ep3topo import (build_chain_hamiltonian, classify_point, eigenvalues_closed_form,
                     eigenvector_for, evolve_nh, extract_eigenenergies,
                     fit_symmetric_parametrization, locate_ep3, pairwise_concurrence,
                     perturbation_ratios, three_mode_chain)
from ep3topo.analysis import SymmetryFitError

kappa = 5.0
lam_m = 2 * np.pi

# %% Pencil extraction along the diagonal of the square loop
for scale in (0.25, 0.5, 1.0):
    l1 = l2 = scale * lam_m
    h = build_chain_hamiltonian(three_mode_chain(l1, l2, kappa))
    tr = evolve_nh(h, [0, 1, 0], dt=1e-3, t_final=3.0, stride=10)
    got = extract_eigenenergies(tr, 2, 3)
    exact = eigenvalues_closed_form(l1, l2, kappa).energies
    err = np.abs(got - exact).max()
    try:
        fit = fit_symmetric_parametrization(got, kappa=kappa)
        shape = f"R = {fit.r:.4f}, I1 = {fit.i1:.4f}, I2 = {fit.i2:.4f}"
    except SymmetryFitError as exc:
        shape = f"not of the symmetric form ({exc})"
    print(f"lambda = {scale:.2f} lam_m: max error {err:.1e}; {shape}")

# %% How good is the symmetric form?  Compare dressed-basis ratios
for l1, l2, label in [(lam_m, 0.0, "theta = pi/2"), (lam_m, lam_m, "theta = pi/4")]:
    r = perturbation_ratios(l1, l2, kappa)
    print(f"{label}: ratio_12 = {r.ratio_12:.4f}, ratio_23 = {r.ratio_23:.4f}, "
          f"kappa/(8 lambda) = {r.kappa_over_8lambda:.4f}")

# %% Pairwise concurrences of the EP3 eigenstate
k = 1.0
l1, l2 = locate_ep3(k)[0]
h = build_chain_hamiltonian(three_mode_chain(l1, l2, k))
psi = eigenvector_for(h, classify_point(l1, l2, k).degenerate_energy).normalized()
print("EP3 eigenvector:", np.round(psi.amplitudes, 6))
for pair in ((1, 2), (2, 3), (1, 3)):
    print(f"C{pair} = {pairwise_concurrence(psi, pair):.7f}")
