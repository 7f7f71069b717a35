"""
Spectrum of the three-mode chain and its third-order exceptional points
=======================================================================

Mode 1 decays at rate kappa and couples to mode 2 with lambda1; mode 2
couples to the lossless mode 3 with lambda2.  This script walks from the
closed-form eigenenergies to the four points where all three coalesce.
Run it from anywhere; CSV files land in ``demos/output``.
"""
from pathlib import Path

import numpy as np

from ep3topo import (build_chain_hamiltonian, characteristic_polynomial, classify_point,
                     eigenvalues_closed_form, locate_ep3, polynomial_roots, scan_spectral_map,
                     three_mode_chain)
from ep3topo.spectra import write_map_csv

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)
kappa = 5.0
lam_m = 2 * np.pi

# %% Closed form against a generic root finder
# The Cardano expressions and Aberth iteration on det(H - E) are independent
# routes to the same three numbers.
spec = eigenvalues_closed_form(lam_m, lam_m, kappa)
roots = polynomial_roots(characteristic_polynomial(
    build_chain_hamiltonian(three_mode_chain(lam_m, lam_m, kappa))))
print("closed form :", np.round(spec.energies, 6))
print("root finder :", np.round(roots, 6))
print("trace check :", spec.energies.sum(), "expected", -0.5j * kappa)

# %% The four EP3s
# They sit at (+-sqrt(2) kappa / (3 sqrt 3), +-kappa / (6 sqrt 3)) with the
# triple energy -i kappa / 6.
for l1, l2 in locate_ep3(kappa):
    c = classify_point(l1, l2, kappa)
    print(f"EP3 at ({l1:+.6f}, {l2:+.6f}): {c.kind.value}, E = {c.degenerate_energy:.6f}, "
          f"smallest gap {c.min_gap:.1e}")

# %% Gap map over the first quadrant
# Rows with isofrequency = 1 form the region where every eigenenergy is
# purely imaginary; its boundary is where the EP2 lines run.
grid1 = np.linspace(0, 2 * kappa, 81)
grid2 = np.linspace(0, 0.5 * kappa, 41)
records = scan_spectral_map(kappa, grid1, grid2)
(out / "spectral_map.csv").write_text(write_map_csv(records))
iso = sum(r.isofrequency for r in records)
print(f"{len(records)} grid points, {iso} inside the isofrequency region "
      f"-> {out / 'spectral_map.csv'}")
