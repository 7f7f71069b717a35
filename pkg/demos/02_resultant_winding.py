"""
Winding of the resultant vector
===============================

The pair (r1, r2) is built from products of eigenvalue differences, so it
vanishes only where all three energies meet.  Its winding number along a
closed loop counts the EP3s inside.  EP2s and Hermitian degeneracies give
no winding.
"""
from pathlib import Path

import numpy as np

from ep3topo import (ModelKind, ParameterLoop, ReferenceModelParams, circle_loop,
                     locate_ep3, winding_number)
from ep3topo.topology import LoopKind, reference_resultant_field, write_winding_trace_csv

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)
kappa = 5.0
lam_m = 2 * np.pi

# %% The square loop from the origin to (lam_m, lam_m)
# It crosses the EP2 at lambda1 = kappa/4 on its first edge, where the
# vector turns by pi over a short stretch; the adaptive sampling handles it.
loop = ParameterLoop.square(lam_m)
res = winding_number(loop, kappa)
print(f"square loop: raw {res.raw:.12f}, W = {res.rounded}, {res.s.size} samples")
print(f"reversed   : W = {winding_number(loop.reversed(), kappa).rounded}")
print(f"theta form : W = {winding_number(ParameterLoop(LoopKind.THETA, lam_m), kappa).rounded}")
(out / "winding_trace.csv").write_text(write_winding_trace_csv(res))

# %% Loops around each EP3 separately
# The field depends on lambda1^2 and lambda2^2, so counter-clockwise loops
# in the second and fourth quadrants wind the other way.
for l1, l2 in locate_ep3(kappa):
    w = winding_number(circle_loop((l1, l2), 0.1 * kappa), kappa).rounded
    print(f"small circle around ({l1:+.3f}, {l2:+.3f}): W = {w:+d}")

# %% Reference models never wind
gamma = 1.0
controls = [
    ("2D diabolical point", ReferenceModelParams(ModelKind.DP2D), ("omega_x", "omega_y"), (0, 0)),
    ("3D diabolical point", ReferenceModelParams(ModelKind.DP3D), ("lambda1", "lambda2"), (0, 0)),
    ("EP2 at J = +gamma/4", ReferenceModelParams(ModelKind.EP2QUBIT, gamma=gamma),
     ("j_x", "j_y"), (gamma / 4, 0)),
]
for name, params, axes, center in controls:
    r = winding_number(circle_loop(center, 1.0, 64), field=reference_resultant_field(params, axes))
    print(f"{name:22s}: W = {r.rounded}")

# %% A loop through an EP3 is rejected rather than given a meaningless value
l1, l2 = locate_ep3(kappa)[0]
try:
    winding_number(ParameterLoop.polyline([[0, 0], [l1, l2], [2, 0], [2, 2], [0, 2], [0, 0]]),
                   kappa)
except ArithmeticError as exc:
    print("through the EP3:", exc)
