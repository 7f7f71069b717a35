"""Regenerate ``data/oracles.json`` from routes independent of ep3topo.

Eigenvalues come from mpmath polynomial roots at 50 digits, Bessel values
from mpmath, matrix exponentials from scipy.  Run from the tests directory:

    python make_oracles.py
"""
import json
from pathlib import Path

import mpmath as mp
import numpy as np
from scipy.linalg import expm

mp.mp.dps = 50


def cpx(z):
    z = complex(z)
    return [z.real, z.imag]


def chain_roots(l1, l2, k):
    # det(H - E) = -E^3 - (i k/2) E^2 + (l1^2 + l2^2) E + i k l2^2 / 2
    l1, l2, k = mp.mpf(l1), mp.mpf(l2), mp.mpf(k)
    coeffs = [-1, -1j * k / 2, l1 ** 2 + l2 ** 2, 1j * k * l2 ** 2 / 2]
    roots = mp.polyroots(coeffs, maxsteps=200, extraprec=200)
    roots = sorted((complex(r) for r in roots), key=lambda z: (-round(z.imag, 12), -z.real))
    return [cpx(r) for r in roots]


def ep3_points(k):
    a = mp.sqrt(2) * k / (3 * mp.sqrt(3))
    b = k / (6 * mp.sqrt(3))
    return [[float(a), float(b)], [float(-a), float(b)], [float(-a), float(-b)],
            [float(a), float(-b)]]


def main():
    out = {}
    out["ep3_k1"] = ep3_points(1)
    out["ep3_k2"] = ep3_points(2)
    two_pi = float(2 * mp.pi)
    pts = [(two_pi, two_pi, 5.0), (1.0, 0.3, 2.0), (3.0, 4.0, 0.0), (0.2, 0.02, 1.0),
           (0.0, 0.0, 1.0), (two_pi * 0.21, two_pi * 0.31, 5.0), (-2.0, 1.5, 3.0)]
    out["chain_spectra"] = [{"lambda1": a, "lambda2": b, "kappa": c,
                             "energies": chain_roots(a, b, c)} for a, b, c in pts]
    out["bessel"] = [{"n": n, "x": x, "value": float(mp.besselj(n, x))}
                     for n, x in [(0, 0.0), (1, 0.5), (2, 1.0), (1, 1.84118), (0, 2.404825557695773),
                                  (3, 7.5), (5, 12.0), (20, 30.0), (0, 30.0), (7, 0.3)]]
    # two-mode chain, closed form E = -ik/4 +- sqrt(l^2 - k^2/16), at 50 digits
    k, l = mp.mpf(4), mp.mpf(2)
    s = mp.sqrt(l ** 2 - k ** 2 / 16)
    out["two_mode_k4_l2"] = [cpx(-1j * k / 4 + s), cpx(-1j * k / 4 - s)]
    # RK4 reference: exact propagation with the matrix exponential
    h = np.array([[-0.5j * 1.0, 0.8], [0.8, 0.0]])
    psi = expm(-1j * h * 2.0) @ np.array([0, 1], dtype=complex)
    out["two_mode_expm"] = {"kappa": 1.0, "lambda1": 0.8, "t": 2.0,
                            "psi": [cpx(c) for c in psi]}
    out["ep3_concurrences"] = [float(mp.sqrt(mp.mpf(2) / 3)), float(mp.sqrt(mp.mpf(1) / 3)),
                               float(mp.sqrt(mp.mpf(2) / 9))]
    out["kappa_over_8lambda"] = float(5 / (8 * 2 * mp.pi))
    path = Path(__file__).with_name("data") / "oracles.json"
    path.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
