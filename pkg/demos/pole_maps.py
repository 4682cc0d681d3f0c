"""Poles of the relaxation symbol and their certification.

For each mode the symbol ``omega(lam, s)`` is reduced to a polynomial by the
substitution ``s = z^q``; roots on the principal sheet are polished by Newton's
method and the count is confirmed by the argument principle. The script prints
the first few poles for the CWCH model at two wave speeds, then follows the
fractional Zener poles as the diffusivity of sound ``delta`` grows.

Run: ``python3 demos/pole_maps.py``
"""

from __future__ import annotations

import numpy as np

from fracwest import CWCH, FZ
from fracwest.poles import Symbol, delta_sensitivity, find_poles


def main():
    for c in (1.0, 5.0):
        for alpha in (0.5, 0.9):
            print(f"CWCH b=0.1 beta=1 alpha={alpha} c={c}")
            for n in (1, 2, 3, 10):
                ps = find_poles(Symbol(CWCH(0.1, 1.0, alpha), c, (n * np.pi) ** 2))
                p = ps.s[np.argmax(ps.s.imag)]
                print(f"  n={n:2d}: p = {p.real:+.5f} {p.imag:+.5f}i   "
                      f"(certificate {ps.branch_count_certificate}, right half plane {ps.rhp_count})")

    print("\nfractional Zener, b2=0.05, alpha=0.5, first mode: poles move left as delta grows")
    lam = np.pi**2
    for delta in (0.0, 0.1, 1.0):
        ps = find_poles(Symbol(FZ.from_delta(0.05, delta, 1.0, 0.5), 1.0, lam))
        print(f"  delta={delta:4.1f}: max Re = {ps.max_real_part():+.5f}")
    sens = delta_sensitivity(Symbol(FZ.from_delta(0.05, 0.0, 1.0, 0.5), 1.0, lam))
    print(f"  at delta=0: dr/ddelta = {sens.dr_ddelta:.5f}, dtheta/ddelta = {sens.dtheta_ddelta:.5f}")


if __name__ == "__main__":
    main()
