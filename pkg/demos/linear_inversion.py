"""Recovering a small nonlinearity perturbation from residues of one trace.

The linearised trace at ``kappa = 0`` is a sum of damped exponentials at the
known poles. Fitting their amplitudes by least squares and dividing by the
residues of ``1/omega`` gives the modal coefficients of ``dkappa * f^2``.
The fit matrix becomes ill-conditioned as damping pushes the poles to the left.

Run: ``python3 demos/linear_inversion.py``
"""

from __future__ import annotations

import numpy as np

from fracwest import CWCH, TimeGrid, build_basis
from fracwest.inversion import (
    Excitation,
    extract_residues,
    masked_relative_error,
    mode_poles,
    recover_coefficients,
    synthesize_trace,
)


def main():
    basis = build_basis("dd", 8)
    grid = TimeGrid(5.0, 4096)
    exc = Excitation(np.sin(np.pi * basis.x))
    truth = 0.1 * basis.x * (1 - basis.x)
    x0 = 0.3
    for b in (0.01, 0.1, 1.0):
        model = CWCH(b, 1.0, 1.0)
        trace = synthesize_trace(truth, exc, model, basis, grid, x0)
        res = extract_residues(trace, mode_poles(model, basis, 4), 4)
        rec = recover_coefficients(res, exc, model, basis, x0, f_floor=0.3)
        err = masked_relative_error(rec, truth, basis.weights)
        print(f"b={b:5.2f}: condition number {res.condition:10.3e}, masked relative error {err:.3e}")
        print("          a = " + " ".join(f"{v:+.3e}" for v in rec.a))


if __name__ == "__main__":
    main()
