"""Mode stability: the connection problem and the spectral gap.

A spectral point of the linearized operator corresponds to a solution
of a second-order ODE analytic at both r = 0 and r = 1.  The scan
builds Frobenius branches at the two singular points, measures their
Wronskian mismatch at the midpoint, and locates zeros by winding
numbers.  The only root in the half plane is the gauge eigenvalue
lambda = 1 - for odd n it sits on the resonance lattice, where the
criterion degenerates and the pivot obstruction takes over.
"""

from similab import SpectralProblem, connection_mismatch, eigenvalue_scan

print("connection mismatch along the real axis (n=5):")
for lam in (0.25, 0.5, 0.75, 0.9, 1.0, 1.1, 1.5, 2.0, 2.5):
    w = connection_mismatch(SpectralProblem(5, lam))
    print(f"  lambda={lam:5.2f}: |mismatch| = {abs(w):.3e}")

for n in (5, 7, 9):
    roots = eigenvalue_scan(n, (-0.1, 3.0, -2.0, 2.0))
    print(f"\nn={n}: scan of [-0.1, 3] x [-2i, 2i] found {len(roots)} root(s)")
    for r in roots:
        where = "resonance lattice" if r.on_lattice else "Wronskian zero"
        print(f"  lambda = {r.lam.real:.9f} + {r.lam.imag:.1e} i   ({where}, "
              f"series residual {r.residual:.1e})")
