"""
Exact algebra over F2[tau]
==========================

The computational core: polynomials as bit-masks, Smith normal form over
a principal ideal domain, and homology of presented modules.
"""

from adamscharts.taualgebra import (
    PolyMatrix,
    PresentedModule,
    TAU,
    homology,
    poly_gcd,
    snf,
    tau_power,
)

# polynomials are ints: bit i is the coefficient of tau^i
p = tau_power(2) ^ TAU          # tau^2 + tau
print(f"gcd(tau^2 + tau, tau) = {poly_gcd(p, TAU):#b}")

# Smith normal form with unimodular transforms
m = PolyMatrix.from_rows([[TAU, tau_power(2)], [0, TAU]])
res = snf(m)
print("snf diagonal:", [f"{d:#b}" for d in res.diagonal])

# homology: a free class mapping onto tau times a generator dies and
# leaves an order-one torsion class at the target
source = PresentedModule.of([None])
d_out = PolyMatrix.from_rows([[TAU]])
print(
    "homology at the source:",
    homology(source, PolyMatrix.zero(1, 0), d_out).orders,
)
target = PresentedModule.of([None])
d_in = PolyMatrix.from_rows([[TAU]])
print(
    "homology at the target:",
    homology(target, d_in, PolyMatrix.zero(0, 1)).orders,
)

# torsion relations ride along as presentation rows: a tau^2-torsion class
# mapping onto a tau-torsion one keeps a tau-torsion kernel
mid = PresentedModule.of([2])
h = homology(
    mid,
    PolyMatrix.zero(1, 0),
    PolyMatrix.from_rows([[1]]),
    target=PresentedModule.of([1]),
)
print("torsion kernel:", h.orders)
