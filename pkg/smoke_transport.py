from fractions import Fraction

from linfty.graded import GradedSpace, MultiOp, OpFamily, bullet, circ
from linfty.algebra import (CurvedAlgebra, LinftyBundle, Morphism, check_mc,
                            check_morphism, compose, linearize_fibration,
                            transport_source, transport_target)
from linfty.poly import Poly

# --- transport_source on the worked contraction's ambient algebra ---------
V = GradedSpace.build({1: 2, 2: 1, 3: 1}, labels={1: ["e", "a"], 2: ["f"], 3: ["g"]})
delta = MultiOp(1, 1, V, V, {((1, 1),): {(2, 0): Fraction(1)}})
lam1 = MultiOp(1, 1, V, V, {((1, 0),): {(2, 0): Fraction(1)}})
alg = CurvedAlgebra(V, delta, OpFamily(1, V, V, {1: lam1}))
rep = check_mc(alg)
assert rep.ok, rep

ell = alg.total()
psi2 = MultiOp(2, 0, V, V, {((1, 0), (1, 1)): {(2, 0): Fraction(3)},
                            ((1, 0), (2, 0)): {(3, 0): Fraction(-2)}})
psi = OpFamily(0, V, V, {1: MultiOp.identity(V), 2: psi2})
ellp = transport_source(psi, ell)
assert circ(psi, ellp) == bullet(ell, psi)
alg2 = CurvedAlgebra(V, MultiOp.zero(1, 1, V, V),
                     OpFamily(1, V, V, dict(ellp.ops)))
rep2 = check_mc(alg2)
assert rep2.ok, rep2
print("transport_source ok; transported arities:", sorted(ellp.ops))

# round trip: transport_target along psi should give back ell
back = transport_target(psi, ellp)
assert back == ell
print("transport_target round trip ok")

# --- linearize_fibration on a rank-2 -> rank-1 projection ------------------
x, y, u = Poly.variable("x"), Poly.variable("y"), Poly.variable("u")
L = GradedSpace.build({1: 2}, labels={1: ["l0", "l1"]})
E = GradedSpace.build({1: 1}, labels={1: ["e0"]})
lam0 = MultiOp(0, 1, L, L, {(): {(1, 0): x * x, (1, 1): x * y}})
src = LinftyBundle(("x", "y"), L, MultiOp.zero(1, 1, L, L),
                   OpFamily(1, L, L, {0: lam0}))
mu0 = MultiOp(0, 1, E, E, {(): {(1, 0): u * u}})
dst = LinftyBundle(("u",), E, MultiOp.zero(1, 1, E, E),
                   OpFamily(1, E, E, {0: mu0}))
phi1 = MultiOp(1, 0, L, E, {((1, 0),): {(1, 0): Fraction(1)}})
m = Morphism(src, dst, (x,), OpFamily(0, L, E, {1: phi1}))
assert check_morphism(m).ok

lin = linearize_fibration(m)
iso, linear, mid = lin.iso, lin.linear, lin.middle
assert check_morphism(iso).ok and check_morphism(linear).ok
assert compose(linear, iso).phi == m.phi
print("linearize_fibration ok; mid fiber dims:", dict(mid.fiber.dims))
print("mid curvature:", {mid.fiber.label(k): c for k, c in
                         mid.ops.op(0).evaluate_basis(()).items()})
print("complement dims:", dict(lin.complement.dims))
