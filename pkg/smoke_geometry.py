from fractions import Fraction

from linfty.algebra import (LinftyBundle, Morphism, check_mc, check_morphism,
                            compose)
from linfty.geometry import (ClassicalPoint, classical_point, cohomology,
                             curvature_derivative, find_classical_points,
                             is_etale_at, is_fibration, mapping_cone,
                             pullback_fibration, shifted_tangent,
                             tangent_complex, virtual_dimension)
from linfty.graded import GradedSpace, MultiOp, OpFamily
from linfty.poly import Poly

x = Poly.variable("x")
y = Poly.variable("y")

# (R, L^1 = <e>, lam0 = x^2 e): derived critical-locus toy model
L = GradedSpace.build({1: 1}, labels={1: ["e"]})
B = LinftyBundle(("x",), L, MultiOp.zero(1, 1, L, L),
                 OpFamily(1, L, L, {0: MultiOp(0, 1, L, L, {(): {(1, 0): x * x}})}))
assert check_mc(B.as_algebra()).ok
P = classical_point(B, (0,))
cx = tangent_complex(B, P)
assert cx.dims == {0: 1, 1: 1}
assert cohomology(cx) == {0: 1, 1: 1}
assert virtual_dimension(B) == 0
exact, loose = find_classical_points(B)
assert [p.coords for p in exact] == [(Fraction(0),)], (exact, loose)
print("x^2 tangent complex ok")

# circle x^2 + y^2 - 1 in R^2
L2 = GradedSpace.build({1: 1}, labels={1: ["e"]})
circ_b = LinftyBundle(("x", "y"), L2, MultiOp.zero(1, 1, L2, L2),
                      OpFamily(1, L2, L2, {0: MultiOp(0, 1, L2, L2, {(): {
                          (1, 0): x * x + y * y - 1}})}))
Pc = classical_point(circ_b, (1, 0))
cxc = tangent_complex(circ_b, Pc)
assert cohomology(cxc) == {0: 1}, cohomology(cxc)
assert virtual_dimension(circ_b) == 1
exact, loose = find_classical_points(circ_b, grid=5)
print("circle points:", [tuple(map(str, p.coords)) for p in exact][:4], "loose:", len(loose))

# shifted tangent of the x^2 model: check_mc adjudicates the sign rules
TB = shifted_tangent(B)
rep = check_mc(TB.as_algebra())
assert rep.ok, rep
assert dict(TB.fiber.dims) == {1: 2, 2: 1}
print("shifted tangent (amplitude 1) satisfies the structure equation")

# amplitude-2 bundle with nonzero lam1 and lam2, then its shifted tangent
F2 = GradedSpace.build({1: 1, 2: 1}, labels={1: ["e"], 2: ["f"]})
lam0 = MultiOp(0, 1, F2, F2, {(): {(1, 0): x * y}})
lam1 = MultiOp(1, 1, F2, F2, {((1, 0),): {(2, 0): x}})
# MC arity 0: lam1(lam0) = x*(x*y) must vanish -> adjust: lam0 in ker lam1
lam0 = MultiOp(0, 1, F2, F2, {(): {}})
lam2 = MultiOp(2, 1, F2, F2, {((1, 0), (1, 0)): {(2, 0): y}})
amp2 = LinftyBundle(("x", "y"), F2, MultiOp.zero(1, 1, F2, F2),
                    OpFamily(1, F2, F2, {1: lam1, 2: lam2}))
rep = check_mc(amp2.as_algebra())
assert rep.ok, rep
T2 = shifted_tangent(amp2)
rep = check_mc(T2.as_algebra())
assert rep.ok, rep
print("shifted tangent (amplitude 2, lam1+lam2) satisfies the structure equation")

# fibration: projection (x,y) -> x with fiber map, then pull back along x=u^2
E = GradedSpace.build({1: 1}, labels={1: ["eps"]})
u = Poly.variable("u")
lamN = OpFamily(1, E, E, {0: MultiOp(0, 1, E, E, {(): {(1, 0): u * u}})})
N = LinftyBundle(("u",), E, MultiOp.zero(1, 1, E, E), lamN)
LM = GradedSpace.build({1: 2}, labels={1: ["l0", "l1"]})
lamM = OpFamily(1, LM, LM, {0: MultiOp(0, 1, LM, LM, {(): {
    (1, 0): x * x, (1, 1): x * y}})})
M = LinftyBundle(("x", "y"), LM, MultiOp.zero(1, 1, LM, LM), lamM)
phi1 = MultiOp(1, 0, LM, E, {((1, 0),): {(1, 0): Fraction(1)}})
p = Morphism(M, N, (x,), OpFamily(0, LM, E, {1: phi1}))
assert check_morphism(p).ok
fr = is_fibration(p, samples=[(0, 0), (1, 2)])
assert fr.ok, fr

w = Poly.variable("w")
LW = GradedSpace.build({1: 1}, labels={1: ["m0"]})
lamW = OpFamily(1, LW, LW, {0: MultiOp(0, 1, LW, LW, {(): {(1, 0): w ** 4}})})
W = LinftyBundle(("w",), LW, MultiOp.zero(1, 1, LW, LW), lamW)
psi1 = MultiOp(1, 0, LW, E, {((1, 0),): {(1, 0): Fraction(1)}})
f = Morphism(W, N, (w * w,), OpFamily(0, LW, E, {1: psi1}))
assert check_morphism(f).ok

res = pullback_fibration(p, f)
print("pullback base coords:", res.bundle.coords,
      "fiber dims:", dict(res.bundle.fiber.dims),
      "vdim:", virtual_dimension(res.bundle))
print("geometry smoke ok")
