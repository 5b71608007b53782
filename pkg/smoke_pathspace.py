"""Scratch checks for the path space layer."""

import time
from fractions import Fraction

from linfty.algebra import (LinftyBundle, check_mc, check_morphism)
from linfty.geometry import tangent_complex, virtual_dimension
from linfty.graded import GradedSpace, MultiOp, OpFamily
from linfty.poly import Poly
from linfty.pathspace import (Submanifold, axis_submanifold, build_path_model,
                              derived_intersection, derived_path_space,
                              factorize_diagonal, graph_submanifold,
                              homotopy_fibered_product, path_curved_structure,
                              path_space_manifold, verify_factorization,
                              zero_locus_model, _inclusion_morphism,
                              _plain_bundle)

t0 = time.time()


def square_model():
    fiber = GradedSpace.build({1: 1}, labels={1: ["e"]})
    lam0 = MultiOp(0, 1, fiber, fiber, {(): {(1, 0): Poly.variable("x") ** 2}})
    return LinftyBundle(("x",), fiber, MultiOp.zero(1, 1, fiber, fiber),
                        OpFamily(1, fiber, fiber, {0: lam0}))


bundle = square_model()

# --- rational-endpoint curved structure, a(t) = 1/2 - t/6 ------------------
alg = path_curved_structure(bundle, (Fraction(1, 2),), (Fraction(1, 3),), cap=6)
rep = check_mc(alg)
assert rep.ok, rep
model = build_path_model(bundle, cap=6)
lam0 = alg.ops.op(0).coeffs[()]
assert lam0[model.base_dt[0]] == Fraction(-1, 6)
assert lam0[model.plain[((1, 0), 0)]] == Fraction(1, 4)
assert lam0[model.plain[((1, 0), 1)]] == Fraction(-1, 6)
assert lam0[model.plain[((1, 0), 2)]] == Fraction(1, 36)
print("rational path structure ok", time.time() - t0)

# --- a(t) = t gives curvature t^2 ------------------------------------------
alg01 = path_curved_structure(bundle, (0,), (1,), cap=6)
lam0 = alg01.ops.op(0).coeffs[()]
assert lam0[model.base_dt[0]] == 1
assert lam0[model.plain[((1, 0), 2)]] == 1
assert model.plain[((1, 0), 0)] not in lam0
assert model.plain[((1, 0), 1)] not in lam0
print("a(t)=t pullback ok", time.time() - t0)

# --- symbolic derived path space -------------------------------------------
dps = derived_path_space(bundle, cap=6)
pm = dps.bundle
assert pm.coords == ("x_0", "x_1")
assert pm.fiber.dims == {1: 3, 2: 1}
assert pm.amplitude == 2

m = dps.model
p = Poly.variable("x_0")
q = Poly.variable("x_1")
nu0 = pm.ops.op(0).coeffs[()]
tm = m.h_base_dt[0]
e0 = m.h_end[((1, 0), 0)]
e1 = m.h_end[((1, 0), 1)]
avg = m.h_avg[(1, 0)]
assert nu0[tm] == q - p
assert nu0[e0] == p ** 2
assert nu0[e1] == q ** 2
assert avg not in nu0

nu1 = pm.ops.op(1)
vec = nu1.evaluate_basis((tm,))
assert set(vec) == {avg} and vec[avg] == p + q, vec
assert nu1.evaluate_basis((e0,)) == {}
assert nu1.evaluate_basis((e1,)) == {}
# twisted differential on end values: alpha -> -(alpha(1)-alpha(0)) dt
dvec0 = pm.delta.evaluate_basis((e0,))
dvec1 = pm.delta.evaluate_basis((e1,))
assert dvec0 == {avg: Fraction(1)}
assert dvec1 == {avg: Fraction(-1)}
for k, op in pm.ops.ops.items():
    if k >= 2:
        assert op.is_zero(), k
print("symbolic path space ok", time.time() - t0)

# constant path reduces to the shifted tangent at the point
at = pm.at_point((Fraction(1, 2), Fraction(1, 2)))
cur = at.ops.op(0).coeffs[()]
assert cur == {e0: Fraction(1, 4), e1: Fraction(1, 4)}, cur

# --- factorization of the diagonal -----------------------------------------
fz = factorize_diagonal(bundle, cap=6)
rep = verify_factorization(fz, [(Fraction(0),)])
assert rep.ok, rep
print("factorization ok", time.time() - t0)

# --- plain manifold path space ----------------------------------------------
mdps = path_space_manifold(1, cap=4)
assert virtual_dimension(mdps.bundle) == 1
from linfty.geometry import classical_point
cx = tangent_complex(mdps.bundle, classical_point(mdps.bundle, (2, 2)))
betti = cx.cohomology("both")
assert betti.get(0, 0) == 1 and betti.get(1, 0) == 0, betti
print("manifold path space ok", time.time() - t0)

# --- intersections -----------------------------------------------------------
ax = axis_submanifold(0, 2)
ay = axis_submanifold(1, 2)
inter = derived_intersection(ax, ay, cap=4)
assert inter.virtual_dim == 0
assert len(inter.points) == 1
pt = inter.points[0]
assert pt.h0 == 0 and pt.h1 == 0 and pt.transversal
assert pt.ambient == (0, 0)
print("axis/axis ok", time.time() - t0)

u = Poly.variable("u")
par = graph_submanifold(u * u)
inter2 = derived_intersection(ax, par, cap=4)
assert inter2.virtual_dim == 0
assert len(inter2.points) == 1
pt = inter2.points[0]
assert pt.h0 == 1 and pt.h1 == 1 and not pt.transversal
assert pt.ambient == (0, 0)
print("axis/parabola ok", time.time() - t0)

# two distinct points of the line: empty locus, virtual dimension -1
p0 = Submanifold((), (Poly.constant(0),), name="pt0")
p1 = Submanifold((), (Poly.constant(1),), name="pt1")
inter3 = derived_intersection(p0, p1, cap=4)
assert inter3.virtual_dim == -1
assert inter3.points == []
from linfty.geometry import find_classical_points
exact, loose = find_classical_points(inter3.bundle)
assert exact == [] and loose == []
print("disjoint points ok", time.time() - t0)

# full-vs-full: virtual dimension = dim M and zero displacement curvature
idm = Submanifold(("u0", "u1"), (Poly.variable("u0"), Poly.variable("u1")))
idm2 = Submanifold(("v0", "v1"), (Poly.variable("v0"), Poly.variable("v1")))
inter4 = derived_intersection(idm, idm2, points=[(1, 2, 1, 2)], cap=4)
assert inter4.virtual_dim == 2
assert inter4.points[0].transversal
assert inter4.points[0].h0 == 2 and inter4.points[0].h1 == 0
print("self intersection ok", time.time() - t0)

# --- zero locus comparison ---------------------------------------------------
x = Poly.variable("x")
zl = zero_locus_model(("x",), (x * x,), cap=4)
assert zl.weak_equiv.ok, zl.weak_equiv
assert [tuple(p.coords) for p in zl.points] == [(0,)]
print("zero locus ok", time.time() - t0)

print("ALL PATHSPACE SMOKE PASSED", time.time() - t0)
