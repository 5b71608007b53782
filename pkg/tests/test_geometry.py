"""Classical loci, tangent complexes, etale maps, fibrations, shifted tangents."""

import random
from fractions import Fraction

import pytest

from linfty.algebra import (LinftyBundle, Morphism, check_mc, check_morphism,
                            compose, identity_morphism)
from linfty.geometry import (ClassicalPoint, CochainComplex, classical_point,
                             curvature_derivative, curvature_residual,
                             find_classical_points, is_etale_at, is_fibration,
                             is_weak_equivalence, mapping_cone,
                             pullback_fibration, shifted_tangent,
                             tangent_complex, tangent_map, virtual_dimension)
from linfty.graded import GradedSpace, MultiOp, OpFamily
from linfty.poly import Poly
from linfty.samples import (plain_bundle, projection_morphism_onto,
                            product_bundle, random_bundle)

x = Poly.variable("x")
y = Poly.variable("y")


def section_bundle(coords, sections, ranks=None):
    """Quasi-smooth model: curvature given by a tuple of base functions."""
    fiber = GradedSpace.build({1: len(sections)})
    lam0 = MultiOp(0, 1, fiber, fiber,
                   {(): {(1, i): s for i, s in enumerate(sections)}})
    return LinftyBundle(tuple(coords), fiber, MultiOp.zero(1, 1, fiber, fiber),
                        OpFamily(1, fiber, fiber, {0: lam0}))


def square_bundle():
    return section_bundle(("x",), (x ** 2,))


# -- complexes -------------------------------------------------------------------

def test_cochain_complex_with_zero_differential():
    cx = CochainComplex({0: 2, 1: 3}, {})
    assert cx.cohomology("both") == {0: 2, 1: 3}
    assert cx.euler_characteristic() == -1


def test_cochain_complex_with_identity_differential():
    cx = CochainComplex({0: 2, 1: 2}, {0: [[1, 0], [0, 1]]})
    assert cx.cohomology("both") == {}
    assert cx.is_acyclic()


def test_cochain_complex_rejects_nonzero_composite():
    with pytest.raises(ValueError):
        CochainComplex({0: 1, 1: 1, 2: 1}, {0: [[1]], 1: [[1]]})


def test_cochain_complex_rejects_bad_shapes():
    with pytest.raises(ValueError):
        CochainComplex({0: 2, 1: 1}, {0: [[1]]})


def test_rank_methods_agree_on_random_complexes():
    rng = random.Random(12)
    for _ in range(10):
        n0, n1 = rng.randint(1, 4), rng.randint(1, 4)
        mat = [[Fraction(rng.randint(-3, 3)) for _ in range(n0)]
               for _ in range(n1)]
        cx = CochainComplex({0: n0, 1: n1}, {0: mat})
        assert cx.cohomology("rref") == cx.cohomology("bareiss")


def test_euler_characteristic_matches_betti_alternation():
    rng = random.Random(21)
    for _ in range(6):
        n0, n1 = rng.randint(1, 4), rng.randint(1, 4)
        mat = [[Fraction(rng.randint(-2, 2)) for _ in range(n0)]
               for _ in range(n1)]
        cx = CochainComplex({0: n0, 1: n1}, {0: mat})
        betti = cx.cohomology("both")
        assert cx.euler_characteristic() == betti.get(0, 0) - betti.get(1, 0)


def test_mapping_cone_of_identity_is_acyclic():
    cx = CochainComplex({0: 2, 1: 1}, {0: [[1, 2]]})
    cone = mapping_cone({0: [[1, 0], [0, 1]], 1: [[1]]}, cx, cx)
    assert cone.is_acyclic()


# -- classical locus ----------------------------------------------------------------

def test_classical_point_accepts_zeros_of_the_curvature():
    b = square_bundle()
    assert classical_point(b, (0,)).coords == (Fraction(0),)
    assert curvature_residual(b, (2,)) == Fraction(4)


def test_classical_point_rejects_other_points():
    with pytest.raises(ValueError):
        classical_point(square_bundle(), (1,))


def test_find_classical_points_two_simple_roots():
    b = section_bundle(("x",), (x ** 2 - 1,))
    exact, loose = find_classical_points(b)
    assert [p.coords for p in exact] == [(-1,), (1,)]
    assert loose == []


def test_find_classical_points_snaps_double_root():
    exact, loose = find_classical_points(square_bundle())
    assert [p.coords for p in exact] == [(0,)]
    assert loose == []


def test_find_classical_points_on_a_circle_returns_rational_hits_only():
    b = section_bundle(("x", "y"), (x ** 2 + y ** 2 - 1,))
    exact, _ = find_classical_points(b)
    for p in exact:
        assert curvature_residual(b, p.coords) == 0


# -- tangent complex -------------------------------------------------------------------

def test_tangent_complex_of_the_squared_function():
    b = square_bundle()
    cx = tangent_complex(b, classical_point(b, (0,)))
    assert cx.dims == {0: 1, 1: 1}
    assert cx.cohomology("both") == {0: 1, 1: 1}


def test_tangent_complex_of_a_simple_zero_is_acyclic():
    b = section_bundle(("x",), (x,))
    cx = tangent_complex(b, classical_point(b, (0,)))
    assert cx.is_acyclic()


def test_curvature_derivative_rows():
    b = square_bundle()
    assert curvature_derivative(b, classical_point(b, (0,))) == [[0]]
    c = section_bundle(("x", "y"), (x ** 2 + y - 1,))
    assert curvature_derivative(c, classical_point(c, (0, 1))) == [[0, 1]]


def test_tangent_complex_includes_fiber_differential():
    rng = random.Random(31)
    b = random_bundle(rng, ("x",), amplitude=3, max_dim=2)
    exact, _ = find_classical_points(b)
    if not exact:
        pytest.skip("sampled bundle has no rational classical point")
    cx = tangent_complex(b, exact[0])
    assert cx.euler_characteristic() == virtual_dimension(b)


# -- virtual dimension --------------------------------------------------------------------

def test_virtual_dimension_formulas():
    assert virtual_dimension(plain_bundle(("x", "y", "z"))) == 3
    assert virtual_dimension(square_bundle()) == 0
    fiber = GradedSpace.build({1: 2, 2: 3})
    amp2 = LinftyBundle(("x",), fiber, MultiOp.zero(1, 1, fiber, fiber),
                        OpFamily(1, fiber, fiber, {}))
    assert virtual_dimension(amp2) == 1 - 2 + 3


# -- etale and weak equivalence ----------------------------------------------------------

def test_identity_is_etale():
    b = square_bundle()
    rep = is_etale_at(identity_morphism(b), classical_point(b, (0,)))
    assert rep.ok and rep.cone_betti == {}


def test_identity_is_a_weak_equivalence():
    b = square_bundle()
    rep = is_weak_equivalence(identity_morphism(b), [(0,)], [(0,)])
    assert rep.ok and rep.bijection_ok
    assert rep.note == ("certified on the supplied candidate loci only; "
                        "global statements need a complete point list")


def test_weak_equivalence_rejects_point_count_mismatch():
    # the empty locus of x^2 + 1 against a single point downstairs
    b = section_bundle(("x",), (x ** 2 + 1,))
    pt = plain_bundle(())
    m = Morphism(b, pt, (), OpFamily(0, b.fiber, pt.fiber, {}))
    rep = is_weak_equivalence(m, [], [()])
    assert not rep.ok and not rep.bijection_ok


def test_weak_equivalence_rejects_non_etale_map():
    # fold map x -> x^2 between two copies of the line
    src = plain_bundle(("x",))
    dst = plain_bundle(("z",))
    m = Morphism(src, dst, (x ** 2,), OpFamily(0, src.fiber, dst.fiber, {}))
    rep = is_weak_equivalence(m, [(0,)], [(0,)])
    assert rep.bijection_ok and not rep.ok
    assert not rep.etale[0].ok


def test_two_out_of_three_on_a_concrete_triple():
    # scaling followed by scaling: all three maps are weak equivalences
    b = plain_bundle(("x",))
    c = plain_bundle(("z",))
    f = Morphism(b, c, (2 * x,), OpFamily(0, b.fiber, c.fiber, {}))
    g = Morphism(c, b, (Fraction(1, 2) * Poly.variable("z"),),
                 OpFamily(0, c.fiber, b.fiber, {}))
    h = compose(g, f)
    pts = [(0,)]
    assert is_weak_equivalence(f, pts, pts).ok
    assert is_weak_equivalence(g, pts, pts).ok
    assert is_weak_equivalence(h, pts, pts).ok


# -- fibrations -------------------------------------------------------------------------

def test_projection_to_a_point_is_a_fibration():
    b = square_bundle()
    pt = plain_bundle(())
    m = Morphism(b, pt, (), OpFamily(0, b.fiber, pt.fiber, {}))
    assert is_fibration(m, samples=[(0,)]).ok


def test_point_into_the_line_is_not_a_fibration():
    pt = plain_bundle(())
    line = plain_bundle(("x",))
    m = Morphism(pt, line, (Poly.constant(0),), OpFamily(0, pt.fiber, line.fiber, {}))
    rep = is_fibration(m, samples=[()])
    assert not rep.ok and not rep.submersion_ok
    assert rep.note == "rank conditions checked at the supplied sample points"


def test_product_projection_is_a_fibration():
    rng = random.Random(44)
    a = random_bundle(rng, ("x",), coeff_degree=1)
    b = random_bundle(rng, ("y",), coeff_degree=1)
    prod, _, _ = product_bundle(a, b)
    m = projection_morphism_onto(prod, a, first=True)
    assert is_fibration(m, samples=[(0, 0)]).ok


def test_fibration_rejects_rank_jumps():
    # fiber map scaled by the base coordinate drops rank at x = 0
    b = square_bundle()
    phi1 = MultiOp(1, 0, b.fiber, b.fiber, {((1, 0),): {(1, 0): x}})
    m = Morphism(b, b, (Poly.variable("x"),),
                 OpFamily(0, b.fiber, b.fiber, {1: phi1}))
    with pytest.raises(ValueError):
        is_fibration(m, samples=[(0,), (1,)])


# -- pullbacks of fibrations ----------------------------------------------------------------

def test_pullback_of_plane_submersions():
    r2 = plain_bundle(("u1", "u2"))
    r2b = plain_bundle(("v1", "v2"))
    r1 = plain_bundle(("z",))
    f = Morphism(r2, r1, (Poly.variable("u1"),), OpFamily(0, r2.fiber, r1.fiber, {}))
    g = Morphism(r2b, r1, (Poly.variable("v1"),), OpFamily(0, r2b.fiber, r1.fiber, {}))
    pb = pullback_fibration(f, g)
    assert virtual_dimension(pb.bundle) == 3
    assert check_mc(pb.bundle.as_algebra()).ok
    assert check_morphism(pb.to_fibration_source).ok
    assert check_morphism(pb.to_other_source).ok
    # the two legs agree after mapping down to the shared target
    left = compose(f, pb.to_fibration_source)
    right = compose(g, pb.to_other_source)
    assert left.base_map == right.base_map


def test_pullback_along_a_point_recovers_the_fiber():
    b = square_bundle()
    pt = plain_bundle(())
    fib = Morphism(b, pt, (), OpFamily(0, b.fiber, pt.fiber, {}))
    other = identity_morphism(pt)
    pb = pullback_fibration(fib, other)
    assert virtual_dimension(pb.bundle) == virtual_dimension(b)
    assert check_morphism(pb.to_fibration_source).ok


def test_pullback_of_a_weak_equivalence_along_a_fibration():
    # pulling the identity back along a product projection stays a weak
    # equivalence at the supplied points
    r2 = plain_bundle(("u1", "u2"))
    r1 = plain_bundle(("z",))
    f = Morphism(r2, r1, (Poly.variable("u1"),), OpFamily(0, r2.fiber, r1.fiber, {}))
    w = identity_morphism(r1)
    pb = pullback_fibration(f, w)
    assert is_weak_equivalence(pb.to_fibration_source,
                               [(0, 0)], [(0, 0)]).ok


# -- shifted tangent bundle ------------------------------------------------------------------

def test_shifted_tangent_of_a_plain_manifold():
    st = shifted_tangent(plain_bundle(("x", "y")))
    assert st.fiber.dims == {1: 2}
    assert all(st.fiber.is_dt(k) for k in st.fiber.keys())
    assert st.ops.is_zero() or all(st.ops.op(k).is_zero() for k in st.ops.arities())
    assert check_mc(st.as_algebra()).ok


def test_shifted_tangent_of_the_squared_function():
    st = shifted_tangent(square_bundle())
    assert st.fiber.dims == {1: 2, 2: 1}
    assert check_mc(st.as_algebra()).ok
    # tangent direction dx dt maps to 2x e dt under the derived bracket
    assert st.ops.op(1).coeffs == {((1, 0),): {(2, 0): 2 * x}}
    # original curvature rides along on the undifferentiated copy
    assert st.ops.op(0).coeffs == {(): {(1, 1): x ** 2}}


def test_shifted_tangent_doubles_the_virtual_dimension_count():
    rng = random.Random(77)
    b = random_bundle(rng, ("x", "y"))
    st = shifted_tangent(b)
    assert check_mc(st.as_algebra()).ok
    assert virtual_dimension(st) == 0


def test_tangent_map_shapes():
    b = square_bundle()
    m = identity_morphism(b)
    src_cx, dst_cx, maps = tangent_map(m, classical_point(b, (0,)))
    assert src_cx.dims == dst_cx.dims == {0: 1, 1: 1}
    assert maps[0] == [[1]]
