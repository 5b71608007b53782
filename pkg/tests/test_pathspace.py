"""Derived path spaces, diagonal factorization, intersections, zero loci."""

import random
from fractions import Fraction

import pytest

from linfty.algebra import LinftyBundle, Morphism, check_mc, check_morphism
from linfty.geometry import (classical_point, find_classical_points,
                             tangent_complex, virtual_dimension)
from linfty.graded import GradedSpace, MultiOp, OpFamily, bullet
from linfty.algebra import op_then
from linfty.poly import (DegreeCapError, PathSection, Poly, path_eta, pi_con,
                         pullback)
from linfty.pathspace import (Submanifold, axis_submanifold, build_path_model,
                              derived_intersection, derived_path_space,
                              factorize_diagonal, graph_submanifold,
                              homotopy_fibered_product, path_curved_structure,
                              path_space_manifold, required_t_degree,
                              verify_factorization, zero_locus_model)
from linfty.samples import plain_bundle

x = Poly.variable("x")


def square_bundle():
    fiber = GradedSpace.build({1: 1}, labels={1: ["e"]})
    lam0 = MultiOp(0, 1, fiber, fiber, {(): {(1, 0): x ** 2}})
    return LinftyBundle(("x",), fiber, MultiOp.zero(1, 1, fiber, fiber),
                        OpFamily(1, fiber, fiber, {0: lam0}))


def amp2_bundle():
    """Two-step fiber with x-dependent unary operation compatible with MC."""
    x1, x2 = Poly.variable("x1"), Poly.variable("x2")
    fiber = GradedSpace.build({1: 2, 2: 1}, labels={1: ["a", "b"], 2: ["c"]})
    lam0 = MultiOp(0, 1, fiber, fiber,
                   {(): {(1, 0): x1 ** 2, (1, 1): -(x1 ** 2) * x2}})
    lam1 = MultiOp(1, 1, fiber, fiber, {((1, 0),): {(2, 0): x2},
                                        ((1, 1),): {(2, 0): Poly.constant(1)}})
    return LinftyBundle(("x1", "x2"), fiber, MultiOp.zero(1, 1, fiber, fiber),
                        OpFamily(1, fiber, fiber, {0: lam0, 1: lam1}))


@pytest.fixture(scope="module")
def square_dps():
    return derived_path_space(square_bundle(), cap=6)


@pytest.fixture(scope="module")
def amp2_dps():
    return derived_path_space(amp2_bundle(), cap=8)


# -- curved structure along a fixed path ---------------------------------------

def test_path_structure_with_rational_endpoints():
    b = square_bundle()
    alg = path_curved_structure(b, (Fraction(1, 2),), (Fraction(1, 3),), cap=6)
    assert check_mc(alg).ok
    model = build_path_model(b, cap=6)
    lam0 = alg.ops.op(0).coeffs[()]
    # displacement rides on the tangent dt generator
    assert lam0[model.base_dt[0]] == Fraction(-1, 6)
    # a(t)^2 = 1/4 - t/6 + t^2/36 spread over the t-power basis
    assert lam0[model.plain[((1, 0), 0)]] == Fraction(1, 4)
    assert lam0[model.plain[((1, 0), 1)]] == Fraction(-1, 6)
    assert lam0[model.plain[((1, 0), 2)]] == Fraction(1, 36)


def test_path_structure_unit_interval():
    b = square_bundle()
    alg = path_curved_structure(b, (0,), (1,), cap=6)
    model = build_path_model(b, cap=6)
    lam0 = alg.ops.op(0).coeffs[()]
    assert lam0[model.base_dt[0]] == 1
    assert lam0[model.plain[((1, 0), 2)]] == 1
    assert model.plain[((1, 0), 0)] not in lam0
    assert model.plain[((1, 0), 1)] not in lam0


def test_path_structure_of_a_plain_manifold_is_displacement_only():
    b = plain_bundle(("x", "y"))
    alg = path_curved_structure(b, (0, 0), (2, 5), cap=4)
    model = build_path_model(b, cap=4)
    assert alg.ops.op(0).coeffs[()] == {model.base_dt[0]: Fraction(2),
                                        model.base_dt[1]: Fraction(5)}
    assert check_mc(alg).ok


# -- degree cap management -------------------------------------------------------

def test_required_t_degree_is_coefficient_degree_times_amplitude():
    assert required_t_degree(square_bundle()) == 2
    assert required_t_degree(amp2_bundle()) == 6
    assert required_t_degree(plain_bundle(("x",))) == 0


def test_path_model_rejects_insufficient_cap():
    with pytest.raises(DegreeCapError):
        build_path_model(square_bundle(), cap=1)
    with pytest.raises(DegreeCapError, match="raise LINFTY_DEGREE_CAP"):
        build_path_model(amp2_bundle(), cap=4)
    build_path_model(amp2_bundle(), cap=6)


# -- symbolic derived path space ---------------------------------------------------

def test_square_path_space_shape(square_dps):
    pm = square_dps.bundle
    assert pm.coords == ("x_0", "x_1")
    assert pm.fiber.dims == {1: 3, 2: 1}
    assert pm.amplitude == 2
    assert check_mc(pm.as_algebra()).ok


def test_square_transferred_curvature(square_dps):
    m = square_dps.model
    pm = square_dps.bundle
    p, q = Poly.variable("x_0"), Poly.variable("x_1")
    nu0 = pm.ops.op(0).coeffs[()]
    assert nu0[m.h_base_dt[0]] == q - p
    assert nu0[m.h_end[((1, 0), 0)]] == p ** 2
    assert nu0[m.h_end[((1, 0), 1)]] == q ** 2
    assert m.h_avg[(1, 0)] not in nu0


def test_square_transferred_unary_part(square_dps):
    m = square_dps.model
    pm = square_dps.bundle
    p, q = Poly.variable("x_0"), Poly.variable("x_1")
    nu1 = pm.ops.op(1)
    avg = m.h_avg[(1, 0)]
    assert nu1.evaluate_basis((m.h_base_dt[0],)) == {avg: p + q}
    assert nu1.evaluate_basis((m.h_end[((1, 0), 0)],)) == {}
    assert nu1.evaluate_basis((m.h_end[((1, 0), 1)],)) == {}
    # twisted differential pairs end values against the averaged dt line
    assert pm.delta.evaluate_basis((m.h_end[((1, 0), 0)],)) == {avg: Fraction(1)}
    assert pm.delta.evaluate_basis((m.h_end[((1, 0), 1)],)) == {avg: Fraction(-1)}


def test_square_path_space_is_quasi_smoothly_truncated(square_dps):
    pm = square_dps.bundle
    for k in pm.ops.arities():
        if k >= 2:
            assert pm.ops.op(k).is_zero()


def test_square_unary_composite_from_first_principles(square_dps):
    # pi_con(a* dlam0) on the tangent dt line, at a few rational endpoints
    m = square_dps.model
    nu1 = square_dps.bundle.ops.op(1)
    avg = m.h_avg[(1, 0)]
    rng = random.Random(6)
    for _ in range(4):
        P = (Fraction(rng.randint(-4, 4)),)
        Q = (Fraction(rng.randint(-4, 4)),)
        s = pullback([2 * x], ("x",), P, Q, 1, dt=True)
        want = pi_con(s).components[0].eval({"t": 0})
        got = nu1.evaluate_basis((m.h_base_dt[0],))[avg].eval(
            {"x_0": P[0], "x_1": Q[0]})
        assert got == want


def test_constant_path_reduces_to_the_doubled_curvature(square_dps):
    m = square_dps.model
    at = square_dps.bundle.at_point((Fraction(1, 2), Fraction(1, 2)))
    cur = at.ops.op(0).coeffs[()]
    assert cur == {m.h_end[((1, 0), 0)]: Fraction(1, 4),
                   m.h_end[((1, 0), 1)]: Fraction(1, 4)}


def test_inclusion_and_evaluation_are_morphisms(square_dps):
    assert check_morphism(square_dps.inclusion).ok
    assert check_morphism(square_dps.evaluation).ok


# -- amplitude-2 closed forms --------------------------------------------------------

def test_amp2_shape_and_truncation(amp2_dps):
    pm = amp2_dps.bundle
    src = amp2_bundle()
    assert check_mc(pm.as_algebra()).ok
    # transferred amplitude grows by exactly one dt shift
    assert pm.amplitude == src.amplitude + 1
    for k in pm.ops.arities():
        if k >= src.amplitude + 1:
            assert pm.ops.op(k).is_zero()


def test_amp2_unary_closed_forms(amp2_dps):
    m = amp2_dps.model
    pm = amp2_dps.bundle
    p1, q1 = Poly.variable("x1_0"), Poly.variable("x1_1")
    p2, q2 = Poly.variable("x2_0"), Poly.variable("x2_1")
    nu1 = pm.ops.op(1)
    half = Fraction(1, 2)
    third = Fraction(1, 3)
    # end values of the fiber feed through lam1 by linear interpolation
    assert nu1.evaluate_basis((m.h_end[((1, 0), 0)],)) == {
        m.h_end[((2, 0), 0)]: p2.with_vars(pm.coords)}
    # averaged dt lines feed through lam1 by dt-averaging
    assert nu1.evaluate_basis((m.h_avg[(1, 0)],)) == {
        m.h_avg[(2, 0)]: (half * p2 + half * q2).with_vars(pm.coords)}
    # tangent dt lines feed through the derivative of the curvature
    assert nu1.evaluate_basis((m.h_base_dt[0],)) == {
        m.h_avg[(1, 0)]: (p1 + q1).with_vars(pm.coords),
        m.h_avg[(1, 1)]: (-2 * third * p1 * p2 - third * p1 * q2
                          - third * q1 * p2 - 2 * third * q1 * q2
                          ).with_vars(pm.coords)}
    assert nu1.evaluate_basis((m.h_base_dt[1],)) == {
        m.h_avg[(1, 1)]: (-third * (p1 ** 2 + p1 * q1 + q1 ** 2)
                          ).with_vars(pm.coords)}


def test_amp2_binary_bracket_closed_form(amp2_dps):
    m = amp2_dps.model
    pm = amp2_dps.bundle
    p1, q1 = Poly.variable("x1_0"), Poly.variable("x1_1")
    nu2 = pm.ops.op(2)
    tup = tuple(sorted((m.h_base_dt[0], m.h_base_dt[1])))
    got = nu2.evaluate_basis(tup)
    assert got == {m.h_avg[(2, 0)]:
                   (Fraction(1, 6) * (p1 - q1)).with_vars(pm.coords)}
    # mixed tangent/end inputs vanish for this model
    assert nu2.evaluate_basis(tuple(sorted((m.h_base_dt[0],
                                            m.h_end[((1, 0), 0)])))) == {}


def test_amp2_binary_bracket_from_first_principles(amp2_dps):
    # -pi_con dlam1(eta dlam0(u), v) - pi_con dlam1(u, eta dlam0(v))
    # for tangent dt inputs u, v, evaluated at rational endpoint pairs
    m = amp2_dps.model
    pm = amp2_dps.bundle
    x1, x2 = Poly.variable("x1"), Poly.variable("x2")
    nu2 = pm.ops.op(2)
    tup = tuple(sorted((m.h_base_dt[0], m.h_base_dt[1])))
    coeff = nu2.evaluate_basis(tup)[m.h_avg[(2, 0)]]
    rng = random.Random(8)
    for _ in range(4):
        P = tuple(Fraction(rng.randint(-3, 3)) for _ in range(2))
        Q = tuple(Fraction(rng.randint(-3, 3)) for _ in range(2))
        # u-leg: eta applied to the x1-derivative of the curvature
        s = pullback([2 * x1, -(2 * x1) * x2], ("x1", "x2"), P, Q, 1, dt=True)
        e = path_eta(s)
        # x2-derivative of lam1 acts on the a-component only
        inner = PathSection.make(P, Q, 2, [e.components[0]], dt=True)
        term1 = pi_con(inner).components[0].eval({"t": 0})
        # v-leg: lam1's coefficients do not involve x1, so it drops out
        hand = -term1
        got = coeff.eval(dict(zip(pm.coords, (*P, *Q))))
        assert got == hand


# -- structural lemmas ------------------------------------------------------------------

def plain_part(space, fam):
    """Restrict an ambient family to all-plain inputs and plain outputs.

    What survives is the fiberwise part of the structure: the pulled-back
    operations acting on plain sections, with no dt legs anywhere."""
    ops = {}
    for k in fam.arities():
        op = fam.op(k)
        kept = {}
        for tup, vec in op.coeffs.items():
            if any(space.is_dt(key) for key in tup):
                continue
            out = {key: c for key, c in vec.items() if not space.is_dt(key)}
            if out:
                kept[tup] = out
        ops[k] = MultiOp(k, 1, space, space, kept)
    return OpFamily(1, space, space, ops)


@pytest.mark.parametrize("make", [square_bundle, amp2_bundle],
                         ids=["quasi-smooth", "amplitude-2"])
def test_plain_family_cannot_see_the_homotopy_corrections(make):
    # composing the fiberwise family with phi or with the bare inclusion
    # gives the same answer, because eta-corrections vanish at both ends
    from linfty.pathspace import path_perturbation
    bundle = make()
    dps = derived_path_space(bundle, cap=8)
    con = dps.transfer_result.contraction
    model = dps.model
    pvals = {c: Poly.variable(f"{c}_0") for c in bundle.coords}
    qvals = {c: Poly.variable(f"{c}_1") for c in bundle.coords}
    amb = path_perturbation(model, pvals, qvals)
    pl = plain_part(con.space, amb)
    projected = OpFamily(1, con.space, con.h_space,
                         {k: op_then(pl.op(k), con.pi) for k in pl.arities()})
    iota_fam = OpFamily(0, con.h_space, con.space, {1: con.iota})
    assert bullet(projected, dps.transfer_result.phi) == bullet(projected, iota_fam)


def test_linear_end_inputs_see_only_the_interpolated_family(amp2_dps):
    # on end-value inputs the transferred operation is the linear
    # interpolation of the fiberwise operation; here arity 2 has no
    # fiberwise part at all, so every end-value pair must vanish
    m = amp2_dps.model
    nu2 = amp2_dps.bundle.ops.op(2)
    ends = sorted(m.h_end.values())
    for i, a in enumerate(ends):
        for b in ends[i:]:
            tup, = {tuple(sorted((a, b)))}
            if a == b and a[0] % 2:
                continue
            assert nu2.evaluate_basis(tup) == {}


def test_phi_is_strict_on_quasi_smooth_models(square_dps):
    phi = square_dps.transfer_result.phi
    assert phi.arities() == [1]
    con = square_dps.transfer_result.contraction
    m = square_dps.model
    for key in m.h_end.values():
        assert phi.op(1).evaluate_basis((key,)) == \
            con.iota.evaluate_basis((key,))


# -- factorization of the diagonal ----------------------------------------------------

def test_factorization_of_the_squared_function():
    fz = factorize_diagonal(square_bundle(), cap=6)
    rep = verify_factorization(fz, [(Fraction(0),)])
    assert rep.ok
    assert rep.weak_equiv.ok and rep.fibration.ok


def test_factorization_of_the_plane():
    fz = factorize_diagonal(plain_bundle(("x", "y")), cap=4)
    rep = verify_factorization(fz, [(0, 0), (1, 2)])
    assert rep.ok


def test_factorization_legs_compose_to_the_diagonal():
    fz = factorize_diagonal(square_bundle(), cap=6)
    from linfty.algebra import compose
    comp = compose(fz.fibration, fz.weak_equivalence)
    assert comp.base_map == fz.diagonal.base_map
    assert comp.phi == fz.diagonal.phi


# -- path spaces of plain manifolds -----------------------------------------------------

def test_path_space_of_the_line():
    dps = path_space_manifold(1, cap=4)
    assert virtual_dimension(dps.bundle) == 1
    pt = classical_point(dps.bundle, (2, 2))
    betti = tangent_complex(dps.bundle, pt).cohomology("both")
    assert betti.get(0, 0) == 1 and betti.get(1, 0) == 0


def test_path_space_curvature_vanishes_only_on_the_diagonal():
    dps = path_space_manifold(1, cap=4)
    with pytest.raises(ValueError):
        classical_point(dps.bundle, (0, 1))


# -- fibered products and intersections ---------------------------------------------------

def test_fibered_product_over_a_point_is_the_product():
    b = square_bundle()
    pt = plain_bundle(())
    f = Morphism(b, pt, (), OpFamily(0, b.fiber, pt.fiber, {}))
    fp = homotopy_fibered_product(f, f, cap=6)
    assert virtual_dimension(fp.bundle) == 2 * virtual_dimension(b)
    assert check_mc(fp.bundle.as_algebra()).ok
    assert check_morphism(fp.to_left).ok and check_morphism(fp.to_right).ok


def test_fibered_product_dimension_formula():
    r2 = plain_bundle(("u1", "u2"))
    r1 = plain_bundle(("z",))
    f = Morphism(r2, r1, (Poly.variable("u1"),), OpFamily(0, r2.fiber, r1.fiber, {}))
    fp = homotopy_fibered_product(f, f, cap=4)
    assert virtual_dimension(fp.bundle) == 2 + 2 - 1
    assert check_mc(fp.bundle.as_algebra()).ok


def test_transversal_axes_meet_in_a_smooth_point():
    inter = derived_intersection(axis_submanifold(0, 2), axis_submanifold(1, 2),
                                 cap=4)
    assert inter.virtual_dim == 0
    assert len(inter.points) == 1
    pt = inter.points[0]
    assert pt.ambient == (0, 0)
    assert pt.transversal and pt.h0 == 0 and pt.h1 == 0


def test_axis_meets_parabola_non_transversally():
    u = Poly.variable("u")
    inter = derived_intersection(axis_submanifold(0, 2), graph_submanifold(u * u),
                                 cap=4)
    assert inter.virtual_dim == 0
    assert len(inter.points) == 1
    pt = inter.points[0]
    assert pt.ambient == (0, 0)
    assert not pt.transversal
    assert pt.h0 == 1 and pt.h1 == 1


def test_disjoint_points_have_empty_locus_and_negative_dimension():
    p0 = Submanifold((), (Poly.constant(0),), name="pt0")
    p1 = Submanifold((), (Poly.constant(1),), name="pt1")
    inter = derived_intersection(p0, p1, cap=4)
    assert inter.virtual_dim == -1
    assert inter.points == []
    exact, loose = find_classical_points(inter.bundle)
    assert exact == [] and loose == []


def test_self_intersection_of_the_plane_is_smooth():
    a = Submanifold(("u0", "u1"), (Poly.variable("u0"), Poly.variable("u1")))
    b = Submanifold(("v0", "v1"), (Poly.variable("v0"), Poly.variable("v1")))
    inter = derived_intersection(a, b, points=[(1, 2, 1, 2)], cap=4)
    assert inter.virtual_dim == 2
    pt = inter.points[0]
    assert pt.transversal and pt.h0 == 2 and pt.h1 == 0


def test_intersection_euler_characteristic_is_the_virtual_dimension():
    u = Poly.variable("u")
    inter = derived_intersection(axis_submanifold(0, 2), graph_submanifold(u * u),
                                 cap=4)
    for pt in inter.points:
        assert pt.h0 - pt.h1 == inter.virtual_dim


# -- zero locus comparison -------------------------------------------------------------

def test_zero_locus_of_the_squared_section():
    zl = zero_locus_model(("x",), (x * x,), cap=4)
    assert zl.weak_equiv.ok
    assert [tuple(p.coords) for p in zl.points] == [(0,)]


def test_zero_locus_of_a_regular_section_is_a_point():
    zl = zero_locus_model(("x",), (x,), cap=4)
    assert zl.weak_equiv.ok
    assert [tuple(p.coords) for p in zl.points] == [(0,)]


def test_zero_locus_of_a_nowhere_zero_section_is_empty():
    zl = zero_locus_model(("x",), (x * x + 1,), cap=4)
    assert zl.weak_equiv.ok
    assert zl.points == []
