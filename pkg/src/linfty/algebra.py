"""Curved homotopy Lie structures and bundles of them over polynomial bases.

A structure here is a positively graded space together with degree +1
graded-symmetric operations: a distinguished square-zero differential in
arity one, and a family of operations in all arities including arity zero
(the curvature, sitting in degree one).  The defining condition is

    [delta, lam] + lam o lam = 0,

equivalently, with ell = delta + lam merged at arity one, ell o ell = 0
once delta squares to zero.  check_mc verifies exactly that, returning
witnesses on failure rather than a bare boolean.

Bundles carry the same data with polynomial coefficients over named base
coordinates; evaluating the coefficients at a rational point specializes a
bundle to an honest structure on the fiber.  Morphisms of bundles pair a
polynomial base map with a degree-0 family of fiber operations; the
defining equation

    phi o (delta + lam) = (delta' + lam')^pulled . phi

is checked by check_morphism with the target operations pulled back along
the base map.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .graded import (GradedSpace, MultiOp, OpFamily, Vector, arity_bound,
                     bullet, circ, vec_eq, vec_merge)
from .linalg import inverse as mat_inverse
from .linalg import kernel_basis, right_inverse
from .poly import Poly, as_fraction

Rat = Fraction | int


def _coeff_vars(c) -> set[str]:
    if isinstance(c, Poly):
        return set(c.pruned().vars)
    return set()


def _substitute_coeff(c, values: Mapping[str, Poly]):
    if isinstance(c, Poly):
        return c.substitute(values)
    return c


def _eval_coeff(c, values: Mapping[str, Fraction]) -> Fraction:
    if isinstance(c, Poly):
        return c.eval(values)
    return as_fraction(c)


def map_op_coeffs(op: MultiOp, fn) -> MultiOp:
    coeffs = {}
    for tup, vec in op.coeffs.items():
        out = {k: fn(c) for k, c in vec.items()}
        coeffs[tup] = {k: c for k, c in out.items() if c}
    return MultiOp(op.arity, op.degree, op.source, op.target, coeffs)


def map_family_coeffs(fam: OpFamily, fn) -> OpFamily:
    return OpFamily(fam.degree, fam.source, fam.target,
                    {k: map_op_coeffs(op, fn) for k, op in fam.ops.items()})


def linear_apply(op: MultiOp, vec: Vector) -> Vector:
    """Apply an arity-1 operation to a sparse vector."""
    if op.arity != 1:
        raise ValueError("linear_apply expects an arity-1 operation")
    return op.evaluate_mixed(vec, ())


def op_then(op: MultiOp, linear: MultiOp) -> MultiOp:
    """Post-compose any operation with an arity-1 operation."""
    if linear.arity != 1:
        raise ValueError("op_then expects an arity-1 outer operation")
    coeffs = {}
    for tup, vec in op.coeffs.items():
        out = linear.evaluate_mixed(vec, ())
        if out:
            coeffs[tup] = out
    return MultiOp(op.arity, op.degree + linear.degree, op.source, linear.target, coeffs)


# ---------------------------------------------------------------------------
# curved structures on a fixed graded space
# ---------------------------------------------------------------------------


@dataclass
class CurvedAlgebra:
    """Graded space + square-zero differential + curved degree-1 operations."""

    space: GradedSpace
    delta: MultiOp
    ops: OpFamily

    def __post_init__(self):
        if self.delta.arity != 1 or self.delta.degree != 1:
            raise ValueError("differential must be arity 1, degree 1")
        if self.delta.source != self.space or self.delta.target != self.space:
            raise ValueError("differential must be an endomorphism of the space")
        if self.ops.degree != 1:
            raise ValueError("structure operations must have degree 1")
        if self.ops.source != self.space or self.ops.target != self.space:
            raise ValueError("operations must live on the space")
        if self.space.dims and self.space.min_degree < 1:
            raise ValueError("the graded space must sit in positive degrees")

    def delta_family(self) -> OpFamily:
        return OpFamily(1, self.space, self.space, {1: self.delta})

    def total(self) -> OpFamily:
        """All operations with the differential merged into arity one."""
        return self.delta_family().plus(self.ops)

    def curvature(self) -> Vector:
        return self.ops.op(0).evaluate_basis(())

    def max_arity(self) -> int:
        return max(self.ops.max_arity, 1)


@dataclass
class MCReport:
    ok: bool
    delta_squared_failures: list
    structure_failures: list

    def describe(self, space: GradedSpace | None = None) -> str:
        if self.ok:
            return "structure equations hold"
        lines = []
        for tup, vec in self.delta_squared_failures:
            lines.append(f"delta^2 != 0 on {tup}: {vec}")
        for arity, tup, vec in self.structure_failures:
            lines.append(f"arity-{arity} defect on {tup}: {vec}")
        return "\n".join(lines)


def check_mc(alg: "CurvedAlgebra", method: str = "auto") -> MCReport:
    """Verify delta^2 = 0 and [delta, lam] + lam o lam = 0 with witnesses.

    Both conditions together are equivalent to ell o ell = 0 for the merged
    family ell = delta + lam, which is what gets computed.
    """
    d2 = alg.delta.compose_linear(alg.delta)
    dfails = [((key,), vec) for (key,), vec in d2.coeffs.items()]
    ell = alg.total()
    sq = circ(ell, ell, method=method)
    sfails = []
    for n in sq.arities():
        for tup, vec in sq.op(n).coeffs.items():
            sfails.append((n, tup, vec))
    return MCReport(not dfails and not sfails, dfails, sfails)


# ---------------------------------------------------------------------------
# bundles over polynomial bases
# ---------------------------------------------------------------------------


@dataclass
class LinftyBundle:
    """Curved structure on a trivial graded bundle over affine coordinates.

    coords names the base chart; operation coefficients are polynomials in
    those names (plain rationals are allowed and mean constants).  A bundle
    with no coordinates is the same thing as a single curved structure.
    """

    coords: tuple[str, ...]
    fiber: GradedSpace
    delta: MultiOp
    ops: OpFamily

    def __post_init__(self):
        self.coords = tuple(self.coords)
        if len(set(self.coords)) != len(self.coords):
            raise ValueError("duplicate base coordinates")
        if self.delta.arity != 1 or self.delta.degree != 1:
            raise ValueError("differential must be arity 1, degree 1")
        if self.ops.degree != 1:
            raise ValueError("operations must have degree 1")
        for op in [self.delta, *self.ops.ops.values()]:
            if op.source != self.fiber or op.target != self.fiber:
                raise ValueError("operations must be endomorphisms of the fiber")
            for vec in op.coeffs.values():
                for c in vec.values():
                    extra = _coeff_vars(c) - set(self.coords)
                    if extra:
                        raise ValueError(f"coefficient uses unknown coordinates {sorted(extra)}")
        if self.fiber.dims and self.fiber.min_degree < 1:
            raise ValueError("the fiber must sit in positive degrees")

    @property
    def base_dim(self) -> int:
        return len(self.coords)

    @property
    def amplitude(self) -> int:
        """Top fiber degree; 1 means a quasi-smooth model."""
        return self.fiber.max_degree

    def as_algebra(self) -> CurvedAlgebra:
        return CurvedAlgebra(self.fiber, self.delta, self.ops)

    def total(self) -> OpFamily:
        return self.as_algebra().total()

    def curvature_section(self) -> Vector:
        return self.ops.op(0).evaluate_basis(())

    def at_point(self, point: Sequence[Rat]) -> CurvedAlgebra:
        """Specialize all coefficients at a rational base point."""
        if len(point) != self.base_dim:
            raise ValueError(f"expected {self.base_dim} coordinates, got {len(point)}")
        values = {name: as_fraction(v) for name, v in zip(self.coords, point)}
        fn = lambda c: _eval_coeff(c, values)
        return CurvedAlgebra(self.fiber, map_op_coeffs(self.delta, fn),
                             map_family_coeffs(self.ops, fn))

    def map_coeffs(self, fn, coords: tuple[str, ...] | None = None) -> "LinftyBundle":
        return LinftyBundle(self.coords if coords is None else coords, self.fiber,
                            map_op_coeffs(self.delta, fn),
                            map_family_coeffs(self.ops, fn))

    def rename_coords(self, mapping: Mapping[str, str]) -> "LinftyBundle":
        new = tuple(mapping.get(c, c) for c in self.coords)
        values = {c: Poly.variable(mapping[c]) for c in self.coords if c in mapping}
        return self.map_coeffs(lambda c: _substitute_coeff(c, values), coords=new)


def algebra_as_bundle(alg: CurvedAlgebra) -> LinftyBundle:
    return LinftyBundle((), alg.space, alg.delta, alg.ops)


def product_bundle(a: LinftyBundle, b: LinftyBundle) -> tuple["LinftyBundle", dict, dict]:
    """Product of two bundles with disjoint coordinates.

    Fiber is the direct sum; operations act on pure tuples from either
    summand and vanish on mixed ones; curvatures add.  Returns the bundle
    and the two basis-key embeddings.
    """
    clash = set(a.coords) & set(b.coords)
    if clash:
        raise ValueError(f"coordinate clash {sorted(clash)}; rename one factor first")
    fiber, m1, m2 = a.fiber.direct_sum(b.fiber)
    coords = a.coords + b.coords

    def lifted(op_a: MultiOp, op_b: MultiOp, arity: int, degree: int) -> MultiOp:
        coeffs = {}
        for src_op, keymap in ((op_a, m1), (op_b, m2)):
            for tup, vec in src_op.coeffs.items():
                ntup = tuple(keymap[k] for k in tup)
                out = {keymap[k]: c for k, c in vec.items()}
                if ntup in coeffs:
                    vec_merge(coeffs[ntup], out)
                else:
                    coeffs[ntup] = out
        return MultiOp(arity, degree, fiber, fiber, coeffs)

    delta = lifted(a.delta, b.delta, 1, 1)
    ks = set(a.ops.ops) | set(b.ops.ops)
    ops = OpFamily(1, fiber, fiber,
                   {k: lifted(a.ops.op(k), b.ops.op(k), k, 1) for k in ks})
    return LinftyBundle(coords, fiber, delta, ops), m1, m2


# ---------------------------------------------------------------------------
# morphisms
# ---------------------------------------------------------------------------


@dataclass
class Morphism:
    """Bundle morphism: polynomial base map + degree-0 fiber family.

    base_map lists the target coordinates as polynomials in source
    coordinates.  phi has no arity-0 part and its coefficients are
    polynomials over the source base.
    """

    src: LinftyBundle
    dst: LinftyBundle
    base_map: tuple[Poly, ...]
    phi: OpFamily

    def __post_init__(self):
        self.base_map = tuple(p if isinstance(p, Poly) else Poly.constant(p)
                              for p in self.base_map)
        if len(self.base_map) != self.dst.base_dim:
            raise ValueError(f"base map needs {self.dst.base_dim} components")
        for p in self.base_map:
            extra = _coeff_vars(p) - set(self.src.coords)
            if extra:
                raise ValueError(f"base map uses unknown coordinates {sorted(extra)}")
        if self.phi.degree != 0:
            raise ValueError("fiber family must have degree 0")
        if 0 in self.phi.ops:
            raise ValueError("fiber family cannot have an arity-0 part")
        if self.phi.source != self.src.fiber or self.phi.target != self.dst.fiber:
            raise ValueError("fiber family must map source fiber to target fiber")
        for op in self.phi.ops.values():
            for vec in op.coeffs.values():
                for c in vec.values():
                    extra = _coeff_vars(c) - set(self.src.coords)
                    if extra:
                        raise ValueError(f"coefficient uses unknown coordinates {sorted(extra)}")

    def phi1(self) -> MultiOp:
        return self.phi.op(1)

    def base_values(self) -> Mapping[str, Poly]:
        return {name: p for name, p in zip(self.dst.coords, self.base_map)}

    def push_point(self, point: Sequence[Rat]) -> list[Fraction]:
        values = {name: as_fraction(v) for name, v in zip(self.src.coords, point)}
        return [p.eval(values) for p in self.base_map]


def pullback_family(fam: OpFamily, values: Mapping[str, Poly]) -> OpFamily:
    """Substitute base coordinates in every coefficient of a family."""
    return map_family_coeffs(fam, lambda c: _substitute_coeff(c, values))


def pullback_op(op: MultiOp, values: Mapping[str, Poly]) -> MultiOp:
    return map_op_coeffs(op, lambda c: _substitute_coeff(c, values))


@dataclass
class MorphismReport:
    ok: bool
    failures: list

    def describe(self) -> str:
        if self.ok:
            return "morphism equation holds"
        return "\n".join(f"arity-{n} defect on {tup}: {vec}"
                         for n, tup, vec in self.failures)


def check_morphism(m: Morphism, method: str = "auto") -> MorphismReport:
    """Verify phi o ell_src = ell_dst^pulled . phi, arity by arity.

    The arity-0 component is the curvature compatibility
    phi_1(curv_src) = curv_dst o base_map; it is part of the same equation.
    """
    values = m.base_values()
    lhs = circ(m.phi, m.src.total(), method=method)
    rhs = bullet(pullback_family(m.dst.total(), values), m.phi, method=method)
    diff = lhs.minus(rhs)
    failures = []
    for n in diff.arities():
        for tup, vec in diff.op(n).coeffs.items():
            failures.append((n, tup, vec))
    return MorphismReport(not failures, failures)


def identity_morphism(bundle: LinftyBundle) -> Morphism:
    base = tuple(Poly.variable(c) for c in bundle.coords)
    return Morphism(bundle, bundle, base, OpFamily.identity(bundle.fiber))


def compose(g: Morphism, f: Morphism) -> Morphism:
    """g after f."""
    if f.dst.coords != g.src.coords or f.dst.fiber != g.src.fiber:
        raise ValueError("morphisms are not composable")
    fvals = f.base_values()
    base = tuple(p.substitute(fvals) for p in g.base_map)
    phi = bullet(pullback_family(g.phi, fvals), f.phi)
    return Morphism(f.src, g.dst, base, phi)


# ---------------------------------------------------------------------------
# inversion of isomorphisms
# ---------------------------------------------------------------------------


def _affine_parts(polys: Sequence[Poly], coords: Sequence[str]):
    """Split affine polynomials into (matrix, constant); error if nonlinear."""
    rows = []
    consts = []
    for p in polys:
        if p.total_degree() > 1:
            raise ValueError("base map is not affine")
        pruned = p.pruned()
        if not set(pruned.vars) <= set(coords):
            raise ValueError("base map uses unknown coordinates")
        aligned = pruned.with_vars(tuple(coords))
        row = [Fraction(0)] * len(coords)
        const = Fraction(0)
        for expo, c in aligned.terms.items():
            if sum(expo) == 0:
                const = c
            else:
                row[list(expo).index(1)] = c
        rows.append(row)
        consts.append(const)
    return rows, consts


def op_precompose_linear(op: MultiOp, lin: MultiOp) -> MultiOp:
    """op with the degree-0 map lin applied to every input slot."""
    if lin.arity != 1 or lin.degree != 0:
        raise ValueError("op_precompose_linear expects a degree-0 arity-1 inner map")

    def value(tup):
        return op.evaluate([lin.evaluate_basis((k,)) for k in tup])

    return MultiOp.from_function(op.arity, op.degree, lin.source, op.target, value)


def invert_linear_op(op: MultiOp) -> MultiOp:
    """Invert a degree-0 arity-1 operation with constant rational coefficients."""
    src, dst = op.source, op.target
    if src.dims != dst.dims:
        raise ValueError("linear part is not square")
    coeffs: dict = {}
    for d in src.degrees():
        n = src.dims[d]
        m = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            vec = op.evaluate_basis(((d, i),))
            for (dd, j), c in vec.items():
                if isinstance(c, Poly):
                    if not c.is_constant():
                        raise ValueError("linear part must have constant coefficients")
                    c = c.constant_value()
                if dd != d:
                    raise ValueError("linear part is not degree preserving")
                m[j][i] = Fraction(c)
        try:
            minv = mat_inverse(m)
        except ValueError:
            raise ValueError(f"linear part is singular in degree {d}")
        for i in range(n):
            col = {(d, j): minv[j][i] for j in range(n) if minv[j][i]}
            if col:
                coeffs[((d, i),)] = col
    return MultiOp(1, 0, dst, src, coeffs)


def invert_iso(m: Morphism) -> Morphism:
    """Invert a bundle isomorphism with affine base and constant linear part.

    The inverse fiber family is solved arity by arity from
    (phi^pulled . psi) = identity; both composites are verified before
    returning.
    """
    rows, consts = _affine_parts(m.base_map, m.src.coords)
    if len(rows) != len(m.src.coords):
        raise ValueError("base map must preserve the number of coordinates")
    ainv = mat_inverse([[Fraction(x) for x in row] for row in rows])
    inv_base = []
    for j in range(len(ainv)):
        p = Poly.zero()
        for k, name in enumerate(m.dst.coords):
            if ainv[j][k]:
                p = p + ainv[j][k] * (Poly.variable(name) - consts[k])
        inv_base.append(p)
    inv_values = {name: p for name, p in zip(m.src.coords, inv_base)}

    phi_pulled = pullback_family(m.phi, inv_values)
    psi1 = invert_linear_op(phi_pulled.op(1))
    psi = OpFamily(0, m.dst.fiber, m.src.fiber, {1: psi1})
    top = arity_bound(0, m.src.fiber, m.dst.fiber)
    for n in range(2, top + 1):
        resid = bullet(phi_pulled, psi).op(n)
        if resid.is_zero():
            continue
        psi = psi.with_op(op_then(resid, psi1).scaled(-1))
    inv = Morphism(m.dst, m.src, tuple(inv_base), psi)

    for left, right, bundle in ((inv, m, m.src), (m, inv, m.dst)):
        comp = compose(left, right)
        ident = identity_morphism(bundle)
        if comp.phi != ident.phi or any(p != q for p, q in zip(comp.base_map, ident.base_map)):
            raise ValueError("inversion failed to verify; the morphism is not invertible")
    return inv


def rename_morphism_source(m: Morphism, mapping: Mapping[str, str]) -> Morphism:
    """Rename base coordinates of the source bundle, rewriting the base map
    and the fiber family coefficients accordingly."""
    src = m.src.rename_coords(mapping)
    values = {old: Poly.variable(new) for old, new in mapping.items()}
    base = tuple(p.substitute(values) if isinstance(p, Poly) else p
                 for p in m.base_map)
    phi = map_family_coeffs(m.phi, lambda c:
                            c.substitute(values) if isinstance(c, Poly) else c)
    return Morphism(src, m.dst, base, phi)


def transport_source(psi: OpFamily, ell: OpFamily, verify: bool = True) -> OpFamily:
    """Solve psi o ell' = ell . psi for the structure ell' on psi's source.

    psi is a degree-0 family without arity zero whose linear part is
    invertible with constant coefficients.  The unknown appears only
    through psi_1(ell'_n) at arity n, so the system is triangular.
    """
    psi1_inv = invert_linear_op(psi.op(1))
    ellp = OpFamily(1, psi.source, psi.source, {})
    top = arity_bound(1, psi.source, psi.source)
    rhs = bullet(ell, psi)
    for n in range(top + 1):
        defect = rhs.op(n).minus(circ(psi, ellp).op(n))
        if not defect.is_zero():
            ellp = ellp.with_op(op_then(defect, psi1_inv))
    if verify and circ(psi, ellp) != rhs:
        raise ValueError("transport_source failed to verify")
    return ellp


def transport_target(phi: OpFamily, ell: OpFamily, verify: bool = True) -> OpFamily:
    """Solve phi o ell = ell' . phi for the structure ell' on phi's target.

    At arity n the unknown enters as ell'_n(phi_1 x, ..., phi_1 x), so an
    invertible constant linear part again makes the system triangular.
    """
    phi1_inv = invert_linear_op(phi.op(1))
    ellp = OpFamily(1, phi.target, phi.target, {})
    top = arity_bound(1, phi.target, phi.target)
    lhs = circ(phi, ell)
    for n in range(top + 1):
        defect = lhs.op(n).minus(bullet(ellp, phi).op(n))
        if defect.is_zero():
            continue
        if n == 0:
            ellp = ellp.with_op(MultiOp(0, 1, phi.target, phi.target, dict(defect.coeffs)))
        else:
            ellp = ellp.with_op(op_precompose_linear(defect, phi1_inv))
    if verify and bullet(ellp, phi) != lhs:
        raise ValueError("transport_target failed to verify")
    return ellp


def _constant_matrix(op: MultiOp, degree: int) -> list[list[Fraction]]:
    """Matrix of an arity-1 degree-0 op on one degree slot, rejecting
    polynomial entries."""
    rows = op.target.dims.get(degree, 0)
    cols = op.source.dims.get(degree, 0)
    m = [[Fraction(0)] * cols for _ in range(rows)]
    for i in range(cols):
        vec = op.evaluate_basis(((degree, i),))
        for (dd, j), c in vec.items():
            if isinstance(c, Poly):
                if not c.is_constant():
                    raise ValueError(
                        "fiber map has non-constant coefficients; refusing to split")
                c = c.constant_value()
            m[j][i] = Fraction(c)
    return m


@dataclass
class LinearizedFibration:
    """Fibration rewritten as an isomorphism followed by a strict projection.

    middle lives on the source base with fiber target (+) complement; the
    embed_* maps send target and complement basis keys into the middle
    fiber, split_complement inverts the second embedding.
    """

    iso: Morphism
    linear: Morphism
    middle: LinftyBundle
    complement: GradedSpace
    embed_target: dict
    embed_complement: dict

    @property
    def split_complement(self) -> dict:
        return {v: k for k, v in self.embed_complement.items()}


def linearize_fibration(m: Morphism) -> LinearizedFibration:
    """Split a fibration into an isomorphism followed by a strict projection.

    Requires the linear part of m.phi to be constant and surjective in each
    degree.  Chooses a splitting of the source fiber into a copy of the
    pulled-back target fiber plus its complement, transports the structure
    through the resulting isomorphism, and returns the pieces with
    compose(linear, iso) equal to m.
    """
    src, dst = m.src, m.dst
    phi1 = m.phi.op(1)
    pmats: dict[int, list[list[Fraction]]] = {}
    wmats: dict[int, list[list[Fraction]]] = {}
    kmats: dict[int, list[list[Fraction]]] = {}
    comp_dims: dict[int, int] = {}
    for d in sorted(set(src.fiber.degrees()) | set(dst.fiber.degrees())):
        mat = _constant_matrix(phi1, d)
        pmats[d] = mat
        if dst.fiber.dims.get(d, 0):
            w = right_inverse(mat)
            if w is None:
                raise ValueError(f"linear part is not surjective in degree {d}")
            wmats[d] = w
        kern = kernel_basis(mat, cols=src.fiber.dims.get(d, 0))
        kmats[d] = [list(v) for v in kern]
        comp_dims[d] = len(kern)

    comp = GradedSpace.build(
        {d: n for d, n in comp_dims.items() if n},
        labels={d: [f"k{d}_{i}" for i in range(n)] for d, n in comp_dims.items() if n})
    mid_fiber, into_e, into_k = dst.fiber.direct_sum(comp)

    def phi_prime_1(tup):
        (d, i), = tup
        out: dict = {}
        vec = phi1.evaluate_basis(((d, i),))
        for key, c in vec.items():
            out[into_e[key]] = out.get(into_e[key], 0) + c
        if comp_dims.get(d, 0):
            n = src.fiber.dims[d]
            resid = [Fraction(0)] * n
            resid[i] = Fraction(1)
            if d in wmats:
                img = [sum(row[r] * resid[r] for r in range(n)) for row in pmats[d]]
                back = [sum(wmats[d][r][s] * img[s] for s in range(len(img)))
                        for r in range(n)]
                resid = [a - b for a, b in zip(resid, back)]
            coords = _solve_columns(kmats[d], resid)
            for j, c in enumerate(coords):
                if c:
                    out[into_k[(d, j)]] = out.get(into_k[(d, j)], 0) + c
        return {k: v for k, v in out.items() if v}

    ops: dict[int, MultiOp] = {
        1: MultiOp.from_function(1, 0, src.fiber, mid_fiber, phi_prime_1)}
    for k, op in m.phi.ops.items():
        if k < 2 or op.is_zero():
            continue
        coeffs = {tup: {into_e[key]: c for key, c in vec.items()}
                  for tup, vec in op.coeffs.items()}
        ops[k] = MultiOp(k, 0, src.fiber, mid_fiber, coeffs)
    phi_prime = OpFamily(0, src.fiber, mid_fiber, ops)

    ell_mid = transport_target(phi_prime, src.total())
    mid = LinftyBundle(src.coords, mid_fiber,
                       MultiOp.zero(1, 1, mid_fiber, mid_fiber),
                       OpFamily(1, mid_fiber, mid_fiber, dict(ell_mid.ops)))
    ident_base = tuple(Poly.variable(x) for x in src.coords)
    iso = Morphism(src, mid, ident_base, phi_prime)

    back_e = {v: k for k, v in into_e.items()}
    proj = MultiOp.from_function(
        1, 0, mid_fiber, dst.fiber,
        lambda tup: {back_e[tup[0]]: 1} if tup[0] in back_e else {})
    linear = Morphism(mid, dst, m.base_map, OpFamily(0, mid_fiber, dst.fiber, {1: proj}))

    for cand in (iso, linear):
        rep = check_morphism(cand)
        if not rep.ok:
            raise ValueError("linearization failed to verify the morphism equation")
    recomposed = compose(linear, iso)
    if recomposed.phi != m.phi or any(p != q for p, q in zip(recomposed.base_map, m.base_map)):
        raise ValueError("linearization does not recompose to the original morphism")
    return LinearizedFibration(iso, linear, mid, comp, dict(into_e), dict(into_k))


def _solve_columns(cols: list[list[Fraction]], target: list[Fraction]) -> list[Fraction]:
    """Coordinates of target in the span of the given columns."""
    from .linalg import solve as _solve
    if not cols:
        if any(target):
            raise ValueError("vector not in span")
        return []
    a = [[cols[j][i] for j in range(len(cols))] for i in range(len(target))]
    sol = _solve(a, list(target))
    if sol is None:
        raise ValueError("vector not in span")
    return sol
