"""Geometry of bundle models: tangent complexes, etale maps, fibrations.

A bundle with polynomial coefficients cuts out a classical locus, the zero
set of its curvature section.  At a point of that locus the structure
linearizes to a cochain complex: the base tangent space in degree zero
mapping in via the Jacobian of the curvature, followed by the arity-one
operation in each fiber degree.  Everything here is exact rational linear
algebra on those complexes: cohomology ranks, mapping cones, quasi-
isomorphism tests, and the two constructions that produce new bundles
(the shifted tangent bundle and the pullback of a fibration).

Point searches are the one deliberately numerical corner: a coarse grid
plus Newton iteration proposes candidate zeros, and only rational points
that satisfy the equations exactly are promoted.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import (LinftyBundle, Morphism, _affine_parts, check_mc,
                      check_morphism, compose, invert_iso,
                      linearize_fibration, map_family_coeffs, map_op_coeffs,
                      op_then, rename_morphism_source)
from .graded import GradedSpace, MultiOp, OpFamily, bullet
from .linalg import bareiss_rank, kernel_basis, rank, right_inverse
from .poly import Poly, as_fraction

Matrix = list[list[Fraction]]


def _eval_at(c, values: dict[str, Fraction]) -> Fraction:
    if isinstance(c, Poly):
        return c.eval(values)
    return as_fraction(c)


def _point_values(coords, point) -> dict[str, Fraction]:
    if len(point) != len(coords):
        raise ValueError(f"expected {len(coords)} coordinates, got {len(point)}")
    return {name: Fraction(v) for name, v in zip(coords, point)}


# ---------------------------------------------------------------------------
# Cochain complexes
# ---------------------------------------------------------------------------


@dataclass
class CochainComplex:
    """Finite complex of rational vector spaces with ascending differentials.

    dims[k] is the dimension in degree k; diffs[k] maps degree k to k+1 and
    is stored row-major with dims[k+1] rows.  Composites of consecutive
    differentials must vanish.
    """

    dims: dict[int, int]
    diffs: dict[int, Matrix]

    def __post_init__(self):
        self.dims = {int(k): int(n) for k, n in self.dims.items() if n}
        self.diffs = {int(k): d for k, d in self.diffs.items()
                      if d and any(any(row) for row in d)}
        for k, d in self.diffs.items():
            rows, cols = len(d), len(d[0]) if d else 0
            if cols != self.dims.get(k, 0) or rows != self.dims.get(k + 1, 0):
                raise ValueError(f"differential in degree {k} has shape "
                                 f"{rows}x{cols}, dims demand "
                                 f"{self.dims.get(k + 1, 0)}x{self.dims.get(k, 0)}")
        for k in self.diffs:
            if k + 1 in self.diffs:
                nxt, cur = self.diffs[k + 1], self.diffs[k]
                for i in range(len(nxt)):
                    for j in range(len(cur[0])):
                        s = sum(nxt[i][r] * cur[r][j] for r in range(len(cur)))
                        if s:
                            raise ValueError(f"d.d != 0 between degrees {k} and {k + 2}")

    def degrees(self) -> list[int]:
        return sorted(self.dims)

    def rank_of(self, k: int, method: str = "rref") -> int:
        d = self.diffs.get(k)
        if not d:
            return 0
        if method == "bareiss":
            return bareiss_rank(d)
        return rank(d)

    def cohomology(self, method: str = "rref") -> dict[int, int]:
        """Betti numbers by exact rank computation.

        method "rref" uses rational row reduction, "bareiss" the
        fraction-free elimination, "both" runs the two and insists they
        agree.
        """
        if method == "both":
            a = self.cohomology("rref")
            b = self.cohomology("bareiss")
            if a != b:
                raise ArithmeticError("rank computations disagree")
            return a
        betti = {}
        for k in self.degrees():
            b = self.dims[k] - self.rank_of(k, method) - self.rank_of(k - 1, method)
            if b:
                betti[k] = b
        return betti

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * n for k, n in self.dims.items())

    def is_acyclic(self, method: str = "both") -> bool:
        return not self.cohomology(method)


def mapping_cone(maps: dict[int, Matrix], a: CochainComplex,
                 b: CochainComplex) -> CochainComplex:
    """Cone of a chain map f: a -> b, with cone^k = a^{k+1} (+) b^k.

    The differential sends (x, y) to (-d_a x, f x + d_b y); the complex
    validates d.d = 0, which encodes that f really is a chain map.
    """
    degs = sorted({k - 1 for k in a.dims} | set(b.dims))
    dims = {k: a.dims.get(k + 1, 0) + b.dims.get(k, 0) for k in degs}
    dims = {k: n for k, n in dims.items() if n}
    diffs: dict[int, Matrix] = {}
    for k in dims:
        if k + 1 not in dims:
            continue
        rows, cols = dims[k + 1], dims[k]
        ra, rb = a.dims.get(k + 2, 0), b.dims.get(k + 1, 0)
        ca, cb = a.dims.get(k + 1, 0), b.dims.get(k, 0)
        m = [[Fraction(0)] * cols for _ in range(rows)]
        da = a.diffs.get(k + 1)
        if da:
            for i in range(ra):
                for j in range(ca):
                    m[i][j] = -da[i][j]
        f = maps.get(k + 1)
        if f:
            for i in range(rb):
                for j in range(ca):
                    m[ra + i][j] = f[i][j]
        db = b.diffs.get(k)
        if db:
            for i in range(rb):
                for j in range(cb):
                    m[ra + i][ca + j] = db[i][j]
        diffs[k] = m
    return CochainComplex(dims, diffs)


# ---------------------------------------------------------------------------
# Classical points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassicalPoint:
    """A rational base point where the curvature section vanishes."""

    coords: tuple[Fraction, ...]
    residual: Fraction = Fraction(0)


def curvature_residual(bundle: LinftyBundle, point) -> Fraction:
    """Largest absolute curvature coefficient at the point."""
    values = _point_values(bundle.coords, point)
    worst = Fraction(0)
    for _, c in bundle.curvature_section().items():
        worst = max(worst, abs(_eval_at(c, values)))
    return worst


def classical_point(bundle: LinftyBundle, point, tol: Fraction = Fraction(0)) -> ClassicalPoint:
    coords = tuple(Fraction(v) for v in point)
    resid = curvature_residual(bundle, coords)
    if resid > tol:
        raise ValueError(f"curvature does not vanish there (residual {resid})")
    return ClassicalPoint(coords, resid)


def curvature_derivative(bundle: LinftyBundle, point: ClassicalPoint) -> Matrix:
    """Jacobian of the curvature section at a classical point.

    Rows run over the degree-one fiber basis, columns over base
    coordinates.
    """
    if curvature_residual(bundle, point.coords) != 0:
        raise ValueError("curvature derivative requires an exact classical point")
    values = _point_values(bundle.coords, point.coords)
    n = bundle.fiber.dim(1)
    m = len(bundle.coords)
    jac = [[Fraction(0)] * m for _ in range(n)]
    for key, c in bundle.curvature_section().items():
        if key[0] != 1:
            raise AssertionError("curvature outside degree one")
        if not isinstance(c, Poly):
            continue
        for j, name in enumerate(bundle.coords):
            jac[key[1]][j] = c.diff(name).eval(values)
    return jac


def _arity_one_matrix(bundle: LinftyBundle, degree: int,
                      values: dict[str, Fraction]) -> Matrix:
    op = bundle.total().op(1)
    rows = bundle.fiber.dim(degree + 1)
    cols = bundle.fiber.dim(degree)
    m = [[Fraction(0)] * cols for _ in range(rows)]
    for i in range(cols):
        vec = op.evaluate_basis(((degree, i),))
        for (dd, j), c in vec.items():
            if dd != degree + 1:
                raise AssertionError("arity-one operation is not degree +1")
            m[j][i] = _eval_at(c, values)
    return m


def tangent_complex(bundle: LinftyBundle, point: ClassicalPoint) -> CochainComplex:
    """Tangent complex at a classical point.

    Degree zero holds the base tangent space with the curvature Jacobian
    as first differential; higher degrees carry the specialized arity-one
    operation.  Construction fails if the result is not a complex.
    """
    values = _point_values(bundle.coords, point.coords)
    dims = {0: len(bundle.coords)}
    for d in bundle.fiber.degrees():
        dims[d] = bundle.fiber.dims[d]
    diffs: dict[int, Matrix] = {}
    jac = curvature_derivative(bundle, point)
    if jac and any(any(row) for row in jac):
        diffs[0] = jac
    for d in bundle.fiber.degrees():
        m = _arity_one_matrix(bundle, d, values)
        if m and any(any(row) for row in m):
            diffs[d] = m
    return CochainComplex(dims, diffs)


def cohomology(cx: CochainComplex, method: str = "both") -> dict[int, int]:
    return cx.cohomology(method)


def virtual_dimension(bundle: LinftyBundle) -> int:
    """Base dimension minus the alternating sum of fiber ranks."""
    total = len(bundle.coords)
    for d in bundle.fiber.degrees():
        total += (-1) ** d * bundle.fiber.dims[d]
    return total


# ---------------------------------------------------------------------------
# Tangent maps and the etale / weak equivalence / fibration tests
# ---------------------------------------------------------------------------


def _linear_part_matrix(mor: Morphism, degree: int,
                        values: dict[str, Fraction]) -> Matrix:
    op = mor.phi.op(1)
    rows = mor.dst.fiber.dim(degree)
    cols = mor.src.fiber.dim(degree)
    m = [[Fraction(0)] * cols for _ in range(rows)]
    for i in range(cols):
        vec = op.evaluate_basis(((degree, i),))
        for (dd, j), c in vec.items():
            if dd != degree:
                raise AssertionError("linear part is not degree preserving")
            m[j][i] = _eval_at(c, values)
    return m


def _base_jacobian(mor: Morphism, values: dict[str, Fraction]) -> Matrix:
    rows = len(mor.dst.coords)
    cols = len(mor.src.coords)
    jac = [[Fraction(0)] * cols for _ in range(rows)]
    for i, p in enumerate(mor.base_map):
        if not isinstance(p, Poly):
            continue
        for j, name in enumerate(mor.src.coords):
            jac[i][j] = p.diff(name).eval(values)
    return jac


def tangent_map(mor: Morphism, point: ClassicalPoint
                ) -> tuple[CochainComplex, CochainComplex, dict[int, Matrix]]:
    """Chain map between tangent complexes induced at a classical point.

    The point lives on the source; its image under the base map must be
    classical for the target.  Degree zero is the base Jacobian, higher
    degrees the specialized linear part of the fiber family.
    """
    src_cx = tangent_complex(mor.src, point)
    values = _point_values(mor.src.coords, point.coords)
    image = tuple(_eval_at(p, values) for p in mor.base_map)
    dst_cx = tangent_complex(mor.dst, classical_point(mor.dst, image))
    maps: dict[int, Matrix] = {0: _base_jacobian(mor, values)}
    for d in mor.src.fiber.degrees():
        maps[d] = _linear_part_matrix(mor, d, values)
    return src_cx, dst_cx, maps


@dataclass
class EtaleReport:
    ok: bool
    cone_betti: dict[int, int]
    point: ClassicalPoint


def is_etale_at(mor: Morphism, point: ClassicalPoint) -> EtaleReport:
    """Quasi-isomorphism of tangent complexes, certified by an acyclic cone."""
    src_cx, dst_cx, maps = tangent_map(mor, point)
    cone = mapping_cone(maps, src_cx, dst_cx)
    betti = cone.cohomology("both")
    return EtaleReport(not betti, betti, point)


@dataclass
class WeakEquivReport:
    ok: bool
    bijection_ok: bool
    pairs: list[tuple[ClassicalPoint, tuple[Fraction, ...]]]
    etale: list[EtaleReport]
    note: str = ("certified on the supplied candidate loci only; global "
                 "statements need a complete point list")


def is_weak_equivalence(mor: Morphism, src_points, dst_points) -> WeakEquivReport:
    """Check a morphism is a weak equivalence on supplied candidate loci.

    src_points and dst_points enumerate the known classical points of the
    two sides.  The base map must send the first list bijectively onto the
    second, and the tangent map must be a quasi-isomorphism at every
    source point.
    """
    src_pts = [p if isinstance(p, ClassicalPoint) else classical_point(mor.src, p)
               for p in src_points]
    dst_set = {tuple(Fraction(v) for v in
                     (p.coords if isinstance(p, ClassicalPoint) else p))
               for p in dst_points}
    for q in dst_set:
        classical_point(mor.dst, q)

    pairs = []
    images = []
    for p in src_pts:
        values = _point_values(mor.src.coords, p.coords)
        image = tuple(_eval_at(poly, values) for poly in mor.base_map)
        pairs.append((p, image))
        images.append(image)
    bijection_ok = (len(set(images)) == len(images) == len(dst_set)
                    and set(images) == dst_set)

    etale = [is_etale_at(mor, p) for p in src_pts]
    ok = bijection_ok and all(r.ok for r in etale)
    return WeakEquivReport(ok, bijection_ok, pairs, etale)


@dataclass
class FibrationReport:
    ok: bool
    submersion_ok: bool
    surjective_degrees: dict[int, bool]
    ranks: dict[int, int]
    note: str = "rank conditions checked at the supplied sample points"


def _probe_points(coords, samples) -> list[tuple[Fraction, ...]]:
    pts = [tuple(Fraction(v) for v in p) for p in samples]
    m = len(coords)
    for spread in (Fraction(1, 2), Fraction(-2, 3), Fraction(3, 5)):
        pts.append(tuple(spread + Fraction(j, 7) for j in range(m)))
    return pts


def is_fibration(mor: Morphism, samples=()) -> FibrationReport:
    """Submersion on the base plus degreewise surjective linear part.

    The base Jacobian must have full row rank at every supplied sample
    point.  The linear fiber part must be surjective in every degree with
    the same rank at all samples and a few deterministic probe points: a
    rank that varies is rejected outright rather than reported.
    """
    sample_pts = [tuple(Fraction(v) for v in p) for p in samples]
    submersion_ok = True
    target_rows = len(mor.dst.coords)
    for pt in sample_pts:
        values = _point_values(mor.src.coords, pt)
        if rank(_base_jacobian(mor, values)) != target_rows:
            submersion_ok = False
            break

    surj: dict[int, bool] = {}
    ranks: dict[int, int] = {}
    probes = _probe_points(mor.src.coords, sample_pts)
    degrees = sorted(set(mor.src.fiber.degrees()) | set(mor.dst.fiber.degrees()))
    for d in degrees:
        seen = set()
        for pt in probes:
            values = _point_values(mor.src.coords, pt)
            seen.add(rank(_linear_part_matrix(mor, d, values)))
        if len(seen) > 1:
            raise ValueError(f"linear part has non-constant rank in degree {d}")
        r = seen.pop() if seen else 0
        ranks[d] = r
        surj[d] = r == mor.dst.fiber.dim(d)
    ok = submersion_ok and all(surj.values())
    return FibrationReport(ok, submersion_ok, surj, ranks)


# ---------------------------------------------------------------------------
# Shifted tangent bundle
# ---------------------------------------------------------------------------


@dataclass
class ShiftedTangentData:
    """Shifted tangent fiber with the three key dictionaries.

    base_dt maps a coordinate index to its shifted base key, fiber_dt and
    fiber_plain map original fiber keys to the shifted and plain copies.
    """

    space: GradedSpace
    ops: OpFamily
    base_dt: dict[int, tuple]
    fiber_dt: dict[tuple, tuple]
    fiber_plain: dict[tuple, tuple]


def shifted_tangent(bundle: LinftyBundle) -> LinftyBundle:
    """Bundle on the shifted tangent space of the total space.

    The fiber acquires, next to each original summand, a copy shifted up
    by one (marked dt) and a shifted copy of the base tangent space.  The
    operations are determined by three rules on a basis tuple: with no dt
    factor, the original operation; with exactly one shifted fiber factor,
    the original operation on underlying vectors, pushed back into the
    shifted copy with the sign of carrying the shift symbol to the far
    right; with exactly one shifted base factor, differentiation of the
    coefficient polynomials in that base direction.  Two or more dt
    factors annihilate.  The result is validated against the flatness of
    coordinate differentiation by check_mc downstream.
    """
    data = shifted_tangent_data(bundle)
    return LinftyBundle(bundle.coords, data.space,
                        MultiOp.zero(1, 1, data.space, data.space), data.ops)


def shifted_tangent_data(bundle: LinftyBundle) -> ShiftedTangentData:
    """shifted_tangent together with the basis-key dictionaries."""
    if any(any(flags) for flags in bundle.fiber.dt.values()):
        raise ValueError("fiber already carries dt markers")
    m = len(bundle.coords)
    fib = bundle.fiber

    dims: dict[int, list[str]] = {}
    dts: dict[int, list[bool]] = {}

    def push(degree: int, label: str, is_dt: bool):
        dims.setdefault(degree, []).append(label)
        dts.setdefault(degree, []).append(is_dt)
        return (degree, len(dims[degree]) - 1)

    tm_key: dict[int, tuple] = {}
    for j in range(m):
        tm_key[j] = push(1, f"d{bundle.coords[j]} dt", True)
    ldt_key: dict[tuple, tuple] = {}
    lpl_key: dict[tuple, tuple] = {}
    for d in fib.degrees():
        for i in range(fib.dims[d]):
            ldt_key[(d, i)] = push(d + 1, fib.labels[d][i] + " dt", True)
    for d in fib.degrees():
        for i in range(fib.dims[d]):
            lpl_key[(d, i)] = push(d, fib.labels[d][i], False)

    space = GradedSpace.build({d: len(v) for d, v in dims.items()},
                              labels=dims, dt=dts)
    tm_inv = {v: j for j, v in tm_key.items()}
    ldt_inv = {v: k for k, v in ldt_key.items()}
    lpl_inv = {v: k for k, v in lpl_key.items()}

    ell = bundle.total()
    arities = sorted(k for k, op in ell.ops.items() if not op.is_zero())
    top = (max(arities) + 1) if arities else 0

    def value(tup):
        dt_pos = [p for p, key in enumerate(tup) if space.is_dt(key)]
        if len(dt_pos) > 1:
            return {}
        if not dt_pos:
            inner = tuple(lpl_inv[key] for key in tup)
            vec = ell.op(len(tup)).evaluate_basis(inner) if len(tup) in ell.ops else {}
            return {lpl_key[k]: c for k, c in vec.items()}
        p = dt_pos[0]
        sign = -1 if sum(tup[i][0] for i in range(p + 1, len(tup))) % 2 else 1
        rest = tuple(lpl_inv[tup[i]] for i in range(len(tup)) if i != p)
        key = tup[p]
        if key in ldt_inv:
            k = len(tup)
            if k not in ell.ops:
                return {}
            vec = ell.op(k).evaluate(
                [{ldt_inv[key]: Fraction(1)}] + [{r: Fraction(1)} for r in rest])
            return {ldt_key[q]: (c if sign > 0 else -c) for q, c in vec.items()}
        j = tm_inv[key]
        k = len(tup) - 1
        if k not in ell.ops:
            return {}
        name = bundle.coords[j]
        diffed = map_op_coeffs(
            ell.op(k),
            lambda c: c.diff(name) if isinstance(c, Poly) else Fraction(0))
        vec = diffed.evaluate_basis(rest)
        return {ldt_key[q]: (c if sign > 0 else -c) for q, c in vec.items()}

    ops: dict[int, MultiOp] = {}
    for k in range(top + 1):
        op = MultiOp.from_function(k, 1, space, space, value)
        if not op.is_zero():
            ops[k] = op
    return ShiftedTangentData(space, OpFamily(1, space, space, ops),
                              tm_key, ldt_key, lpl_key)


# ---------------------------------------------------------------------------
# Pullback of a fibration
# ---------------------------------------------------------------------------


@dataclass
class PullbackResult:
    bundle: LinftyBundle
    to_fibration_source: Morphism
    to_other_source: Morphism
    other: Morphism


def _same_target(a: LinftyBundle, b: LinftyBundle) -> bool:
    return (a.coords == b.coords and a.fiber.dims == b.fiber.dims
            and a.total() == b.total())


def pullback_fibration(fib: Morphism, other: Morphism,
                       verify: bool = True) -> PullbackResult:
    """Strict pullback of a fibration along another morphism.

    fib and other share their target.  The base fibered product must be a
    graph, so one of the two base maps has to be affine; the fibration is
    first straightened by linearize_fibration, then the pullback carries
    the complement-of-kernel summand together with the other source's
    fiber.  The construction is verified on the spot: flatness of the
    structure, both projections being morphisms, commutativity of the
    square, and additivity of virtual dimensions.
    """
    if not _same_target(fib.dst, other.dst):
        raise ValueError("the two morphisms must share their target bundle")

    clash = set(fib.src.coords) & set(other.src.coords)
    if clash:
        mapping = {}
        taken = set(fib.src.coords) | set(other.src.coords)
        for name in other.src.coords:
            if name in set(fib.src.coords):
                cand = name + "_b"
                while cand in taken:
                    cand += "b"
                taken.add(cand)
                mapping[name] = cand
        other = rename_morphism_source(other, mapping)

    lin = linearize_fibration(fib)
    iso, linear, mid = lin.iso, lin.linear, lin.middle

    # Base graph: solve the affine side for its coordinates.
    p_aff = _try_affine(fib.base_map, fib.src.coords)
    f_aff = _try_affine(other.base_map, other.src.coords)
    if p_aff is not None:
        a, c = p_aff
        w = right_inverse(a)
        if w is None:
            raise ValueError("affine base map of the fibration is not surjective")
        kern = kernel_basis(a, cols=len(fib.src.coords))
        znames = _fresh_names("z", len(kern), set(other.src.coords))
        prod_coords = tuple(znames) + tuple(other.src.coords)
        rhs = [q - cc for q, cc in zip(other.base_map, c)]
        x_polys = []
        for r in range(len(fib.src.coords)):
            pexpr = Poly.zero()
            for s in range(len(rhs)):
                if w[r][s]:
                    pexpr = pexpr + w[r][s] * rhs[s]
            for t, veck in enumerate(kern):
                if veck[r]:
                    pexpr = pexpr + veck[r] * Poly.variable(znames[t])
            x_polys.append(pexpr)
        pr1_base = tuple(x_polys)
        pr2_base = tuple(Poly.variable(n) for n in other.src.coords)
        subst_mid = {name: poly for name, poly in zip(fib.src.coords, x_polys)}
        subst_other = None
    elif f_aff is not None:
        a, c = f_aff
        w = right_inverse(a)
        if w is None:
            raise ValueError("affine base map of the other leg is not surjective")
        kern = kernel_basis(a, cols=len(other.src.coords))
        znames = _fresh_names("z", len(kern), set(fib.src.coords))
        prod_coords = tuple(fib.src.coords) + tuple(znames)
        rhs = [q - cc for q, cc in zip(fib.base_map, c)]
        xp_polys = []
        for r in range(len(other.src.coords)):
            pexpr = Poly.zero()
            for s in range(len(rhs)):
                if w[r][s]:
                    pexpr = pexpr + w[r][s] * rhs[s]
            for t, veck in enumerate(kern):
                if veck[r]:
                    pexpr = pexpr + veck[r] * Poly.variable(znames[t])
            xp_polys.append(pexpr)
        pr1_base = tuple(Poly.variable(n) for n in fib.src.coords)
        pr2_base = tuple(xp_polys)
        subst_mid = None
        subst_other = {name: poly for name, poly in zip(other.src.coords, xp_polys)}
    else:
        raise ValueError("need an affine base map on one side to form the graph")

    # Fiber: kernel complement of the straightened fibration plus the
    # other source fiber.
    lam_space, into_f, into_lp = lin.complement.direct_sum(other.src.fiber)

    def sub_mid(cf):
        if subst_mid is None or not isinstance(cf, Poly):
            return cf
        return cf.substitute(subst_mid)

    def sub_other(cf):
        if subst_other is None or not isinstance(cf, Poly):
            return cf
        return cf.substitute(subst_other)

    mid_total = map_family_coeffs(mid.total(), sub_mid)
    other_total = map_family_coeffs(other.src.total(), sub_other)
    phi_other = map_family_coeffs(other.phi, sub_other)

    into_e, into_k = lin.embed_target, lin.embed_complement
    lp_inv = {v: k for k, v in into_lp.items()}
    f_inv = {v: k for k, v in into_f.items()}

    def psi_value(k):
        def value(tup):
            if k == 1:
                key = tup[0]
                if key in f_inv:
                    return {into_k[f_inv[key]]: Fraction(1)}
                vec = phi_other.op(1).evaluate_basis((lp_inv[key],))
                return {into_e[q]: c for q, c in vec.items()}
            if any(key in f_inv for key in tup):
                return {}
            inner = tuple(lp_inv[key] for key in tup)
            if k not in phi_other.ops:
                return {}
            vec = phi_other.op(k).evaluate_basis(inner)
            return {into_e[q]: c for q, c in vec.items()}
        return value

    psi_ops: dict[int, MultiOp] = {}
    for k in sorted(set(phi_other.ops) | {1}):
        op = MultiOp.from_function(k, 0, lam_space, mid.fiber, psi_value(k))
        if not op.is_zero():
            psi_ops[k] = op
    psi = OpFamily(0, lam_space, mid.fiber, psi_ops)

    proj_f = MultiOp.from_function(
        1, 0, mid.fiber, lam_space,
        lambda tup: {into_f[lin.split_complement[tup[0]]]: Fraction(1)}
        if tup[0] in lin.split_complement else {})

    pushed = bullet(mid_total, psi)
    lifted_ops: dict[int, MultiOp] = {}
    for k in sorted(set(pushed.ops) | set(other_total.ops)):
        comp_f = op_then(pushed.op(k), proj_f) if k in pushed.ops else None
        lift = None
        if k in other_total.ops:
            src_op = other_total.op(k)
            coeffs = {tuple(into_lp[q] for q in tup): {into_lp[r]: c
                                                       for r, c in vec.items()}
                      for tup, vec in src_op.coeffs.items()}
            lift = MultiOp(k, 1, lam_space, lam_space, coeffs)
        op = comp_f if comp_f is not None else MultiOp.zero(k, 1, lam_space, lam_space)
        if lift is not None:
            op = op.plus(lift)
        if not op.is_zero():
            lifted_ops[k] = op
    bundle = LinftyBundle(prod_coords, lam_space,
                          MultiOp.zero(1, 1, lam_space, lam_space),
                          OpFamily(1, lam_space, lam_space, lifted_ops))

    pr2 = Morphism(bundle, other.src, pr2_base,
                   OpFamily(0, lam_space, other.src.fiber, {
                       1: MultiOp.from_function(
                           1, 0, lam_space, other.src.fiber,
                           lambda tup: {lp_inv[tup[0]]: Fraction(1)}
                           if tup[0] in lp_inv else {})}))
    to_mid = Morphism(bundle, mid, pr1_base, psi)
    pr1 = compose(invert_iso(iso), to_mid)

    if verify:
        rep = check_mc(bundle.as_algebra())
        if not rep.ok:
            raise AssertionError("pullback structure fails the defining equation")
        for mor in (pr1, pr2):
            if not check_morphism(mor).ok:
                raise AssertionError("pullback projection is not a morphism")
        left = compose(fib, pr1)
        right = compose(other, pr2)
        if left.phi != right.phi or any(p != q for p, q in
                                        zip(left.base_map, right.base_map)):
            raise AssertionError("pullback square does not commute")
        want = (virtual_dimension(fib.src) + virtual_dimension(other.src)
                - virtual_dimension(fib.dst))
        if virtual_dimension(bundle) != want:
            raise AssertionError("virtual dimension is not additive")
    return PullbackResult(bundle, pr1, pr2, other)


def _try_affine(polys, coords):
    try:
        rows, consts = _affine_parts(polys, coords)
    except ValueError:
        return None
    return [[Fraction(x) for x in row] for row in rows], [Fraction(c) for c in consts]


def _fresh_names(stem: str, count: int, taken: set[str]) -> list[str]:
    out = []
    i = 0
    while len(out) < count:
        cand = f"{stem}{i}"
        if cand not in taken:
            out.append(cand)
            taken.add(cand)
        i += 1
    return out


# ---------------------------------------------------------------------------
# Point search
# ---------------------------------------------------------------------------


def find_classical_points(bundle: LinftyBundle, box=(-3, 3), grid: int = 7,
                          tol: float = 1e-9, newton_steps: int = 60
                          ) -> tuple[list[ClassicalPoint], list[tuple[float, ...]]]:
    """Grid-seeded Newton search for zeros of the curvature section.

    Intended for up to three base coordinates.  Converged numerical zeros
    are deduplicated; candidates close to small rationals are verified
    exactly and promoted to ClassicalPoint, the rest are reported as
    floats.
    """
    m = len(bundle.coords)
    if m == 0:
        return ([ClassicalPoint(())] if curvature_residual(bundle, ()) == 0
                else []), []
    if m > 3:
        raise ValueError("point search supports at most three coordinates")
    section = sorted(bundle.curvature_section().items())
    comps = [c for _, c in section]

    def f_at(pt):
        values = {n: Fraction(v) for n, v in zip(bundle.coords, pt)}
        return [float(c.eval(values)) if isinstance(c, Poly) else float(c)
                for c in comps]

    def jac_at(pt):
        values = {n: Fraction(v) for n, v in zip(bundle.coords, pt)}
        out = []
        for c in comps:
            row = []
            for name in bundle.coords:
                row.append(float(c.diff(name).eval(values))
                           if isinstance(c, Poly) else 0.0)
            out.append(row)
        return out

    lo, hi = float(box[0]), float(box[1])
    seeds = itertools.product(
        *[[lo + (hi - lo) * i / (grid - 1) for i in range(grid)]] * m)
    found: list[tuple[float, ...]] = []
    for seed in seeds:
        pt = list(seed)
        ok = False
        for _ in range(newton_steps):
            fv = f_at(pt)
            if max((abs(v) for v in fv), default=0.0) < tol:
                ok = True
                break
            jm = jac_at(pt)
            step = _least_squares_step(jm, fv, m)
            if step is None:
                break
            pt = [a - b for a, b in zip(pt, step)]
            if max(abs(v) for v in pt) > 1e6:
                break
        if not ok:
            continue
        if any(max(abs(a - b) for a, b in zip(pt, q)) < 1e-6 for q in found):
            continue
        found.append(tuple(pt))

    exact: list[ClassicalPoint] = []
    seen: set[tuple[Fraction, ...]] = set()
    loose: list[tuple[float, ...]] = []
    # multiple roots stall Newton around tol^(1/k); allow a generous snap
    # radius since promotion is gated on the exact residual anyway
    snap = max(1e-6, float(tol) ** 0.5 * 4)
    for pt in sorted(found):
        promoted = False
        for cap in (1, 2, 8, 64, 1000):
            cand = tuple(Fraction(v).limit_denominator(cap) for v in pt)
            if (max(abs(float(c) - v) for c, v in zip(cand, pt)) <= snap
                    and curvature_residual(bundle, cand) == 0):
                if cand not in seen:
                    seen.add(cand)
                    exact.append(ClassicalPoint(cand))
                promoted = True
                break
        if not promoted:
            loose.append(pt)
    return exact, loose


def _least_squares_step(jm, fv, m):
    """Solve the normal equations J^T J s = J^T f in floats."""
    ata = [[sum(jm[r][i] * jm[r][j] for r in range(len(jm))) for j in range(m)]
           for i in range(m)]
    atb = [sum(jm[r][i] * fv[r] for r in range(len(jm))) for i in range(m)]
    for i in range(m):
        ata[i][i] += 1e-12
    n = m
    aug = [row[:] + [atb[i]] for i, row in enumerate(ata)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(aug[r][col]))
        if abs(aug[piv][col]) < 1e-14:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        for r in range(n):
            if r != col and aug[r][col]:
                fac = aug[r][col] / aug[col][col]
                for cc in range(col, n + 1):
                    aug[r][cc] -= fac * aug[col][cc]
    return [aug[i][n] / aug[i][i] for i in range(n)]
