"""Derived path spaces, diagonal factorizations, derived intersections.

The path space of a bundle is computed on a truncated model: sections of
the pulled-back shifted tangent bundle along the straight path from p to
q are t-polynomials of bounded degree.  On that ambient space the
t-calculus provides a differential and homotopy contracting onto constant
one-form sections plus linear plain sections, presented in the end-value
basis.  Transfer through that contraction, with symbolic endpoints, turns
the truncated model into an honest bundle over the doubled base whose
operation coefficients are closed-form polynomials in (p, q).

On top of the path space sit the diagonal factorization (constant paths
followed by endpoint evaluation), homotopy fibered products as iterated
pullbacks along the evaluation fibration, and derived intersections of
parameterized submanifolds, including the comparison of a section's
derived zero locus with its quasi-smooth model.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import (CurvedAlgebra, LinftyBundle, Morphism, check_mc,
                      check_morphism, compose, product_bundle,
                      rename_morphism_source)
from .geometry import (ClassicalPoint, PullbackResult, classical_point,
                       find_classical_points, is_fibration,
                       is_weak_equivalence, pullback_fibration,
                       shifted_tangent_data, tangent_complex,
                       virtual_dimension)
from .graded import GradedSpace, MultiOp, OpFamily
from .poly import DegreeCapError, Poly, degree_cap
from .transfer import Contraction, TransferResult, transfer

_T = "t"


def _split_t(c) -> dict[int, "Poly | Fraction"]:
    """Decompose a coefficient into powers of the path parameter."""
    if not isinstance(c, Poly) or _T not in c.vars:
        return {0: c} if c else {}
    i = c.vars.index(_T)
    rest = tuple(v for j, v in enumerate(c.vars) if j != i)
    buckets: dict[int, dict[tuple, Fraction]] = {}
    for e, coeff in c.terms.items():
        re = tuple(x for j, x in enumerate(e) if j != i)
        buckets.setdefault(e[i], {})[re] = coeff
    return {r: Poly(rest, terms) for r, terms in buckets.items()}


# ---------------------------------------------------------------------------
# Truncated ambient model
# ---------------------------------------------------------------------------


@dataclass
class PathModel:
    """Truncated t-polynomial model of sections along a straight path.

    Ambient keys come in three kinds: constant shifted base directions,
    one-form fiber sections t^s e dt with s < cap, and plain fiber
    sections t^s e with s <= cap.  The contraction retracts onto constant
    one-forms plus linear plain sections in the end-value basis.
    """

    bundle: LinftyBundle
    cap: int
    space: GradedSpace
    delta: MultiOp
    eta: MultiOp
    contraction: Contraction
    base_dt: dict[int, tuple]
    plain: dict[tuple, tuple]          # (fiber key, power) -> ambient key
    one_form: dict[tuple, tuple]       # (fiber key, power) -> ambient key
    h_base_dt: dict[int, tuple]        # coord index -> retract key
    h_avg: dict[tuple, tuple]          # fiber key -> constant one-form key
    h_end: dict[tuple, tuple]          # (fiber key, 0|1) -> end-value key

    def plain_inv(self):
        return {v: k for k, v in self.plain.items()}

    def one_form_inv(self):
        return {v: k for k, v in self.one_form.items()}


def required_t_degree(bundle: LinftyBundle) -> int:
    """t-degree the transfer stays within: coefficient degree times amplitude.

    Substituting a straight path into a coefficient of total degree d gives
    a t-polynomial of degree d, and the recursion multiplies at most one
    such factor per amplitude level, so outputs live below d * n.
    """
    d = 0
    for k in bundle.ops.arities():
        for vec in bundle.ops.op(k).coeffs.values():
            for c in vec.values():
                if isinstance(c, Poly):
                    d = max(d, c.total_degree())
    return d * max(bundle.amplitude, 1)


def build_path_model(bundle: LinftyBundle, cap: int | None = None) -> PathModel:
    """Ambient truncated complex with its contraction, no operations yet."""
    cap = cap or degree_cap()
    if cap < 2:
        raise DegreeCapError(f"path models need a t-degree cap of at least 2, got {cap}")
    need = required_t_degree(bundle)
    if need > cap:
        raise DegreeCapError(
            f"path model needs t-degree {need} "
            f"(coefficient degree times amplitude) but the cap is {cap}; "
            f"raise LINFTY_DEGREE_CAP or pass a larger cap")
    fib = bundle.fiber
    if any(any(flags) for flags in fib.dt.values()):
        raise ValueError("fiber already carries dt markers")
    m = len(bundle.coords)

    labels: dict[int, list[str]] = {}
    dts: dict[int, list[bool]] = {}

    def push(degree: int, label: str, is_dt: bool):
        labels.setdefault(degree, []).append(label)
        dts.setdefault(degree, []).append(is_dt)
        return (degree, len(labels[degree]) - 1)

    base_dt = {j: push(1, f"d{bundle.coords[j]} dt", True) for j in range(m)}
    one_form: dict[tuple, tuple] = {}
    plain: dict[tuple, tuple] = {}
    for d in fib.degrees():
        for i in range(fib.dims[d]):
            lab = fib.labels[d][i]
            for s in range(cap):
                one_form[((d, i), s)] = push(d + 1, f"t^{s} {lab} dt", True)
    for d in fib.degrees():
        for i in range(fib.dims[d]):
            lab = fib.labels[d][i]
            for s in range(cap + 1):
                plain[((d, i), s)] = push(d, f"t^{s} {lab}", False)
    space = GradedSpace.build({d: len(v) for d, v in labels.items()},
                              labels=labels, dt=dts)

    delta_coeffs = {}
    for ((d, i), s), key in plain.items():
        if s == 0:
            continue
        sign = -1 if d % 2 else 1
        delta_coeffs[(key,)] = {one_form[((d, i), s - 1)]: Fraction(sign * s)}
    delta = MultiOp(1, 1, space, space, delta_coeffs)

    eta_coeffs = {}
    for ((d, i), s), key in one_form.items():
        sign = Fraction(-1 if d % 2 else 1, s + 1)
        out = {plain[((d, i), s + 1)]: sign}
        out[plain[((d, i), 1)]] = out.get(plain[((d, i), 1)], Fraction(0)) - sign
        out = {k: c for k, c in out.items() if c}
        if out:
            eta_coeffs[(key,)] = out
    eta = MultiOp(1, -1, space, space, eta_coeffs)

    h_labels: dict[int, list[str]] = {}
    h_dts: dict[int, list[bool]] = {}

    def hpush(degree: int, label: str, is_dt: bool):
        h_labels.setdefault(degree, []).append(label)
        h_dts.setdefault(degree, []).append(is_dt)
        return (degree, len(h_labels[degree]) - 1)

    h_base_dt = {j: hpush(1, f"d{bundle.coords[j]} dt", True) for j in range(m)}
    h_avg: dict[tuple, tuple] = {}
    h_end: dict[tuple, tuple] = {}
    for d in fib.degrees():
        for i in range(fib.dims[d]):
            h_avg[(d, i)] = hpush(d + 1, f"{fib.labels[d][i]} dt", True)
    for d in fib.degrees():
        for i in range(fib.dims[d]):
            lab = fib.labels[d][i]
            h_end[((d, i), 0)] = hpush(d, f"{lab}(0)", False)
            h_end[((d, i), 1)] = hpush(d, f"{lab}(1)", False)
    h_space = GradedSpace.build({d: len(v) for d, v in h_labels.items()},
                                labels=h_labels, dt=h_dts)

    iota_coeffs: dict = {}
    for j, hk in h_base_dt.items():
        iota_coeffs[(hk,)] = {base_dt[j]: Fraction(1)}
    for fk, hk in h_avg.items():
        iota_coeffs[(hk,)] = {one_form[(fk, 0)]: Fraction(1)}
    for (fk, end), hk in h_end.items():
        if end == 0:
            iota_coeffs[(hk,)] = {plain[(fk, 0)]: Fraction(1),
                                  plain[(fk, 1)]: Fraction(-1)}
        else:
            iota_coeffs[(hk,)] = {plain[(fk, 1)]: Fraction(1)}
    iota = MultiOp(1, 0, h_space, space, iota_coeffs)

    con = Contraction.from_basis(space, delta, eta, h_space, iota)
    return PathModel(bundle, cap, space, delta, eta, con, base_dt,
                     plain, one_form, h_base_dt, h_avg, h_end)


def path_perturbation(model: PathModel, pvals: dict[str, "Poly | Fraction"],
                      qvals: dict[str, "Poly | Fraction"]) -> OpFamily:
    """Pull the shifted tangent operations back along a(t) = p + t(q-p).

    The straight-line displacement enters as extra curvature in the
    shifted base directions; every other contribution is coefficient
    substitution x -> a(t) with the resulting t-powers distributed onto
    the truncated basis.  Terms beyond the cap are projected away; the
    structure equation holds exactly on the truncated model because
    applying an operation never lowers t-degree.
    """
    bundle = model.bundle
    data = shifted_tangent_data(bundle)
    t = Poly.variable(_T)
    avals = {}
    for name in bundle.coords:
        p, q = pvals[name], qvals[name]
        pp = p if isinstance(p, Poly) else Poly.constant(p)
        qq = q if isinstance(q, Poly) else Poly.constant(q)
        avals[name] = pp + t * (qq - pp)

    dt_kind = {v: k for k, v in data.fiber_dt.items()}
    plain_kind = {v: k for k, v in data.fiber_plain.items()}
    amb_to_t: dict[tuple, tuple] = {}
    for j, v in data.base_dt.items():
        amb_to_t[model.base_dt[j]] = (v, 0)
    for (fk, s), key in model.one_form.items():
        amb_to_t[key] = (data.fiber_dt[fk], s)
    for (fk, s), key in model.plain.items():
        amb_to_t[key] = (data.fiber_plain[fk], s)

    def out_key(t_key: tuple, power: int):
        if t_key in dt_kind:
            if power >= model.cap:
                return None
            return model.one_form[(dt_kind[t_key], power)]
        if power > model.cap:
            return None
        return model.plain[(plain_kind[t_key], power)]

    def value(tup):
        shift = 0
        inner = []
        for key in tup:
            t_key, s = amb_to_t[key]
            shift += s
            inner.append({t_key: Fraction(1)})
        k = len(tup)
        if k not in data.ops.ops:
            return {}
        vec = data.ops.op(k).evaluate(inner)
        out: dict = {}
        for t_key, c in vec.items():
            sub = c.substitute(avals) if isinstance(c, Poly) else c
            for r, cr in _split_t(sub).items():
                key = out_key(t_key, shift + r)
                if key is None:
                    continue
                cur = out.get(key)
                out[key] = cr if cur is None else cur + cr
        return {k2: v for k2, v in out.items() if v}

    arities = sorted(kk for kk, op in data.ops.ops.items() if not op.is_zero())
    top = max(arities) if arities else 0
    ops: dict[int, MultiOp] = {}
    for k in range(top + 1):
        op = MultiOp.from_function(k, 1, model.space, model.space, value)
        if not op.is_zero():
            ops[k] = op

    prime = {}
    for j, name in enumerate(bundle.coords):
        p, q = pvals[name], qvals[name]
        pp = p if isinstance(p, Poly) else Poly.constant(p)
        qq = q if isinstance(q, Poly) else Poly.constant(q)
        dcoef = qq - pp
        if dcoef:
            prime[model.base_dt[j]] = dcoef
    if prime:
        extra = MultiOp(0, 1, model.space, model.space, {(): prime})
        ops[0] = ops[0].plus(extra) if 0 in ops else extra
        if ops[0].is_zero():
            del ops[0]
    return OpFamily(1, model.space, model.space, ops)


def path_curved_structure(bundle: LinftyBundle, start, end,
                          cap: int | None = None) -> CurvedAlgebra:
    """Curved structure on the truncated path sections for one rational path."""
    pvals = {name: Fraction(v) for name, v in zip(bundle.coords, start)}
    qvals = {name: Fraction(v) for name, v in zip(bundle.coords, end)}
    if len(pvals) != len(bundle.coords) or len(qvals) != len(bundle.coords):
        raise ValueError("endpoint dimension mismatch")
    model = build_path_model(bundle, cap)
    lam = path_perturbation(model, pvals, qvals)
    return CurvedAlgebra(model.space, model.delta, lam)


# ---------------------------------------------------------------------------
# Derived path space
# ---------------------------------------------------------------------------


@dataclass
class DerivedPathSpace:
    """Path space bundle over the doubled base, with its two morphisms."""

    bundle: LinftyBundle           # over (p, q)
    inclusion: Morphism            # constant paths
    evaluation: Morphism           # endpoint evaluation, a fibration
    product: LinftyBundle          # source x source with renamed coords
    product_maps: tuple[dict, dict]
    phi: OpFamily                  # transfer inclusion H -> ambient
    model: PathModel
    transfer_result: TransferResult


def _doubled_names(coords) -> tuple[tuple[str, ...], tuple[str, ...]]:
    taken = set(coords)
    ps, qs = [], []
    for c in coords:
        a, b = c + "_0", c + "_1"
        while a in taken:
            a += "_"
        taken.add(a)
        while b in taken:
            b += "_"
        taken.add(b)
        ps.append(a)
        qs.append(b)
    return tuple(ps), tuple(qs)


def derived_path_space(bundle: LinftyBundle, cap: int | None = None,
                       verify: bool = True) -> DerivedPathSpace:
    """Transfer the path structure once manifold-wide, with symbolic ends.

    The output bundle lives over the doubled base; its operations have
    polynomial coefficients in the two endpoint copies.  The constant-path
    inclusion and the endpoint evaluation come along as morphisms, and the
    defining equation of the result is re-checked on the spot.
    """
    model = build_path_model(bundle, cap)
    pnames, qnames = _doubled_names(bundle.coords)
    pvals = {c: Poly.variable(n) for c, n in zip(bundle.coords, pnames)}
    qvals = {c: Poly.variable(n) for c, n in zip(bundle.coords, qnames)}
    lam = path_perturbation(model, pvals, qvals)
    result = transfer(model.contraction, lam)

    coords = pnames + qnames
    h = model.contraction.h_space
    pm = LinftyBundle(coords, h, result.algebra.delta, result.algebra.ops)

    left = bundle.rename_coords(dict(zip(bundle.coords, pnames)))
    right = bundle.rename_coords(dict(zip(bundle.coords, qnames)))
    product, j0, j1 = product_bundle(left, right)

    ev_coeffs = {}
    for (fk, end), hk in model.h_end.items():
        ev_coeffs[(hk,)] = {(j0 if end == 0 else j1)[fk]: Fraction(1)}
    ev = Morphism(pm, product, tuple(Poly.variable(c) for c in coords),
                  OpFamily(0, h, product.fiber,
                           {1: MultiOp(1, 0, h, product.fiber, ev_coeffs)}))

    inc_coeffs = {}
    for d in bundle.fiber.degrees():
        for i in range(bundle.fiber.dims[d]):
            fk = (d, i)
            inc_coeffs[(fk,)] = {model.h_end[(fk, 0)]: Fraction(1),
                                 model.h_end[(fk, 1)]: Fraction(1)}
    inc = Morphism(bundle, pm,
                   tuple(Poly.variable(c) for c in bundle.coords) * 2,
                   OpFamily(0, bundle.fiber, h,
                            {1: MultiOp(1, 0, bundle.fiber, h, inc_coeffs)}
                            if inc_coeffs else {}))

    dps = DerivedPathSpace(pm, inc, ev, product, (j0, j1), result.phi,
                           model, result)
    if verify:
        rep = check_mc(pm.as_algebra())
        if not rep.ok:
            raise AssertionError("path space structure fails the defining equation")
        if not check_morphism(ev).ok:
            raise AssertionError("endpoint evaluation is not a morphism")
        if not check_morphism(inc).ok:
            raise AssertionError("constant-path inclusion is not a morphism")
    return dps


def path_space_manifold(m: int, cap: int | None = None) -> DerivedPathSpace:
    """Derived path space of a plain affine space of dimension m."""
    if m <= 0:
        raise ValueError("dimension must be positive")
    coords = tuple("xyz"[i] if m <= 3 else f"x{i}" for i in range(m))
    empty = GradedSpace.build({})
    bundle = LinftyBundle(coords, empty, MultiOp.zero(1, 1, empty, empty),
                          OpFamily(1, empty, empty, {}))
    return derived_path_space(bundle, cap)


# ---------------------------------------------------------------------------
# Factorization of the diagonal
# ---------------------------------------------------------------------------


@dataclass
class Factorization:
    path_space: DerivedPathSpace
    weak_equivalence: Morphism     # source -> path space
    fibration: Morphism            # path space -> product
    diagonal: Morphism             # source -> product
    product: LinftyBundle


def factorize_diagonal(bundle: LinftyBundle, cap: int | None = None) -> Factorization:
    """Factor the diagonal through the path space and verify the composite."""
    dps = derived_path_space(bundle, cap)
    j0, j1 = dps.product_maps
    diag_coeffs = {}
    for d in bundle.fiber.degrees():
        for i in range(bundle.fiber.dims[d]):
            fk = (d, i)
            diag_coeffs[(fk,)] = {j0[fk]: Fraction(1), j1[fk]: Fraction(1)}
    diag = Morphism(bundle, dps.product,
                    tuple(Poly.variable(c) for c in bundle.coords) * 2,
                    OpFamily(0, bundle.fiber, dps.product.fiber,
                             {1: MultiOp(1, 0, bundle.fiber, dps.product.fiber,
                                         diag_coeffs)} if diag_coeffs else {}))
    comp = compose(dps.evaluation, dps.inclusion)
    top = max([*comp.phi.ops, *diag.phi.ops], default=0)
    same_phi = all(comp.phi.op(k) == diag.phi.op(k) for k in range(top + 1))
    if not same_phi or any(p != q for p, q in zip(comp.base_map, diag.base_map)):
        raise AssertionError("factorization composite is not the diagonal")
    return Factorization(dps, dps.inclusion, dps.evaluation, diag, dps.product)


@dataclass
class FactorizationReport:
    ok: bool
    weak_equiv: object
    fibration: object


def verify_factorization(fz: Factorization, points) -> FactorizationReport:
    """Check the two legs at supplied classical points of the source."""
    pts = [p if isinstance(p, ClassicalPoint)
           else classical_point(fz.weak_equivalence.src, p) for p in points]
    lifted = [tuple(p.coords) * 2 for p in pts]
    weq = is_weak_equivalence(fz.weak_equivalence, pts, lifted)
    fib = is_fibration(fz.fibration, samples=[tuple(p.coords) * 2 for p in pts])
    return FactorizationReport(weq.ok and fib.ok, weq, fib)


# ---------------------------------------------------------------------------
# Homotopy fibered products
# ---------------------------------------------------------------------------


@dataclass
class FiberedProduct:
    bundle: LinftyBundle
    to_left: Morphism
    to_right: Morphism
    path_space: DerivedPathSpace
    pullback: PullbackResult
    left: Morphism
    right: Morphism


def _product_morphism(f: Morphism, g: Morphism, dst_product: LinftyBundle,
                      j0: dict, j1: dict) -> tuple[Morphism, Morphism]:
    """f x g into an explicitly built product bundle; g may get renamed."""
    clash = set(f.src.coords) & set(g.src.coords)
    if clash:
        taken = set(f.src.coords) | set(g.src.coords)
        mapping = {}
        for name in g.src.coords:
            if name in clash:
                cand = name + "_r"
                while cand in taken:
                    cand += "r"
                taken.add(cand)
                mapping[name] = cand
        g = rename_morphism_source(g, mapping)
    src, m1, m2 = product_bundle(f.src, g.src)

    phi_ops: dict[int, MultiOp] = {}
    for fam, mp_in, mp_out in ((f.phi, m1, j0), (g.phi, m2, j1)):
        for k, op in fam.ops.items():
            if op.is_zero():
                continue
            coeffs = {tuple(mp_in[q] for q in tup):
                      {mp_out[r]: c for r, c in vec.items()}
                      for tup, vec in op.coeffs.items()}
            piece = MultiOp(k, 0, src.fiber, dst_product.fiber, coeffs)
            phi_ops[k] = phi_ops[k].plus(piece) if k in phi_ops else piece
    base = tuple(f.base_map) + tuple(g.base_map)
    return Morphism(src, dst_product, base,
                    OpFamily(0, src.fiber, dst_product.fiber, phi_ops)), g


def homotopy_fibered_product(f: Morphism, g: Morphism,
                             cap: int | None = None) -> FiberedProduct:
    """Pull the path-space evaluation back along f x g.

    Realizes the homotopy fibered product of the two morphisms into their
    shared target as an honest bundle; virtual dimension additivity is
    asserted on the result.
    """
    if not (f.dst.coords == g.dst.coords and f.dst.fiber.dims == g.dst.fiber.dims
            and f.dst.total() == g.dst.total()):
        raise ValueError("the two morphisms must share their target bundle")
    dps = derived_path_space(f.dst, cap)
    j0, j1 = dps.product_maps
    fg, g_used = _product_morphism(f, g, dps.product, j0, j1)
    if not check_morphism(fg).ok:
        raise AssertionError("product morphism failed its defining equation")
    res = pullback_fibration(dps.evaluation, fg)

    # pullback may have renamed the product's coordinates; split what it used
    src_prod = res.other.src
    n = len(f.src.coords)
    left_factor = f.src.rename_coords(dict(zip(f.src.coords, src_prod.coords[:n])))
    right_factor = g_used.src.rename_coords(dict(zip(g_used.src.coords,
                                                     src_prod.coords[n:])))
    left_proj = _factor_projection(src_prod, left_factor, first=True)
    right_proj = _factor_projection(src_prod, right_factor, first=False)
    to_left = compose(left_proj, res.to_other_source)
    to_right = compose(right_proj, res.to_other_source)

    want = (virtual_dimension(f.src) + virtual_dimension(g_used.src)
            - virtual_dimension(f.dst))
    if virtual_dimension(res.bundle) != want:
        raise AssertionError("virtual dimension is not additive")
    return FiberedProduct(res.bundle, to_left, to_right, dps, res, f, g_used)


def _factor_projection(prod: LinftyBundle, factor: LinftyBundle,
                       first: bool) -> Morphism:
    """Strict projection of an explicit product bundle onto one factor."""
    n = len(factor.coords)
    if first:
        base = tuple(Poly.variable(c) for c in prod.coords[:n])
        offset = {d: 0 for d in factor.fiber.degrees()}
    else:
        base = tuple(Poly.variable(c) for c in prod.coords[len(prod.coords) - n:])
        offset = {d: prod.fiber.dims.get(d, 0) - factor.fiber.dims[d]
                  for d in factor.fiber.degrees()}

    def value(tup):
        (d, i), = tup
        if d not in factor.fiber.dims:
            return {}
        j = i - offset.get(d, 0)
        if 0 <= j < factor.fiber.dims[d]:
            return {(d, j): Fraction(1)}
        return {}

    op = MultiOp.from_function(1, 0, prod.fiber, factor.fiber, value)
    return Morphism(prod, factor, base,
                    OpFamily(0, prod.fiber, factor.fiber,
                             {1: op} if not op.is_zero() else {}))


# ---------------------------------------------------------------------------
# Derived intersections of parameterized submanifolds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Submanifold:
    """Parameterized submanifold of affine space: params -> image polys."""

    params: tuple[str, ...]
    image: tuple[Poly, ...]
    name: str = ""

    @property
    def dim(self) -> int:
        return len(self.params)

    @property
    def ambient_dim(self) -> int:
        return len(self.image)


def axis_submanifold(axis: int, m: int, param: str = "u") -> Submanifold:
    image = tuple(Poly.variable(param) if j == axis else Poly.zero((param,))
                  for j in range(m))
    return Submanifold((param,), image, name=f"axis-{axis}")


def graph_submanifold(fn: Poly, param: str = "u") -> Submanifold:
    """Graph of a one-variable polynomial inside the plane: u -> (u, fn(u))."""
    p = fn.substitute({v: Poly.variable(param) for v in fn.vars if v != param})
    return Submanifold((param,), (Poly.variable(param), p), name="graph")


def _plain_bundle(coords) -> LinftyBundle:
    empty = GradedSpace.build({})
    return LinftyBundle(tuple(coords), empty,
                        MultiOp.zero(1, 1, empty, empty),
                        OpFamily(1, empty, empty, {}))


def _inclusion_morphism(sub: Submanifold, ambient: LinftyBundle) -> Morphism:
    src = _plain_bundle(sub.params)
    base = []
    for p in sub.image:
        pr = p.pruned()
        if not set(pr.vars) <= set(sub.params):
            raise ValueError("submanifold image uses unknown parameters")
        base.append(pr.with_vars(tuple(sub.params)))
    return Morphism(src, ambient, tuple(base),
                    OpFamily(0, src.fiber, ambient.fiber, {}))


@dataclass
class IntersectionPoint:
    point: ClassicalPoint          # in the intersection model base
    ambient: tuple[Fraction, ...]  # common image in the ambient space
    h0: int
    h1: int
    transversal: bool


@dataclass
class DerivedIntersection:
    x: Submanifold
    y: Submanifold
    ambient_coords: tuple[str, ...]
    bundle: LinftyBundle
    to_x: Morphism
    to_y: Morphism
    points: list[IntersectionPoint]
    virtual_dim: int


def ambient_coord_names(m: int) -> tuple[str, ...]:
    return tuple("xyz"[i] if m <= 3 else f"x{i}" for i in range(m))


def derived_intersection(x: Submanifold, y: Submanifold,
                         points=None, cap: int | None = None) -> DerivedIntersection:
    """Intersection of two parameterized submanifolds through the path space.

    Each classical point of the resulting quasi-smooth model is reported
    with the cohomology of its tangent complex; transversality at a point
    is vanishing of the top cohomology.
    """
    if x.ambient_dim != y.ambient_dim:
        raise ValueError("submanifolds live in different ambient spaces")
    m = x.ambient_dim
    ambient = _plain_bundle(ambient_coord_names(m))
    inc_x = _inclusion_morphism(x, ambient)
    inc_y = _inclusion_morphism(y, ambient)
    fp = homotopy_fibered_product(inc_x, inc_y, cap)
    bundle = fp.bundle

    vdim = x.dim + y.dim - m
    if virtual_dimension(bundle) != vdim:
        raise AssertionError("virtual dimension disagrees with dim X + dim Y - dim M")

    pts: list[ClassicalPoint] = []
    if points is not None:
        pts = [p if isinstance(p, ClassicalPoint) else classical_point(bundle, p)
               for p in points]
    elif len(bundle.coords) <= 3:
        pts = find_classical_points(bundle)[0]

    reports = []
    for p in pts:
        cx = tangent_complex(bundle, p)
        betti = cx.cohomology("both")
        values = {n: v for n, v in zip(bundle.coords, p.coords)}
        amb = tuple(poly.eval(values) for poly in fp.to_left.base_map)
        amb_img = tuple(poly.eval({n: v for n, v in
                                   zip(x.params, amb)}) for poly in x.image)
        reports.append(IntersectionPoint(p, amb_img, betti.get(0, 0),
                                         betti.get(1, 0),
                                         betti.get(1, 0) == 0))
    return DerivedIntersection(x, y, ambient.coords, bundle,
                               fp.to_left, fp.to_right, reports, vdim)


# ---------------------------------------------------------------------------
# Zero locus comparison
# ---------------------------------------------------------------------------


@dataclass
class ZeroLocusComparison:
    model: LinftyBundle            # quasi-smooth (base, E, section)
    intersection: DerivedIntersection
    comparison: Morphism
    weak_equiv: object
    points: list[ClassicalPoint]


def zero_locus_model(coords, section, points=None,
                     cap: int | None = None) -> ZeroLocusComparison:
    """Compare a section's quasi-smooth model with its derived zero locus.

    The zero locus is computed as the derived intersection of the zero
    section and the section's graph inside the total space; the comparison
    morphism sends a base point to the corresponding constant parameters
    and a fiber direction to the matching vertical displacement.  Weak
    equivalence is certified at the supplied or discovered classical
    points.
    """
    coords = tuple(coords)
    section = tuple(section)
    m, k = len(coords), len(section)
    fiber = GradedSpace.build({1: k}, labels={1: [f"s{i}" for i in range(k)]})
    lam0 = {}
    for i, p in enumerate(section):
        if p:
            lam0[(1, i)] = p
    model = LinftyBundle(coords, fiber, MultiOp.zero(1, 1, fiber, fiber),
                         OpFamily(1, fiber, fiber,
                                  {0: MultiOp(0, 1, fiber, fiber, {(): lam0})}
                                  if lam0 else {}))

    total_names = coords + tuple(f"e{i}" for i in range(k))
    uparams = tuple(f"u{i}" for i in range(m))
    vparams = tuple(f"v{i}" for i in range(m))
    zero_image = tuple(Poly.variable(n, uparams) for n in uparams) + tuple(
        Poly.zero(uparams) for _ in range(k))
    sub_map = {c: Poly.variable(v, vparams) for c, v in zip(coords, vparams)}
    graph_image = tuple(Poly.variable(n, vparams) for n in vparams) + tuple(
        (p.substitute(sub_map) if isinstance(p, Poly) else Poly.constant(p))
        for p in section)
    x = Submanifold(uparams, zero_image, name="zero-section")
    y = Submanifold(vparams, graph_image, name="section-graph")

    inter = derived_intersection(x, y, points=[], cap=cap)
    target = inter.bundle

    base = tuple(Poly.variable(c) for c in coords) * 2
    # fiber directions of the total space sit after the base directions
    phi_coeffs = {}
    for i in range(k):
        phi_coeffs[((1, i),)] = {(1, m + i): Fraction(1)}
    comparison = Morphism(model, target, base,
                          OpFamily(0, fiber, target.fiber,
                                   {1: MultiOp(1, 0, fiber, target.fiber,
                                               phi_coeffs)} if k else {}))
    if not check_morphism(comparison).ok:
        raise AssertionError("zero-locus comparison is not a morphism")

    if points is not None:
        pts = [p if isinstance(p, ClassicalPoint) else classical_point(model, p)
               for p in points]
    elif m <= 3:
        pts = find_classical_points(model)[0]
    else:
        pts = []
    lifted = [tuple(p.coords) * 2 for p in pts]
    weq = is_weak_equivalence(comparison, pts, lifted)
    return ZeroLocusComparison(model, inter, comparison, weq, pts)
