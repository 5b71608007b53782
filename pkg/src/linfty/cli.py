"""Command-line drivers.

Every subcommand reads and writes the JSON model format from
linfty.modelio, so the output of one command can feed the next.  Exit
codes: 0 when the requested check or construction succeeds, 1 when a
mathematical property fails (the report carries a witness), 2 for
malformed files or arguments.  Commands that certify properties at sample
points repeat the scope note of the underlying report verbatim; nothing
here claims more than the engine checked.

The LINFTY_DEGREE_CAP environment variable bounds the t-degree of path
models; --tol only affects the floating-point seed search for classical
points, every certificate downstream of it is exact.
"""

from __future__ import annotations

import argparse
import ast
import sys
from fractions import Fraction

from .algebra import LinftyBundle, check_mc, check_morphism
from .geometry import (classical_point, cohomology, find_classical_points,
                       is_fibration, is_weak_equivalence, shifted_tangent,
                       tangent_complex, virtual_dimension)
from .modelio import (ModelFormatError, algebra_to_json, bundle_to_json, dumps,
                      frac_str, load_contraction, load_model, load_morphism,
                      parse_frac)
from .pathspace import (axis_submanifold, derived_intersection,
                        derived_path_space, factorize_diagonal,
                        graph_submanifold, homotopy_fibered_product,
                        verify_factorization, zero_locus_model)
from .poly import DegreeCapError, Poly
from .transfer import transfer, transfer_trees


# ---------------------------------------------------------------------------
# small input parsers
# ---------------------------------------------------------------------------


def parse_poly_expr(src: str, coords) -> Poly:
    """Parse a polynomial expression with +, -, *, ** and rational constants.

    Division is allowed by constants only; exponents must be nonnegative
    integers.  Anything else is rejected with the offending fragment named.
    """
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ModelFormatError(f"bad polynomial {src!r}: {exc.msg}") from exc

    def walk(node) -> Poly:
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, int) and not isinstance(node.value, bool):
                return Poly.constant(Fraction(node.value))
            raise ModelFormatError(
                f"{src!r}: only integer literals are allowed, got {node.value!r}")
        if isinstance(node, ast.Name):
            if node.id not in coords:
                raise ModelFormatError(
                    f"{src!r}: unknown coordinate {node.id!r} "
                    f"(have {', '.join(coords) or 'none'})")
            return Poly.variable(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -walk(node.operand)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.UAdd):
            return walk(node.operand)
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Add):
                return walk(node.left) + walk(node.right)
            if isinstance(node.op, ast.Sub):
                return walk(node.left) - walk(node.right)
            if isinstance(node.op, ast.Mult):
                return walk(node.left) * walk(node.right)
            if isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant)
                        and isinstance(node.right.value, int)
                        and node.right.value >= 0):
                    raise ModelFormatError(
                        f"{src!r}: exponents must be nonnegative integer literals")
                return walk(node.left) ** node.right.value
            if isinstance(node.op, ast.Div):
                den = walk(node.right)
                if not den.is_constant() or not den.constant_value():
                    raise ModelFormatError(
                        f"{src!r}: division only by nonzero constants")
                return walk(node.left) * (Fraction(1) / den.constant_value())
        raise ModelFormatError(f"{src!r}: unsupported syntax "
                               f"({type(node).__name__})")

    return walk(tree)


def parse_point(text: str, where: str = "point") -> tuple[Fraction, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(parse_frac(v.strip(), where) for v in text.split(","))


def parse_points(text: str | None, where: str = "points") -> list[tuple[Fraction, ...]]:
    if not text:
        return []
    return [parse_point(chunk, where) for chunk in text.split(";") if chunk.strip()]


def _json_point(pt) -> list[str]:
    coords = pt.coords if hasattr(pt, "coords") else pt
    return [frac_str(v) for v in coords]


def _fmt_point(pt) -> str:
    coords = pt.coords if hasattr(pt, "coords") else pt
    return "(" + ", ".join(frac_str(v) for v in coords) + ")"


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------


def _write(args, payload: str) -> None:
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _emit_report(args, doc: dict, lines: list[tuple[str, object]]) -> None:
    if getattr(args, "json", False):
        _write(args, dumps(doc))
        return
    width = max((len(k) for k, _ in lines), default=0)
    _write(args, "".join(f"{k:<{width}}  {v}\n" for k, v in lines))


def _emit_model(args, doc: dict, summary: str) -> None:
    _write(args, dumps(doc))
    if getattr(args, "out", None):
        print(summary)


def _space_lines(bundle: LinftyBundle) -> list[tuple[str, object]]:
    ranks = ", ".join(f"{d}: {bundle.fiber.dims[d]}"
                      for d in bundle.fiber.degrees()) or "none"
    return [("base coordinates", ", ".join(bundle.coords) or "none"),
            ("fiber ranks", ranks),
            ("virtual dimension", virtual_dimension(bundle))]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_check_axioms(args) -> int:
    bundle, _ = load_model(args.model)
    rep = check_mc(bundle.as_algebra())
    doc = {"command": "check-axioms", "model": args.model, "ok": rep.ok,
           "witness": None if rep.ok else rep.describe()}
    lines = [("check-axioms", args.model), *_space_lines(bundle),
             ("structure equations", "hold" if rep.ok else "FAIL")]
    if not rep.ok:
        lines.append(("witness", rep.describe()))
    _emit_report(args, doc, lines)
    return 0 if rep.ok else 1


def cmd_check_morphism(args) -> int:
    mor = load_morphism(args.morphism)
    rep = check_morphism(mor)
    doc = {"command": "check-morphism", "morphism": args.morphism, "ok": rep.ok,
           "witness": None if rep.ok else rep.describe()}
    lines = [("check-morphism", args.morphism),
             ("source", ", ".join(mor.src.coords) or "point"),
             ("target", ", ".join(mor.dst.coords) or "point"),
             ("morphism equation", "holds" if rep.ok else "FAIL")]
    if not rep.ok:
        lines.append(("witness", rep.describe()))
    _emit_report(args, doc, lines)
    return 0 if rep.ok else 1


def _rehome_family(bundle: LinftyBundle, space):
    # model files address the fiber by (degree, index), so a contraction
    # over the same ranks names the same space
    from .graded import MultiOp, OpFamily
    delta = MultiOp(1, 1, space, space, dict(bundle.delta.coeffs))
    ops = OpFamily(1, space, space,
                   {k: MultiOp(k, 1, space, space, dict(bundle.ops.op(k).coeffs))
                    for k in bundle.ops.arities()})
    return delta, ops


def cmd_transfer(args) -> int:
    bundle, _ = load_model(args.model)
    if bundle.coords:
        raise ModelFormatError(
            "transfer needs a constant-coefficient model (no base coordinates)")
    con = load_contraction(args.contraction)
    if con.space.dims != bundle.fiber.dims:
        raise ModelFormatError(
            f"model ranks {dict(bundle.fiber.dims)} do not match "
            f"contraction ambient ranks {dict(con.space.dims)}")
    delta, lam = _rehome_family(bundle, con.space)
    if delta != con.delta:
        raise ModelFormatError(
            "model differential disagrees with the contraction differential")

    docs = {}
    for mode in (["recursive", "trees"] if args.mode == "both" else [args.mode]):
        res = (transfer if mode == "recursive" else transfer_trees)(con, lam)
        rep = check_mc(res.algebra)
        if not rep.ok:
            print(f"transferred structure fails its defining equation ({mode}):\n"
                  f"{rep.describe()}", file=sys.stderr)
            return 1
        docs[mode] = algebra_to_json(res.algebra)

    if args.mode == "both" and dumps(docs["recursive"]) != dumps(docs["trees"]):
        print("witness: recursive and tree-sum transfers disagree after "
              "canonicalization", file=sys.stderr)
        return 1
    doc = docs[args.mode if args.mode != "both" else "recursive"]
    _emit_model(args, doc, f"transfer ok (mode {args.mode}), output re-validated")
    return 0


def cmd_tangent_complex(args) -> int:
    bundle, _ = load_model(args.model)
    pt = parse_point(args.point, "--point")
    cp = classical_point(bundle, pt)
    cx = tangent_complex(bundle, cp)
    betti = cohomology(cx)
    euler = sum((-1) ** k * n for k, n in betti.items())
    vdim = virtual_dimension(bundle)
    doc = {"command": "tangent-complex", "model": args.model,
           "point": _json_point(cp),
           "dims": {str(k): n for k, n in sorted(cx.dims.items())},
           "betti": {str(k): n for k, n in sorted(betti.items())},
           "euler_characteristic": euler, "virtual_dimension": vdim}
    lines = [("tangent complex at", _fmt_point(cp)),
             ("complex ranks", ", ".join(f"{k}: {n}" for k, n in sorted(cx.dims.items())) or "0"),
             ("cohomology", ", ".join(f"H^{k} = {n}" for k, n in sorted(betti.items())) or "trivial"),
             ("euler characteristic", euler),
             ("virtual dimension", vdim)]
    _emit_report(args, doc, lines)
    return 0


def cmd_weak_equiv(args) -> int:
    mor = load_morphism(args.morphism)
    src_pts = parse_points(args.src_points, "--src-points")
    dst_pts = parse_points(args.dst_points, "--dst-points")
    rep = is_weak_equivalence(mor, src_pts, dst_pts)
    doc = {"command": "weak-equiv", "morphism": args.morphism, "ok": rep.ok,
           "bijection_ok": rep.bijection_ok,
           "pairs": [[_json_point(p), _json_point(img)] for p, img in rep.pairs],
           "cone_betti": [{str(k): n for k, n in sorted(e.cone_betti.items())}
                          for e in rep.etale],
           "note": rep.note}
    lines = [("weak-equiv", args.morphism),
             ("locus bijection", "yes" if rep.bijection_ok else "NO")]
    for e in rep.etale:
        cone = ("acyclic" if e.ok else
                ", ".join(f"H^{k} = {n}" for k, n in sorted(e.cone_betti.items())))
        lines.append((f"cone at {_fmt_point(e.point)}", cone))
    lines += [("weak equivalence", "yes" if rep.ok else "NO"),
              ("note", rep.note)]
    _emit_report(args, doc, lines)
    return 0 if rep.ok else 1


def cmd_fibration(args) -> int:
    mor = load_morphism(args.morphism)
    samples = parse_points(args.samples, "--samples")
    try:
        rep = is_fibration(mor, samples=samples)
    except ValueError as exc:
        print(f"witness: {exc}", file=sys.stderr)
        return 1
    doc = {"command": "fibration", "morphism": args.morphism, "ok": rep.ok,
           "submersion_ok": rep.submersion_ok,
           "surjective_degrees": {str(k): v for k, v in sorted(rep.surjective_degrees.items())},
           "linear_ranks": {str(k): v for k, v in sorted(rep.ranks.items())},
           "note": rep.note}
    lines = [("fibration", args.morphism),
             ("base submersion", "yes" if rep.submersion_ok else "NO")]
    for k in sorted(rep.surjective_degrees):
        lines.append((f"degree {k} linear part",
                      f"rank {rep.ranks[k]}, "
                      f"{'surjective' if rep.surjective_degrees[k] else 'NOT surjective'}"))
    lines += [("fibration check", "pass" if rep.ok else "FAIL"), ("note", rep.note)]
    _emit_report(args, doc, lines)
    return 0 if rep.ok else 1


def cmd_shifted_tangent(args) -> int:
    bundle, _ = load_model(args.model)
    st = shifted_tangent(bundle)
    rep = check_mc(st.as_algebra())
    if not rep.ok:
        print(f"shifted tangent fails its defining equation:\n{rep.describe()}",
              file=sys.stderr)
        return 1
    _emit_model(args, bundle_to_json(st), "shifted tangent ok, output re-validated")
    return 0


def _input_bundle(args) -> LinftyBundle:
    if getattr(args, "manifold", None):
        return _affine_bundle(args.manifold)
    if not args.model:
        raise ModelFormatError("give a model file or --manifold DIM")
    bundle, _ = load_model(args.model)
    return bundle


def _affine_bundle(m: int) -> LinftyBundle:
    from .graded import GradedSpace, MultiOp, OpFamily
    if m <= 0:
        raise ModelFormatError("--manifold needs a positive dimension")
    coords = tuple("xyz"[i] if m <= 3 else f"x{i}" for i in range(m))
    empty = GradedSpace.build({})
    return LinftyBundle(coords, empty, MultiOp.zero(1, 1, empty, empty),
                        OpFamily(1, empty, empty, {}))


def cmd_path_space(args) -> int:
    bundle = _input_bundle(args)
    dps = derived_path_space(bundle)
    _emit_model(args, bundle_to_json(dps.bundle),
                "path space ok: structure and endpoint morphisms re-validated")
    return 0


def _candidate_points(bundle: LinftyBundle, supplied, tol):
    if supplied:
        return [classical_point(bundle, p) for p in supplied]
    if len(bundle.coords) > 3:
        raise ModelFormatError(
            "point search supports at most three coordinates; pass --points")
    exact, leftovers = find_classical_points(bundle, tol=tol)
    if leftovers:
        raise ModelFormatError(
            f"numeric search found non-rational candidate zeros {leftovers}; "
            f"pass --points with exact coordinates")
    return exact


def cmd_factorize(args) -> int:
    bundle = _input_bundle(args)
    fz = factorize_diagonal(bundle)
    pts = _candidate_points(bundle, parse_points(args.points, "--points"), args.tol)
    rep = verify_factorization(fz, pts)
    weq, fib = rep.weak_equiv, rep.fibration
    doc = {"command": "factorize", "ok": rep.ok,
           "composite_is_diagonal": True,
           "points": [_json_point(p) for p, _ in weq.pairs],
           "weak_equivalence": {"ok": weq.ok, "bijection_ok": weq.bijection_ok,
                                "note": weq.note},
           "fibration": {"ok": fib.ok, "submersion_ok": fib.submersion_ok,
                         "linear_ranks": {str(k): v for k, v in sorted(fib.ranks.items())},
                         "note": fib.note}}
    lines = [("factorize", args.model or f"affine space of dim {args.manifold}"),
             ("composite", "equals the diagonal"),
             ("classical points", "; ".join(_fmt_point(p) for p, _ in weq.pairs) or "none"),
             ("inclusion leg", "weak equivalence" if weq.ok else "FAILS weak equivalence"),
             ("note", weq.note),
             ("evaluation leg", "fibration" if fib.ok else "NOT a fibration"),
             ("note ", fib.note)]
    _emit_report(args, doc, lines)
    return 0 if rep.ok else 1


def cmd_fib_product(args) -> int:
    f = load_morphism(args.f)
    g = load_morphism(args.g)
    fp = homotopy_fibered_product(f, g)
    vdim = virtual_dimension(fp.bundle)
    expected = (virtual_dimension(f.src) + virtual_dimension(g.src)
                - virtual_dimension(f.dst))
    if vdim != expected:
        print(f"witness: virtual dimension {vdim} != additive formula {expected}",
              file=sys.stderr)
        return 1
    _emit_model(args, bundle_to_json(
        fp.bundle, metadata={"virtual_dimension": vdim}),
        f"fibered product ok, virtual dimension {vdim}")
    return 0


_NAMED_SHAPES = ("axis-x", "axis-y", "axis-z", "parabola")


def _named_submanifold(name: str, m: int):
    if name.startswith("axis-"):
        letter = name[len("axis-"):]
        if letter in ("x", "y", "z") and "xyz".index(letter) < m:
            return axis_submanifold("xyz".index(letter), m)
        raise ModelFormatError(f"axis {letter!r} not available in dimension {m}")
    if name == "parabola":
        if m != 2:
            raise ModelFormatError("parabola lives in ambient dimension 2")
        u = Poly.variable("u")
        return graph_submanifold(u * u)
    raise ModelFormatError(
        f"unknown shape {name!r}; choose from {', '.join(_NAMED_SHAPES)}")


def cmd_intersect(args) -> int:
    m = args.ambient
    x = _named_submanifold(args.x, m)
    y = _named_submanifold(args.y, m)
    supplied = parse_points(args.points, "--points") or None
    di = derived_intersection(x, y, points=supplied)
    doc = {"command": "intersect", "x": args.x, "y": args.y, "ambient_dim": m,
           "virtual_dimension": di.virtual_dim,
           "points": [{"ambient": _json_point(p.ambient),
                       "H^0": p.h0, "H^1": p.h1,
                       "transversal": p.transversal} for p in di.points],
           "model": bundle_to_json(di.bundle)}
    lines = [("intersect", f"{args.x} with {args.y} in dimension {m}"),
             ("virtual dimension", di.virtual_dim)]
    for p in di.points:
        lines.append((f"point {_fmt_point(p.ambient)}",
                      f"H^0 = {p.h0}, H^1 = {p.h1}, "
                      f"{'transversal' if p.transversal else 'non-transversal'}"))
    if not di.points:
        lines.append(("points", "no classical points found"))
    _emit_report(args, doc, lines)
    return 0


def cmd_zero_locus(args) -> int:
    coords = tuple(c.strip() for c in args.coords.split(",") if c.strip())
    if not coords:
        raise ModelFormatError("--coords needs at least one name")
    sections = [parse_poly_expr(s.strip(), coords)
                for s in args.sections.split(";") if s.strip()]
    if not sections:
        raise ModelFormatError("--sections needs at least one expression")
    supplied = parse_points(args.points, "--points") or None
    cmp = zero_locus_model(coords, sections, points=supplied)
    weq = cmp.weak_equiv
    doc = {"command": "zero-locus", "coords": list(coords),
           "sections": [str(s) for s in sections],
           "ok": weq.ok,
           "points": [_json_point(p) for p in cmp.points],
           "intersection_points": [{"ambient": _json_point(p.ambient),
                                    "H^0": p.h0, "H^1": p.h1}
                                   for p in cmp.intersection.points],
           "note": weq.note,
           "model": bundle_to_json(cmp.model)}
    lines = [("zero-locus", "; ".join(str(s) for s in sections)),
             ("coordinates", ", ".join(coords)),
             ("classical points", "; ".join(_fmt_point(p) for p in cmp.points) or "none"),
             ("graph comparison", "weak equivalence" if weq.ok else "FAILS"),
             ("note", weq.note)]
    _emit_report(args, doc, lines)
    return 0 if weq.ok else 1


def cmd_report(args) -> int:
    bundle, meta = load_model(args.model)
    rep = check_mc(bundle.as_algebra())
    doc = {"command": "report", "model": args.model,
           "base": {"dim": len(bundle.coords), "coords": list(bundle.coords)},
           "fiber_ranks": {str(d): bundle.fiber.dims[d] for d in bundle.fiber.degrees()},
           "amplitude": bundle.amplitude,
           "max_arity": max(bundle.ops.arities(), default=0),
           "virtual_dimension": virtual_dimension(bundle),
           "structure_equations": "hold" if rep.ok else rep.describe()}
    lines = [("report", args.model), *_space_lines(bundle),
             ("amplitude", bundle.amplitude),
             ("max arity", max(bundle.ops.arities(), default=0)),
             ("structure equations", "hold" if rep.ok else "FAIL")]
    if not rep.ok:
        lines.append(("witness", rep.describe()))
    elif len(bundle.coords) <= 3:
        exact, leftovers = find_classical_points(bundle, tol=args.tol)
        pts_doc = []
        note = ("certified on the supplied candidate loci only; global "
                "statements need a complete point list")
        for cp in exact:
            betti = cohomology(tangent_complex(bundle, cp))
            pts_doc.append({"point": _json_point(cp),
                            "betti": {str(k): n for k, n in sorted(betti.items())}})
            lines.append((f"tangent at {_fmt_point(cp)}",
                          ", ".join(f"H^{k} = {n}" for k, n in sorted(betti.items()))
                          or "acyclic"))
        doc["classical_points"] = pts_doc
        doc["non_rational_candidates"] = [list(map(str, p)) for p in leftovers]
        doc["note"] = note
        if leftovers:
            lines.append(("non-rational candidates",
                          "; ".join(str(tuple(round(v, 6) for v in p))
                                    for p in leftovers)))
        lines.append(("note", note))
    if meta:
        doc["metadata"] = meta
    _emit_report(args, doc, lines)
    return 0 if rep.ok else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linfty",
        description="Exact computations with curved homotopy structures: "
                    "axioms, transfer, path spaces, and derived intersections.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=fn)
        p.add_argument("--json", action="store_true",
                       help="emit a JSON report instead of aligned text")
        p.add_argument("--out", help="write output to this file")
        return p

    p = add("check-axioms", cmd_check_axioms, "verify the structure equations of a model")
    p.add_argument("model")

    p = add("check-morphism", cmd_check_morphism, "verify the morphism equation")
    p.add_argument("morphism")

    p = add("transfer", cmd_transfer, "transfer a model through a contraction")
    p.add_argument("model")
    p.add_argument("contraction")
    p.add_argument("--mode", choices=["recursive", "trees", "both"],
                   default="recursive")

    p = add("tangent-complex", cmd_tangent_complex,
            "tangent complex and cohomology at a classical point")
    p.add_argument("model")
    p.add_argument("--point", required=True, help="comma-separated rationals")

    p = add("weak-equiv", cmd_weak_equiv,
            "check a morphism is a weak equivalence on candidate loci")
    p.add_argument("morphism")
    p.add_argument("--src-points", required=True,
                   help="semicolon-separated points, e.g. '0,0;1,1'")
    p.add_argument("--dst-points", required=True)

    p = add("fibration", cmd_fibration, "check a morphism is a fibration")
    p.add_argument("morphism")
    p.add_argument("--samples", help="semicolon-separated base sample points")

    p = add("shifted-tangent", cmd_shifted_tangent,
            "shifted tangent bundle of a model")
    p.add_argument("model")

    p = add("path-space", cmd_path_space, "derived path space of a model")
    p.add_argument("model", nargs="?")
    p.add_argument("--manifold", type=int,
                   help="use a plain affine space of this dimension")

    p = add("factorize", cmd_factorize,
            "factor the diagonal as weak equivalence then fibration")
    p.add_argument("model", nargs="?")
    p.add_argument("--manifold", type=int)
    p.add_argument("--points", help="classical points for the certificates")
    p.add_argument("--tol", type=float, default=1e-9,
                   help="numeric tolerance for the classical point search")

    p = add("fib-product", cmd_fib_product,
            "homotopy fibered product of two morphisms to a common target")
    p.add_argument("--f", required=True, help="morphism file, left leg")
    p.add_argument("--g", required=True, help="morphism file, right leg")

    p = add("intersect", cmd_intersect, "derived intersection of two named shapes")
    p.add_argument("--x", required=True, help=f"one of {', '.join(_NAMED_SHAPES)}")
    p.add_argument("--y", required=True)
    p.add_argument("--ambient", type=int, required=True)
    p.add_argument("--points", help="candidate intersection points in the parameter base")

    p = add("zero-locus", cmd_zero_locus,
            "derived zero locus of a polynomial section, compared with the graph intersection")
    p.add_argument("--coords", required=True, help="comma-separated names")
    p.add_argument("--sections", required=True,
                   help="semicolon-separated polynomial expressions")
    p.add_argument("--points", help="classical points to certify at")

    p = add("report", cmd_report, "summary report for a model")
    p.add_argument("model")
    p.add_argument("--tol", type=float, default=1e-9,
                   help="numeric tolerance for the classical point search")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ModelFormatError, DegreeCapError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"witness: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
