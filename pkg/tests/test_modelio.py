"""Canonical JSON serialization of models, morphisms, and contractions."""

from fractions import Fraction

import pytest

from linfty.algebra import LinftyBundle, Morphism, check_mc, identity_morphism
from linfty.geometry import shifted_tangent
from linfty.graded import GradedSpace, MultiOp, OpFamily
from linfty.modelio import (ModelFormatError, algebra_to_json, bundle_from_json,
                            bundle_to_json, contraction_from_json,
                            contraction_to_json, dumps, frac_str,
                            load_document, morphism_from_json,
                            morphism_to_json, parse_frac)
from linfty.pathspace import derived_path_space
from linfty.poly import Poly
from linfty.samples import plain_bundle
from linfty.transfer import Contraction

x = Poly.variable("x")
y = Poly.variable("y")


def square_bundle():
    fiber = GradedSpace.build({1: 1}, labels={1: ["e"]})
    lam0 = MultiOp(0, 1, fiber, fiber, {(): {(1, 0): x ** 2}})
    return LinftyBundle(("x",), fiber, MultiOp.zero(1, 1, fiber, fiber),
                        OpFamily(1, fiber, fiber, {0: lam0}))


def round_trip_bundle(b, metadata=None):
    doc = bundle_to_json(b, metadata)
    text = dumps(doc)
    back, meta = bundle_from_json(doc)
    again = dumps(bundle_to_json(back, meta or None))
    assert again == text
    return back, meta


# -- fractions ------------------------------------------------------------------

def test_fraction_strings():
    assert frac_str(Fraction(-3, 4)) == "-3/4"
    assert frac_str(Fraction(5)) == "5"
    assert parse_frac("7/2") == Fraction(7, 2)
    assert parse_frac("-4") == Fraction(-4)
    assert parse_frac(3) == Fraction(3)


def test_parse_frac_rejects_garbage():
    with pytest.raises(ModelFormatError):
        parse_frac("3.5x")
    with pytest.raises(ModelFormatError):
        parse_frac("1/0")


# -- bundles --------------------------------------------------------------------

def test_square_bundle_round_trip():
    back, meta = round_trip_bundle(square_bundle())
    assert back.coords == ("x",)
    assert back.curvature_section() == {(1, 0): x ** 2}
    assert meta == {}
    assert check_mc(back.as_algebra()).ok


def test_round_trip_keeps_user_metadata():
    _, meta = round_trip_bundle(square_bundle(), {"name": "squared section"})
    assert meta == {"name": "squared section"}


def test_round_trip_keeps_labels_and_dt_flags():
    st = shifted_tangent(square_bundle())
    back, _ = round_trip_bundle(st)
    assert back.fiber == st.fiber
    assert [back.fiber.label(k) for k in back.fiber.keys()] == \
        [st.fiber.label(k) for k in st.fiber.keys()]
    assert [back.fiber.is_dt(k) for k in back.fiber.keys()] == \
        [st.fiber.is_dt(k) for k in st.fiber.keys()]


def test_round_trip_constant_structure():
    sp = GradedSpace.build({1: 1, 2: 1})
    delta = MultiOp(1, 1, sp, sp, {((1, 0),): {(2, 0): Fraction(1, 3)}})
    b = LinftyBundle((), sp, delta, OpFamily(1, sp, sp, {}))
    back, _ = round_trip_bundle(b)
    assert back.delta == delta
    assert back.coords == ()


def test_round_trip_path_space_model():
    dps = derived_path_space(square_bundle(), cap=6)
    back, _ = round_trip_bundle(dps.bundle)
    assert back.ops == dps.bundle.ops
    assert back.delta == dps.bundle.delta


def test_algebra_document_matches_coordinate_free_bundle():
    sp = GradedSpace.build({1: 1, 2: 1})
    delta = MultiOp(1, 1, sp, sp, {((1, 0),): {(2, 0): Fraction(2)}})
    from linfty.algebra import CurvedAlgebra
    alg = CurvedAlgebra(sp, delta, OpFamily(1, sp, sp, {}))
    doc = algebra_to_json(alg)
    assert doc["base"]["dim"] == 0
    back, _ = bundle_from_json(doc)
    assert back.delta == delta


def test_delta_entries_are_tagged():
    sp = GradedSpace.build({1: 1, 2: 1})
    delta = MultiOp(1, 1, sp, sp, {((1, 0),): {(2, 0): Fraction(1)}})
    lam1 = MultiOp(1, 1, sp, sp, {((1, 0),): {(2, 0): Fraction(5)}})
    b = LinftyBundle((), sp, delta, OpFamily(1, sp, sp, {1: lam1}))
    doc = bundle_to_json(b)
    parts = [e.get("part") for e in doc["ops"]]
    assert parts.count("delta") == 1
    back, _ = bundle_from_json(doc)
    assert back.delta == delta and back.ops.op(1) == lam1


def test_canonical_form_is_stable_under_entry_shuffling():
    doc = bundle_to_json(square_bundle())
    doc["ops"] = list(reversed(doc["ops"]))
    back, _ = bundle_from_json(doc)
    assert dumps(bundle_to_json(back)) == dumps(bundle_to_json(square_bundle()))


# -- format errors -----------------------------------------------------------------

def base_doc():
    return bundle_to_json(square_bundle())


def test_missing_field_is_reported():
    doc = base_doc()
    del doc["bundle"]
    with pytest.raises(ModelFormatError, match="bundle"):
        bundle_from_json(doc)


def test_unknown_coordinate_in_coefficient():
    doc = base_doc()
    doc["ops"][0]["coeff"] = [[[1, 1], "1"]]
    with pytest.raises(ModelFormatError):
        bundle_from_json(doc)


def test_key_out_of_range_is_reported():
    doc = base_doc()
    doc["ops"][0]["output"] = [1, 5]
    with pytest.raises(ModelFormatError):
        bundle_from_json(doc)


def test_inhomogeneous_entry_is_reported():
    sp = GradedSpace.build({1: 1, 2: 1})
    b = LinftyBundle((), sp, MultiOp.zero(1, 1, sp, sp), OpFamily(1, sp, sp, {}))
    doc = bundle_to_json(b)
    doc["ops"] = [{"arity": 1, "inputs": [[1, 0]], "output": [1, 0], "coeff": "1"}]
    with pytest.raises(ModelFormatError):
        bundle_from_json(doc)


def test_load_document_reports_line_and_column(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{"base": [,]}')
    with pytest.raises(ModelFormatError, match="line 1"):
        load_document(str(p))


# -- morphisms -----------------------------------------------------------------------

def test_identity_morphism_round_trip():
    m = identity_morphism(square_bundle())
    doc = morphism_to_json(m)
    text = dumps(doc)
    back = morphism_from_json(doc)
    assert dumps(morphism_to_json(back)) == text
    assert back.base_map == m.base_map
    assert back.phi == m.phi


def test_polynomial_base_map_round_trip():
    src = plain_bundle(("u",))
    dst = plain_bundle(("x", "y"))
    u = Poly.variable("u")
    m = Morphism(src, dst, (u, u * u), OpFamily(0, src.fiber, dst.fiber, {}))
    back = morphism_from_json(morphism_to_json(m))
    assert back.base_map == m.base_map
    assert back.src.coords == ("u",) and back.dst.coords == ("x", "y")


def test_morphism_document_embeds_both_bundles():
    m = identity_morphism(square_bundle())
    doc = morphism_to_json(m)
    assert doc["kind"] == "morphism"
    assert "src" in doc and "dst" in doc and "base_map" in doc


# -- contractions ----------------------------------------------------------------------

def worked_contraction():
    sp = GradedSpace.build({1: 2, 2: 1, 3: 1},
                           labels={1: ["e", "a"], 2: ["f"], 3: ["g"]})
    delta = MultiOp(1, 1, sp, sp, {((1, 1),): {(2, 0): Fraction(1)}})
    eta = MultiOp(1, -1, sp, sp, {((2, 0),): {(1, 1): Fraction(1)}})
    return Contraction.build(sp, delta, eta)


def test_contraction_round_trip():
    con = worked_contraction()
    doc = contraction_to_json(con)
    text = dumps(doc)
    back = contraction_from_json(doc)
    assert dumps(contraction_to_json(back)) == text
    assert back.h_space == con.h_space
    assert back.pi == con.pi and back.iota == con.iota
    back.validate()


def test_contraction_document_is_revalidated_on_load():
    doc = contraction_to_json(worked_contraction())
    for entry in doc["eta"]:
        entry["coeff"] = "2"
    with pytest.raises(ModelFormatError):
        contraction_from_json(doc)
