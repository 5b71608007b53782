"""Graded spaces, symmetric multilinear operations, insertion and composition."""

import random
from fractions import Fraction

import pytest

from linfty.graded import (GradedSpace, MultiOp, OpFamily, bullet,
                           canonical_tuples, circ, commutator, koszul_sign,
                           op_nilpotency_order, sort_keys_with_sign,
                           unshuffle_sign)


# -- signs --------------------------------------------------------------------

def test_koszul_sign_odd_swap():
    assert koszul_sign([1, 1], (1, 0)) == -1


def test_koszul_sign_mixed_swap():
    assert koszul_sign([1, 2], (1, 0)) == 1


def test_koszul_sign_three_cycle():
    assert koszul_sign([1, 1, 1], (1, 2, 0)) == 1
    assert koszul_sign([1, 1, 1], (2, 0, 1)) == 1


def test_koszul_sign_rejects_non_permutation():
    with pytest.raises(ValueError):
        koszul_sign([1, 1], (0, 0))


def test_sort_keys_collapses_odd_repeats():
    _, sign = sort_keys_with_sign(((1, 0), (1, 0)))
    assert sign == 0
    _, sign = sort_keys_with_sign(((2, 0), (2, 0)))
    assert sign == 1


def test_sort_keys_tracks_transpositions():
    keys, sign = sort_keys_with_sign(((1, 1), (1, 0)))
    assert keys == ((1, 0), (1, 1)) and sign == -1
    keys, sign = sort_keys_with_sign(((2, 1), (2, 0)))
    assert keys == ((2, 0), (2, 1)) and sign == 1


def test_unshuffle_sign_pulls_front_in_order():
    # pulling position 1 of (odd, odd) to the front is one odd transposition
    assert unshuffle_sign([1, 1], (1,)) == -1
    assert unshuffle_sign([1, 2], (1,)) == 1


# -- spaces and operations ------------------------------------------------------

def test_space_accessors():
    sp = GradedSpace.build({1: 2, 3: 1}, labels={1: ["a", "b"]})
    assert sp.degrees() == [1, 3]
    assert sp.dim(1) == 2 and sp.dim(2) == 0
    assert sp.total_dim == 3
    assert sp.label((1, 1)) == "b"
    assert sp.label((3, 0)) == "e3_0"
    assert sp.contains((1, 0)) and not sp.contains((2, 0))


def test_canonical_tuples_respect_odd_collapse():
    odd = GradedSpace.build({1: 2})
    assert list(canonical_tuples(odd, 2)) == [((1, 0), (1, 1))]
    even = GradedSpace.build({2: 2})
    assert len(list(canonical_tuples(even, 2))) == 3


def test_multiop_requires_homogeneous_entries():
    sp = GradedSpace.build({1: 1, 2: 1})
    with pytest.raises(ValueError):
        MultiOp(1, 1, sp, sp, {((1, 0),): {(1, 0): Fraction(1)}})


def test_multiop_requires_sorted_input_tuples():
    sp = GradedSpace.build({1: 2, 3: 1})
    with pytest.raises(ValueError):
        MultiOp(2, 1, sp, sp, {((1, 1), (1, 0)): {(3, 0): Fraction(1)}})


def test_evaluate_basis_applies_koszul_sign():
    sp = GradedSpace.build({1: 2, 3: 1})
    op = MultiOp(2, 1, sp, sp, {((1, 0), (1, 1)): {(3, 0): Fraction(1)}})
    assert op.evaluate_basis(((1, 0), (1, 1))) == {(3, 0): Fraction(1)}
    assert op.evaluate_basis(((1, 1), (1, 0))) == {(3, 0): Fraction(-1)}
    assert op.evaluate_basis(((1, 0), (1, 0))) == {}


def test_evaluate_on_vectors_is_multilinear():
    sp = GradedSpace.build({1: 2, 2: 1})
    op = MultiOp(2, 0, sp, sp, {((1, 0), (1, 1)): {(2, 0): Fraction(1)}})
    v = {(1, 0): Fraction(2), (1, 1): Fraction(3)}
    w = {(1, 0): Fraction(1), (1, 1): Fraction(-1)}
    # bilinear with odd-odd antisymmetry: 2*(-1) - 3*1 = -5
    assert op.evaluate([v, w]) == {(2, 0): Fraction(-5)}


def test_identity_and_compose_linear():
    sp = GradedSpace.build({1: 2, 2: 1})
    ident = MultiOp.identity(sp)
    op = MultiOp(1, 1, sp, sp, {((1, 0),): {(2, 0): Fraction(2)}})
    assert op.compose_linear(ident) == op
    assert ident.compose_linear(op) == op


def test_nilpotency_order():
    sp = GradedSpace.build({1: 3})
    step = MultiOp(1, 0, sp, sp, {((1, 1),): {(1, 0): Fraction(1)},
                                  ((1, 2),): {(1, 1): Fraction(1)}})
    assert op_nilpotency_order(step) == 3
    assert op_nilpotency_order(MultiOp.identity(sp), cap=8) is None


# -- circ ------------------------------------------------------------------------

def chain_space():
    return GradedSpace.build({1: 1, 2: 1, 3: 1}, labels={1: ["e"], 2: ["f"], 3: ["g"]})


def family(space, ops):
    return OpFamily(1, space, space, ops)


def test_circ_detects_squared_differential():
    sp = chain_space()
    lam1 = MultiOp(1, 1, sp, sp, {((1, 0),): {(2, 0): Fraction(1)},
                                  ((2, 0),): {(3, 0): Fraction(1)}})
    lam = family(sp, {1: lam1})
    sq = circ(lam, lam)
    assert sq.op(1).evaluate_basis(((1, 0),)) == {(3, 0): Fraction(1)}


def test_circ_of_square_zero_differential_vanishes():
    sp = chain_space()
    lam1 = MultiOp(1, 1, sp, sp, {((1, 0),): {(2, 0): Fraction(1)}})
    lam = family(sp, {1: lam1})
    assert circ(lam, lam).is_zero()


def test_circ_with_zero_family_is_zero():
    sp = chain_space()
    lam1 = MultiOp(1, 1, sp, sp, {((1, 0),): {(2, 0): Fraction(1)}})
    lam = family(sp, {1: lam1})
    zero = OpFamily.zero(1, sp, sp)
    assert circ(lam, zero).is_zero()
    assert circ(zero, lam).is_zero()


def random_family(rng, space, degree, max_arity=2, scale=1):
    ops = {}
    for n in range(max_arity + 1):
        coeffs = {}
        for tup in canonical_tuples(space, n):
            deg_out = sum(k[0] for k in tup) + degree
            outs = {}
            for key in space.keys():
                if key[0] == deg_out and rng.random() < 0.5:
                    outs[key] = Fraction(rng.randint(-scale, scale))
            outs = {k: c for k, c in outs.items() if c}
            if outs:
                coeffs[tup] = outs
        ops[n] = MultiOp(n, degree, space, space, coeffs)
    return OpFamily(degree, space, space, ops)


def test_circ_literal_matches_unshuffle():
    rng = random.Random(11)
    sp = GradedSpace.build({1: 2, 2: 2, 3: 1, 4: 1})
    for _ in range(6):
        a = random_family(rng, sp, 1)
        b = random_family(rng, sp, 1)
        lit = circ(a, b, method="literal")
        uns = circ(a, b, method="unshuffle")
        assert lit == uns


def test_commutator_jacobi_identity():
    rng = random.Random(5)
    sp = GradedSpace.build({1: 2, 2: 1, 3: 1, 4: 1})
    for _ in range(4):
        a = random_family(rng, sp, 1)
        b = random_family(rng, sp, 1)
        c = random_family(rng, sp, 1)
        lhs = commutator(a, commutator(b, c))
        rhs = commutator(commutator(a, b), c).minus(commutator(b, commutator(a, c)))
        assert lhs == rhs


def test_commutator_of_odd_family_with_itself():
    rng = random.Random(9)
    sp = GradedSpace.build({1: 2, 2: 1, 3: 1})
    a = random_family(rng, sp, 1)
    assert commutator(a, a) == circ(a, a).scaled(2)


# -- bullet ------------------------------------------------------------------------

def test_bullet_unit_law():
    rng = random.Random(3)
    sp = GradedSpace.build({1: 2, 2: 1, 3: 1})
    lam = random_family(rng, sp, 1)
    ident = OpFamily.identity(sp)
    assert bullet(lam, ident) == lam


def test_bullet_fixes_arity_zero_part():
    sp = chain_space()
    lam0 = MultiOp(0, 1, sp, sp, {(): {(1, 0): Fraction(2)}})
    lam = OpFamily(1, sp, sp, {0: lam0})
    phi = OpFamily.identity(sp).plus(
        OpFamily(0, sp, sp, {2: MultiOp(2, 0, sp, sp,
                                        {((1, 0), (2, 0)): {(3, 0): Fraction(1)}})}))
    out = bullet(lam, phi)
    assert out.op(0) == lam0
    assert all(out.op(k).is_zero() for k in out.arities() if k != 0)


def random_degree0_family(rng, space, max_arity=2):
    fam = random_family(rng, space, 0, max_arity)
    ops = {k: op for k, op in fam.ops.items() if k >= 1}
    return OpFamily(0, space, space, ops)


def test_bullet_is_associative():
    rng = random.Random(17)
    sp = GradedSpace.build({1: 2, 2: 1, 3: 1})
    for _ in range(5):
        lam = random_family(rng, sp, 1)
        phi = random_degree0_family(rng, sp)
        psi = random_degree0_family(rng, sp)
        assert bullet(bullet(lam, phi), psi) == bullet(lam, bullet(phi, psi))


def test_bullet_literal_matches_partitions():
    rng = random.Random(23)
    sp = GradedSpace.build({1: 2, 2: 2, 3: 1})
    for _ in range(5):
        lam = random_family(rng, sp, 1)
        phi = random_degree0_family(rng, sp)
        assert bullet(lam, phi, method="literal") == bullet(lam, phi, method="partitions")


def test_bullet_rejects_nonzero_degree_right_factor():
    sp = chain_space()
    lam = family(sp, {1: MultiOp(1, 1, sp, sp, {((1, 0),): {(2, 0): Fraction(1)}})})
    with pytest.raises(ValueError):
        bullet(lam, lam)


def test_bullet_is_linear_in_the_left_factor():
    rng = random.Random(29)
    sp = GradedSpace.build({1: 2, 2: 1, 3: 1})
    a = random_family(rng, sp, 1)
    b = random_family(rng, sp, 1)
    phi = random_degree0_family(rng, sp)
    assert bullet(a.plus(b), phi) == bullet(a, phi).plus(bullet(b, phi))
