"""Graded-symmetric multilinear algebra over exact scalars.

The objects here are finite-dimensional positively graded vector spaces
with a distinguished basis, and graded-symmetric multilinear operations
between them, stored as sparse coefficient tensors on canonically sorted
basis tuples.  Scalars are fractions.Fraction or linfty.poly.Poly; the code
only relies on +, *, unary -, and truthiness, so both work uniformly.

Sign conventions: transposing two adjacent inputs of odd degree costs -1,
all other transpositions are free (the usual Koszul rule).  An operation of
arity n and internal degree i sends inputs of total degree d to outputs of
degree d + i, and vanishes for degree reasons whenever d + i exceeds the
top degree of the target.

Two composition products are provided:

* circ(lam, mu): insert one output of mu into one slot of lam, summed over
  all unshuffles.  The graded commutator of circ satisfies the Jacobi
  identity, and [delta, lam] + lam o lam = 0 is the Maurer-Cartan equation
  checked elsewhere.
* bullet(lam, phi): feed disjoint phi-packets into all slots of lam, summed
  over set partitions of the inputs.  It is associative in the sense
  (lam . phi) . psi = lam . (phi . psi) and linear in lam only.

Both products are computed by a literal permutation sum for small arities
and by an unshuffle/partition enumeration in general; the two paths agree
on their overlap and the test suite pins that down.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, permutations
from math import factorial
from typing import Callable, Iterable, Iterator, Mapping, Sequence

BasisKey = tuple[int, int]  # (degree, index within degree)
Vector = dict  # BasisKey -> scalar


# ---------------------------------------------------------------------------
# graded spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GradedSpace:
    """Finite-dimensional graded space with labelled basis.

    dims maps degree -> dimension (only nonzero entries are stored).
    dt marks basis vectors that are formal dt-multiples of a piece one
    degree lower; they behave like ordinary basis vectors of their stated
    degree, the flag only feeds bookkeeping in the path-space layer.
    """

    dims: Mapping[int, int]
    labels: Mapping[int, tuple[str, ...]]
    dt: Mapping[int, tuple[bool, ...]]

    @staticmethod
    def build(dims: Mapping[int, int],
              labels: Mapping[int, Sequence[str]] | None = None,
              dt: Mapping[int, Sequence[bool]] | None = None) -> "GradedSpace":
        dims_clean = {int(d): int(n) for d, n in dims.items() if n}
        if any(n < 0 for n in dims_clean.values()):
            raise ValueError("negative dimension")
        labs: dict[int, tuple[str, ...]] = {}
        dts: dict[int, tuple[bool, ...]] = {}
        for d, n in dims_clean.items():
            if labels and d in labels:
                row = tuple(labels[d])
                if len(row) != n:
                    raise ValueError(f"{len(row)} labels for dimension {n} in degree {d}")
            else:
                row = tuple(f"e{d}_{i}" for i in range(n))
            labs[d] = row
            if dt and d in dt:
                flags = tuple(bool(b) for b in dt[d])
                if len(flags) != n:
                    raise ValueError(f"dt flags mismatch in degree {d}")
            else:
                flags = tuple(False for _ in range(n))
            dts[d] = flags
        return GradedSpace(dims_clean, labs, dts)

    def degrees(self) -> list[int]:
        return sorted(self.dims)

    def dim(self, degree: int) -> int:
        return self.dims.get(degree, 0)

    @property
    def total_dim(self) -> int:
        return sum(self.dims.values())

    @property
    def max_degree(self) -> int:
        return max(self.dims) if self.dims else 0

    @property
    def min_degree(self) -> int:
        return min(self.dims) if self.dims else 0

    def keys(self) -> list[BasisKey]:
        return [(d, i) for d in self.degrees() for i in range(self.dims[d])]

    def contains(self, key: BasisKey) -> bool:
        return key[0] in self.dims and 0 <= key[1] < self.dims[key[0]]

    def check_key(self, key: BasisKey) -> None:
        if not self.contains(key):
            raise KeyError(f"basis key {key} not in space with dims {dict(self.dims)}")

    def label(self, key: BasisKey) -> str:
        self.check_key(key)
        return self.labels[key[0]][key[1]]

    def is_dt(self, key: BasisKey) -> bool:
        self.check_key(key)
        return self.dt[key[0]][key[1]]

    def direct_sum(self, other: "GradedSpace") -> tuple["GradedSpace", dict, dict]:
        """Concatenate bases; returns (sum, keymap_self, keymap_other)."""
        dims: dict[int, int] = {}
        labels: dict[int, list[str]] = {}
        dts: dict[int, list[bool]] = {}
        m1: dict[BasisKey, BasisKey] = {}
        m2: dict[BasisKey, BasisKey] = {}
        for src, mp in ((self, m1), (other, m2)):
            for d in src.degrees():
                for i in range(src.dims[d]):
                    j = dims.get(d, 0)
                    dims[d] = j + 1
                    labels.setdefault(d, []).append(src.labels[d][i])
                    dts.setdefault(d, []).append(src.dt[d][i])
                    mp[(d, i)] = (d, j)
        space = GradedSpace.build(dims, labels, dts)
        return space, m1, m2


# ---------------------------------------------------------------------------
# Koszul signs
# ---------------------------------------------------------------------------


def koszul_sign(degrees: Sequence[int], perm: Sequence[int]) -> int:
    """Sign of reordering (x_1..x_n) into (x_perm[0], .., x_perm[n-1]).

    Each transposed pair of odd-degree entries contributes -1.
    """
    n = len(degrees)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of 0..{n - 1}")
    sign = 1
    for a in range(n):
        if degrees[perm[a]] % 2 == 0:
            continue
        for b in range(a + 1, n):
            if perm[a] > perm[b] and degrees[perm[b]] % 2:
                sign = -sign
    return sign


def sort_keys_with_sign(keys: Sequence[BasisKey]) -> tuple[tuple[BasisKey, ...], int]:
    """Canonically sort basis keys, tracking the Koszul sign.

    Returns sign 0 when an odd-degree key repeats (the symmetric power
    collapses there in characteristic zero).
    """
    order = sorted(range(len(keys)), key=lambda i: (keys[i], i))
    sign = 1
    for a in range(len(keys)):
        ka = keys[order[a]]
        if ka[0] % 2 == 0:
            continue
        for b in range(a + 1, len(keys)):
            kb = keys[order[b]]
            if ka == kb:
                return tuple(keys[i] for i in order), 0
            if order[a] > order[b] and kb[0] % 2:
                sign = -sign
    # repeated odd keys that were already adjacent in order still collapse
    srt = tuple(keys[i] for i in order)
    for a in range(len(srt) - 1):
        if srt[a] == srt[a + 1] and srt[a][0] % 2:
            return srt, 0
    return srt, sign


def unshuffle_sign(degrees: Sequence[int], front: Sequence[int]) -> int:
    """Koszul sign of pulling the positions in `front` to the start, in order."""
    rest = [i for i in range(len(degrees)) if i not in front]
    return koszul_sign(degrees, tuple(front) + tuple(rest))


def canonical_tuples(space: GradedSpace, arity: int,
                     max_total_degree: int | None = None) -> Iterator[tuple[BasisKey, ...]]:
    """All sorted basis tuples of the given arity with nonvanishing symmetric class."""
    if arity == 0:
        yield ()
        return
    keys = space.keys()
    for tup in combinations_with_replacement(keys, arity):
        ok = True
        for a in range(arity - 1):
            if tup[a] == tup[a + 1] and tup[a][0] % 2:
                ok = False
                break
        if not ok:
            continue
        if max_total_degree is not None and sum(k[0] for k in tup) > max_total_degree:
            continue
        yield tup


# ---------------------------------------------------------------------------
# vectors
# ---------------------------------------------------------------------------


def vec_add_into(dst: Vector, key: BasisKey, coeff) -> None:
    if not coeff:
        return
    cur = dst.get(key)
    if cur is None:
        dst[key] = coeff
        return
    new = cur + coeff
    if new:
        dst[key] = new
    else:
        del dst[key]


def vec_merge(dst: Vector, src: Vector, scale=1) -> None:
    for k, c in src.items():
        vec_add_into(dst, k, scale * c if scale != 1 else c)


def vec_scale(v: Vector, scale) -> Vector:
    out: Vector = {}
    for k, c in v.items():
        sc = scale * c
        if sc:
            out[k] = sc
    return out


def vec_is_zero(v: Vector) -> bool:
    return all(not c for c in v.values())


def vec_eq(a: Vector, b: Vector) -> bool:
    keys = set(a) | set(b)
    zero = 0
    for k in keys:
        if a.get(k, zero) != b.get(k, zero):
            return False
    return True


# ---------------------------------------------------------------------------
# multilinear operations
# ---------------------------------------------------------------------------


@dataclass
class MultiOp:
    """Graded-symmetric multilinear map stored on canonical basis tuples.

    coeffs maps a sorted input tuple to a sparse output vector.  Degree
    homogeneity (output degree = input degree sum + degree) is enforced at
    construction; evaluation on arbitrarily ordered inputs resolves the
    Koszul sign against the canonical order.
    """

    arity: int
    degree: int
    source: GradedSpace
    target: GradedSpace
    coeffs: dict[tuple[BasisKey, ...], Vector] = field(default_factory=dict)

    def __post_init__(self):
        clean: dict[tuple[BasisKey, ...], Vector] = {}
        for tup, vec in self.coeffs.items():
            if len(tup) != self.arity:
                raise ValueError(f"tuple {tup} has wrong arity (expected {self.arity})")
            srt, sign = sort_keys_with_sign(tup)
            if srt != tup:
                raise ValueError(f"input tuple {tup} is not canonically sorted")
            if sign == 0:
                continue
            for k in tup:
                self.source.check_key(k)
            total = sum(k[0] for k in tup) + self.degree
            out: Vector = {}
            for okey, c in vec.items():
                self.target.check_key(okey)
                if okey[0] != total:
                    raise ValueError(
                        f"inhomogeneous entry {tup} -> {okey}: expected output degree {total}")
                if c:
                    out[okey] = c
            if out:
                clean[tup] = out
        self.coeffs = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, arity: int, degree: int, source: GradedSpace,
             target: GradedSpace) -> "MultiOp":
        return cls(arity, degree, source, target, {})

    @classmethod
    def identity(cls, space: GradedSpace) -> "MultiOp":
        coeffs = {(k,): {k: Fraction(1)} for k in space.keys()}
        return cls(1, 0, space, space, coeffs)

    @classmethod
    def from_function(cls, arity: int, degree: int, source: GradedSpace,
                      target: GradedSpace,
                      fn: Callable[[tuple[BasisKey, ...]], Vector]) -> "MultiOp":
        """Tabulate fn on canonical tuples, pruned by target degree support."""
        coeffs: dict[tuple[BasisKey, ...], Vector] = {}
        cap = target.max_degree - degree
        for tup in canonical_tuples(source, arity, max_total_degree=cap):
            if (sum(k[0] for k in tup) + degree) not in target.dims:
                continue
            vec = fn(tup)
            if vec:
                coeffs[tup] = vec
        return cls(arity, degree, source, target, coeffs)

    # -- basic structure ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if not isinstance(other, MultiOp):
            return NotImplemented
        if (self.arity, self.degree) != (other.arity, other.degree):
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        return all(vec_eq(self.coeffs.get(t, {}), other.coeffs.get(t, {})) for t in keys)

    def scaled(self, c) -> "MultiOp":
        coeffs = {t: vec_scale(v, c) for t, v in self.coeffs.items()}
        return MultiOp(self.arity, self.degree, self.source, self.target, coeffs)

    def plus(self, other: "MultiOp") -> "MultiOp":
        if (self.arity, self.degree) != (other.arity, other.degree):
            raise ValueError("cannot add operations of different arity or degree")
        coeffs: dict[tuple[BasisKey, ...], Vector] = {t: dict(v) for t, v in self.coeffs.items()}
        for t, v in other.coeffs.items():
            dst = coeffs.setdefault(t, {})
            vec_merge(dst, v)
        return MultiOp(self.arity, self.degree, self.source, self.target, coeffs)

    def minus(self, other: "MultiOp") -> "MultiOp":
        return self.plus(other.scaled(-1))

    # -- evaluation ----------------------------------------------------------

    def evaluate_basis(self, keys: Sequence[BasisKey]) -> Vector:
        if len(keys) != self.arity:
            raise ValueError(f"arity {self.arity} operation applied to {len(keys)} inputs")
        srt, sign = sort_keys_with_sign(keys)
        if sign == 0:
            return {}
        vec = self.coeffs.get(srt)
        if not vec:
            return {}
        if sign == 1:
            return dict(vec)
        return {k: -c for k, c in vec.items()}

    def evaluate(self, vectors: Sequence[Vector]) -> Vector:
        """Multilinear evaluation on sparse vectors (assumed degree-homogeneous)."""
        if len(vectors) != self.arity:
            raise ValueError("wrong number of arguments")
        out: Vector = {}
        self._expand(vectors, 0, (), 1, out)
        return out

    def _expand(self, vectors, idx, keys, coeff, out):
        if idx == len(vectors):
            res = self.evaluate_basis(keys)
            for okey, c in res.items():
                vec_add_into(out, okey, coeff * c)
            return
        for key, c in vectors[idx].items():
            if not c:
                continue
            self._expand(vectors, idx + 1, keys + (key,), coeff * c, out)

    def evaluate_mixed(self, first: Vector, rest: Sequence[BasisKey]) -> Vector:
        """Evaluate with a vector in slot one and basis keys in the others."""
        out: Vector = {}
        for key, c in first.items():
            if not c:
                continue
            res = self.evaluate_basis((key,) + tuple(rest))
            for okey, c2 in res.items():
                vec_add_into(out, okey, c * c2)
        return out

    # -- linear (arity-1) helpers ---------------------------------------------

    def compose_linear(self, inner: "MultiOp") -> "MultiOp":
        """self o inner for arity-1 operations."""
        if self.arity != 1 or inner.arity != 1:
            raise ValueError("compose_linear expects arity-1 operations")
        coeffs: dict[tuple[BasisKey, ...], Vector] = {}
        for (key,), vec in inner.coeffs.items():
            out: Vector = {}
            for mid, c in vec.items():
                res = self.evaluate_basis((mid,))
                for okey, c2 in res.items():
                    vec_add_into(out, okey, c * c2)
            if out:
                coeffs[(key,)] = out
        return MultiOp(1, self.degree + inner.degree, inner.source, self.target, coeffs)


def op_nilpotency_order(op: MultiOp, cap: int | None = None) -> int | None:
    """Least r with op^r = 0 for a degree-0 arity-1 operation, or None."""
    if op.arity != 1 or op.degree != 0:
        raise ValueError("nilpotency check expects a degree-0 endomorphism")
    bound = cap if cap is not None else op.source.total_dim + 1
    power = op
    r = 1
    while r <= bound:
        if power.is_zero():
            return r
        power = op.compose_linear(power)
        r += 1
    return None


# ---------------------------------------------------------------------------
# operation families
# ---------------------------------------------------------------------------


@dataclass
class OpFamily:
    """A family of operations of common internal degree, one per arity."""

    degree: int
    source: GradedSpace
    target: GradedSpace
    ops: dict[int, MultiOp] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, op in self.ops.items():
            if op.arity != k:
                raise ValueError(f"arity slot {k} holds an arity-{op.arity} operation")
            if op.degree != self.degree:
                raise ValueError("family members must share the internal degree")
            if op.source is not self.source and op.source != self.source:
                raise ValueError("family members must share the source space")
            if op.target is not self.target and op.target != self.target:
                raise ValueError("family members must share the target space")
            if not op.is_zero():
                clean[k] = op
        self.ops = clean

    @classmethod
    def from_ops(cls, degree: int, source: GradedSpace, target: GradedSpace,
                 ops: Iterable[MultiOp]) -> "OpFamily":
        return cls(degree, source, target, {op.arity: op for op in ops})

    @classmethod
    def identity(cls, space: GradedSpace) -> "OpFamily":
        return cls(0, space, space, {1: MultiOp.identity(space)})

    @classmethod
    def zero(cls, degree: int, source: GradedSpace, target: GradedSpace) -> "OpFamily":
        return cls(degree, source, target, {})

    def op(self, arity: int) -> MultiOp:
        got = self.ops.get(arity)
        if got is not None:
            return got
        return MultiOp.zero(arity, self.degree, self.source, self.target)

    def arities(self) -> list[int]:
        return sorted(self.ops)

    @property
    def max_arity(self) -> int:
        return max(self.ops) if self.ops else 0

    def is_zero(self) -> bool:
        return not self.ops

    def __eq__(self, other):
        if not isinstance(other, OpFamily):
            return NotImplemented
        if self.degree != other.degree:
            return False
        ks = set(self.ops) | set(other.ops)
        return all(self.op(k) == other.op(k) for k in ks)

    def plus(self, other: "OpFamily") -> "OpFamily":
        ks = set(self.ops) | set(other.ops)
        return OpFamily(self.degree, self.source, self.target,
                        {k: self.op(k).plus(other.op(k)) for k in ks})

    def minus(self, other: "OpFamily") -> "OpFamily":
        return self.plus(other.scaled(-1))

    def scaled(self, c) -> "OpFamily":
        return OpFamily(self.degree, self.source, self.target,
                        {k: op.scaled(c) for k, op in self.ops.items()})

    def with_op(self, op: MultiOp) -> "OpFamily":
        ops = dict(self.ops)
        ops[op.arity] = op
        return OpFamily(self.degree, self.source, self.target, ops)


def arity_bound(fam_degree: int, target: GradedSpace, source: GradedSpace) -> int:
    """Largest arity not forced to vanish for degree reasons."""
    if not source.dims or not target.dims:
        return 0
    step = max(source.min_degree, 1)
    return max(0, (target.max_degree - fam_degree) // step)


# ---------------------------------------------------------------------------
# circ: insertion product
# ---------------------------------------------------------------------------


def _circ_value_literal(lam: OpFamily, mu: OpFamily, tup) -> Vector:
    n = len(tup)
    degs = [k[0] for k in tup]
    out: Vector = {}
    for perm in permutations(range(n)):
        sign = koszul_sign(degs, perm)
        ptup = tuple(tup[i] for i in perm)
        for k in range(n + 1):
            mu_k = mu.ops.get(k)
            lam_op = lam.ops.get(n + 1 - k)
            if mu_k is None or lam_op is None:
                continue
            inner = mu_k.evaluate_basis(ptup[:k])
            if not inner:
                continue
            weight = Fraction(sign, factorial(k) * factorial(n - k))
            res = lam_op.evaluate_mixed(inner, ptup[k:])
            for okey, c in res.items():
                vec_add_into(out, okey, weight * c)
    return out


def _circ_value_unshuffle(lam: OpFamily, mu: OpFamily, tup) -> Vector:
    n = len(tup)
    degs = [k[0] for k in tup]
    out: Vector = {}
    for k in range(n + 1):
        mu_k = mu.ops.get(k)
        lam_op = lam.ops.get(n + 1 - k)
        if mu_k is None or lam_op is None:
            continue
        for front in combinations(range(n), k):
            sign = unshuffle_sign(degs, front)
            if sign == 0:
                continue
            inner = mu_k.evaluate_basis(tuple(tup[i] for i in front))
            if not inner:
                continue
            rest = tuple(tup[i] for i in range(n) if i not in front)
            res = lam_op.evaluate_mixed(inner, rest)
            for okey, c in res.items():
                vec_add_into(out, okey, sign * c)
    return out


def circ(lam: OpFamily, mu: OpFamily, method: str = "auto") -> OpFamily:
    """Insertion product: one mu-output fed into one lam-slot, unshuffled.

    mu must be an endo-family; the result has degree lam.degree + mu.degree
    and the same source/target as lam.
    """
    if mu.source != mu.target:
        raise ValueError("circ expects an endomorphism family on the right")
    if lam.source != mu.source:
        raise ValueError("source mismatch in circ")
    degree = lam.degree + mu.degree
    n_max = min(arity_bound(degree, lam.target, lam.source),
                lam.max_arity + mu.max_arity - 1 if (lam.ops and mu.ops) else -1)
    ops = {}
    for n in range(n_max + 1):
        if method == "literal" or (method == "auto" and n <= 4):
            fn = lambda tup: _circ_value_literal(lam, mu, tup)
        elif method in ("auto", "unshuffle"):
            fn = lambda tup: _circ_value_unshuffle(lam, mu, tup)
        else:
            raise ValueError(f"unknown method {method!r}")
        op = MultiOp.from_function(n, degree, lam.source, lam.target, fn)
        if not op.is_zero():
            ops[n] = op
    return OpFamily(degree, lam.source, lam.target, ops)


def commutator(a: OpFamily, b: OpFamily, method: str = "auto") -> OpFamily:
    """Graded commutator [a, b] = a o b - (-1)^{|a||b|} b o a."""
    ab = circ(a, b, method=method)
    ba = circ(b, a, method=method)
    sign = -1 if (a.degree % 2) and (b.degree % 2) else 1
    return ab.minus(ba.scaled(sign))


# ---------------------------------------------------------------------------
# bullet: composition product
# ---------------------------------------------------------------------------


def set_partitions(items: Sequence[int]) -> Iterator[list[list[int]]]:
    """All partitions of items into unordered nonempty blocks."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def _compositions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """Ordered tuples of k positive integers summing to n."""
    if k == 0:
        if n == 0:
            yield ()
        return
    for head in range(1, n - k + 2):
        for tail in _compositions(n - head, k - 1):
            yield (head,) + tail


def _bullet_value_literal(lam: OpFamily, phi: OpFamily, tup) -> Vector:
    n = len(tup)
    degs = [k[0] for k in tup]
    out: Vector = {}
    if n == 0:
        lam0 = lam.ops.get(0)
        return dict(lam0.evaluate_basis(())) if lam0 else {}
    for perm in permutations(range(n)):
        sign = koszul_sign(degs, perm)
        ptup = tuple(tup[i] for i in perm)
        for k in range(1, n + 1):
            lam_k = lam.ops.get(k)
            if lam_k is None:
                continue
            for comp in _compositions(n, k):
                weight = Fraction(sign, factorial(k))
                vecs = []
                pos = 0
                dead = False
                for nj in comp:
                    weight /= factorial(nj)
                    block = ptup[pos:pos + nj]
                    pos += nj
                    v = phi.op(nj).evaluate_basis(block)
                    if not v:
                        dead = True
                        break
                    vecs.append(v)
                if dead:
                    continue
                res = lam_k.evaluate(vecs)
                for okey, c in res.items():
                    vec_add_into(out, okey, weight * c)
    return out


def _bullet_value_partitions(lam: OpFamily, phi: OpFamily, tup) -> Vector:
    n = len(tup)
    degs = [k[0] for k in tup]
    out: Vector = {}
    if n == 0:
        lam0 = lam.ops.get(0)
        return dict(lam0.evaluate_basis(())) if lam0 else {}
    for part in set_partitions(range(n)):
        k = len(part)
        lam_k = lam.ops.get(k)
        if lam_k is None:
            continue
        blocks = sorted([sorted(b) for b in part], key=lambda b: b[0])
        flat = [i for b in blocks for i in b]
        sign = koszul_sign(degs, flat)
        if sign == 0:
            continue
        vecs = []
        dead = False
        for b in blocks:
            v = phi.op(len(b)).evaluate_basis(tuple(tup[i] for i in b))
            if not v:
                dead = True
                break
            vecs.append(v)
        if dead:
            continue
        res = lam_k.evaluate(vecs)
        for okey, c in res.items():
            vec_add_into(out, okey, sign * c)
    return out


def bullet(lam: OpFamily, phi: OpFamily, method: str = "auto") -> OpFamily:
    """Composition product: phi-packets fill all slots of lam.

    phi must have internal degree 0 (and no arity-0 component, which in
    positively graded spaces is automatic); lam may be any family out of
    phi's target.  The result maps phi.source to lam.target with lam's degree.
    """
    if phi.degree != 0:
        raise ValueError("bullet expects a degree-0 family on the right")
    if 0 in phi.ops:
        raise ValueError("bullet expects no arity-0 component on the right")
    if lam.source != phi.target:
        raise ValueError("source/target mismatch in bullet")
    n_max = arity_bound(lam.degree, lam.target, phi.source)
    if lam.ops and phi.ops:
        n_max = min(n_max, lam.max_arity * phi.max_arity)
    elif 0 not in lam.ops:
        n_max = -1
    ops = {}
    for n in range(max(n_max, 0 if 0 in lam.ops else -1) + 1):
        if method == "literal" or (method == "auto" and n <= 4):
            fn = lambda tup: _bullet_value_literal(lam, phi, tup)
        elif method in ("auto", "partitions"):
            fn = lambda tup: _bullet_value_partitions(lam, phi, tup)
        else:
            raise ValueError(f"unknown method {method!r}")
        op = MultiOp.from_function(n, lam.degree, phi.source, lam.target, fn)
        if not op.is_zero():
            ops[n] = op
    return OpFamily(lam.degree, phi.source, lam.target, ops)
