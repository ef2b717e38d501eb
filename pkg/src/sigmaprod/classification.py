"""Homeomorphism classification of products of sigma spaces, with witnesses.

Over an uncountable ground set, the invariants are the omega-threshold i
(largest index whose space occurs omega-many times) and the exponents above
it; everything at or below i is absorbed.  Products with finitely many
factors are decided completely; when positive exponents occur cofinally and
the omega-threshold is finite, mismatches are an open question and the
verdict says so rather than guessing.

For a countable ground set the finite products are countable compacta,
classified by the derivation index of the iterated derived-set operation;
the infinite products are all homeomorphic.

The decomposition constructors emit the clopen partitions behind the
absorption rules, with per-piece boxes, reduced types and the single limit
point, so every claim is machine-checkable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache

from .ground import (
    EMPTY,
    OMEGA,
    Point,
    ProductDescriptor,
    ProductPoint,
    SigmaFactor,
    TauSequence,
    TauValue,
    descriptor_to_json,
    i_of,
    is_omega,
    j_of,
    value_to_json,
)
from .clopen import (
    BasicBox,
    ClopenSet,
    box_complement,
    box_contains,
    box_intersect,
    box_is_empty,
    box_reduce,
    box_subset,
    box_to_json,
)

HOMEOMORPHIC = "HOMEOMORPHIC"
NOT_HOMEOMORPHIC = "NOT_HOMEOMORPHIC"
OPEN = "OPEN"

OPEN_QUESTION = (
    "both sequences have positive exponents cofinally but a finite "
    "omega-threshold, and they disagree above it; whether such products are "
    "homeomorphic is an open question (the simplest instance: the product of "
    "the n-bounded spaces over all n >= 1 versus over all n >= 2)"
)


@dataclass(frozen=True)
class NormalForm:
    """Absorbed shape of an exponent sequence.

    ``i`` is the omega-threshold; entries at or below it are absorbed into
    the omega power of the i-bounded space.  ``upper_entries`` plus
    ``upper_tail`` record the exponents above i verbatim (all finite there; a
    positive tail means cofinally many positive exponents).
    """

    i: TauValue
    upper_entries: tuple = ()
    upper_tail: int = 0

    def __post_init__(self):
        if is_omega(self.i):
            if self.upper_entries or self.upper_tail:
                raise ValueError("nothing survives above an infinite omega-threshold")
            return
        if not isinstance(self.upper_tail, int) or self.upper_tail < 0:
            raise ValueError("the upper tail must be a finite non-negative integer")
        canon = []
        prev = self.i
        for n, v in self.upper_entries:
            if n <= self.i:
                raise ValueError(f"entry index {n} not above threshold {self.i}")
            if n <= prev:
                raise ValueError("entry indices must be strictly increasing")
            prev = n
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"exponent above the threshold must be finite, got {v!r}")
            if v != self.upper_tail:
                canon.append((n, v))
        object.__setattr__(self, "upper_entries", tuple(canon))

    def exponent_at(self, n: int) -> int:
        for idx, v in self.upper_entries:
            if idx == n:
                return v
        return self.upper_tail

    @property
    def max_entry_index(self) -> int:
        return self.upper_entries[-1][0] if self.upper_entries else 0


@lru_cache(maxsize=None)
def normal_form(tau: TauSequence) -> NormalForm:
    """Drop everything the omega power absorbs; keep the upper part verbatim."""
    i = i_of(tau)
    if is_omega(i):
        return NormalForm(OMEGA)
    entries = tuple((n, v) for n, v in tau.entries if n > i)
    return NormalForm(i, entries, tau.tail)


@dataclass(frozen=True)
class ClassificationVerdict:
    outcome: str
    rule: str
    detail: str


def classify(tau: TauSequence, tau2: TauSequence,
             gamma: str = "uncountable") -> ClassificationVerdict:
    """Decide whether two products of sigma spaces are homeomorphic.

    ``gamma`` selects the ground-set regime.  Over an uncountable ground set
    the decision follows the absorption normal form, the invariance of the
    largest embeddable bound, and the completely decided finite-support case;
    in the undecided regime the verdict is OPEN.  Over a countable ground set
    finite products compare by derivation index and infinite products are all
    homeomorphic.
    """
    if gamma not in ("uncountable", "countable"):
        raise ValueError(f"gamma must be 'uncountable' or 'countable', got {gamma!r}")
    if gamma == "countable":
        return _classify_countable(tau, tau2)
    nf1, nf2 = normal_form(tau), normal_form(tau2)
    j1, j2 = j_of(tau), j_of(tau2)
    if nf1 == nf2:
        if is_omega(nf1.i):
            return ClassificationVerdict(
                HOMEOMORPHIC, "omega-saturated",
                "every bound occurs omega-many times after absorption; all such "
                "products are homeomorphic")
        if not is_omega(j1):
            return ClassificationVerdict(
                HOMEOMORPHIC, "finite-support-invariants",
                "complete classification for finitely supported sequences: "
                "equal omega-thresholds and identical exponents above them")
        return ClassificationVerdict(
            HOMEOMORPHIC, "absorption-normal-form",
            "equal omega-thresholds and identical exponents above them; the "
            "lower factors are absorbed")
    if j1 != j2:
        return ClassificationVerdict(
            NOT_HOMEOMORPHIC, "largest-embeddable-bound",
            f"the largest n whose space embeds differs: {value_to_json(j1)} "
            f"versus {value_to_json(j2)}")
    if not is_omega(j1):
        if nf1.i != nf2.i:
            return ClassificationVerdict(
                NOT_HOMEOMORPHIC, "omega-threshold",
                f"omega-thresholds differ: {value_to_json(nf1.i)} versus "
                f"{value_to_json(nf2.i)} (largest bound embeddable into every "
                "clopen set)")
        return ClassificationVerdict(
            NOT_HOMEOMORPHIC, "upper-exponents",
            "some exponent above the common omega-threshold differs; it is "
            "recoverable from maximal embeddable powers inside clopen sets")
    return ClassificationVerdict(OPEN, "open-question", OPEN_QUESTION)


def _is_finite_product(tau: TauSequence) -> bool:
    return tau.tail == 0 and all(not is_omega(v) for _n, v in tau.entries)


def _classify_countable(tau: TauSequence, tau2: TauSequence) -> ClassificationVerdict:
    fin1, fin2 = _is_finite_product(tau), _is_finite_product(tau2)
    if fin1 and fin2:
        inv1 = 1 + sum(n * v for n, v in tau.entries)
        inv2 = 1 + sum(n * v for n, v in tau2.entries)
        if inv1 == inv2:
            return ClassificationVerdict(
                HOMEOMORPHIC, "countable-derivation-index",
                f"both countable compacta have derivation index {inv1} and a "
                "single point at the last stage")
        return ClassificationVerdict(
            NOT_HOMEOMORPHIC, "countable-derivation-index",
            f"derivation indices differ: {inv1} versus {inv2}")
    if not fin1 and not fin2:
        return ClassificationVerdict(
            HOMEOMORPHIC, "countable-infinite-product",
            "both are perfect totally disconnected metrizable compacta; all "
            "infinite products over a countable ground set are homeomorphic")
    return ClassificationVerdict(
        NOT_HOMEOMORPHIC, "countable-versus-perfect",
        "a countable compactum cannot be homeomorphic to a perfect one")


# ---------------------------------------------------------------------------
# derived-set engine (countable ground set, finite products)


@dataclass(frozen=True)
class SpaceExpression:
    """Formal finite union of degree vectors inside a fixed product.

    A vector v denotes the subspace where coordinate s has at most v[s]
    elements; the derived set decrements one positive coordinate at a time.
    """

    bounds: tuple
    terms: tuple = ()

    def __post_init__(self):
        bounds = tuple(self.bounds)
        terms = []
        for v in sorted(set(tuple(t) for t in self.terms)):
            if len(v) != len(bounds):
                raise ValueError("term length must match the number of coordinates")
            if any(d < 0 or d > b for d, b in zip(v, bounds)):
                raise ValueError(f"term {v} violates the degree bounds {bounds}")
            terms.append(v)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "terms", tuple(terms))

    @classmethod
    def full(cls, bounds) -> "SpaceExpression":
        bounds = tuple(bounds)
        return cls(bounds, (bounds,))

    @property
    def is_empty(self) -> bool:
        return not self.terms


def cb_derivative(expr: SpaceExpression) -> SpaceExpression:
    """Derived set: full-degree points are isolated, so each term loses one
    from one positive coordinate; the derivative of a union is the union."""
    derived = set()
    for v in expr.terms:
        for s, d in enumerate(v):
            if d > 0:
                derived.add(v[:s] + (d - 1,) + v[s + 1:])
    return SpaceExpression(expr.bounds, tuple(derived))


def cb_invariants(ks) -> tuple:
    """Iterate the derived-set engine from the full product.

    Returns (first empty derivative index, point count of the last nonempty
    stage); the last stage is always the single all-zero vector.
    """
    ks = tuple(ks)
    if not ks:
        raise ValueError("need at least one factor")
    if any(not isinstance(k, int) or k < 0 for k in ks):
        raise ValueError("factor bounds must be non-negative integers")
    expr = SpaceExpression.full(ks)
    steps = 0
    last = expr
    while not expr.is_empty:
        last = expr
        expr = cb_derivative(expr)
        steps += 1
    assert last.terms == ((0,) * len(ks),)
    return steps, 1


# ---------------------------------------------------------------------------
# invariant recovery from embeddability profiles


def max_power_embeddable(n: int, nf: NormalForm) -> TauValue:
    """Largest k with the n-bounded space to the k embeddable into the best
    clopen set avoiding the (n+1)-bounded space: omega at or below the
    threshold, else the sum of the exponents from n up."""
    if n < 1:
        raise ValueError("bounds are indexed from 1")
    if is_omega(nf.i) or n <= nf.i:
        return OMEGA
    if nf.upper_tail > 0:
        return OMEGA
    return sum(v for m, v in nf.upper_entries if m >= n)


def embeddability_profile(nf: NormalForm, up_to: int | None = None) -> dict:
    """The map n -> max_power_embeddable(n, nf) for n = 1..up_to."""
    if up_to is None:
        base = nf.max_entry_index if not is_omega(nf.i) else 0
        i_part = 0 if is_omega(nf.i) else nf.i
        up_to = max(base, i_part, 0) + 1
    return {n: max_power_embeddable(n, nf) for n in range(1, up_to + 1)}


def recover_tau(profile: dict) -> NormalForm:
    """Rebuild a normal form from its embeddability profile by downward induction.

    Expects the profile of a normal form with finite support above the
    threshold (keys 1..max contiguous); an all-omega profile recovers the
    omega-saturated form.  Inconsistent profiles are rejected at the first
    failing index.
    """
    if not profile:
        raise ValueError("profile must be nonempty")
    keys = sorted(profile)
    if keys != list(range(1, len(keys) + 1)):
        raise ValueError("profile keys must be contiguous from 1")
    top = len(keys)
    omega_indices = [n for n in keys if is_omega(profile[n])]
    i = max(omega_indices, default=0)
    for n in range(1, i):
        if not is_omega(profile[n]):
            raise ValueError(f"inconsistent profile at index {n}: finite below an "
                             "omega value")
    if omega_indices and i == top:
        return NormalForm(OMEGA)
    entries = []
    for n in range(i + 1, top + 1):
        here = profile[n]
        after = profile[n + 1] if n + 1 <= top else 0
        if is_omega(here):
            raise ValueError(f"inconsistent profile at index {n}: omega above the "
                             "threshold")
        if here < after:
            raise ValueError(f"inconsistent profile at index {n}: profile increases")
        v = here - after
        if v:
            entries.append((n, v))
    return NormalForm(i, tuple(entries), 0)


# ---------------------------------------------------------------------------
# decomposition witnesses


def type_signature(desc: ProductDescriptor) -> ProductDescriptor:
    """Descriptor modulo homeomorphism-preserving rewrites: one-point factors
    drop out and the order of the explicit factors is irrelevant."""
    bounds = sorted(f.n for f in desc.factors if f.n > 0)
    return ProductDescriptor(tuple(SigmaFactor(b) for b in bounds), desc.omega_tail)


@dataclass(frozen=True)
class DecompositionPiece:
    """A clopen piece with its box and verified reduced type."""

    label: str
    box: BasicBox
    claimed_type: ProductDescriptor

    def __post_init__(self):
        if box_is_empty(self.box):
            raise ValueError(f"piece {self.label} has an empty box")
        if box_reduce(self.box).descriptor != self.claimed_type:
            raise ValueError(f"piece {self.label}: claimed type does not match the "
                             "box reduction")


@dataclass(frozen=True)
class Decomposition:
    kind: str
    ambient: ProductDescriptor
    pieces: tuple
    limit_point: ProductPoint
    witnesses: tuple
    depth: int


def decompose_absorb_small(m: int, n: int, depth: int = 6,
                           witnesses: tuple | None = None) -> Decomposition:
    """Clopen partition of (m-bounded space) x (n-bounded space)^omega minus one point.

    With m = 0 this is the partition of the omega power itself.  The pieces
    index the first witness element missing from the first non-full omega
    coordinate; their only limit point is the constant witness-set sequence.
    """
    if m >= n:
        raise ValueError(f"need m < n, got m={m}, n={n}")
    if m < 0 or depth < 1:
        raise ValueError("m must be non-negative and depth positive")
    if witnesses is None:
        witnesses = tuple(range(n))
    witnesses = tuple(witnesses)
    if len(witnesses) != n or len(set(witnesses)) != n:
        raise ValueError(f"need {n} distinct witness elements")
    full_set = Point(witnesses)
    small_set = Point(witnesses[:m])
    offset = 1 if m > 0 else 0
    if m > 0:
        ambient = ProductDescriptor((SigmaFactor(m),), SigmaFactor(n))
    else:
        ambient = ProductDescriptor.omega_power(n)
    pieces = []
    for j in range(m):
        box = BasicBox.make(ambient, {
            0: (Point(witnesses[:j]), Point.of(witnesses[j])),
        })
        pieces.append(DecompositionPiece(
            f"B'({j})", box, box_reduce(box).descriptor))
    prefix_label = "B" if m > 0 else "A"
    for k in range(depth):
        for i in range(n):
            constraints = {}
            if m > 0:
                constraints[0] = (small_set, EMPTY)
            for t in range(k):
                constraints[offset + t] = (full_set, EMPTY)
            constraints[offset + k] = (Point(witnesses[:i]), Point.of(witnesses[i]))
            box = BasicBox.make(ambient, constraints)
            pieces.append(DecompositionPiece(
                f"{prefix_label}({k},{i})", box, box_reduce(box).descriptor))
    prefix = (small_set,) if m > 0 else ()
    limit = ProductPoint(prefix, full_set)
    return Decomposition(f"absorb_small({m},{n})", ambient, tuple(pieces),
                         limit, witnesses, depth)


def decompose_classif_k(element: int = 0, depth: int = 6) -> Decomposition:
    """Clopen partition of the omega power of the 1-bounded space minus the
    constant-singleton sequence: piece t pins the witness into the first t
    coordinates and out of the next."""
    if depth < 1:
        raise ValueError("depth must be positive")
    ambient = ProductDescriptor.omega_power(1)
    single = Point.of(element)
    pieces = []
    for t in range(depth):
        constraints = {s: (single, EMPTY) for s in range(t)}
        constraints[t] = (EMPTY, single)
        box = BasicBox.make(ambient, constraints)
        pieces.append(DecompositionPiece(f"K({t + 1})", box,
                                         box_reduce(box).descriptor))
    limit = ProductPoint((), single)
    return Decomposition("classif_K", ambient, tuple(pieces), limit,
                         (element,), depth)


def check_pairwise_disjoint(dec: Decomposition) -> list:
    """Symbolically empty pairwise intersections; returns the offending pairs."""
    bad = []
    for a in range(len(dec.pieces)):
        for b in range(a + 1, len(dec.pieces)):
            inter = box_intersect(dec.pieces[a].box, dec.pieces[b].box)
            if not box_is_empty(inter):
                bad.append((dec.pieces[a].label, dec.pieces[b].label))
    return bad


def piece_for_point(dec: Decomposition, x: ProductPoint):
    """The unique piece containing x, the string "limit", or None if x lies
    beyond the materialized depth."""
    if x == dec.limit_point:
        return "limit"
    hits = [p.label for p in dec.pieces if box_contains(p.box, x)]
    if len(hits) > 1:
        raise AssertionError(f"point {x} lies in several pieces: {hits}")
    return hits[0] if hits else None


def sample_decomposition_points(dec: Decomposition, count: int, seed: int,
                                extra_elements: int = 2) -> list:
    """Seeded eventually-constant points with prefix within the materialized
    depth and the limit tail, so membership is decidable from the pieces."""
    rng = random.Random(seed)
    base = max(dec.witnesses) + 1 if dec.witnesses else 0
    ground = list(dec.witnesses) + [base + t for t in range(extra_elements)]
    explicit = dec.ambient.explicit_len
    points = []
    for _ in range(count):
        width = rng.randint(explicit, explicit + dec.depth - 1)
        coords = []
        for s in range(width):
            if rng.random() < 0.5:
                coords.append(dec.limit_point.coordinate(s))
            else:
                bound = dec.ambient.bound_at(s)
                size = rng.randint(0, min(bound, len(ground)))
                coords.append(Point(tuple(rng.sample(ground, size))))
        points.append(ProductPoint(tuple(coords), dec.limit_point.tail_value))
    return points


@dataclass(frozen=True)
class MembershipReport:
    total: int
    in_piece: int
    at_limit: int
    unresolved: tuple

    @property
    def ok(self) -> bool:
        return not self.unresolved and self.in_piece + self.at_limit == self.total


def check_sample_membership(dec: Decomposition, count: int, seed: int) -> MembershipReport:
    in_piece = 0
    at_limit = 0
    unresolved = []
    for x in sample_decomposition_points(dec, count, seed):
        where = piece_for_point(dec, x)
        if where == "limit":
            at_limit += 1
        elif where is None:
            unresolved.append(x)
        else:
            in_piece += 1
    return MembershipReport(count, in_piece, at_limit, tuple(unresolved))


def limit_neighborhood_boxes(dec: Decomposition, count: int, seed: int,
                             extra_elements: int = 2) -> list:
    """Seeded basic boxes around the limit point (F inside each coordinate
    value, G clear of it)."""
    rng = random.Random(seed)
    base = max(dec.witnesses) + 1 if dec.witnesses else 0
    extras = [base + t for t in range(extra_elements)]
    max_coord = dec.ambient.explicit_len + dec.depth + 1
    boxes = []
    for _ in range(count):
        n_constraints = rng.randint(0, 3)
        coords = rng.sample(range(max_coord), min(n_constraints, max_coord))
        constraints = {}
        for s in sorted(coords):
            value = list(dec.limit_point.coordinate(s))
            f = Point(tuple(rng.sample(value, rng.randint(0, len(value)))))
            g_pool = [e for e in extras if e not in value]
            g = Point(tuple(rng.sample(g_pool, rng.randint(0, len(g_pool)))))
            constraints[s] = (f, g)
        box = BasicBox.make(dec.ambient, constraints)
        assert box_contains(box, dec.limit_point)
        boxes.append(box)
    return boxes


@dataclass(frozen=True)
class CofinitenessReport:
    boxes: int
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def check_limit_cofinite(dec: Decomposition, boxes) -> CofinitenessReport:
    """Each neighborhood of the limit must contain every piece that starts
    beyond the neighborhood's last constrained coordinate."""
    violations = []
    for box in boxes:
        cutoff = box.max_constrained_coord()
        for piece in dec.pieces:
            if piece.box.max_constrained_coord() > cutoff:
                if not box_subset(piece.box, box):
                    violations.append((str(box), piece.label))
    return CofinitenessReport(len(list(boxes)), tuple(violations))


# ---------------------------------------------------------------------------
# product embedding and retraction witnesses


def embed_product_into_sigma(xs, ks) -> Point:
    """Tag each coordinate's elements with the (1-based) factor index and unite.

    Injective; the image has at most sum(ks) elements inside the tagged union
    of the ground sets.
    """
    xs = tuple(xs)
    ks = tuple(ks)
    if len(xs) != len(ks):
        raise ValueError("one bound per coordinate required")
    tagged = []
    for idx, (x, k) in enumerate(zip(xs, ks), start=1):
        if len(x) > k:
            raise ValueError(f"coordinate {idx} has {len(x)} elements, bound {k}")
        tagged.extend((el, idx) for el in x)
    return Point(tuple(tagged))


def split_tagged_point(y: Point, nfactors: int) -> tuple:
    """Inverse of the tagged union: separate elements by their factor tag."""
    coords = [[] for _ in range(nfactors)]
    for el, idx in y:
        coords[idx - 1].append(el)
    return tuple(Point(tuple(c)) for c in coords)


@dataclass(frozen=True)
class RetractWitness:
    """The 1-bounded space copied as the clopen set of supersets of k-1 fixed
    elements inside the k-bounded space, with the retraction onto it."""

    k: int
    fixed: Point
    clopen_image: BasicBox

    def embed(self, x: Point) -> Point:
        if len(x) > 1:
            raise ValueError(f"domain points have at most one element, got {x}")
        if not x.isdisjoint(self.fixed):
            raise ValueError(f"domain points avoid the fixed elements, got {x}")
        return x | self.fixed

    def project(self, y: Point) -> Point:
        if not self.fixed.issubset(y):
            raise ValueError(f"{y} is outside the clopen image")
        return y - self.fixed

    def retract(self, y: Point) -> Point:
        if len(y) > self.k:
            raise ValueError(f"{y} exceeds the bound {self.k}")
        return y if self.fixed.issubset(y) else self.fixed

    def box_preimage(self, b: BasicBox) -> ClopenSet:
        """Continuity witness: the retraction preimage of a box as a finite
        union of boxes (its trace on the image, plus the whole complement when
        the box catches the collapse point)."""
        if b.ambient != self.clopen_image.ambient:
            raise ValueError("box must live over the codomain")
        boxes = []
        inside = box_intersect(b, self.clopen_image)
        if not box_is_empty(inside):
            boxes.append(inside)
        f, g = b.constraint_at(0)
        if f.issubset(self.fixed) and self.fixed.isdisjoint(g):
            boxes.extend(box_complement(self.clopen_image).boxes)
        return ClopenSet(b.ambient, tuple(boxes))


def retract_witness(k: int, fixed: Point) -> RetractWitness:
    if len(fixed) != k - 1:
        raise ValueError(f"need exactly {k - 1} fixed elements, got {len(fixed)}")
    ambient = ProductDescriptor.single(k)
    image = BasicBox.make(ambient, {0: (fixed, EMPTY)})
    return RetractWitness(k, fixed, image)


# ---------------------------------------------------------------------------
# JSON forms


def verdict_to_json(v: ClassificationVerdict) -> dict:
    return {"outcome": v.outcome, "rule": v.rule, "detail": v.detail}


def normal_form_to_json(nf: NormalForm) -> dict:
    return {
        "omega_threshold": value_to_json(nf.i),
        "upper_entries": [[n, v] for n, v in nf.upper_entries],
        "upper_tail": nf.upper_tail,
    }


def decomposition_to_json(dec: Decomposition) -> dict:
    return {
        "kind": dec.kind,
        "ambient": descriptor_to_json(dec.ambient),
        "limit_point": str(dec.limit_point),
        "witnesses": list(dec.witnesses),
        "depth": dec.depth,
        "pieces": [
            {
                "label": p.label,
                "box": box_to_json(p.box),
                "type": descriptor_to_json(p.claimed_type),
                "type_signature": descriptor_to_json(type_signature(p.claimed_type)),
            }
            for p in dec.pieces
        ],
    }
