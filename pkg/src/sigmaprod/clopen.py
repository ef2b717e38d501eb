"""Symbolic algebra of basic clopen boxes over products of sigma spaces.

A basic box constrains finitely many coordinates, each by a pair (F, G):
the coordinate must contain F and avoid G.  Emptiness, intersection,
containment and reduction are decided symbolically, i.e. for an infinite
ground set; finite enumeration is only ever a test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

from .ground import (
    EMPTY,
    Point,
    ProductDescriptor,
    ProductPoint,
    SigmaFactor,
    descriptor_to_json,
    format_descriptor,
    parse_descriptor,
    parse_point,
    point_in_ambient,
    point_to_json,
)


@dataclass(frozen=True)
class BasicBox:
    """Finitely many coordinate constraints ``(s, F, G)`` over an ambient product.

    Unconstrained coordinates are absent; trivial constraints (both parts
    empty) are dropped, so the full box has no constraints at all.
    """

    ambient: ProductDescriptor
    constraints: tuple = ()

    def __post_init__(self):
        merged: dict[int, tuple[Point, Point]] = {}
        for coord, f, g in self.constraints:
            if not self.ambient.has_coordinate(coord):
                raise ValueError(f"coordinate {coord} outside ambient")
            if coord in merged:
                f0, g0 = merged[coord]
                f, g = f0 | f, g0 | g
            merged[coord] = (f, g)
        canon = tuple(
            (coord, f, g)
            for coord, (f, g) in sorted(merged.items())
            if len(f) or len(g)
        )
        object.__setattr__(self, "constraints", canon)

    @classmethod
    def make(cls, ambient: ProductDescriptor, constraints: dict) -> "BasicBox":
        return cls(ambient, tuple((s, f, g) for s, (f, g) in constraints.items()))

    @classmethod
    def full(cls, ambient: ProductDescriptor) -> "BasicBox":
        return cls(ambient, ())

    def constraint_at(self, s: int) -> tuple:
        for coord, f, g in self.constraints:
            if coord == s:
                return (f, g)
        return (EMPTY, EMPTY)

    def max_constrained_coord(self) -> int:
        return self.constraints[-1][0] if self.constraints else -1

    def __str__(self):
        return format_box(self)


@dataclass(frozen=True)
class ClopenSet:
    """A finite union of basic boxes over a common ambient."""

    ambient: ProductDescriptor
    boxes: tuple = ()

    def __post_init__(self):
        for b in self.boxes:
            if b.ambient != self.ambient:
                raise ValueError("all boxes of a clopen set must share the ambient")

    def contains(self, x: ProductPoint) -> bool:
        return any(box_contains(b, x) for b in self.boxes)

    def __len__(self):
        return len(self.boxes)


def box_is_empty(b: BasicBox) -> bool:
    """Symbolic emptiness: some F meets its G, or some F exceeds its factor bound."""
    for coord, f, g in b.constraints:
        if not f.isdisjoint(g):
            return True
        if len(f) > b.ambient.bound_at(coord):
            return True
    return False


def box_contains(b: BasicBox, x: ProductPoint) -> bool:
    if not point_in_ambient(b.ambient, x):
        raise ValueError(f"point {x} outside ambient {b.ambient}")
    for coord, f, g in b.constraints:
        value = x.coordinate(coord)
        if not f.issubset(value) or not value.isdisjoint(g):
            return False
    return True


def box_intersect(b1: BasicBox, b2: BasicBox) -> BasicBox:
    if b1.ambient != b2.ambient:
        raise ValueError("cannot intersect boxes over different ambients")
    return BasicBox(b1.ambient, b1.constraints + b2.constraints)


def box_subset(b1: BasicBox, b2: BasicBox) -> bool:
    """Is ``b1`` contained in ``b2``, symbolically over an infinite ground set?

    At a coordinate with constraint (F2, G2) in ``b2`` and (F1, G1) in ``b1``:
    membership forces F2 inside F1, F1 clear of G2, and G2 avoided either
    because G1 already excludes it or because F1 fills the factor bound.
    """
    if b1.ambient != b2.ambient:
        raise ValueError("cannot compare boxes over different ambients")
    if box_is_empty(b1):
        return True
    for coord, f2, g2 in b2.constraints:
        f1, g1 = b1.constraint_at(coord)
        if not f2.issubset(f1):
            return False
        if not f1.isdisjoint(g2):
            return False
        if len(g2 - g1) and len(f1) < b1.ambient.bound_at(coord):
            return False
    return True


def box_complement(b: BasicBox) -> ClopenSet:
    """Lazy complement: one box per single violated requirement."""
    boxes = []
    for coord, f, g in b.constraints:
        for el in f:
            boxes.append(BasicBox.make(b.ambient, {coord: (EMPTY, Point.of(el))}))
        for el in g:
            boxes.append(BasicBox.make(b.ambient, {coord: (Point.of(el), EMPTY)}))
    return ClopenSet(b.ambient, tuple(boxes))


@dataclass(frozen=True)
class BoxReduction:
    """The homeomorphism type of a nonempty box plus the coordinatewise witness.

    ``removed`` records the F part stripped from each constrained coordinate;
    the witness map deletes it, and ``restore`` adds it back.
    """

    descriptor: ProductDescriptor
    removed: tuple

    def transform(self, x: ProductPoint) -> ProductPoint:
        width = max([len(x.prefix)] + [s + 1 for s, _ in self.removed])
        coords = []
        for s in range(width):
            value = x.coordinate(s)
            for coord, f in self.removed:
                if coord == s:
                    if not f.issubset(value):
                        raise ValueError(f"point {x} not in the reduced box")
                    value = value - f
                    break
            coords.append(value)
        return ProductPoint(tuple(coords), x.tail_value)

    def restore(self, x: ProductPoint) -> ProductPoint:
        width = max([len(x.prefix)] + [s + 1 for s, _ in self.removed])
        coords = []
        for s in range(width):
            value = x.coordinate(s)
            for coord, f in self.removed:
                if coord == s:
                    value = value | f
                    break
            coords.append(value)
        return ProductPoint(tuple(coords), x.tail_value)


def box_reduce(b: BasicBox) -> BoxReduction:
    """Descriptor of the box's homeomorphism type: each constrained coordinate
    drops |F| from its bound; unconstrained coordinates and the tail pass through."""
    if box_is_empty(b):
        raise ValueError("cannot reduce an empty box")
    width = max(b.ambient.explicit_len, b.max_constrained_coord() + 1)
    factors = []
    removed = []
    for s in range(width):
        f, _g = b.constraint_at(s)
        factors.append(SigmaFactor(b.ambient.bound_at(s) - len(f)))
        if len(f):
            removed.append((s, f))
    desc = ProductDescriptor(tuple(factors), b.ambient.omega_tail)
    return BoxReduction(desc, tuple(removed))


def preimage_under_union(b: BasicBox, k: int) -> ClopenSet:
    """Preimage of a box under the k-fold union map from k-tuples of at-most-singletons.

    One box per injective placement of the F elements into coordinates: the
    receiving coordinate must contain its element (hence equals that
    singleton), and every coordinate avoids G.
    """
    if b.ambient.omega_tail is not None or b.ambient.explicit_len != 1:
        raise ValueError("expected a box over a single factor")
    if b.ambient.bound_at(0) != k:
        raise ValueError(f"box ambient bound {b.ambient.bound_at(0)} does not match k={k}")
    if box_is_empty(b):
        raise ValueError("expected a nonempty box")
    f, g = b.constraint_at(0)
    domain = ProductDescriptor.power(1, k)
    elements = list(f)
    boxes = []
    for placement in permutations(range(k), len(elements)):
        constraints = {}
        for coord in range(k):
            forced = [elements[i] for i, c in enumerate(placement) if c == coord]
            constraints[coord] = (Point(tuple(forced)), g)
        boxes.append(BasicBox.make(domain, constraints))
    return ClopenSet(domain, tuple(boxes))


@dataclass(frozen=True)
class CoverWitness:
    index: int
    witness: BasicBox
    space: ProductDescriptor


def union_membership_cover(target: ClopenSet,
                           probe: ProductDescriptor | None = None) -> CoverWitness:
    """Pick the member of a covering union that contains the all-empty point.

    That member has no F constraints, so it reduces to the full ambient space
    (over the ground set minus its finitely many excluded elements), which is
    what ``space`` reports.
    """
    if probe is not None and probe != target.ambient:
        raise ValueError("probe descriptor does not match the union's ambient")
    for index, box in enumerate(target.boxes):
        if all(len(f) == 0 for _s, f, _g in box.constraints):
            return CoverWitness(index, box, box_reduce(box).descriptor)
    raise ValueError("no member of the union contains the all-empty point; "
                     "the union does not cover the space")


# ---------------------------------------------------------------------------
# text and JSON forms


def format_box(b: BasicBox) -> str:
    inner = "; ".join(f"{s}: F={f} G={g}" for s, f, g in b.constraints)
    return f"[{inner}] @ {format_descriptor(b.ambient)}"


def parse_box(text: str) -> BasicBox:
    text = text.strip()
    if "@" not in text:
        raise ValueError(f"malformed box {text!r}: missing '@ ambient'")
    head, _, amb = text.rpartition("@")
    ambient = parse_descriptor(amb)
    head = head.strip()
    if not (head.startswith("[") and head.endswith("]")):
        raise ValueError(f"malformed box {text!r}: constraints must be bracketed")
    inner = head[1:-1].strip()
    constraints = {}
    if inner:
        for part in inner.split(";"):
            coord_tok, _, rest = part.partition(":")
            coord = int(coord_tok.strip())
            rest = rest.strip()
            if not rest.startswith("F=") or " G=" not in rest:
                raise ValueError(f"malformed box constraint {part!r}")
            f_tok, _, g_tok = rest[2:].partition(" G=")
            constraints[coord] = (parse_point(f_tok), parse_point(g_tok))
    return BasicBox.make(ambient, constraints)


def box_to_json(b: BasicBox) -> dict:
    return {
        "ambient": descriptor_to_json(b.ambient),
        "constraints": [
            {"coord": s, "F": point_to_json(f), "G": point_to_json(g)}
            for s, f, g in b.constraints
        ],
        "text": format_box(b),
    }


def clopen_to_json(c: ClopenSet) -> dict:
    return {
        "ambient": descriptor_to_json(c.ambient),
        "boxes": [box_to_json(b) for b in c.boxes],
    }
