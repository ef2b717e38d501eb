import random

import pytest

from sigmaprod.classification import (
    HOMEOMORPHIC,
    NOT_HOMEOMORPHIC,
    OPEN,
    NormalForm,
    SpaceExpression,
    cb_derivative,
    cb_invariants,
    check_limit_cofinite,
    check_pairwise_disjoint,
    check_sample_membership,
    classify,
    decompose_absorb_small,
    decompose_classif_k,
    embed_product_into_sigma,
    embeddability_profile,
    limit_neighborhood_boxes,
    max_power_embeddable,
    normal_form,
    piece_for_point,
    recover_tau,
    retract_witness,
    split_tagged_point,
)
from sigmaprod.clopen import box_contains, box_is_empty, box_reduce
from sigmaprod.ground import (
    EMPTY,
    OMEGA,
    Point,
    ProductDescriptor,
    ProductPoint,
    TauSequence,
    is_omega,
    materialize,
    parse_tau,
)


def tau(*values, tail=0):
    return TauSequence.from_values(values, tail)


# ---------------------------------------------------------------------------
# normal forms


def test_normal_form_examples():
    nf = normal_form(tau(5, OMEGA, 2))
    assert nf.i == 2 and nf.upper_entries == ((3, 2),) and nf.upper_tail == 0

    nf = normal_form(TauSequence((), OMEGA))
    assert is_omega(nf.i) and nf.upper_entries == ()

    nf = normal_form(tau(0, 0, 4))
    assert nf.i == 0 and nf.upper_entries == ((3, 4),)


def test_normal_form_keeps_positive_tail():
    nf = normal_form(TauSequence(((1, OMEGA), (2, 0)), tail=1))
    assert nf.i == 1 and nf.upper_tail == 1 and nf.upper_entries == ((2, 0),)


def test_normal_form_validation():
    with pytest.raises(ValueError):
        NormalForm(OMEGA, ((3, 1),))
    with pytest.raises(ValueError):
        NormalForm(2, ((2, 1),))
    with pytest.raises(ValueError):
        NormalForm(1, ((2, OMEGA),))


# ---------------------------------------------------------------------------
# classification


def test_classify_spec_examples():
    v = classify(tau(OMEGA, OMEGA), tau(5, OMEGA))
    assert v.outcome == HOMEOMORPHIC

    v = classify(tau(2, 3), tau(7, 3))
    assert v.outcome == NOT_HOMEOMORPHIC

    v = classify(TauSequence(((1, OMEGA),), tail=1),
                 TauSequence(((1, OMEGA), (2, 2)), tail=1))
    assert v.outcome == OPEN
    assert "open question" in v.detail

    v = classify(tau(0, 1), tau(2), gamma="countable")
    assert v.outcome == HOMEOMORPHIC   # derivation index 3 on both sides


def test_classify_omega_saturated():
    v = classify(TauSequence((), OMEGA), TauSequence(((1, 0), (4, 5)), tail=OMEGA))
    assert v.outcome == HOMEOMORPHIC and v.rule == "omega-saturated"


def test_classify_j_invariance():
    v = classify(tau(1), TauSequence((), tail=1))
    assert v.outcome == NOT_HOMEOMORPHIC and v.rule == "largest-embeddable-bound"
    v = classify(tau(1, 1), tau(1))
    assert v.outcome == NOT_HOMEOMORPHIC


def test_classify_open_only_in_the_undecided_regime():
    rng = random.Random(8)
    values = [0, 1, 2, OMEGA]
    tails = [0, 1, 2, OMEGA]
    seqs = [TauSequence.from_values([rng.choice(values) for _ in range(rng.randint(0, 3))],
                                    rng.choice(tails))
            for _ in range(60)]
    from sigmaprod.ground import i_of, j_of
    for a in seqs:
        for b in seqs:
            v = classify(a, b)
            if v.outcome == OPEN:
                assert is_omega(j_of(a)) and is_omega(j_of(b))
                assert not (is_omega(i_of(a)) and is_omega(i_of(b)))


def test_classify_countable_cases():
    assert classify(tau(2), tau(0, 1), gamma="countable").outcome == HOMEOMORPHIC
    assert classify(tau(2), tau(3), gamma="countable").outcome == NOT_HOMEOMORPHIC
    v = classify(TauSequence((), tail=1), TauSequence((), OMEGA), gamma="countable")
    assert v.outcome == HOMEOMORPHIC and v.rule == "countable-infinite-product"
    v = classify(tau(2), TauSequence((), tail=1), gamma="countable")
    assert v.outcome == NOT_HOMEOMORPHIC and v.rule == "countable-versus-perfect"
    with pytest.raises(ValueError):
        classify(tau(1), tau(1), gamma="finite")


def test_classify_zero_sequence_reflexive():
    v = classify(TauSequence(), TauSequence())
    assert v.outcome == HOMEOMORPHIC


def test_classify_reflexive_symmetric_transitive():
    rng = random.Random(11)
    values = [0, 1, 2, OMEGA]
    seqs = [
        TauSequence.from_values([rng.choice(values) for _ in range(rng.randint(0, 4))],
                                rng.choice([0, 1, OMEGA]))
        for _ in range(25)
    ]
    for a in seqs:
        assert classify(a, a).outcome == HOMEOMORPHIC
    for a in seqs:
        for b in seqs:
            assert classify(a, b).outcome == classify(b, a).outcome
    hom = {(a, b) for a in seqs for b in seqs
           if classify(a, b).outcome == HOMEOMORPHIC}
    for a in seqs:
        for b in seqs:
            for c in seqs:
                if (a, b) in hom and (b, c) in hom:
                    assert (a, c) in hom


# ---------------------------------------------------------------------------
# derived-set engine


def test_cb_derivative_single_factor():
    # oracle: the box pinning a full-size set is that point alone, so the
    # full-size points are isolated and one derivative lowers the bound
    full = SpaceExpression.full((2,))
    assert cb_derivative(full).terms == ((1,),)
    point = SpaceExpression.full((0,))
    assert cb_derivative(point).is_empty


def test_cb_derivative_product_rule():
    # oracle: isolated points of a product are pairs of isolated points, so
    # the derivative of (1,1) is the union of (0,1) and (1,0)
    square = SpaceExpression.full((1, 1))
    assert cb_derivative(square).terms == ((0, 1), (1, 0))


def test_cb_derivative_of_union_is_union_of_derivatives():
    expr = SpaceExpression((2, 2), ((2, 0), (1, 1)))
    derived = cb_derivative(expr)
    parts = set()
    for term in expr.terms:
        parts.update(cb_derivative(SpaceExpression((2, 2), (term,))).terms)
    assert set(derived.terms) == parts


def test_cb_invariants_examples():
    assert cb_invariants((2, 3)) == (6, 1)
    assert cb_invariants((0,)) == (1, 1)
    assert cb_invariants((1, 1, 1)) == (4, 1)
    with pytest.raises(ValueError):
        cb_invariants(())


def test_cb_invariants_match_closed_form():
    for ks in [(1,), (4,), (2, 2), (1, 2, 3), (0, 5), (2, 0, 2)]:
        assert cb_invariants(ks) == (1 + sum(ks), 1)


# ---------------------------------------------------------------------------
# embeddability profiles


def test_max_power_examples():
    nf = NormalForm(1, ((2, 3), (4, 1)))
    assert max_power_embeddable(2, nf) == 4     # 3 + 1
    assert max_power_embeddable(1, nf) == OMEGA
    assert max_power_embeddable(5, nf) == 0
    assert max_power_embeddable(3, NormalForm(1, (), 2)) == OMEGA  # positive tail


def test_recover_tau_round_trip():
    for nf in [
        NormalForm(0, ()),
        NormalForm(1, ((2, 3), (4, 1))),
        NormalForm(3, ((5, 2),)),
        NormalForm(0, ((1, 1), (2, 1))),
        NormalForm(OMEGA),
    ]:
        assert recover_tau(embeddability_profile(nf)) == nf


def test_recover_tau_rejects_tampered_profiles():
    nf = NormalForm(1, ((2, 3), (4, 1)))
    profile = embeddability_profile(nf)
    profile[3] = profile[2] + 5   # increase breaks monotonicity
    with pytest.raises(ValueError):
        recover_tau(profile)
    with pytest.raises(ValueError):
        recover_tau({2: 1})       # keys must start at 1
    with pytest.raises(ValueError):
        recover_tau({1: 0, 2: OMEGA})


def test_profile_round_trips_many_normal_forms():
    rng = random.Random(9)
    for _ in range(100):
        i = rng.randint(0, 3)
        entries = []
        n = i
        for _e in range(rng.randint(0, 3)):
            n += rng.randint(1, 2)
            entries.append((n, rng.randint(1, 3)))
        nf = NormalForm(i, tuple(entries))
        assert recover_tau(embeddability_profile(nf)) == nf


# ---------------------------------------------------------------------------
# decompositions


def test_absorb_small_piece_membership_examples():
    dec = decompose_absorb_small(0, 2, depth=4)
    # first omega coordinate differs from the witness pair, missing element 1
    x = ProductPoint((Point.of(0),), Point.of(0, 1))
    assert piece_for_point(dec, x) == "A(0,1)"
    assert piece_for_point(dec, dec.limit_point) == "limit"


def test_classif_k_membership_examples():
    dec = decompose_classif_k(element=7, depth=5)
    assert piece_for_point(dec, ProductPoint((), EMPTY)) == "K(1)"
    assert piece_for_point(dec, ProductPoint((Point.of(7),), EMPTY)) == "K(2)"


def test_absorb_small_rejects_bad_shapes():
    with pytest.raises(ValueError):
        decompose_absorb_small(2, 2)
    with pytest.raises(ValueError):
        decompose_absorb_small(3, 2)


def test_decomposition_pieces_verified():
    for dec in (decompose_absorb_small(1, 2, depth=4),
                decompose_absorb_small(2, 3, depth=3),
                decompose_classif_k(0, depth=5)):
        assert check_pairwise_disjoint(dec) == []
        for piece in dec.pieces:
            assert not box_is_empty(piece.box)
            assert box_reduce(piece.box).descriptor == piece.claimed_type
        report = check_sample_membership(dec, 200, seed=0)
        assert report.ok
        boxes = limit_neighborhood_boxes(dec, 20, seed=1)
        assert check_limit_cofinite(dec, boxes).ok


def test_absorb_small_piece_types():
    from sigmaprod.ground import SigmaFactor

    dec = decompose_absorb_small(1, 2, depth=3)
    by_label = {p.label: p for p in dec.pieces}
    # B'(0) keeps the small factor intact: type (1-bounded) x (2-bounded)^omega
    assert by_label["B'(0)"].claimed_type == ProductDescriptor(
        (SigmaFactor(1),), SigmaFactor(2))
    # B(0,1) collapses the small factor and leaves a 1-bounded fresh factor
    assert by_label["B(0,1)"].claimed_type == ProductDescriptor(
        (SigmaFactor(0), SigmaFactor(1)), SigmaFactor(2))


def test_piece_types_follow_the_absorption_accounting():
    # both sides of the absorption rule decompose into pieces of the same
    # homeomorphism types: the omega power gives depth-many pieces of each
    # type sigma_{n-i} x sigma_n^omega, and the mixed product only adds
    # finitely many pieces whose types already occur
    from collections import Counter

    from sigmaprod.classification import type_signature
    from sigmaprod.ground import SigmaFactor, format_descriptor

    n, m, depth = 3, 2, 4
    power = decompose_absorb_small(0, n, depth=depth)
    mixed = decompose_absorb_small(m, n, depth=depth)

    def signatures(dec):
        return Counter(
            format_descriptor(type_signature(p.claimed_type)) for p in dec.pieces
        )

    per_index = {
        format_descriptor(type_signature(
            ProductDescriptor((SigmaFactor(n - i),), SigmaFactor(n))))
        for i in range(n)
    }
    a_sigs = signatures(power)
    assert set(a_sigs) == per_index
    assert all(count == depth for count in a_sigs.values())
    extra = signatures(mixed) - a_sigs
    assert set(extra) <= per_index and sum(extra.values()) == m

    k_dec = decompose_classif_k(0, depth=5)
    for piece in k_dec.pieces:
        assert type_signature(piece.claimed_type) == k_dec.ambient


def test_decomposition_equivariant_under_relabeling():
    base = decompose_absorb_small(1, 2, depth=3, witnesses=(0, 1))
    moved = decompose_absorb_small(1, 2, depth=3, witnesses=(5, 3))
    relabel = {0: 5, 1: 3}

    def map_point(p):
        return Point(tuple(relabel[e] for e in p))

    for pb, pm in zip(base.pieces, moved.pieces):
        assert pb.label == pm.label
        mapped = tuple(
            (s, map_point(f), map_point(g)) for s, f, g in pb.box.constraints
        )
        assert mapped == pm.box.constraints
    assert map_point(base.limit_point.tail_value) == moved.limit_point.tail_value


def test_embed_product_examples():
    assert embed_product_into_sigma((Point.of(0), Point.of(1)), (1, 1)) == Point(
        ((0, 1), (1, 2)))
    assert embed_product_into_sigma((EMPTY, EMPTY), (1, 1)) == EMPTY
    assert embed_product_into_sigma((Point.of(0, 1), EMPTY), (2, 1)) == Point(
        ((0, 1), (1, 1)))
    with pytest.raises(ValueError):
        embed_product_into_sigma((Point.of(0, 1),), (1,))


def test_embed_product_injective_on_enumerations():
    ks = (2, 1)
    seen = {}
    for x0 in materialize(ProductDescriptor.single(2), 4):
        for x1 in materialize(ProductDescriptor.single(1), 4):
            xs = (x0.coordinate(0), x1.coordinate(0))
            y = embed_product_into_sigma(xs, ks)
            assert len(y) <= sum(ks)
            assert y not in seen or seen[y] == xs
            seen[y] = xs
            assert split_tagged_point(y, 2) == xs


def test_retract_witness_examples():
    w = retract_witness(3, Point.of(1, 2))
    assert w.embed(Point.of(0)) == Point.of(0, 1, 2)
    assert w.embed(EMPTY) == Point.of(1, 2)
    assert w.retract(Point.of(0, 1, 2)) == Point.of(0, 1, 2)
    assert w.retract(Point.of(0)) == Point.of(1, 2)
    with pytest.raises(ValueError):
        retract_witness(3, Point.of(1))
    with pytest.raises(ValueError):
        w.embed(Point.of(1))


def test_retract_round_trip_on_enumeration():
    w = retract_witness(3, Point.of(3, 4))
    domain = [p.coordinate(0) for p in materialize(ProductDescriptor.single(1), 3)]
    image = set()
    for x in domain:
        y = w.embed(x)
        assert w.project(y) == x
        assert w.retract(y) == y
        image.add(y)
    # the image is exactly the clopen trace on the enumerated truncation
    ambient_points = materialize(ProductDescriptor.single(3), 5)
    clopen_members = {
        p.coordinate(0) for p in ambient_points
        if box_contains(w.clopen_image, p)
    }
    assert image == clopen_members


def test_retract_box_preimage_is_continuity_witness():
    w = retract_witness(2, Point.of(0))
    from sigmaprod.clopen import BasicBox

    ambient = ProductDescriptor.single(2)
    cases = [
        BasicBox.make(ambient, {0: (Point.of(0), EMPTY)}),
        BasicBox.make(ambient, {0: (Point.of(1), EMPTY)}),
        BasicBox.make(ambient, {0: (EMPTY, Point.of(1))}),
        BasicBox.make(ambient, {0: (Point.of(0, 1), EMPTY)}),
        BasicBox.full(ambient),
    ]
    for box in cases:
        pre = w.box_preimage(box)
        for p in materialize(ambient, 3):
            y = p.coordinate(0)
            expected = box_contains(box, ProductPoint((w.retract(y),)))
            assert pre.contains(p) == expected
