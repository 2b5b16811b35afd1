import json

import pytest
from hypothesis import given, settings, strategies as st

from gpdcover.cover import FinGroup, GroupMorphismToFin, universal_cover_of_group
from gpdcover.derived import (Derivation, GModulePresentation, augmentation_ideal,
                              crowell_sequence, derived_module, evaluate_derivation,
                              factor_derivation, kernel_presentation, verify_theorem41)
from gpdcover.gpd import GroupPresentation, parse_word

from oracles import nielsen_schreier_rank
from properties import GROUPS, phi_corpus


def by_names(gens, group, images, relators=()):
    F = GroupPresentation(gens, [parse_word(r) for r in relators])
    return GroupMorphismToFin.by_names(F, FinGroup.builtin(group), images)


CORPUS = phi_corpus()


def test_module_presentation_checks_its_data():
    C2 = FinGroup.cyclic(2)
    with pytest.raises(ValueError):
        GModulePresentation(C2, ["m"], [((1, 0, "n"),)])
    with pytest.raises(ValueError):
        GModulePresentation(C2, ["m"], [((1, 5, "m"),)])
    M = GModulePresentation(C2, ["m"], [((1, 0, "m"), (1, 1, "m"))])
    # m + m.g = 0 expands to two equal relations, leaving Z
    assert M.restriction.invariants() == ((), 1)
    assert M.translate(M.basis("m"), 1) == M.basis("m", 1)


def test_evaluate_derivation_examples():
    phi = by_names(["x"], "C3", {"x": "g"})
    D, d = derived_module(phi)
    assert evaluate_derivation(d, ()) == D.zero()
    assert evaluate_derivation(d, parse_word("x")) == D.basis("x")
    # d(x x) = d(x).x + d(x)
    assert d(parse_word("x x")) == [a + b for a, b in zip(D.basis("x", 1), D.basis("x"))]
    # d(x^-1) = -d(x).x^-1
    assert d(parse_word("~x")) == [-a for a in D.basis("x", 2)]
    with pytest.raises(KeyError):
        evaluate_derivation(d, parse_word("q"))


def test_universal_cover_derivation_for_c2():
    """In the universal cover of C2, d(g g) = d(g)^g + d(g) with d(g) = (g, 1)."""
    C2 = FinGroup.cyclic(2)
    tilde, _, _ = universal_cover_of_group(C2)
    g, one = 1, C2.identity
    # (g, 1)^g = (g, g), then composing with (g, 1) lands on (1, 1)
    assert tilde.mul((g, g), (g, one)) == (C2.mul(g, g), one) == (one, one)


@pytest.mark.parametrize("name,rank", [("C1", 0), ("C2", 1), ("C3", 2), ("K", 3), ("S3", 5),
                                       ("D4", 7)])
def test_augmentation_ideal_has_rank_order_minus_one(name, rank):
    IG = augmentation_ideal(FinGroup.builtin(name))
    assert IG.restriction.invariants() == ((), rank)
    assert len(IG.generators) == rank


@pytest.mark.parametrize("gens,group,images,relators,expected", [
    (["x"], "C1", {"x": "1"}, [], ((), 1)),
    (["x", "y"], "C2", {"x": "g", "y": "g"}, [], ((), 4)),
    (["a"], "C2", {"a": "g"}, ["a a"], ((), 1)),
])
def test_derived_module_examples(gens, group, images, relators, expected):
    D, _ = derived_module(by_names(gens, group, images, relators))
    assert D.restriction.invariants() == expected


def test_derived_module_of_relator_group():
    D, d = derived_module(by_names(["a"], "C2", {"a": "g"}, ["a a"]))
    # the single relation is da.g + da
    assert [set(r) for r in D.relations] == [{(1, 1, "a"), (1, 0, "a")}]


@pytest.mark.parametrize("gens,group,images,rank", [
    (["x"], "C2", {"x": "g"}, 1),
    (["x", "y"], "C2", {"x": "g", "y": "g"}, 3),
    (["x"], "C3", {"x": "g"}, 1),
    (["x", "y"], "K", {"x": "a", "y": "b"}, 5),
])
def test_kernel_presentation_ranks(gens, group, images, rank):
    K = kernel_presentation(by_names(gens, group, images))
    assert K.abelianisation.invariants() == ((), rank)
    assert rank == nielsen_schreier_rank(len(gens), FinGroup.builtin(group).order)


def test_kernel_of_identity_is_trivial():
    K = kernel_presentation(by_names(["a"], "C2", {"a": "g"}, ["a a"]))
    assert K.abelianisation.invariants() == ((), 0)


def test_kernel_words_lie_in_kernel_and_rewrite_to_basis():
    K = kernel_presentation(by_names(["x", "y"], "S3", {"x": "(1 2)", "y": "(1 2 3)"}))
    for i, e in enumerate(K.presentation.generators):
        assert K.phi.evaluate(K.words[e]) == K.phi.codomain.identity
        v = K.rewrite(K.words[e])
        assert v == [int(j == i) for j in range(len(v))]
    with pytest.raises(ValueError):
        K.rewrite(parse_word("x"))


def test_non_surjective_is_rejected():
    phi = by_names(["x"], "K", {"x": "a"})
    for f in (kernel_presentation, crowell_sequence, verify_theorem41):
        with pytest.raises(ValueError):
            f(phi)


@pytest.mark.parametrize("gens,group,images,relators,ranks", [
    (["a"], "C2", {"a": "g"}, ["a a"], (0, 1, 1)),
    (["x", "y"], "C2", {"x": "g", "y": "g"}, [], (3, 4, 1)),
    (["x", "y"], "K", {"x": "a", "y": "b"}, [], (5, 8, 3)),
])
def test_crowell_examples(gens, group, images, relators, ranks):
    seq = crowell_sequence(by_names(gens, group, images, relators))
    assert seq.ok
    assert tuple(r[1] for r in seq.ranks()) == ranks
    assert all(r[0] == () for r in seq.ranks())


@pytest.mark.parametrize("label,phi", CORPUS, ids=[c[0] for c in CORPUS])
def test_crowell_on_corpus(label, phi):
    seq = crowell_sequence(phi)
    assert seq.exactness.short_exact and seq.equivariant.ok
    if not phi.domain.relators:
        r, n = len(phi.domain.generators), phi.codomain.order
        n_ab, d, ig = (x[1] for x in seq.ranks())
        assert (n_ab, d, ig) == (nielsen_schreier_rank(r, n), r * n, n - 1)
        assert r * n == (n * (r - 1) + 1) + (n - 1)


def test_theorem41_examples():
    rep = verify_theorem41(by_names(["a"], "C2", {"a": "g"}, ["a a"]))
    assert rep.ok
    assert rep.invariants()["top"]["derived_module"] == {"invariants": [], "free_rank": 1}
    rep = verify_theorem41(by_names(["x", "y"], "K", {"x": "a", "y": "b"}))
    inv = rep.invariants()
    assert inv["top"]["derived_module"] == inv["bottom"]["pullback_totab"] == \
        {"invariants": [], "free_rank": 8}
    assert inv["top"]["kernel_ab"]["free_rank"] == 5
    assert inv["bottom"]["universal_cover_totab"]["free_rank"] == 3
    rep = verify_theorem41(by_names(["x", "y"], "S3", {"x": "(1 2)", "y": "(1 2 3)"}))
    inv = rep.invariants()
    assert inv["top"]["derived_module"]["free_rank"] == 12
    assert (inv["top"]["kernel_ab"]["free_rank"], inv["top"]["augmentation_ideal"]["free_rank"]) \
        == (7, 5)


def test_theorem41_report_json():
    rep = verify_theorem41(by_names(["x"], "C3", {"x": "g"}))
    data = json.loads(json.dumps(rep.to_json()))
    assert data["ok"] and data["squares_commute"]
    assert set(data) >= {"rows", "exactness", "vertical_isos", "squares_commute", "invariants"}
    assert set(data["vertical_isos"]) == {"kernel", "eta", "ideal"}


@st.composite
def sample_derivations(draw):
    """A morphism from the corpus, a random small module and random generator values."""
    label, phi = draw(st.sampled_from(CORPUS))
    G = phi.codomain
    gens = ["m", "n"][:draw(st.integers(1, 2))]
    term = st.tuples(st.integers(-2, 2), st.sampled_from(G.elements), st.sampled_from(gens))
    rels = draw(st.lists(st.lists(term, min_size=1, max_size=3).map(tuple), max_size=2))
    M = GModulePresentation(G, gens, rels)
    vec = st.lists(term, max_size=3).map(M.vector)
    values = {s: draw(vec) for s in phi.domain.generators}
    word = draw(st.lists(st.tuples(st.sampled_from(phi.domain.generators),
                                   st.sampled_from((1, -1))), max_size=6).map(tuple))
    return phi, M, values, word


@settings(max_examples=200)
@given(sample_derivations())
def test_derivations_factor_through_the_derived_module(case):
    phi, M, values, word = case
    try:
        d = Derivation(phi, M, values)
    except ValueError:
        # a relator does not vanish: force the values to zero, which always works
        d = Derivation(phi, M, {s: M.zero() for s in values})
    universal = derived_module(phi)
    f = factor_derivation(d, universal)
    D, partial = universal
    diff = [a - b for a, b in zip(f(partial(word)), d(word))]
    assert M.is_zero(diff)
    # uniqueness: D is generated by the ds, so a G-map is fixed by their images
    n = phi.codomain.order
    for i, s in enumerate(D.generators):
        assert f.restriction.matrix.row(i * n + phi.codomain.identity) == list(d.values[s])


def test_corpus_covers_every_group():
    assert {phi.codomain.order for _, phi in CORPUS} == {2, 3, 4, 6, 8}
    assert set(GROUPS) >= {"C2", "C3", "C4", "K", "S3", "D4"}
