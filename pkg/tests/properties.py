"""
Randomised properties shared by the property suite and the acceptance run.
Each ``check_*`` takes one generated case and asserts; each ``*_cases``
strategy generates those cases.
"""

from hypothesis import given, settings, strategies as st

from gpdcover.cover import (FinGroup, GroupMorphismToFin, GroupoidAction, action_groupoid,
                            is_covering, lift_sequence)
from gpdcover.cube import ChainComplex, CubicalSet, Degenerate, homology, models, validate_cubical_set
from gpdcover.derived import derived_module, evaluate_derivation
from gpdcover.gpd import (ExplicitGroupoid, GroupPresentation, PresentedGroupoid, Relation,
                          invert_word, parse_word, reduce_word, spanning_forest, totab,
                          totab_via_vertex_groups)
from gpdcover.zlin import FPAbelianGroup, IntMatrix, determinant, smith_normal_form

from oracles import all_lifts

GROUPS = {name: FinGroup.builtin(name) for name in ("C1", "C2", "C3", "C4", "K", "S3", "D4")}


# Integer matrices

def matrices(max_rows=5, max_cols=5, bound=12):
    return st.integers(0, max_rows).flatmap(lambda r: st.integers(0, max_cols).flatmap(
        lambda c: st.lists(st.lists(st.integers(-bound, bound), min_size=c, max_size=c),
                           min_size=r, max_size=r).map(lambda rows: IntMatrix.from_rows(rows, c))))


def check_snf_identity(m):
    U, D, V = smith_normal_form(m)
    assert (U @ m @ V).to_rows() == D.to_rows()
    assert abs(determinant(U)) == 1 and abs(determinant(V)) == 1
    diag = []
    for i in range(D.rows):
        for j in range(D.cols):
            if i != j:
                assert D[i, j] == 0
    diag = [D[i, i] for i in range(min(D.rows, D.cols))]
    nonzero = [d for d in diag if d]
    assert all(d > 0 for d in nonzero)
    assert diag[:len(nonzero)] == nonzero, "zeros must come last"
    for a, b in zip(nonzero, nonzero[1:]):
        assert b % a == 0, "divisibility chain"


def unimodular(n, ops):
    """Product of elementary operations: (i, j, q) adds q*row j to row i, i == j negates."""
    a = [[int(i == j) for j in range(n)] for i in range(n)]
    for i, j, q in ops:
        i, j = i % n, j % n
        if i == j:
            a[i] = [-x for x in a[i]]
        else:
            a[i] = [x + q * y for x, y in zip(a[i], a[j])]
    return IntMatrix.from_rows(a, n)


def _ops():
    return st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9), st.integers(-3, 3)),
                    max_size=8)


def snf_invariance_cases():
    return st.tuples(matrices(4, 4, 9), _ops(), _ops())


def check_snf_invariance(case):
    m, p_ops, q_ops = case
    P = unimodular(m.rows, p_ops) if m.rows else IntMatrix.identity(0)
    Q = unimodular(m.cols, q_ops) if m.cols else IntMatrix.identity(0)
    a = FPAbelianGroup(m.cols, m)
    b = FPAbelianGroup(m.cols, P @ m @ Q)
    assert a.invariants() == b.invariants()
    _, D1, _ = smith_normal_form(m)
    _, D2, _ = smith_normal_form(P @ m @ Q)
    assert D1.to_rows() == D2.to_rows()


# Groupoid actions and coverings

def _coset_action(G, gens):
    """Left action of G on cosets kH, H generated by ``gens``; points are sorted tuples."""
    H = sorted(G.generated_subgroup(gens))
    cosets = sorted({tuple(sorted(G.mul(k, h) for h in H)) for k in G.elements})
    act = {g: {c: tuple(sorted(G.mul(g, x) for x in c)) for c in cosets} for g in G.elements}
    return cosets, act


def _base_groupoid(G, m):
    """Connected groupoid on objects 0..m-1 with every vertex group G: arrows (p, g, q)."""
    objects = list(range(m))
    arrows = {(p, g, q): (p, q) for p in objects for g in G.elements for q in objects}
    return ExplicitGroupoid.from_function(
        objects, arrows, lambda u, v: (u[0], G.mul(u[1], v[1]), v[2]),
        lambda a: (a, G.identity, a), lambda u: (u[2], G.inv(u[1]), u[0]))


@st.composite
def action_cases(draw):
    G = GROUPS[draw(st.sampled_from(sorted(GROUPS)))]
    orbits = draw(st.lists(st.lists(st.sampled_from(G.elements), max_size=2), min_size=1,
                           max_size=3))
    points, act = [], {}
    for k, gens in enumerate(orbits):
        cosets, a = _coset_action(G, gens)
        points += [(k, c) for c in cosets]
        for g in G.elements:
            act.setdefault(g, {}).update({(k, c): (k, a[g][c]) for c in cosets})
        if len(points) * G.order > 200:
            break
    # the lifted groupoid has m^2 |G| |points| arrows; keep it searchable
    m = draw(st.integers(1, 3))
    while m > 1 and m * m * G.order * len(points) > 200:
        m -= 1
    # twist each object's fiber by its own relabelling
    twists = []
    for _ in range(m):
        perm = draw(st.permutations(range(len(points))))
        twists.append({x: perm[i] for i, x in enumerate(points)})
    untwist = [{v: k for k, v in t.items()} for t in twists]
    base = _base_groupoid(G, m)
    fibers = {p: sorted(twists[p].values()) for p in range(m)}
    maps = {(p, g, q): {y: twists[p][act[g][untwist[q][y]]] for y in fibers[q]}
            for (p, g, q) in base.arrows}
    return base, GroupoidAction(base, fibers, maps), draw(st.randoms(use_true_random=False))


def check_action_covering(case):
    base, action, _ = case
    assert action.validate().ok
    tilde, proj = action_groupoid(action, check=False)
    assert is_covering(proj).ok
    assert proj.validate().ok


def check_lift_uniqueness(case):
    base, action, rnd = case
    tilde, proj = action_groupoid(action, check=False)
    assert len(tilde.arrows) <= 200
    arrows = base.sorted_arrows()
    length = rnd.randint(0, 3)
    gs = []
    cur = rnd.choice(base.objects)
    for _ in range(length):
        nxt = [g for g in arrows if base.src(g) == cur]
        g = rnd.choice(nxt)
        gs.append(g)
        cur = base.tgt(g)
    ends = [o for o in tilde.objects if o[0] == cur]
    end = rnd.choice(ends)
    found = all_lifts(proj, gs, end)
    assert len(found) == 1, f"{len(found)} lifts found"
    assert found[0] == lift_sequence(proj, gs, end, check=False)


# Derivations

def _word(gens, max_len):
    return st.lists(st.tuples(st.sampled_from(gens), st.sampled_from((1, -1))),
                    max_size=max_len).map(lambda w: tuple(w))


@st.composite
def derivation_cases(draw):
    G = GROUPS[draw(st.sampled_from(sorted(GROUPS)))]
    r = draw(st.integers(1, 3))
    gens = ["x", "y", "z"][:r]
    images = {s: draw(st.sampled_from(G.elements)) for s in gens}
    phi = GroupMorphismToFin(GroupPresentation(gens), G, images)
    return phi, draw(_word(gens, 8)), draw(_word(gens, 8))


_derived_cache = {}


def _derived(phi):
    key = (id(phi.codomain), tuple(sorted(phi.images.items())), phi.domain.generators)
    if key not in _derived_cache:
        _derived_cache[key] = derived_module(phi)
    return _derived_cache[key]


def check_derivation_law(case):
    phi, u, v = case
    D, d = _derived(phi)
    lhs = evaluate_derivation(d, u + v)
    rhs = [a + b for a, b in zip(D.translate(evaluate_derivation(d, u), phi.evaluate(v)),
                                 evaluate_derivation(d, v))]
    assert lhs == rhs
    # reduction does not change the value
    assert evaluate_derivation(d, reduce_word(u + v)) == lhs


# Random connected presentations

@st.composite
def presentation_cases(draw):
    n = draw(st.integers(1, 8))
    vertices = list(range(n))
    edges = {}
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges[f"t{v}"] = (u, v) if draw(st.booleans()) else (v, u)
    for k in range(draw(st.integers(0, 12 - (n - 1)))):
        edges[f"e{k}"] = (draw(st.sampled_from(vertices)), draw(st.sampled_from(vertices)))
    g = PresentedGroupoid(vertices, edges, ())
    forest = spanning_forest(g)

    def walk(start, steps):
        word, cur = [], start
        for _ in range(steps):
            opts = [(e, 1) for e, (s, t) in edges.items() if s == cur]
            opts += [(e, -1) for e, (s, t) in edges.items() if t == cur]
            if not opts:
                break
            e, s = draw(st.sampled_from(sorted(opts)))
            word.append((e, s))
            cur = edges[e][1] if s == 1 else edges[e][0]
        return word, cur

    relations = []
    for _ in range(draw(st.integers(0, 6))):
        a = draw(st.sampled_from(vertices))
        b = draw(st.sampled_from(vertices))
        sides = []
        for _ in range(2):
            w1, end = walk(a, draw(st.integers(0, 4)))
            # finish along the tree to b
            back = tuple(forest.path_to(end))
            fwd = tuple(forest.path_to(b))
            sides.append(reduce_word(tuple(w1) + invert_word(back) + fwd))
        relations.append(Relation(sides[0], sides[1], a if not any(sides) else None))
    return PresentedGroupoid(vertices, edges, relations)


def check_totab_decomposition(g):
    assert totab(g).invariants() == totab_via_vertex_groups(g).invariants()


# Cubical complexes

@st.composite
def complex_cases(draw):
    kind = draw(st.sampled_from(("grid", "one_vertex", "union")))
    if kind == "grid":
        d = draw(st.integers(1, 3))
        shape = tuple(draw(st.integers(1, 4 - d)) for _ in range(d))
        seed = draw(st.integers(0, 2 ** 16))
        return models.grid(shape, keep=lambda c: hash((seed, c)) % 3 != 0)
    if kind == "one_vertex":
        return draw(one_vertex_complexes())
    return models.disjoint_union(draw(one_vertex_complexes()),
                                 models.grid((draw(st.integers(1, 2)), 1)))


@st.composite
def one_vertex_complexes(draw):
    """One vertex, some loops and squares whose edge faces are loops or degenerate."""
    k = draw(st.integers(1, 4))
    edges = [f"a{i}" for i in range(k)]
    faces = {}
    for e in edges:
        faces[e, 1, -1] = faces[e, 1, 1] = "v"
    squares = [f"s{i}" for i in range(draw(st.integers(0, 5)))]
    deg = Degenerate("v", (1,))
    for s in squares:
        for i in (1, 2):
            for sg in (-1, 1):
                faces[s, i, sg] = draw(st.sampled_from(edges + [deg]))
    return CubicalSet({0: ["v"], 1: edges, 2: squares}, faces)


def check_boundary_squared(k):
    assert validate_cubical_set(k).ok
    cc = ChainComplex.of(k)
    for n in range(2, k.dimension + 1):
        assert (cc.boundary(n) @ cc.boundary(n - 1)).is_zero()
    assert cc.check().ok


@st.composite
def random_tree(draw):
    n = draw(st.integers(1, 12))
    faces = {}
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        a, b = (u, v) if draw(st.booleans()) else (v, u)
        faces[f"e{v}", 1, -1], faces[f"e{v}", 1, 1] = f"v{a}", f"v{b}"
    return CubicalSet({0: [f"v{i}" for i in range(n)], 1: [f"e{v}" for v in range(1, n)]},
                      faces)


def point_cases():
    boxes = st.lists(st.integers(1, 3), min_size=0, max_size=3).map(
        lambda shape: models.grid(tuple(shape)) if shape else models.point())
    return st.one_of(boxes, random_tree())


def check_point_homology(k):
    """Solid boxes and trees are contractible: Z in degree 0, zero above."""
    assert homology(k, 0).invariants() == ((), 1)
    for n in range(1, max(k.dimension, 0) + 3):
        assert homology(k, n).invariants() == ((), 0)


SUITES = [
    ("boundary of a boundary is zero", complex_cases(), check_boundary_squared),
    ("SNF decomposition and divisibility", matrices(), check_snf_identity),
    ("SNF invariance under unimodular change of basis", snf_invariance_cases(),
     check_snf_invariance),
    ("action groupoid projection is a covering", action_cases(), check_action_covering),
    ("lifts are unique by exhaustive search", action_cases(), check_lift_uniqueness),
    ("derivation law on random words", derivation_cases(), check_derivation_law),
    ("totab equals vertex abelianisations plus free part", presentation_cases(),
     check_totab_decomposition),
    ("homology of a point", point_cases(), check_point_homology),
]


def run_suite(strategy, check, examples=200):
    """Run ``check`` on ``examples`` generated cases and return how many ran."""
    calls = []

    @settings(max_examples=examples)
    @given(strategy)
    def run(case):
        calls.append(1)
        check(case)
    run()
    return len(calls)


# The fixed corpus of epimorphisms F -> G used by the exact-sequence tests

GENERATORS = {"C2": ["g"], "C3": ["g"], "C4": ["g"], "K": ["a", "b"],
              "S3": ["(1 2)", "(1 2 3)"], "D4": ["(1 2 3 4)", "(1 3)"]}

SOURCES = {
    "F1": GroupPresentation(["x"]),
    "F2": GroupPresentation(["x", "y"]),
    "F3": GroupPresentation(["x", "y", "z"]),
    "<a|a^2>": GroupPresentation(["a"], [parse_word("a a")]),
    "<a,b|[a,b]>": GroupPresentation(["a", "b"], [parse_word("~a ~b a b")]),
}


def phi_corpus():
    """(label, phi) for every surjective pairing, images taken cyclically from fixed generators."""
    out = []
    for fname, F in SOURCES.items():
        for gname, names in GENERATORS.items():
            G = FinGroup.builtin(gname)
            images = {s: names[i % len(names)] for i, s in enumerate(F.generators)}
            try:
                phi = GroupMorphismToFin.by_names(F, G, images)
            except ValueError:
                continue
            if phi.is_surjective():
                out.append((f"{fname}->{gname}", phi))
    return out
