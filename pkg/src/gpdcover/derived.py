"""
Derivations, derived modules and the exact sequence of an epimorphism.

Modules are right modules over the integral group ring of a finite group
``G``.  A module presented on generators ``m_1..m_k`` is handled through its
restriction to Z: the free abelian group on the translates ``m_i.g`` (stored
at index ``i * |G| + g``) modulo every translate of every relation.

A ``phi``-derivation satisfies ``d(uv) = d(u).phi(v) + d(v)``.
"""

from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType

from .cover import GroupMorphismToFin, pullback_groupoid, universal_cover_of_group
from .gpd import (abelianise_presentation, exponent_vector, invert_word, reduce_word,
                  sort_key, spanning_forest, totab, vertex_group)
from .verdict import Verdict
from .zlin import AbelianMap, FPAbelianGroup, IntMatrix, check_exactness

__all__ = [
    'GModulePresentation', 'Derivation', 'ModuleMap', 'evaluate_derivation',
    'augmentation_ideal', 'derived_module', 'kernel_presentation', 'crowell_sequence',
    'verify_theorem41', 'factor_derivation', 'KernelPresentation', 'CrowellSequence',
    'Theorem41Report',
]


@dataclass(frozen=True, eq=False)
class GModulePresentation:
    group: object
    generators: tuple
    relations: tuple = ()   # each relation: tuple of (coefficient, group element, generator)

    def __post_init__(self):
        object.__setattr__(self, 'generators', tuple(self.generators))
        gens = set(self.generators)
        rels = []
        for rel in self.relations:
            rel = tuple((int(c), g, m) for c, g, m in rel)
            for _, g, m in rel:
                if m not in gens:
                    raise ValueError(f"relation mentions unknown generator {m!r}")
                if g not in self.group.elements:
                    raise ValueError(f"relation mentions unknown group element {g!r}")
            rels.append(rel)
        object.__setattr__(self, 'relations', tuple(rels))

    @cached_property
    def index(self):
        return {m: i for i, m in enumerate(self.generators)}

    @property
    def dimension(self):
        return len(self.generators) * self.group.order

    def zero(self):
        return [0] * self.dimension

    def basis(self, m, g=None):
        g = self.group.identity if g is None else g
        v = self.zero()
        v[self.index[m] * self.group.order + g] = 1
        return v

    def vector(self, terms):
        v = self.zero()
        n = self.group.order
        for c, g, m in terms:
            v[self.index[m] * n + g] += c
        return v

    def terms(self, v):
        n = self.group.order
        return tuple((c, k % n, self.generators[k // n]) for k, c in enumerate(v) if c)

    def translate(self, v, h):
        """Right action of the group element ``h``."""
        n = self.group.order
        G = self.group
        out = [0] * len(v)
        for k, c in enumerate(v):
            if c:
                i, g = divmod(k, n)
                out[i * n + G.mul(g, h)] += c
        return out

    @cached_property
    def restriction(self):
        rows = []
        for rel in self.relations:
            v = self.vector(rel)
            for h in self.group.elements:
                rows.append(self.translate(v, h))
        labels = [(m, self.group.names[g]) for m in self.generators for g in self.group.elements]
        return FPAbelianGroup(self.dimension, IntMatrix.from_rows(rows, self.dimension), labels)

    def is_zero(self, v):
        return self.restriction.is_zero_element(v)


def _add(u, v):
    return [a + b for a, b in zip(u, v)]


@dataclass(frozen=True, eq=False)
class Derivation:
    phi: GroupMorphismToFin
    target: GModulePresentation
    values: MappingProxyType

    def __post_init__(self):
        object.__setattr__(self, 'values', MappingProxyType(
            {s: list(v) for s, v in dict(self.values).items()}))
        if self.phi.codomain is not self.target.group:
            raise ValueError("derivation target is a module over a different group")
        for s in self.phi.domain.generators:
            if s not in self.values:
                raise ValueError(f"no value given for generator {s!r}")
        for k, r in enumerate(self.phi.domain.relators):
            if not self.target.is_zero(evaluate_derivation(self, r)):
                raise ValueError(f"relator {k} does not evaluate to zero")

    def __call__(self, word):
        return evaluate_derivation(self, word)


def evaluate_derivation(d, word):
    """Fold ``d(us) = d(u).phi(s) + d(s)`` along ``word``, with ``d(s^-1) = -d(s).phi(s)^-1``."""
    M, phi, G = d.target, d.phi, d.phi.codomain
    val = M.zero()
    for s, e in word:
        if s not in d.values:
            raise KeyError(f"unknown generator {s!r}")
        x = phi.images[s]
        if e == 1:
            val = _add(M.translate(val, x), d.values[s])
        else:
            xi = G.inv(x)
            val = [a - b for a, b in zip(M.translate(val, xi), M.translate(d.values[s], xi))]
    return val


@dataclass(frozen=True, eq=False)
class ModuleMap:
    """G-map defined on generators; its restriction is checked to be well defined."""

    source: GModulePresentation
    target: GModulePresentation
    images: MappingProxyType

    def __post_init__(self):
        object.__setattr__(self, 'images', MappingProxyType(
            {m: list(v) for m, v in dict(self.images).items()}))
        self.restriction    # raises if not well defined

    @cached_property
    def restriction(self):
        rows = []
        for m in self.source.generators:
            for g in self.source.group.elements:
                rows.append(self.target.translate(self.images[m], g))
        return AbelianMap(self.source.restriction, self.target.restriction,
                          IntMatrix.from_rows(rows, self.target.dimension))

    def __call__(self, v):
        return self.restriction(v)


def augmentation_ideal(G):
    """
    The augmentation ideal as a module on generators ``g - 1`` (named by the
    element ``g != 1``) with relations ``(hg - 1) = (h - 1).g + (g - 1)``.
    """
    e = G.identity
    gens = [g for g in G.elements if g != e]
    rels = []
    for g in gens:
        for h in gens:
            hg = G.mul(h, g)
            terms = [(-1, g, h), (-1, e, g)]
            if hg != e:
                terms.insert(0, (1, e, hg))
            rels.append(tuple(terms))
    return GModulePresentation(G, gens, rels)


def derived_module(phi):
    """
    The derived module of ``phi`` and its universal derivation: generators
    ``ds`` for the generators ``s`` of the domain, relations ``d(r)`` for the
    relators ``r``.
    """
    gens = phi.domain.generators
    free = GModulePresentation(phi.codomain, gens)
    values = {s: free.basis(s) for s in gens}
    free_d = Derivation(GroupMorphismToFin(
        type(phi.domain)(gens), phi.codomain, phi.images), free, values)
    rels = [free.terms(evaluate_derivation(free_d, r)) for r in phi.domain.relators]
    D = GModulePresentation(phi.codomain, gens, [r for r in rels if r])
    return D, Derivation(phi, D, {s: D.basis(s) for s in gens})


def factor_derivation(d, universal):
    """The unique G-map ``D -> M`` through which ``d`` factors (``universal`` is ``(D, partial)``)."""
    D, partial = universal
    return ModuleMap(D, d.target, {s: d.values[s] for s in D.generators})


@dataclass(frozen=True, eq=False)
class KernelPresentation:
    """The kernel ``N`` of ``phi`` as the vertex group at 1 of the pullback groupoid."""

    phi: GroupMorphismToFin
    pullback: object
    forest: object
    presentation: object
    abelianisation: FPAbelianGroup
    words: MappingProxyType     # generator (a non-tree Cayley edge) -> word in F
    loops: MappingProxyType     # generator -> edge-loop at 1 in the pullback

    def rewrite(self, word):
        """N^ab coordinates of a word of ``F`` lying in ``N``."""
        path, start = self.pullback.lift_word(reduce_word(word), self.phi.codomain.identity)
        if start != self.phi.codomain.identity:
            raise ValueError("word is not in the kernel")
        index = {e: i for i, e in enumerate(self.presentation.generators)}
        v = [0] * len(index)
        for e, s in path:
            if e in index:
                v[index[e]] += s
        return v

    @cached_property
    def action(self):
        """Right conjugation action ``n -> u^-1 n u`` (``phi(u) = k``) on N^ab, as matrices."""
        out = {}
        for k in self.phi.codomain.elements:
            u = self.phi.element_word(k)
            rows = [self.rewrite(invert_word(u) + self.words[e] + u)
                    for e in self.presentation.generators]
            out[k] = AbelianMap(self.abelianisation, self.abelianisation,
                                IntMatrix.from_rows(rows, len(rows)))
        return out


def kernel_presentation(phi):
    if not phi.is_surjective():
        raise ValueError("phi is not surjective")
    G = phi.codomain
    pb = pullback_groupoid(phi)
    fhat = pb.groupoid
    forest = spanning_forest(fhat, roots=[G.identity])
    pres = vertex_group(fhat, G.identity, forest)
    words, loops = {}, {}
    for e in pres.generators:
        s, t = fhat.edges[e]
        loop = reduce_word(forest.path_to(s) + ((e, 1),) + invert_word(forest.path_to(t)))
        loops[e] = loop
        words[e] = pb.project(loop)
        assert phi.evaluate(words[e]) == G.identity
    return KernelPresentation(phi, pb, forest, pres, abelianise_presentation(pres),
                              MappingProxyType(words), MappingProxyType(loops))


@dataclass(frozen=True, eq=False)
class CrowellSequence:
    kernel: KernelPresentation
    module: GModulePresentation
    derivation: Derivation
    ideal: GModulePresentation
    left: AbelianMap        # N^ab -> D
    right: AbelianMap       # D -> IG
    exactness: object
    equivariant: Verdict

    @property
    def ok(self):
        return self.exactness.short_exact and self.equivariant.ok

    def ranks(self):
        return tuple(g.invariants() for g in
                     (self.kernel.abelianisation, self.module.restriction, self.ideal.restriction))


def crowell_sequence(phi):
    """Maps ``N^ab -> D_phi -> IG`` and their exactness at the level of abelian groups."""
    K = kernel_presentation(phi)
    G = phi.codomain
    D, partial = derived_module(phi)
    IG = augmentation_ideal(G)
    left_rows = [evaluate_derivation(partial, K.words[e]) for e in K.presentation.generators]
    left = AbelianMap(K.abelianisation, D.restriction,
                      IntMatrix.from_rows(left_rows, D.dimension))
    images = {}
    for s in D.generators:
        x = phi.images[s]
        images[s] = IG.zero() if x == G.identity else IG.basis(x)
    right = ModuleMap(D, IG, images).restriction
    witnesses = []
    for k, act in K.action.items():
        for i, e in enumerate(K.presentation.generators):
            lhs = left(act.matrix.row(i))
            rhs = D.translate(left.matrix.row(i), k)
            if not D.is_zero([a - b for a, b in zip(lhs, rhs)]):
                witnesses.append(f"left map is not equivariant at {e!r}, {G.names[k]}")
    return CrowellSequence(K, D, partial, IG, left, right, check_exactness(left, right),
                           Verdict.from_witnesses(witnesses))


@dataclass(frozen=True, eq=False)
class Theorem41Report:
    top: CrowellSequence
    fhat_totab: FPAbelianGroup
    gtilde_totab: FPAbelianGroup
    bottom_left: AbelianMap
    bottom_right: AbelianMap
    bottom_exactness: object
    verticals: MappingProxyType     # name -> AbelianMap
    vertical_isos: MappingProxyType
    squares: MappingProxyType
    equivariance: Verdict

    @property
    def squares_commute(self):
        return all(v.ok for v in self.squares.values())

    @property
    def ok(self):
        return (self.top.ok and self.bottom_exactness.short_exact
                and all(v.ok for v in self.vertical_isos.values())
                and self.squares_commute and self.equivariance.ok)

    def invariants(self):
        def inv(g):
            return g.to_json()
        return {
            "top": {"kernel_ab": inv(self.top.kernel.abelianisation),
                    "derived_module": inv(self.top.module.restriction),
                    "augmentation_ideal": inv(self.top.ideal.restriction)},
            "bottom": {"kernel_ab": inv(self.top.kernel.abelianisation),
                       "pullback_totab": inv(self.fhat_totab),
                       "universal_cover_totab": inv(self.gtilde_totab)},
        }

    def to_json(self):
        return {
            "ok": self.ok,
            "rows": {"top": ["N^ab", "D_phi", "IG"],
                     "bottom": ["N^ab", "Fhat^totab", "Gtilde^totab"]},
            "exactness": {"top": self.top.exactness.to_json(),
                          "bottom": self.bottom_exactness.to_json(),
                          "top_equivariant": self.top.equivariant.to_json()},
            "vertical_isos": {k: v.to_json() for k, v in self.vertical_isos.items()},
            "squares_commute": self.squares_commute,
            "squares": {k: v.to_json() for k, v in self.squares.items()},
            "equivariance": self.equivariance.to_json(),
            "invariants": self.invariants(),
        }


def verify_theorem41(phi):
    """
    Compare the exact sequence ``N^ab -> D_phi -> IG`` with
    ``N^ab -> Fhat^totab -> Gtilde^totab`` built from the pullback groupoid and
    the universal cover, through ``eta: ds.g -> [(s, g)]``.
    """
    top = crowell_sequence(phi)
    K, D, IG = top.kernel, top.module, top.ideal
    G = phi.codomain
    fhat = K.pullback.groupoid
    F_tab = totab(fhat)
    f_index = {e: i for i, e in enumerate(F_tab.labels)}

    gtilde, _, _ = universal_cover_of_group(G)
    gpres = gtilde.to_presented()
    G_tab = totab(gpres)
    g_index = {e: i for i, e in enumerate(G_tab.labels)}

    def gtilde_vec(arrow):
        v = [0] * G_tab.generator_count
        if arrow[0] != G.identity:
            v[g_index[arrow]] = 1
        return v

    b_left = AbelianMap(K.abelianisation, F_tab, IntMatrix.from_rows(
        [exponent_vector(K.loops[e], f_index) for e in K.presentation.generators],
        F_tab.generator_count))
    b_right = AbelianMap(F_tab, G_tab, IntMatrix.from_rows(
        [gtilde_vec((phi.images[s], g)) for s, g in F_tab.labels], G_tab.generator_count))
    bottom = check_exactness(b_left, b_right)

    n = G.order
    eta_rows = [[0] * F_tab.generator_count for _ in range(D.dimension)]
    for i, s in enumerate(D.generators):
        for g in G.elements:
            eta_rows[i * n + g][f_index[s, g]] = 1
    eta = AbelianMap(D.restriction, F_tab, IntMatrix.from_rows(eta_rows, F_tab.generator_count))
    ident = AbelianMap(K.abelianisation, K.abelianisation,
                       IntMatrix.identity(K.abelianisation.generator_count))
    ig_rows = []
    for h in IG.generators:
        for g in G.elements:
            ig_rows.append(gtilde_vec((h, g)))
    right_v = AbelianMap(IG.restriction, G_tab, IntMatrix.from_rows(ig_rows, G_tab.generator_count))

    verticals = {"kernel": ident, "eta": eta, "ideal": right_v}
    isos = {}
    for name, f in verticals.items():
        same = f.source.invariants() == f.target.invariants()
        iso = f.is_isomorphism()
        w = iso.witnesses + (() if same else ("invariants differ",))
        isos[name] = Verdict.from_witnesses(w)
    squares = {
        "left": top.left.then(eta).agrees_with(ident.then(b_left)),
        "right": top.right.then(right_v).agrees_with(eta.then(b_right)),
    }

    # eta and the right vertical map commute with the G-actions
    # (translation on modules, (s, g)^k = (s, gk) on the pullback)
    witnesses = []
    for k in G.elements:
        for i, s in enumerate(D.generators):
            for g in G.elements:
                lhs = eta(D.translate(D.basis(s, g), k))
                rhs = [0] * F_tab.generator_count
                rhs[f_index[s, G.mul(g, k)]] = 1
                if not F_tab.is_zero_element([a - b for a, b in zip(lhs, rhs)]):
                    witnesses.append(f"eta is not equivariant at ({s!r}, {G.names[g]}), {G.names[k]}")
    return Theorem41Report(top, F_tab, G_tab, b_left, b_right, bottom,
                           MappingProxyType(verticals), MappingProxyType(isos),
                           MappingProxyType(squares), Verdict.from_witnesses(witnesses))
