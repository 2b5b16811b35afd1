"""
Covering morphisms of groupoids.

A morphism ``p`` is a covering when, for every object ``x`` upstairs, ``p``
maps the costar of ``x`` (arrows ending at ``x``) bijectively onto the costar
of ``p(x)``; it is a fibration when these maps are only surjective.

Groups act on the left in operator notation: an action of a groupoid ``G``
assigns to ``g: p -> q`` a bijection ``X(q) -> X(p)``, ``x -> g.x``, with
``(gh).x == g.(h.x)``.  The action groupoid then has arrows ``(g, x): g.x -> x``.
"""

from dataclasses import dataclass
from itertools import permutations as _perms
from types import MappingProxyType

from .gpd import (ExplicitGroupoid, GroupPresentation, PresentedGroupoid, Relation,
                  components, reduce_word, sort_key, spanning_forest)
from .verdict import Verdict

__all__ = [
    'FinGroup', 'GroupMorphismToFin', 'GroupoidMorphism', 'GroupoidAction',
    'is_covering', 'is_fibration', 'lift_sequence', 'action_groupoid',
    'cover_from_subgroup', 'universal_cover_of_group', 'pullback_groupoid', 'Pullback',
]


@dataclass(frozen=True, eq=False)
class FinGroup:
    """Finite group by multiplication table; elements are indices into ``names``."""

    names: tuple
    table: tuple

    def __post_init__(self):
        n = len(self.names)
        object.__setattr__(self, 'names', tuple(str(x) for x in self.names))
        object.__setattr__(self, 'table', tuple(tuple(r) for r in self.table))
        if len(set(self.names)) != n:
            raise ValueError("duplicate element name")
        if len(self.table) != n or any(len(r) != n for r in self.table):
            raise ValueError("multiplication table must be square of the group order")
        for r in self.table:
            for x in r:
                if not (isinstance(x, int) and 0 <= x < n):
                    raise ValueError(f"table entry {x!r} is not an element")
        ids = [e for e in range(n) if all(self.table[e][x] == x == self.table[x][e]
                                          for x in range(n))]
        if len(ids) != 1:
            raise ValueError("table has no (unique) identity element")
        object.__setattr__(self, 'identity', ids[0])
        inv = []
        for x in range(n):
            ys = [y for y in range(n) if self.table[x][y] == ids[0]]
            if len(ys) != 1:
                raise ValueError(f"element {self.names[x]} has no unique inverse")
            inv.append(ys[0])
        object.__setattr__(self, 'inverse', tuple(inv))

    @property
    def order(self):
        return len(self.names)

    @property
    def elements(self):
        return range(len(self.names))

    def mul(self, a, b):
        return self.table[a][b]

    def prod(self, xs):
        out = self.identity
        for x in xs:
            out = self.table[out][x]
        return out

    def inv(self, a):
        return self.inverse[a]

    def index(self, name):
        try:
            return self.names.index(str(name))
        except ValueError:
            raise KeyError(f"unknown group element {name!r}") from None

    def validate(self):
        n = self.order
        t = self.table
        for a in range(n):
            for b in range(n):
                ab = t[a][b]
                for c in range(n):
                    if t[ab][c] != t[a][t[b][c]]:
                        return Verdict(False, (f"associativity fails on "
                                               f"({self.names[a]}, {self.names[b]}, {self.names[c]})",))
        return Verdict(True)

    def generated_subgroup(self, gens):
        seen = {self.identity}
        frontier = [self.identity]
        gens = list(gens)
        while frontier:
            nxt = []
            for x in frontier:
                for s in gens:
                    y = self.table[x][s]
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return seen

    def as_groupoid(self, obj='*'):
        """The group as a one-object groupoid, arrows being element indices."""
        return ExplicitGroupoid(
            [obj], {g: (obj, obj) for g in self.elements},
            {(g, h): self.table[g][h] for g in self.elements for h in self.elements},
            {obj: self.identity}, {g: self.inverse[g] for g in self.elements})

    def to_json(self):
        return {"elements": list(self.names),
                "table": [[self.names[x] for x in r] for r in self.table]}

    @classmethod
    def from_json(cls, data):
        if "elements" not in data or "table" not in data:
            raise ValueError("finite group needs 'elements' and 'table'")
        names = [str(x) for x in data["elements"]]
        idx = {x: i for i, x in enumerate(names)}
        try:
            table = [[idx[str(x)] for x in r] for r in data["table"]]
        except KeyError as exc:
            raise ValueError(f"table mentions unknown element {exc.args[0]!r}") from None
        return cls(names, table)

    @classmethod
    def from_permutations(cls, gens, names=None):
        """Closure of the given permutations (tuples on 0..k-1) under composition."""
        gens = [tuple(p) for p in gens]
        k = len(gens[0]) if gens else 1
        e = tuple(range(k))
        elems = [e]
        seen = {e: 0}
        i = 0
        while i < len(elems):
            x = elems[i]
            for s in gens:
                y = _compose_perm(x, s)
                if y not in seen:
                    seen[y] = len(elems)
                    elems.append(y)
            i += 1
        table = [[seen[_compose_perm(x, y)] for y in elems] for x in elems]
        if names is None:
            names = [_cycle_name(p) for p in elems]
        return cls(names, table)

    @classmethod
    def cyclic(cls, n):
        names = ["1"] + ["g" if k == 1 else f"g^{k}" for k in range(1, n)]
        return cls(names, [[(a + b) % n for b in range(n)] for a in range(n)])

    @classmethod
    def trivial(cls):
        return cls(["1"], [[0]])

    @classmethod
    def klein(cls):
        # 1, a, b, ab as bit vectors 00, 01, 10, 11
        return cls(["1", "a", "b", "ab"], [[a ^ b for b in range(4)] for a in range(4)])

    @classmethod
    def symmetric(cls, k):
        return cls.from_permutations(
            [tuple(p) for p in _perms(range(k))] if k <= 2 else
            [(1, 0) + tuple(range(2, k)), tuple(range(1, k)) + (0,)])

    @classmethod
    def dihedral(cls, n):
        """Symmetries of a regular ``n``-gon, order ``2n``."""
        rot = tuple((i + 1) % n for i in range(n))
        ref = tuple((-i) % n for i in range(n))
        return cls.from_permutations([rot, ref])

    @classmethod
    def builtin(cls, name):
        name = name.strip()
        if name in ("K", "K4", "V4", "klein"):
            return cls.klein()
        if name in ("1", "trivial", "C1"):
            return cls.trivial()
        if name[0] == "C" and name[1:].isdigit():
            return cls.cyclic(int(name[1:]))
        if name[0] == "S" and name[1:].isdigit():
            return cls.symmetric(int(name[1:]))
        if name[0] == "D" and name[1:].isdigit():
            return cls.dihedral(int(name[1:]))
        raise KeyError(f"no builtin group named {name!r}")


def _compose_perm(p, q):
    # left-to-right: first p, then q
    return tuple(q[i] for i in p)


def _cycle_name(p):
    seen = set()
    cycles = []
    for i in range(len(p)):
        if i in seen or p[i] == i:
            continue
        c = [i]
        seen.add(i)
        j = p[i]
        while j != i:
            c.append(j)
            seen.add(j)
            j = p[j]
        cycles.append("(" + " ".join(str(x + 1) for x in c) + ")")
    return "".join(cycles) or "1"


@dataclass(frozen=True, eq=False)
class GroupMorphismToFin:
    """A homomorphism from a presented group to a finite group, given on generators."""

    domain: GroupPresentation
    codomain: FinGroup
    images: MappingProxyType

    def __post_init__(self):
        images = dict(self.images)
        missing = [s for s in self.domain.generators if s not in images]
        if missing:
            raise ValueError(f"no image given for generator(s) {missing}")
        extra = [s for s in images if s not in set(self.domain.generators)]
        if extra:
            raise ValueError(f"images given for unknown generator(s) {extra}")
        object.__setattr__(self, 'images', MappingProxyType(images))
        for k, r in enumerate(self.domain.relators):
            if self.evaluate(r) != self.codomain.identity:
                raise ValueError(
                    f"relator {k} maps to {self.codomain.names[self.evaluate(r)]}, not 1")

    @classmethod
    def by_names(cls, domain, codomain, images):
        return cls(domain, codomain, {s: codomain.index(v) for s, v in images.items()})

    def letter(self, letter):
        s, e = letter
        if s not in self.images:
            raise KeyError(f"unknown generator {s!r}")
        x = self.images[s]
        return x if e == 1 else self.codomain.inv(x)

    def evaluate(self, word):
        return self.codomain.prod(self.letter(l) for l in word)

    def image_subgroup(self):
        return self.codomain.generated_subgroup(self.images.values())

    def is_surjective(self):
        return len(self.image_subgroup()) == self.codomain.order

    def element_word(self, g):
        """A word in the generators whose image is ``g`` (breadth-first, so shortest)."""
        G = self.codomain
        words = {G.identity: ()}
        frontier = [G.identity]
        letters = [(s, e) for s in self.domain.generators for e in (1, -1)]
        while frontier and g not in words:
            nxt = []
            for x in frontier:
                for l in letters:
                    y = G.mul(x, self.letter(l))
                    if y not in words:
                        words[y] = words[x] + (l,)
                        nxt.append(y)
            frontier = nxt
        if g not in words:
            raise ValueError(f"{G.names[g]} is not in the image")
        return words[g]


@dataclass(frozen=True, eq=False)
class GroupoidMorphism:
    source: ExplicitGroupoid
    target: ExplicitGroupoid
    object_map: MappingProxyType
    arrow_map: MappingProxyType

    def __post_init__(self):
        object.__setattr__(self, 'object_map', MappingProxyType(dict(self.object_map)))
        object.__setattr__(self, 'arrow_map', MappingProxyType(dict(self.arrow_map)))

    def validate(self):
        S, T, fo, fa = self.source, self.target, self.object_map, self.arrow_map
        w = []
        for a in S.objects:
            if fo.get(a) not in T.objects:
                w.append(f"object {a!r} is not mapped to an object")
        for g, (s, t) in S.arrows.items():
            h = fa.get(g)
            if h not in T.arrows:
                w.append(f"arrow {g!r} is not mapped to an arrow")
            elif T.arrows[h] != (fo.get(s), fo.get(t)):
                w.append(f"arrow {g!r} is not mapped compatibly with its endpoints")
        if w:
            return Verdict.from_witnesses(w)
        for a in S.objects:
            if fa[S.identities[a]] != T.identities[fo[a]]:
                w.append(f"identity at {a!r} is not preserved")
        for (g, h), gh in S.compose.items():
            if fa[gh] != T.compose[fa[g], fa[h]]:
                w.append(f"composite of ({g!r}, {h!r}) is not preserved")
                break
        for g, gi in S.inverses.items():
            if fa[gi] != T.inverses[fa[g]]:
                w.append(f"inverse of {g!r} is not preserved")
                break
        return Verdict.from_witnesses(w)

    def then(self, other):
        return GroupoidMorphism(
            self.source, other.target,
            {a: other.object_map[b] for a, b in self.object_map.items()},
            {g: other.arrow_map[h] for g, h in self.arrow_map.items()})

    @classmethod
    def identity(cls, g):
        return cls(g, g, {a: a for a in g.objects}, {x: x for x in g.arrows})


def _costars(g):
    out = {a: [] for a in g.objects}
    for x, (_, t) in g.arrows.items():
        out[t].append(x)
    return out


def _costar_restrictions(p, need_injective):
    up, down = _costars(p.source), _costars(p.target)
    for a in sorted(p.source.objects, key=sort_key):
        pa = p.object_map[a]
        image = {}
        for x in up[a]:
            y = p.arrow_map[x]
            if y in image and need_injective:
                return Verdict(False, (f"object {a!r}: arrows {image[y]!r} and {x!r} "
                                       f"both map to {y!r}",))
            image.setdefault(y, x)
        for y in sorted(down[pa], key=sort_key):
            if y not in image:
                return Verdict(False, (f"object {a!r}: arrow {y!r} of the costar of "
                                       f"{pa!r} has no preimage",))
    return Verdict(True)


def is_covering(p):
    """Every costar restriction is a bijection."""
    return _costar_restrictions(p, True)


def is_fibration(p):
    """Every costar restriction is a surjection."""
    return _costar_restrictions(p, False)


def lift_sequence(p, gs, end, check=True):
    """
    Unique lift of the composable sequence ``gs`` (in the base) whose last
    arrow ends at ``end`` (upstairs), built right to left through costars.
    """
    gs = list(gs)
    if check:
        verdict = is_covering(p)
        if not verdict:
            raise ValueError("not a covering morphism: " + "; ".join(verdict.witnesses))
    T = p.target
    for a, b in zip(gs, gs[1:]):
        if T.tgt(a) != T.src(b):
            raise ValueError(f"arrows {a!r} and {b!r} are not composable")
    if end not in p.object_map:
        raise ValueError(f"unknown object {end!r}")
    if gs and p.object_map[end] != T.tgt(gs[-1]):
        raise ValueError(f"{end!r} does not lie over the target of the last arrow")
    lookup = {}
    for x, (_, t) in p.source.arrows.items():
        lookup[t, p.arrow_map[x]] = x
    out = []
    cur = end
    for g in reversed(gs):
        x = lookup[cur, g]
        out.append(x)
        cur = p.source.src(x)
    return list(reversed(out))


@dataclass(frozen=True, eq=False)
class GroupoidAction:
    base: ExplicitGroupoid
    fibers: MappingProxyType    # object -> tuple of points
    maps: MappingProxyType      # arrow g: p -> q  ->  {x in X(q): g.x in X(p)}

    def __post_init__(self):
        object.__setattr__(self, 'fibers', MappingProxyType(
            {p: tuple(xs) for p, xs in dict(self.fibers).items()}))
        object.__setattr__(self, 'maps', MappingProxyType(
            {g: MappingProxyType(dict(m)) for g, m in dict(self.maps).items()}))

    def act(self, g, x):
        return self.maps[g][x]

    def validate(self):
        G = self.base
        w = []
        for p in G.objects:
            if p not in self.fibers:
                w.append(f"object {p!r} has no fiber")
        if w:
            return Verdict.from_witnesses(w)
        for g, (p, q) in G.arrows.items():
            m = self.maps.get(g)
            if m is None:
                w.append(f"arrow {g!r} has no action")
                continue
            if set(m) != set(self.fibers[q]):
                w.append(f"arrow {g!r} must act on the fiber over its target {q!r}")
            elif sorted(m.values(), key=sort_key) != sorted(self.fibers[p], key=sort_key):
                w.append(f"arrow {g!r} does not act bijectively onto the fiber over {p!r}")
        if w:
            return Verdict.from_witnesses(w)
        for p in G.objects:
            e = G.identities[p]
            if any(self.maps[e][x] != x for x in self.fibers[p]):
                w.append(f"identity at {p!r} does not act trivially")
        for (g, h), gh in G.compose.items():
            for x in self.fibers[G.tgt(h)]:
                if self.maps[gh][x] != self.maps[g][self.maps[h][x]]:
                    w.append(f"({g!r}{h!r}).{x!r} != {g!r}.({h!r}.{x!r})")
                    break
        return Verdict.from_witnesses(w)


def action_groupoid(a, check=True):
    """
    The action groupoid of ``a`` and its projection to the base, which is
    verified to be a covering morphism.

    Objects are pairs ``(p, x)`` with ``x`` in the fiber over ``p``; arrows are
    pairs ``(g, x)`` with ``x`` over the target of ``g``, going ``g.x -> x``.
    """
    if check:
        v = a.validate()
        if not v:
            raise ValueError("invalid action: " + "; ".join(v.witnesses))
    G = a.base
    objects = [(p, x) for p in G.objects for x in a.fibers[p]]
    arrows = {}
    for g in G.sorted_arrows():
        p, q = G.arrows[g]
        for x in a.fibers[q]:
            arrows[g, x] = ((p, a.maps[g][x]), (q, x))

    def mul(u, v):
        return (G.mul(u[0], v[0]), v[1])

    def inverse(u):
        g, x = u
        return (G.inv(g), a.maps[g][x])

    tilde = ExplicitGroupoid.from_function(objects, arrows, mul,
                                           lambda o: (G.identities[o[0]], o[1]), inverse)
    proj = GroupoidMorphism(tilde, G, {o: o[0] for o in objects}, {u: u[0] for u in arrows})
    if check:
        v = is_covering(proj)
        if not v:
            raise RuntimeError("action groupoid projection is not a covering: "
                               + "; ".join(v.witnesses))
    return tilde, proj


def cover_from_subgroup(g, a0, subgroup):
    """
    Covering groupoid of a transitive ``g`` determined by a subgroup of the
    vertex group at ``a0``: ``g`` acts on the cosets ``hA`` of arrows
    ``h: p -> a0`` by ``h'.(hA) = h'hA``.  A trivial subgroup gives the
    universal cover at ``a0``.
    """
    if len(components(g)) != 1:
        raise ValueError("the groupoid is not transitive")
    A = set(subgroup)
    loops = {x for x in g.arrows if g.arrows[x] == (a0, a0)}
    if not A <= loops:
        raise ValueError("subgroup contains arrows that are not loops at the base object")
    if g.identities[a0] not in A:
        raise ValueError("subgroup does not contain the identity")
    for x in A:
        if g.inverses[x] not in A:
            raise ValueError(f"subgroup is not closed under inverses at {x!r}")
        for y in A:
            if g.compose[x, y] not in A:
                raise ValueError(f"subgroup is not closed under composition at ({x!r}, {y!r})")
    order = sorted(A, key=sort_key)

    def coset(h):
        return tuple(sorted((g.compose[h, x] for x in order), key=sort_key))
    to_a0 = {p: [] for p in g.objects}
    for h in g.sorted_arrows():
        if g.tgt(h) == a0:
            to_a0[g.src(h)].append(h)
    fibers = {p: sorted({coset(h) for h in hs}, key=sort_key) for p, hs in to_a0.items()}
    maps = {}
    for h in g.sorted_arrows():
        q = g.tgt(h)
        maps[h] = {c: coset(g.compose[h, c[0]]) for c in fibers[q]}
    return action_groupoid(GroupoidAction(g, fibers, maps))


def universal_cover_of_group(G):
    """
    Universal covering groupoid of a finite group.

    Objects are the elements, arrows are pairs ``(g, h): gh -> h`` composing
    as ``(g, hk)(h, k) = (gh, k)``.  Returns the groupoid, the projection
    ``(g, h) -> g`` onto the one-object groupoid of ``G``, and
    ``right_action(k)``, the covering transformation ``(g, h) -> (g, hk)``.
    """
    objects = list(G.elements)
    arrows = {(g, h): (G.mul(g, h), h) for g in G.elements for h in G.elements}
    tilde = ExplicitGroupoid.from_function(
        objects, arrows, lambda u, v: (G.mul(u[0], v[0]), v[1]),
        lambda o: (G.identity, o), lambda u: (G.inv(u[0]), G.mul(u[0], u[1])))
    base = G.as_groupoid()
    proj = GroupoidMorphism(tilde, base, {o: '*' for o in objects}, {u: u[0] for u in arrows})

    def right_action(k):
        return GroupoidMorphism(tilde, tilde, {h: G.mul(h, k) for h in objects},
                                {(g, h): (g, G.mul(h, k)) for (g, h) in arrows})
    return tilde, proj, right_action


@dataclass(frozen=True, eq=False)
class Pullback:
    """
    Pullback of a homomorphism ``phi: F -> G`` along the universal cover of ``G``.

    The presented groupoid has the elements of ``G`` as vertices, an edge
    ``(s, g): phi(s)g -> g`` for every generator ``s`` of ``F`` and every
    ``g``, and one relation per (relator, vertex): the lift of the relator
    ending at that vertex.
    """

    phi: GroupMorphismToFin
    groupoid: PresentedGroupoid
    connected: bool
    surjective: bool

    def lift_word(self, word, end):
        """Edge-word of the unique lift of ``word`` ending at vertex ``end``."""
        G = self.phi.codomain
        out = []
        cur = end
        for s, e in reversed(word):
            x = self.phi.images[s]
            if e == 1:
                out.append(((s, cur), 1))
                cur = G.mul(x, cur)
            else:
                y = G.mul(G.inv(x), cur)
                out.append(((s, y), -1))
                cur = y
        return tuple(reversed(out)), cur

    def project(self, path):
        """The word in ``F`` underlying an edge-word of the pullback."""
        return reduce_word(tuple((e[0], s) for e, s in path))


def pullback_groupoid(phi):
    G = phi.codomain
    gens = phi.domain.generators
    vertices = list(G.elements)
    edges = {(s, g): (G.mul(phi.images[s], g), g) for s in gens for g in vertices}
    pb = Pullback(phi, PresentedGroupoid(vertices, edges, ()), False, False)
    relations = []
    for r in phi.domain.relators:
        for g in vertices:
            lifted, start = pb.lift_word(r, g)
            assert start == g
            relations.append(Relation(lifted, (), g))
    fhat = PresentedGroupoid(vertices, edges, relations)
    connected = len(spanning_forest(fhat).roots) == 1
    return Pullback(phi, fhat, connected, phi.is_surjective())
