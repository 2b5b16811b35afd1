"""
Groupoids given explicitly (finite composition tables) or by presentations
(free groupoid on a graph modulo relations between parallel edge-words).

Composition is written left to right: for ``g: p -> q`` and ``h: q -> r`` the
composite ``gh`` goes ``p -> r``.  An edge-word is a tuple of letters
``(edge, +1)`` or ``(edge, -1)``, the latter standing for the formal inverse;
in JSON the inverse of ``x`` is spelled ``"~x"``.
"""

from collections import deque
from dataclasses import dataclass
from types import MappingProxyType

from .verdict import Verdict
from .zlin import FPAbelianGroup, IntMatrix, direct_sum

__all__ = [
    'sort_key', 'reduce_word', 'invert_word', 'parse_word', 'format_word',
    'exponent_vector', 'ExplicitGroupoid', 'PresentedGroupoid', 'Relation',
    'GroupPresentation', 'SpanningForest', 'validate', 'components', 'costar',
    'vertex_group', 'spanning_forest', 'universal_group', 'vertex_abelianisation',
    'totab', 'totab_via_vertex_groups', 'abelianise_presentation', 'disjoint_union',
]


def sort_key(x):
    """Total order on the ids we use (ints, strings, nested tuples of those)."""
    if isinstance(x, bool):
        return (0, int(x))
    if isinstance(x, int):
        return (0, x)
    if isinstance(x, str):
        return (1, x)
    if isinstance(x, tuple):
        return (2, tuple(sort_key(y) for y in x))
    return (3, repr(x))


def reduce_word(word):
    out = []
    for letter in word:
        e, s = letter
        if s not in (1, -1):
            raise ValueError(f"letter exponent must be +1 or -1, got {s!r}")
        if out and out[-1] == (e, -s):
            out.pop()
        else:
            out.append((e, s))
    return tuple(out)


def invert_word(word):
    return tuple((e, -s) for e, s in reversed(word))


def parse_word(tokens, known=None):
    """``["a", "~b"]`` -> ``(("a", 1), ("b", -1))``; ids are resolved through ``known``."""
    if isinstance(tokens, str):
        tokens = tokens.split()
    letters = []
    for tok in tokens:
        s = 1
        if isinstance(tok, str) and tok.startswith('~'):
            tok, s = tok[1:], -1
        if known is not None:
            if tok not in known:
                raise ValueError(f"unknown letter {tok!r}")
            tok = known[tok]
        letters.append((tok, s))
    return reduce_word(letters)


def format_word(word):
    return [str(e) if s == 1 else "~" + str(e) for e, s in word]


def exponent_vector(word, index):
    v = [0] * len(index)
    for e, s in word:
        v[index[e]] += s
    return v


def _id_table(ids):
    table = {}
    for x in ids:
        table[x] = x
        table.setdefault(str(x), x)
    return table


def _id_json(x):
    if isinstance(x, (int, str)) and not isinstance(x, bool):
        return x
    if isinstance(x, tuple):
        return "(" + ",".join(str(_id_json(y)) for y in x) + ")"
    return str(x)


# Explicit groupoids

@dataclass(frozen=True, eq=False)
class ExplicitGroupoid:
    objects: tuple
    arrows: MappingProxyType        # arrow -> (src, tgt)
    compose: MappingProxyType       # (g, h) -> gh, for tgt(g) == src(h)
    identities: MappingProxyType    # object -> arrow
    inverses: MappingProxyType      # arrow -> arrow

    def __post_init__(self):
        object.__setattr__(self, 'objects', tuple(self.objects))
        for name in ('arrows', 'compose', 'identities', 'inverses'):
            object.__setattr__(self, name, MappingProxyType(dict(getattr(self, name))))

    def src(self, g):
        return self.arrows[g][0]

    def tgt(self, g):
        return self.arrows[g][1]

    def mul(self, g, h):
        try:
            return self.compose[g, h]
        except KeyError:
            raise ValueError(f"arrows {g!r} and {h!r} are not composable") from None

    def mul_seq(self, gs):
        gs = list(gs)
        out = gs[0]
        for h in gs[1:]:
            out = self.mul(out, h)
        return out

    def inv(self, g):
        return self.inverses[g]

    def hom(self, a, b):
        return [g for g, (s, t) in self.arrows.items() if s == a and t == b]

    @property
    def arrow_count(self):
        return len(self.arrows)

    def sorted_arrows(self):
        return sorted(self.arrows, key=sort_key)

    @classmethod
    def from_function(cls, objects, arrows, mul, identity, inverse):
        """Build the tables from a partial multiplication ``mul(g, h)``."""
        arrows = dict(arrows)
        by_src = {}
        for g, (s, _) in arrows.items():
            by_src.setdefault(s, []).append(g)
        compose = {}
        for g, (_, t) in arrows.items():
            for h in by_src.get(t, ()):
                compose[g, h] = mul(g, h)
        return cls(objects, arrows, compose,
                   {a: identity(a) for a in objects},
                   {g: inverse(g) for g in arrows})

    @classmethod
    def discrete(cls, objects):
        objects = list(objects)
        ids = {a: ('id', a) for a in objects}
        return cls(objects, {ids[a]: (a, a) for a in objects},
                   {(ids[a], ids[a]): ids[a] for a in objects},
                   ids, {ids[a]: ids[a] for a in objects})

    @classmethod
    def indiscrete(cls, objects):
        """Tree (indiscrete) groupoid: exactly one arrow between any two objects."""
        objects = list(objects)
        arrows = {(a, b): (a, b) for a in objects for b in objects}
        return cls.from_function(objects, arrows, lambda g, h: (g[0], h[1]),
                                 lambda a: (a, a), lambda g: (g[1], g[0]))

    def to_json(self):
        return {
            "objects": [_id_json(a) for a in self.objects],
            "arrows": [{"id": _id_json(g), "src": _id_json(s), "tgt": _id_json(t)}
                       for g, (s, t) in sorted(self.arrows.items(), key=lambda kv: sort_key(kv[0]))],
            "compose": [[_id_json(g), _id_json(h), _id_json(gh)]
                        for (g, h), gh in sorted(self.compose.items(),
                                                 key=lambda kv: sort_key(kv[0]))],
            "identities": {str(_id_json(a)): _id_json(self.identities[a]) for a in self.objects},
            "inverses": {str(_id_json(g)): _id_json(self.inverses[g]) for g in self.sorted_arrows()},
        }

    @classmethod
    def from_json(cls, data):
        for key in ("objects", "arrows", "compose", "identities", "inverses"):
            if key not in data:
                raise ValueError(f"explicit groupoid is missing {key!r}")
        objects = list(data["objects"])
        obj = _id_table(objects)
        arrows = {}
        for a in data["arrows"]:
            if a["src"] not in obj or a["tgt"] not in obj:
                raise ValueError(f"arrow {a['id']!r} has an unknown endpoint")
            arrows[a["id"]] = (obj[a["src"]], obj[a["tgt"]])
        arr = _id_table(arrows)

        def look(x, what):
            if x not in arr:
                raise ValueError(f"unknown arrow {x!r} in {what}")
            return arr[x]
        compose = {}
        for entry in data["compose"]:
            if len(entry) != 3:
                raise ValueError(f"compose entry {entry!r} must be [g, h, gh]")
            g, h, gh = (look(x, "compose") for x in entry)
            compose[g, h] = gh
        identities = {}
        for k, v in data["identities"].items():
            if k not in obj:
                raise ValueError(f"identity given for unknown object {k!r}")
            identities[obj[k]] = look(v, "identities")
        inverses = {look(k, "inverses"): look(v, "inverses") for k, v in data["inverses"].items()}
        return cls(objects, arrows, compose, identities, inverses)

    def to_presented(self):
        """Presentation with the non-identity arrows as edges and the composition table as relations."""
        ids = set(self.identities.values())
        edges = {g: self.arrows[g] for g in self.sorted_arrows() if g not in ids}
        relations = []
        for (g, h), gh in sorted(self.compose.items(), key=lambda kv: sort_key(kv[0])):
            if g in ids or h in ids:
                continue
            right = () if gh in ids else ((gh, 1),)
            relations.append(Relation(((g, 1), (h, 1)), right))
        return PresentedGroupoid(self.objects, edges, relations)


def validate(g):
    """Check every groupoid axiom of an explicit groupoid, exhaustively."""
    w = []
    objects = set(g.objects)
    for a, (s, t) in g.arrows.items():
        if s not in objects or t not in objects:
            w.append(f"arrow {a!r} has endpoint outside the object set")
    if w:
        return Verdict.from_witnesses(w)
    for (x, y), xy in g.compose.items():
        if x not in g.arrows or y not in g.arrows or xy not in g.arrows:
            w.append(f"compose entry ({x!r}, {y!r}) mentions an unknown arrow")
        elif g.tgt(x) != g.src(y):
            w.append(f"pair ({x!r}, {y!r}) is composed but tgt({x!r}) != src({y!r})")
        elif g.arrows[xy] != (g.src(x), g.tgt(y)):
            w.append(f"composite of ({x!r}, {y!r}) has the wrong endpoints")
    if w:
        return Verdict.from_witnesses(w)
    by_src = {}
    for a, (s, _) in g.arrows.items():
        by_src.setdefault(s, []).append(a)
    for x, (_, t) in g.arrows.items():
        for y in by_src.get(t, ()):
            if (x, y) not in g.compose:
                w.append(f"composable pair ({x!r}, {y!r}) has no composite")
    if w:
        return Verdict.from_witnesses(w)
    for a in g.objects:
        e = g.identities.get(a)
        if e is None or e not in g.arrows or g.arrows[e] != (a, a):
            w.append(f"object {a!r} has no identity loop")
            continue
        for x in by_src.get(a, ()):
            if g.compose[e, x] != x:
                w.append(f"identity at {a!r} is not a left unit for {x!r}")
    for x, (s, t) in g.arrows.items():
        e = g.identities.get(t)
        if e is not None and g.compose.get((x, e)) != x:
            w.append(f"identity at {t!r} is not a right unit for {x!r}")
        xi = g.inverses.get(x)
        if xi is None or xi not in g.arrows:
            w.append(f"arrow {x!r} has no inverse")
        elif g.arrows[xi] != (t, s):
            w.append(f"inverse of {x!r} has the wrong endpoints")
        elif (g.compose[x, xi] != g.identities.get(s)
              or g.compose[xi, x] != g.identities.get(t)):
            w.append(f"arrow {x!r} and its inverse do not compose to identities")
    for x, (_, t) in g.arrows.items():
        for y in by_src.get(t, ()):
            xy = g.compose[x, y]
            for z in by_src.get(g.tgt(y), ()):
                if g.compose[xy, z] != g.compose[x, g.compose[y, z]]:
                    w.append(f"associativity fails on ({x!r}, {y!r}, {z!r})")
    return Verdict.from_witnesses(w)


# Presented groupoids

@dataclass(frozen=True)
class Relation:
    left: tuple
    right: tuple
    vertex: object = None   # needed only when both words are empty

    def __post_init__(self):
        object.__setattr__(self, 'left', reduce_word(self.left))
        object.__setattr__(self, 'right', reduce_word(self.right))

    def loop(self):
        return reduce_word(self.left + invert_word(self.right))


def _word_ends(word, edges, where):
    if not word:
        return None
    start = None
    cur = None
    for e, s in word:
        if e not in edges:
            raise ValueError(f"{where}: unknown edge {e!r}")
        a, b = edges[e] if s == 1 else edges[e][::-1]
        if cur is not None and cur != a:
            raise ValueError(f"{where}: letters are not composable at {e!r}")
        if start is None:
            start = a
        cur = b
    return start, cur


@dataclass(frozen=True, eq=False)
class PresentedGroupoid:
    vertices: tuple
    edges: MappingProxyType     # edge -> (src, tgt)
    relations: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'vertices', tuple(self.vertices))
        object.__setattr__(self, 'edges', MappingProxyType(dict(self.edges)))
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise ValueError("duplicate vertex id")
        for e, (s, t) in self.edges.items():
            if s not in vs or t not in vs:
                raise ValueError(f"edge {e!r} has an endpoint that is not a vertex")
        rels = []
        for k, r in enumerate(self.relations):
            if not isinstance(r, Relation):
                r = Relation(*r)
            rels.append(self._anchor(r, k))
        object.__setattr__(self, 'relations', tuple(rels))

    def _anchor(self, r, k):
        left = _word_ends(r.left, self.edges, f"relation {k}")
        right = _word_ends(r.right, self.edges, f"relation {k}")
        if left is None and right is None:
            if r.vertex is None:
                raise ValueError(f"relation {k}: both sides empty and no vertex given")
            ends = (r.vertex, r.vertex)
        elif left is None or right is None:
            ends = left or right
            if ends[0] != ends[1]:
                raise ValueError(f"relation {k}: a side is empty but the other is not a loop")
        else:
            if left != right:
                raise ValueError(f"relation {k}: sides are not parallel ({left} vs {right})")
            ends = left
        if r.vertex is not None and r.vertex != ends[0]:
            raise ValueError(f"relation {k}: declared vertex does not match the words")
        return Relation(r.left, r.right, ends[0])

    def sorted_edges(self):
        return sorted(self.edges, key=sort_key)

    def sorted_vertices(self):
        return sorted(self.vertices, key=sort_key)

    def word_ends(self, word):
        return _word_ends(word, self.edges, "word")

    def to_json(self):
        out = {
            "vertices": [_id_json(v) for v in self.vertices],
            "edges": [{"id": _id_json(e), "src": _id_json(s), "tgt": _id_json(t)}
                      for e, (s, t) in ((e, self.edges[e]) for e in self.sorted_edges())],
            "relations": [],
        }
        for r in self.relations:
            entry = {"left": format_word([(_id_json(e), s) for e, s in r.left]),
                     "right": format_word([(_id_json(e), s) for e, s in r.right])}
            if not r.left and not r.right:
                entry["vertex"] = _id_json(r.vertex)
            out["relations"].append(entry)
        return out

    @classmethod
    def from_json(cls, data):
        for key in ("vertices", "edges"):
            if key not in data:
                raise ValueError(f"presented groupoid is missing {key!r}")
        vertices = list(data["vertices"])
        vt = _id_table(vertices)
        edges = {}
        for e in data["edges"]:
            if e["src"] not in vt or e["tgt"] not in vt:
                raise ValueError(f"edge {e['id']!r} has an unknown endpoint")
            if e["id"] in edges:
                raise ValueError(f"duplicate edge id {e['id']!r}")
            edges[e["id"]] = (vt[e["src"]], vt[e["tgt"]])
        et = {str(e): e for e in edges}
        relations = []
        for r in data.get("relations", []):
            vertex = vt[r["vertex"]] if "vertex" in r else None
            relations.append(Relation(parse_word(r["left"], et), parse_word(r["right"], et), vertex))
        return cls(vertices, edges, relations)


def disjoint_union(*groupoids):
    """Disjoint union of presented groupoids; ids are tagged with the summand index."""
    vertices, edges, relations = [], {}, []
    for k, g in enumerate(groupoids):
        vertices += [(k, v) for v in g.vertices]
        edges.update({(k, e): ((k, s), (k, t)) for e, (s, t) in g.edges.items()})
        for r in g.relations:
            relations.append(Relation(tuple(((k, e), s) for e, s in r.left),
                                      tuple(((k, e), s) for e, s in r.right), (k, r.vertex)))
    return PresentedGroupoid(vertices, edges, relations)


@dataclass(frozen=True)
class GroupPresentation:
    generators: tuple
    relators: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'generators', tuple(self.generators))
        gens = set(self.generators)
        if len(gens) != len(self.generators):
            raise ValueError("duplicate generator")
        rels = []
        for r in self.relators:
            r = reduce_word(r)
            for e, _ in r:
                if e not in gens:
                    raise ValueError(f"relator uses unknown generator {e!r}")
            rels.append(r)
        object.__setattr__(self, 'relators', tuple(rels))

    @property
    def rank(self):
        return len(self.generators)

    def to_json(self):
        return {"generators": [_id_json(s) for s in self.generators],
                "relators": [format_word([(_id_json(e), s) for e, s in r]) for r in self.relators]}

    @classmethod
    def from_json(cls, data):
        gens = list(data["generators"])
        table = {str(s): s for s in gens}
        return cls(gens, [parse_word(r, table) for r in data.get("relators", [])])


def abelianise_presentation(p):
    index = {s: i for i, s in enumerate(p.generators)}
    return FPAbelianGroup.from_relations(
        len(index), [exponent_vector(r, index) for r in p.relators], p.generators)


@dataclass(frozen=True, eq=False)
class SpanningForest:
    roots: tuple
    tree_edges: frozenset
    parent: MappingProxyType    # non-root vertex -> letter reaching it from its parent
    root_of: MappingProxyType   # vertex -> root of its component
    previous: MappingProxyType  # (letter, vertex) -> vertex the letter leaves from

    def path_to(self, v):
        """Tree word from the root of ``v``'s component to ``v``."""
        letters = []
        while v in self.parent:
            letter = self.parent[v]
            letters.append(letter)
            v = self.previous[letter, v]
        return tuple(reversed(letters))

    def component(self, root):
        return [v for v, r in self.root_of.items() if r == root]


def spanning_forest(g, roots=None):
    """
    Breadth-first spanning forest of the underlying graph of ``g``.

    Each component is rooted at its least vertex (or at the first vertex of
    ``roots`` that lies in it); vertices and edges are visited in id order.
    """
    adj = {v: [] for v in g.vertices}
    for e in g.sorted_edges():
        s, t = g.edges[e]
        if s == t:
            continue
        adj[s].append(((e, 1), t))
        adj[t].append(((e, -1), s))
    order = []
    if roots is not None:
        order = [r for r in roots if r in adj]
    order += g.sorted_vertices()
    root_of, parent, prev, tree, rts = {}, {}, {}, set(), []
    for r in order:
        if r in root_of:
            continue
        rts.append(r)
        root_of[r] = r
        queue = deque([r])
        while queue:
            v = queue.popleft()
            for letter, w in adj[v]:
                if w not in root_of:
                    root_of[w] = r
                    parent[w] = letter
                    prev[letter, w] = v
                    tree.add(letter[0])
                    queue.append(w)
    return SpanningForest(tuple(rts), frozenset(tree), MappingProxyType(parent),
                          MappingProxyType(root_of), MappingProxyType(prev))


def components(g):
    """Partition of the objects into connected components, each sorted, in root order."""
    if isinstance(g, PresentedGroupoid):
        forest = spanning_forest(g)
        return [sorted(forest.component(r), key=sort_key) for r in forest.roots]
    parent = {a: a for a in g.objects}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a
    for s, t in g.arrows.values():
        rs, rt = find(s), find(t)
        if rs != rt:
            parent[max(rs, rt, key=sort_key)] = min(rs, rt, key=sort_key)
    classes = {}
    for a in sorted(g.objects, key=sort_key):
        classes.setdefault(find(a), []).append(a)
    return list(classes.values())


def costar(g, a):
    """All arrows of ``g`` with target ``a``."""
    if a not in set(g.objects):
        raise KeyError(f"unknown object {a!r}")
    return {x for x, (_, t) in g.arrows.items() if t == a}


def _component_relations(g, forest, root):
    return [r for r in g.relations if forest.root_of[r.vertex] == root]


def vertex_group(g, a, forest=None):
    """
    Vertex group at ``a``.

    For an explicit groupoid this is the one-object groupoid of loops at ``a``.
    For a presented groupoid it is the presentation whose generators are the
    non-tree edges of ``a``'s component and whose relators are the relations
    with tree edges deleted.
    """
    if isinstance(g, ExplicitGroupoid):
        if a not in set(g.objects):
            raise KeyError(f"unknown object {a!r}")
        loops = [x for x in g.sorted_arrows() if g.arrows[x] == (a, a)]
        ls = set(loops)
        return ExplicitGroupoid([a], {x: (a, a) for x in loops},
                                {k: v for k, v in g.compose.items() if k[0] in ls and k[1] in ls},
                                {a: g.identities[a]}, {x: g.inverses[x] for x in loops})
    if a not in set(g.vertices):
        raise KeyError(f"unknown vertex {a!r}")
    forest = forest or spanning_forest(g)
    root = forest.root_of[a]
    comp = set(forest.component(root))
    gens = [e for e in g.sorted_edges()
            if g.edges[e][0] in comp and e not in forest.tree_edges]
    relators = []
    for r in _component_relations(g, forest, root):
        w = reduce_word([(e, s) for e, s in r.loop() if e not in forest.tree_edges])
        if w:
            relators.append(w)
    return GroupPresentation(gens, relators)


def universal_group(g, forest=None):
    """
    Presentation of the universal group: all edges as generators, each relation
    turned into a loop and conjugated back to its component root along the tree.
    """
    forest = forest or spanning_forest(g)
    relators = []
    for r in g.relations:
        path = forest.path_to(r.vertex)
        w = reduce_word(path + r.loop() + invert_word(path))
        if w:
            relators.append(w)
    return GroupPresentation(g.sorted_edges(), relators)


def vertex_abelianisation(g, a, forest=None):
    if isinstance(g, ExplicitGroupoid):
        g = g.to_presented()
    return abelianise_presentation(vertex_group(g, a, forest))


def totab(g):
    """
    Universal abelianisation: Z^edges modulo the exponent-sum differences of all
    relations.  Columns follow ``g.sorted_edges()``.
    """
    if isinstance(g, ExplicitGroupoid):
        g = g.to_presented()
    edges = g.sorted_edges()
    index = {e: i for i, e in enumerate(edges)}
    rows = []
    for r in g.relations:
        v = exponent_vector(r.left, index)
        for i, x in enumerate(exponent_vector(r.right, index)):
            v[i] -= x
        rows.append(v)
    return FPAbelianGroup(len(edges), IntMatrix.from_rows(rows, len(edges)), edges)


def totab_via_vertex_groups(g, forest=None):
    """Direct sum over components of the vertex abelianisation plus Z^(objects - 1)."""
    forest = forest or spanning_forest(g)
    parts = []
    for root in forest.roots:
        parts.append(vertex_abelianisation(g, root, forest))
        parts.append(FPAbelianGroup.free(len(forest.component(root)) - 1))
    return direct_sum(*parts)
