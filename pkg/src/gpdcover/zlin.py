"""
Exact integer linear algebra.

Everything here works over Z with Python's arbitrary precision integers:
Smith and Hermite normal forms, finitely presented abelian groups, maps
between them and exactness of composable pairs of maps.

Conventions: vectors are rows.  A relation matrix has one row per relation
and one column per generator, and a map of abelian groups with matrix ``M``
sends the ``i``-th source generator to row ``i`` of ``M``, so an element
``x`` goes to ``x @ M``.

>>> invariants(FPAbelianGroup(2, IntMatrix.from_rows([[2, 4], [6, 8]])))
((2, 4), 0)
"""

from dataclasses import dataclass
from functools import cached_property
from math import gcd

from .verdict import Verdict

__all__ = [
    'IntMatrix', 'FPAbelianGroup', 'AbelianMap', 'ExactnessVerdict',
    'smith_normal_form', 'invariants', 'check_exactness',
    'hnf', 'left_kernel', 'preimage_lattice', 'lattice_contains',
    'lattice_coordinates', 'same_lattice', 'determinant',
]


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative matrix shape")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix")
        for x in self.entries:
            if type(x) is not int:
                raise TypeError(f"matrix entry {x!r} is not an int")

    @classmethod
    def from_rows(cls, rows, cols=None):
        rows = [list(r) for r in rows]
        if cols is None:
            if not rows:
                raise ValueError("column count needed for a matrix without rows")
            cols = len(rows[0])
        for r in rows:
            if len(r) != cols:
                raise ValueError("ragged matrix")
        return cls(len(rows), cols, tuple(int(x) for r in rows for x in r))

    @classmethod
    def zeros(cls, rows, cols):
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def identity(cls, n):
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    @classmethod
    def diagonal(cls, diag, rows=None, cols=None):
        diag = list(diag)
        rows = len(diag) if rows is None else rows
        cols = len(diag) if cols is None else cols
        out = [[0] * cols for _ in range(rows)]
        for i, d in enumerate(diag):
            out[i][i] = d
        return cls.from_rows(out, cols)

    def to_rows(self):
        c = self.cols
        return [list(self.entries[i * c:(i + 1) * c]) for i in range(self.rows)]

    def row(self, i):
        return list(self.entries[i * self.cols:(i + 1) * self.cols])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def transpose(self):
        return IntMatrix.from_rows(
            [[self[i, j] for i in range(self.rows)] for j in range(self.cols)],
            self.rows)

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        b = other.to_rows()
        out = []
        for r in self.to_rows():
            acc = [0] * other.cols
            for k, x in enumerate(r):
                if x:
                    bk = b[k]
                    for j in range(other.cols):
                        acc[j] += x * bk[j]
            out.append(acc)
        return IntMatrix.from_rows(out, other.cols)

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return IntMatrix(self.rows, self.cols,
                         tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __neg__(self):
        return IntMatrix(self.rows, self.cols, tuple(-a for a in self.entries))

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self):
        return not any(self.entries)

    def vecmul(self, v):
        """Row vector times matrix."""
        if len(v) != self.rows:
            raise ValueError("vector length does not match matrix rows")
        out = [0] * self.cols
        for k, x in enumerate(v):
            if x:
                base = k * self.cols
                for j in range(self.cols):
                    out[j] += x * self.entries[base + j]
        return out

    def to_json(self):
        return [[str(x) for x in r] for r in self.to_rows()]

    @classmethod
    def from_json(cls, data, cols=None):
        if not isinstance(data, list) or not all(isinstance(r, list) for r in data):
            raise ValueError("a matrix must be a JSON array of arrays")
        rows = []
        for r in data:
            row = []
            for x in r:
                if isinstance(x, bool) or not isinstance(x, (str, int)):
                    raise ValueError(f"matrix entry {x!r} is not a decimal integer string")
                row.append(int(x))
            rows.append(row)
        if not rows:
            return cls(0, cols or 0, ())
        return cls.from_rows(rows, cols)


def _swap_rows(a, i, j):
    a[i], a[j] = a[j], a[i]


def _swap_cols(a, i, j):
    for r in a:
        r[i], r[j] = r[j], r[i]


def _add_row(a, dst, src, q):
    # a[dst] += q * a[src]
    rs, rd = a[src], a[dst]
    for k, x in enumerate(rs):
        if x:
            rd[k] += q * x


def _add_col(a, dst, src, q):
    for r in a:
        x = r[src]
        if x:
            r[dst] += q * x


def _min_pivot(a, t):
    best = None
    for i in range(t, len(a)):
        row = a[i]
        for j in range(t, len(row)):
            x = row[j]
            if x and (best is None or abs(x) < best[0]):
                best = (abs(x), i, j)
                if best[0] == 1:
                    return i, j
    return None if best is None else best[1:]


def _smith(a, u=None, v=None):
    """In-place Smith reduction of ``a``; row ops mirrored on ``u``, column ops on ``v``."""
    r = len(a)
    c = len(a[0]) if r else 0
    t = 0
    while t < min(r, c):
        piv = _min_pivot(a, t)
        if piv is None:
            break
        while True:
            i, j = piv
            if i != t:
                _swap_rows(a, t, i)
                if u is not None:
                    _swap_rows(u, t, i)
            if j != t:
                _swap_cols(a, t, j)
                if v is not None:
                    _swap_cols(v, t, j)
            p = a[t][t]
            clean = True
            for i in range(t + 1, r):
                x = a[i][t]
                if x:
                    q = x // p
                    _add_row(a, i, t, -q)
                    if u is not None:
                        _add_row(u, i, t, -q)
                    if a[i][t]:
                        clean = False
            for j in range(t + 1, c):
                x = a[t][j]
                if x:
                    q = x // p
                    _add_col(a, j, t, -q)
                    if v is not None:
                        _add_col(v, j, t, -q)
                    if a[t][j]:
                        clean = False
            if clean:
                bad = None
                for i in range(t + 1, r):
                    for j in range(t + 1, c):
                        if a[i][j] % p:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                # pull a non-multiple into row t; the next pass leaves a smaller remainder
                _add_row(a, t, bad, 1)
                if u is not None:
                    _add_row(u, t, bad, 1)
            piv = _min_pivot(a, t)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            if u is not None:
                u[t] = [-x for x in u[t]]
        t += 1
    return a


def smith_normal_form(m):
    """
    Return ``(U, D, V)`` with ``U @ m @ V == D``, ``U`` and ``V`` unimodular and
    ``D`` diagonal with nonnegative entries, each dividing the next.

    Pivots are the smallest nonzero absolute value in the active block, ties
    going to the lowest (row, col), so the output is deterministic.
    """
    a = m.to_rows()
    u = [[int(i == j) for j in range(m.rows)] for i in range(m.rows)]
    v = [[int(i == j) for j in range(m.cols)] for i in range(m.cols)]
    _smith(a, u, v)
    return (IntMatrix.from_rows(u, m.rows), IntMatrix.from_rows(a, m.cols),
            IntMatrix.from_rows(v, m.cols))


def _echelon(a, ncols):
    """
    Row-reduce ``a`` in place to Hermite form on its first ``ncols`` columns.

    Extra trailing columns are carried along (used for transforms).  Returns
    the list of pivot columns; rows past ``len(pivots)`` are zero on the first
    ``ncols`` columns.
    """
    pivots = []
    top = 0
    n = len(a)
    for col in range(ncols):
        if top >= n:
            break
        while True:
            best = None
            for i in range(top, n):
                x = a[i][col]
                if x and (best is None or abs(x) < abs(a[best][col])):
                    best = i
            if best is None:
                break
            if best != top:
                _swap_rows(a, top, best)
            p = a[top][col]
            clean = True
            for i in range(top + 1, n):
                x = a[i][col]
                if x:
                    _add_row(a, i, top, -(x // p))
                    if a[i][col]:
                        clean = False
            if clean:
                break
        if a[top][col] == 0:
            continue
        if a[top][col] < 0:
            a[top] = [-x for x in a[top]]
        p = a[top][col]
        for i in range(top):
            x = a[i][col]
            if x:
                _add_row(a, i, top, -(x // p))
        pivots.append(col)
        top += 1
    return pivots


def hnf(rows, ncols):
    """Hermite normal form of the row lattice spanned by ``rows`` (nonzero rows only)."""
    a = [list(r) for r in rows if any(r)]
    for r in a:
        if len(r) != ncols:
            raise ValueError("row length does not match column count")
    pivots = _echelon(a, ncols)
    return [tuple(r) for r in a[:len(pivots)]]


def left_kernel(rows, ncols):
    """Hermite basis of ``{x : x @ rows == 0}``, where ``rows`` is a list of vectors."""
    n = len(rows)
    a = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(rows)]
    pivots = _echelon(a, ncols)
    return hnf([r[ncols:] for r in a[len(pivots):]], n)


def preimage_lattice(images, target_relations, target_dim):
    """
    Lattice of ``x`` in Z^n with ``x @ images`` in the row span of ``target_relations``.

    ``images`` has ``n`` rows of length ``target_dim``.
    """
    n = len(images)
    stacked = [list(r) for r in images] + [list(r) for r in target_relations]
    kern = left_kernel(stacked, target_dim)
    return hnf([r[:n] for r in kern], n)


def _pivot_cols(basis):
    out = []
    for r in basis:
        for j, x in enumerate(r):
            if x:
                out.append(j)
                break
    return out


def lattice_coordinates(basis, v):
    """
    Coordinates of ``v`` in a Hermite ``basis``, or ``None`` if ``v`` is not in its span.
    """
    v = list(v)
    coords = []
    for r, j in zip(basis, _pivot_cols(basis)):
        q, rem = divmod(v[j], r[j])
        if rem:
            return None
        coords.append(q)
        if q:
            for k, x in enumerate(r):
                if x:
                    v[k] -= q * x
    if any(v):
        return None
    return coords


def lattice_contains(basis, v):
    return lattice_coordinates(basis, v) is not None


def same_lattice(rows_a, rows_b, ncols):
    return hnf(rows_a, ncols) == hnf(rows_b, ncols)


def determinant(m):
    """Exact determinant by fraction-free (Bareiss) elimination."""
    if m.rows != m.cols:
        raise ValueError("determinant of a non-square matrix")
    n = m.rows
    a = m.to_rows()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


@dataclass(frozen=True, eq=False)
class FPAbelianGroup:
    """Z^generator_count modulo the row span of ``relations``."""

    generator_count: int
    relations: IntMatrix = None
    labels: tuple = None

    def __post_init__(self):
        if self.relations is None:
            object.__setattr__(self, 'relations', IntMatrix.zeros(0, self.generator_count))
        if self.relations.cols != self.generator_count:
            raise ValueError(
                f"relation matrix has {self.relations.cols} columns for "
                f"{self.generator_count} generators")
        if self.labels is not None:
            object.__setattr__(self, 'labels', tuple(self.labels))
            if len(self.labels) != self.generator_count:
                raise ValueError("one label per generator required")

    @classmethod
    def from_relations(cls, generator_count, relations, labels=None):
        relations = [list(r) for r in relations]
        return cls(generator_count, IntMatrix.from_rows(relations, generator_count), labels)

    @classmethod
    def free(cls, rank):
        return cls(rank)

    @classmethod
    def cyclic(cls, order):
        return cls.from_relations(1, [[order]])

    @classmethod
    def from_invariants(cls, torsion, free_rank):
        n = len(torsion) + free_rank
        return cls.from_relations(n, [[d if j == i else 0 for j in range(n)]
                                      for i, d in enumerate(torsion)])

    @cached_property
    def relation_basis(self):
        return hnf(self.relations.to_rows(), self.generator_count)

    @cached_property
    def canonical_form(self):
        a = [list(r) for r in self.relation_basis]
        _smith(a)
        diag = [a[i][i] for i in range(min(len(a), self.generator_count))]
        rank = sum(1 for d in diag if d)
        torsion = tuple(d for d in diag if d > 1)
        return torsion, self.generator_count - rank

    def invariants(self):
        return self.canonical_form

    def is_zero_element(self, v):
        return lattice_contains(self.relation_basis, v)

    def same_presentation_lattice(self, other):
        return (self.generator_count == other.generator_count
                and self.relation_basis == other.relation_basis)

    def basis_vector(self, i):
        return [int(j == i) for j in range(self.generator_count)]

    def order(self):
        torsion, free = self.canonical_form
        if free:
            return None
        out = 1
        for d in torsion:
            out *= d
        return out

    def __repr__(self):
        torsion, free = self.canonical_form
        parts = [f"Z/{d}" for d in torsion] + (["Z^%d" % free] if free > 1 else ["Z"] * free)
        return "FPAbelianGroup(%s)" % (" + ".join(parts) or "0")

    def to_json(self):
        torsion, free = self.canonical_form
        return {"invariants": list(torsion), "free_rank": free}


def direct_sum(*groups):
    n = sum(g.generator_count for g in groups)
    rows = []
    offset = 0
    for g in groups:
        for r in g.relations.to_rows():
            rows.append([0] * offset + r + [0] * (n - offset - g.generator_count))
        offset += g.generator_count
    return FPAbelianGroup.from_relations(n, rows)


def invariants(g):
    """``(torsion invariant factors, free rank)`` of ``g``; equal iff the groups are isomorphic."""
    return g.canonical_form


@dataclass(frozen=True, eq=False)
class AbelianMap:
    source: FPAbelianGroup
    target: FPAbelianGroup
    matrix: IntMatrix

    def __post_init__(self):
        if (self.matrix.rows, self.matrix.cols) != (self.source.generator_count,
                                                    self.target.generator_count):
            raise ValueError(
                f"map matrix is {self.matrix.rows}x{self.matrix.cols}, expected "
                f"{self.source.generator_count}x{self.target.generator_count}")
        bad = self.well_defined()
        if not bad:
            raise ValueError("map is not well defined: " + "; ".join(bad.witnesses))

    @classmethod
    def from_rows(cls, source, target, rows):
        return cls(source, target, IntMatrix.from_rows(rows, target.generator_count))

    def well_defined(self):
        witnesses = []
        for k, rel in enumerate(self.source.relations.to_rows()):
            if not self.target.is_zero_element(self.matrix.vecmul(rel)):
                witnesses.append(f"source relation {k} does not map to zero")
        return Verdict.from_witnesses(witnesses)

    def __call__(self, v):
        return self.matrix.vecmul(v)

    def then(self, other):
        """Composite ``self`` followed by ``other``."""
        return AbelianMap(self.source, other.target, self.matrix @ other.matrix)

    def kernel_lattice(self):
        return preimage_lattice(self.matrix.to_rows(), self.target.relation_basis,
                                self.target.generator_count)

    def image_lattice(self):
        return hnf(self.matrix.to_rows() + [list(r) for r in self.target.relation_basis],
                   self.target.generator_count)

    def is_injective(self):
        witnesses = [f"kernel element {list(v)} is nonzero in the source"
                     for v in self.kernel_lattice() if not self.source.is_zero_element(v)]
        return Verdict.from_witnesses(witnesses[:1])

    def is_surjective(self):
        n = self.target.generator_count
        img = self.image_lattice()
        if img == [tuple(int(i == j) for j in range(n)) for i in range(n)]:
            return Verdict(True)
        for i in range(n):
            if not lattice_contains(img, [int(i == j) for j in range(n)]):
                return Verdict(False, (f"target generator {i} is not in the image",))
        return Verdict(True)

    def is_isomorphism(self):
        inj, sur = self.is_injective(), self.is_surjective()
        return Verdict.from_witnesses(inj.witnesses + sur.witnesses)

    def agrees_with(self, other):
        """Equal as maps: every generator image differs by a target relation."""
        witnesses = []
        for i in range(self.source.generator_count):
            diff = [a - b for a, b in zip(self.matrix.row(i), other.matrix.row(i))]
            if not self.target.is_zero_element(diff):
                witnesses.append(f"generator {i}: {self.matrix.row(i)} != {other.matrix.row(i)}")
        return Verdict.from_witnesses(witnesses)


@dataclass(frozen=True)
class ExactnessVerdict:
    exact: bool
    composite_zero: bool
    injective: bool
    surjective: bool
    witnesses: tuple = ()

    @property
    def short_exact(self):
        return self.exact and self.injective and self.surjective

    def __bool__(self):
        return self.exact

    def to_json(self):
        return {"exact": self.exact, "composite_zero": self.composite_zero,
                "injective": self.injective, "surjective": self.surjective,
                "short_exact": self.short_exact, "witnesses": list(self.witnesses)}


def check_exactness(f, g):
    """
    Decide whether ``image(f) == kernel(g)`` in the middle group, and report
    injectivity of ``f`` and surjectivity of ``g``.
    """
    if not f.target.same_presentation_lattice(g.source):
        raise ValueError("target of the first map is not the source of the second")
    witnesses = []
    mid = f.target
    composite = f.matrix @ g.matrix
    composite_zero = True
    for i in range(f.source.generator_count):
        if not g.target.is_zero_element(composite.row(i)):
            composite_zero = False
            witnesses.append(f"g(f(generator {i})) is nonzero")
            break
    image = f.image_lattice()
    kernel = hnf(list(g.kernel_lattice()) + list(mid.relation_basis), mid.generator_count)
    exact = image == kernel
    if not exact and composite_zero:
        for v in kernel:
            if not lattice_contains(image, v):
                witnesses.append(f"kernel element {list(v)} is not in the image")
                break
    inj = f.is_injective()
    sur = g.is_surjective()
    witnesses.extend(inj.witnesses)
    witnesses.extend(sur.witnesses)
    return ExactnessVerdict(exact, composite_zero, inj.ok, sur.ok, tuple(witnesses))
