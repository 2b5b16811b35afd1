"""
Command-line front end.

    gpdcover VERB [options]

The JSON report goes to standard output (or ``--out``) with sorted keys, a
one-line summary goes to standard error.  Exit status is 0 when every verdict
passes, 2 when a verdict fails and 1 on bad input.  File arguments that do not
exist are looked up by name in the bundled corpus, so ``--complex torus.json``
works from anywhere.
"""

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import cover, cube, derived, gpd, zlin
from .cover import FinGroup, GroupMorphismToFin
from .gpd import ExplicitGroupoid, GroupPresentation, PresentedGroupoid, parse_word
from .verdict import Verdict

VERBS = ('snf', 'abelianise', 'totab', 'cover-check', 'cover-build', 'lift', 'derived-module',
         'crowell', 'verify-thm41', 'homology', 'hurewicz', 'build-cover', 'verify-thm55',
         'validate')


class InputError(Exception):
    pass


def corpus_path(name):
    return resources.files('gpdcover') / 'corpus' / name


def corpus_names():
    return sorted(p.name for p in (resources.files('gpdcover') / 'corpus').iterdir()
                  if p.name.endswith('.json'))


def resolve(path, relative_to=None):
    p = Path(path)
    if p.exists():
        return p
    if relative_to is not None and (relative_to / p).exists():
        return relative_to / p
    bundled = corpus_path(p.name)
    if bundled.is_file():
        return bundled
    raise InputError(f"{path}: no such file")


def load_json(path, relative_to=None):
    p = resolve(path, relative_to)
    text = p.read_text()
    try:
        return json.loads(text), p
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _need(args, name):
    value = getattr(args, name)
    if value is None:
        raise InputError(f"--{name} is required for {args.verb}")
    return value


def _base_dir(p):
    return p.parent if isinstance(p, Path) else None


def load_group(source, relative_to=None):
    """A finite group from a builtin name, a file path or an inline table."""
    if isinstance(source, dict):
        return FinGroup.from_json(source)
    try:
        return FinGroup.builtin(source)
    except (KeyError, IndexError):
        pass
    data, _ = load_json(source, relative_to)
    return FinGroup.from_json(data)


def load_groupoid(data):
    if "objects" in data:
        return ExplicitGroupoid.from_json(data)
    if "vertices" in data:
        return PresentedGroupoid.from_json(data)
    raise InputError("groupoid file needs 'objects' (explicit) or 'vertices' (presented)")


def load_phi(path):
    """
    ``{"group": ..., "images": {...}, "presentation": {...}}``; without a
    presentation the domain is free on the image keys, in file order.
    """
    data, p = load_json(path)
    if "group" not in data or "images" not in data:
        raise InputError(f"{path}: phi needs 'group' and 'images'")
    G = load_group(data["group"], _base_dir(p))
    if "presentation" in data:
        F = GroupPresentation.from_json(data["presentation"])
    else:
        F = GroupPresentation(list(data["images"]))
    table = {str(s): s for s in F.generators}
    images = {}
    for s, v in data["images"].items():
        if s not in table:
            raise InputError(f"{path}: image given for unknown generator {s!r}")
        images[table[s]] = G.index(str(v))
    return GroupMorphismToFin(F, G, images), data, G


def load_complex(args):
    data, _ = load_json(_need(args, 'complex'))
    return cube.CubicalSet.from_json(data)


def _lookup(ids, token, what):
    for x in ids:
        if str(gpd._id_json(x)) == token or x == token:
            return x
    raise InputError(f"unknown {what} {token!r}")


def _vertices(args, k):
    if args.vertices is None:
        return None
    tokens, depth, cur = [], 0, ''
    for ch in args.vertices:
        # commas inside parentheses belong to tuple ids such as (0,v)
        depth += (ch == '(') - (ch == ')')
        if ch == ',' and depth == 0:
            tokens.append(cur)
            cur = ''
        else:
            cur += ch
    tokens.append(cur)
    return [_lookup(k.cells_of(0), t.strip(), 'vertex') for t in tokens if t.strip()]


def _basepoint(args, ids):
    if args.basepoint is None:
        return min(ids, key=gpd.sort_key)
    return _lookup(ids, args.basepoint, 'basepoint')


# Verbs

def cmd_snf(args):
    data, _ = load_json(_need(args, 'matrix'))
    if isinstance(data, dict):
        data = data.get("matrix", data)
    m = zlin.IntMatrix.from_json(data)
    U, D, V = zlin.smith_normal_form(m)
    g = zlin.FPAbelianGroup(m.cols, m)
    ok = (U @ m @ V).to_rows() == D.to_rows()
    rep = {"U": U.to_json(), "D": D.to_json(), "V": V.to_json(), "cokernel": g.to_json(),
           "ok": ok}
    return rep, ok, f"snf: cokernel {g!r}"


def cmd_abelianise(args):
    if args.groupoid is not None:
        data, _ = load_json(args.groupoid)
        g = load_groupoid(data)
        if isinstance(g, ExplicitGroupoid):
            g = g.to_presented()
        a = _basepoint(args, g.vertices)
        vg = gpd.vertex_group(g, a)
        ab = gpd.abelianise_presentation(vg)
        rep = {"basepoint": gpd._id_json(a), "presentation": vg.to_json(), **ab.to_json()}
        return rep, True, f"abelianise: vertex group at {a!r} abelianises to {ab!r}"
    data, _ = load_json(_need(args, 'group'))
    p = GroupPresentation.from_json(data)
    ab = gpd.abelianise_presentation(p)
    return ab.to_json(), True, f"abelianise: {ab!r}"


def cmd_totab(args):
    data, _ = load_json(_need(args, 'groupoid'))
    g = load_groupoid(data)
    if isinstance(g, ExplicitGroupoid):
        v = gpd.validate(g)
        if not v:
            raise InputError("invalid groupoid: " + "; ".join(v.witnesses))
        g = g.to_presented()
    t = gpd.totab(g)
    t2 = gpd.totab_via_vertex_groups(g)
    ok = t.invariants() == t2.invariants()
    rep = {**t.to_json(), "via_vertex_groups": t2.to_json(), "ok": ok,
           "components": len(gpd.components(g))}
    return rep, ok, f"totab: {t!r}"


def _load_morphism(path):
    data, p = load_json(path)
    for key in ("source", "target", "object_map", "arrow_map"):
        if key not in data:
            raise InputError(f"{path}: morphism needs {key!r}")

    def side(x):
        if isinstance(x, str):
            x, _ = load_json(x, _base_dir(p))
        return ExplicitGroupoid.from_json(x)
    S, T = side(data["source"]), side(data["target"])
    so, sa = gpd._id_table(S.objects), gpd._id_table(S.arrows)
    to, ta = gpd._id_table(T.objects), gpd._id_table(T.arrows)
    try:
        om = {so[k]: to[v] for k, v in data["object_map"].items()}
        am = {sa[k]: ta[v] for k, v in data["arrow_map"].items()}
    except KeyError as exc:
        raise InputError(f"{path}: unknown id {exc.args[0]!r}") from None
    return cover.GroupoidMorphism(S, T, om, am)


def cmd_cover_check(args):
    p = _load_morphism(_need(args, 'morphism'))
    v = p.validate()
    if not v:
        raise InputError("not a morphism: " + "; ".join(v.witnesses))
    c, f = cover.is_covering(p), cover.is_fibration(p)
    rep = {"covering": c.to_json(), "fibration": f.to_json(), "ok": c.ok}
    return rep, c.ok, f"cover-check: covering {c.ok}, fibration {f.ok}"


def cmd_cover_build(args):
    if args.action is not None:
        data, p = load_json(args.action)
        base_data = data.get("groupoid")
        if base_data is None:
            base_data, _ = load_json(_need(args, 'groupoid'))
        elif isinstance(base_data, str):
            base_data, _ = load_json(base_data, _base_dir(p))
        G = ExplicitGroupoid.from_json(base_data)
        obj, arr = gpd._id_table(G.objects), gpd._id_table(G.arrows)
        fibers = {obj[k]: v for k, v in data["fibers"].items()}
        maps = {arr[k]: m for k, m in data["maps"].items()}
        action = cover.GroupoidAction(G, fibers, maps)
        v = action.validate()
        if not v:
            raise InputError("invalid action: " + "; ".join(v.witnesses))
        tilde, proj = cover.action_groupoid(action)
    else:
        G = load_group(_need(args, 'group'))
        tilde, proj, _ = cover.universal_cover_of_group(G)
    c = cover.is_covering(proj)
    rep = {"groupoid": tilde.to_json(), "objects": len(tilde.objects),
           "arrows": len(tilde.arrows), "covering": c.to_json(), "ok": c.ok}
    return rep, c.ok, f"cover-build: {len(tilde.objects)} objects, {len(tilde.arrows)} arrows"


def cmd_lift(args):
    """Lift a word in a finite group to its universal cover, ending at one or all objects."""
    G = load_group(_need(args, 'group'))
    tilde, proj, _ = cover.universal_cover_of_group(G)
    seq = _need(args, 'sequence')
    word = parse_word(seq.replace(',', ' '), None)
    gs = [G.index(s) if e == 1 else G.inv(G.index(s)) for s, e in word]
    ends = [G.index(args.basepoint)] if args.basepoint is not None else list(G.elements)
    lifts = []
    for end in ends:
        path = cover.lift_sequence(proj, gs, end)
        start = tilde.src(path[0]) if path else end
        lifts.append({"end": G.names[end], "start": G.names[start],
                      "arrows": [[G.names[g], G.names[h]] for g, h in path],
                      "closed": start == end})
    rep = {"sequence": gs and [G.names[g] for g in gs], "lifts": lifts, "ok": True}
    closed = sum(1 for l in lifts if l["closed"])
    return rep, True, f"lift: {len(lifts)} lifts, {closed} closed"


def cmd_derived_module(args):
    phi, _, _ = load_phi(_need(args, 'phi'))
    D, partial = derived.derived_module(phi)
    rep = {"generators": [gpd._id_json(s) for s in D.generators], "group_order": D.group.order,
           "restriction": D.restriction.to_json(),
           "derivation": {str(gpd._id_json(s)): partial.values[s] for s in D.generators},
           "ok": True}
    return rep, True, f"derived-module: restriction {D.restriction!r}"


def cmd_crowell(args):
    phi, _, _ = load_phi(_need(args, 'phi'))
    c = derived.crowell_sequence(phi)
    inv = [g.to_json() for g in (c.kernel.abelianisation, c.module.restriction,
                                 c.ideal.restriction)]
    rep = {"exactness": c.exactness.to_json(), "equivariant": c.equivariant.to_json(),
           "invariants": {"kernel_ab": inv[0], "derived_module": inv[1],
                          "augmentation_ideal": inv[2]}, "ok": c.ok}
    return rep, c.ok, "crowell: " + ("short exact" if c.ok else "NOT short exact")


def cmd_verify_thm41(args):
    phi, _, _ = load_phi(_need(args, 'phi'))
    r = derived.verify_theorem41(phi)
    mid = r.invariants()["top"]["derived_module"]
    return r.to_json(), r.ok, (f"verify-thm41: {'pass' if r.ok else 'FAIL'}, middle "
                               f"({mid['invariants']},{mid['free_rank']})")


def cmd_homology(args):
    k = load_complex(args)
    v = cube.validate_cubical_set(k)
    if not v:
        raise InputError("invalid cubical set: " + "; ".join(v.witnesses))
    n = args.dim if args.dim is not None else 1
    A = _vertices(args, k)
    if args.rel0:
        g = cube.rel0_homology(k, A or [], n)
    elif A is not None:
        g = cube.relative_homology(k, cube.VertexSubset(k, frozenset(A)), n)
    else:
        g = cube.homology(k, n)
    return g.to_json(), True, f"homology: H_{n} = {g!r}"


def cmd_hurewicz(args):
    k = load_complex(args)
    v = cube.validate_cubical_set(k)
    if not v:
        raise InputError("invalid cubical set: " + "; ".join(v.witnesses))
    A = _vertices(args, k)
    if A is None:
        A = [_basepoint(args, k.cells_of(0))]
    r = cube.hurewicz_compare(k, A)
    return r.to_json(), r.verdict.ok, (f"hurewicz: {r.groupoid_side!r} vs {r.homology_side!r}, "
                                       f"{'pass' if r.verdict.ok else 'FAIL'}")


def _complex_phi(args, k):
    data, p = load_json(_need(args, 'phi'))
    if "group" not in data or "images" not in data:
        raise InputError("phi needs 'group' and 'images'")
    G = load_group(data["group"], _base_dir(p))
    edges = {str(gpd._id_json(e)): e for e in k.cells_of(1)}
    images = {}
    for s, x in data["images"].items():
        if s not in edges:
            raise InputError(f"image given for unknown edge {s!r}")
        images[edges[s]] = G.index(str(x))
    return G, images


def cmd_build_cover(args):
    k = load_complex(args)
    base = _basepoint(args, k.cells_of(0))
    cov = cube.build_covering_complex(k, base, _complex_phi(args, k))
    v = cov.check()
    rep = {"complex": cov.total.to_json(), "check": v.to_json(),
           "euler_characteristic": {"base": k.euler_characteristic(),
                                    "cover": cov.total.euler_characteristic()},
           "fiber_over_basepoint": [gpd._id_json(x) for x in cov.fiber_over_basepoint],
           "ok": v.ok}
    counts = [len(cov.total.cells_of(n)) for n in range(cov.total.dimension + 1)]
    return rep, v.ok, f"build-cover: cells per dimension {counts}"


def cmd_verify_thm55(args):
    k = load_complex(args)
    base = _basepoint(args, k.cells_of(0))
    r = cube.verify_theorem55(k, base, _complex_phi(args, k))
    return r.to_json(), r.verdict.ok, (f"verify-thm55: {'pass' if r.verdict.ok else 'FAIL'}, "
                                       f"{r.relative_h1!r}")


def cmd_validate(args):
    if args.complex is not None:
        k = load_complex(args)
        v = cube.validate_cubical_set(k)
        d = cube.ChainComplex.of(k).check() if v else v
        what = "cubical set"
        v = Verdict.from_witnesses(list(v.witnesses) + ([] if d is v else list(d.witnesses)))
    elif args.groupoid is not None:
        data, _ = load_json(args.groupoid)
        g = load_groupoid(data)
        v = gpd.validate(g) if isinstance(g, ExplicitGroupoid) else Verdict(True)
        what = "groupoid"
    elif args.phi is not None:
        load_phi(args.phi)
        v, what = Verdict(True), "phi"
    elif args.group is not None:
        G = load_group(args.group)
        v, what = G.validate(), "group"
    else:
        raise InputError("validate needs --complex, --groupoid, --phi or --group")
    if not v:
        raise InputError(f"invalid {what}: " + "; ".join(v.witnesses))
    return {"ok": True, "witnesses": []}, True, f"validate: valid {what}"


HANDLERS = {
    'snf': cmd_snf, 'abelianise': cmd_abelianise, 'totab': cmd_totab,
    'cover-check': cmd_cover_check, 'cover-build': cmd_cover_build, 'lift': cmd_lift,
    'derived-module': cmd_derived_module, 'crowell': cmd_crowell,
    'verify-thm41': cmd_verify_thm41, 'homology': cmd_homology, 'hurewicz': cmd_hurewicz,
    'build-cover': cmd_build_cover, 'verify-thm55': cmd_verify_thm55, 'validate': cmd_validate,
}


def build_parser():
    p = argparse.ArgumentParser(prog='gpdcover', description=__doc__.split('\n\n')[0].strip())
    p.add_argument('verb', choices=VERBS)
    p.add_argument('--out', metavar='PATH')
    p.add_argument('--format', choices=('json', 'text'), default='json')
    p.add_argument('--dim', type=int)
    p.add_argument('--basepoint', metavar='ID')
    p.add_argument('--vertices', metavar='ID,ID,...')
    p.add_argument('--phi', metavar='FILE')
    p.add_argument('--group', metavar='FILE|NAME')
    p.add_argument('--complex', metavar='FILE')
    p.add_argument('--groupoid', metavar='FILE')
    p.add_argument('--matrix', metavar='FILE')
    p.add_argument('--morphism', metavar='FILE')
    p.add_argument('--action', metavar='FILE')
    p.add_argument('--sequence', metavar='WORD', help='e.g. "~b ~a b a"')
    p.add_argument('--rel0', action='store_true', help='homology rel_0 the --vertices')
    return p


def render_text(report, indent=0):
    lines = []
    pad = '  ' * indent
    for key in sorted(report):
        value = report[key]
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(render_text(value, indent + 1))
        else:
            lines.append(f"{pad}{key}: {json.dumps(value, sort_keys=True)}")
    return lines


def run(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        report, ok, summary = HANDLERS[args.verb](args)
    except (InputError, ValueError, KeyError, ArithmeticError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"{args.verb}: error: {msg}", file=stderr)
        return 1
    if args.format == 'json':
        text = json.dumps(report, sort_keys=True, indent=2) + '\n'
    else:
        text = '\n'.join(render_text(report)) + '\n'
    if args.out:
        Path(args.out).write_text(text)
    else:
        stdout.write(text)
    print(summary, file=stderr)
    return 0 if ok else 2


def main():
    sys.exit(run())
