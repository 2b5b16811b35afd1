"""Regenerate the bundled example corpus in src/gpdcover/corpus."""

import json
import sys
from pathlib import Path

from gpdcover.cover import FinGroup, GroupMorphismToFin, pullback_groupoid, universal_cover_of_group
from gpdcover.cube import models
from gpdcover.gpd import GroupPresentation

OUT = Path(__file__).resolve().parent.parent / 'src' / 'gpdcover' / 'corpus'


def corpus():
    K = FinGroup.klein()
    S3 = FinGroup.symmetric(3)
    files = {
        'klein.json': K.to_json(),
        's3.json': S3.to_json(),
        'c4.json': FinGroup.cyclic(4).to_json(),
    }
    tilde, proj, _ = universal_cover_of_group(K)
    files['klein_universal_cover.json'] = tilde.to_json()
    files['klein_as_groupoid.json'] = K.as_groupoid().to_json()
    files['klein_cover_morphism.json'] = {
        "source": "klein_universal_cover.json",
        "target": "klein_as_groupoid.json",
        "object_map": {str(tilde.to_json()["objects"][i]): "*" for i in range(len(tilde.objects))},
        "arrow_map": {f"({g},{h})": g for g, h in tilde.arrows},
    }
    f2 = GroupPresentation(["x", "y"])
    for name, G, imgs in (('cayley_klein.json', K, {"x": "a", "y": "b"}),
                          ('cayley_s3.json', S3, {"x": S3.names[1], "y": S3.names[2]})):
        phi = GroupMorphismToFin.by_names(f2, G, imgs)
        files[name] = pullback_groupoid(phi).groupoid.to_json()

    files['f2_onto_k4.json'] = {"group": "klein.json", "images": {"x": "a", "y": "b"}}
    files['f2_onto_s3.json'] = {"group": "s3.json", "images": {"x": S3.names[1], "y": S3.names[2]}}
    files['c2_relator_onto_c2.json'] = {
        "group": "C2", "images": {"a": "g"},
        "presentation": {"generators": ["a"], "relators": [["a", "a"]]}}
    files['z2_onto_c4.json'] = {
        "group": "c4.json", "images": {"a": "g", "b": "g^2"},
        "presentation": {"generators": ["a", "b"], "relators": [["a", "b", "~a", "~b"]]}}
    files['snf_example.json'] = {"matrix": [["2", "4", "4"], ["-6", "6", "12"], ["10", "-4", "-16"]]}
    files['relator_group.json'] = {"generators": ["a", "b"],
                                   "relators": [["a", "a"], ["a", "b", "~a", "~b"]]}

    for name, k in (('point', models.point()), ('interval', models.interval()),
                    ('circle', models.circle()), ('two_vertex_circle', models.two_vertex_circle()),
                    ('torus', models.torus()),
                    ('pseudo_projective_plane', models.pseudo_projective_plane()),
                    ('wedge2', models.wedge(2)), ('square', models.square()),
                    ('bad_square', models.bad_square()),
                    ('circle_torus', models.disjoint_union(models.circle(), models.torus()))):
        files[f'{name}.json'] = k.to_json()
    files['circle_c3.json'] = {"group": "C3", "images": {"e": "g"}}
    files['torus_c2.json'] = {"group": "C2", "images": {"a": "g", "b": "1"}}
    files['wedge2_c2.json'] = {"group": "C2", "images": {"e1": "g", "e2": "g"}}
    return files


def render(data):
    return json.dumps(data, indent=1, sort_keys=True) + '\n'


def main(out=OUT):
    out.mkdir(parents=True, exist_ok=True)
    for name, data in corpus().items():
        (out / name).write_text(render(data))
    return 0


if __name__ == '__main__':
    sys.exit(main())
