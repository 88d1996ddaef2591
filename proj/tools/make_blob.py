"""Writes the bundled genus-0 test mesh: a level-3 icosphere with a smooth
radial bump field, so curvature varies and both signs of K occur."""

import math
import sys


def icosphere(level):
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
             (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    verts = [unit(v) for v in verts]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
             (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
             (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    for _ in range(level):
        cache = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                cache[key] = len(verts)
                verts.append(unit(tuple((p + q) / 2 for p, q in zip(verts[a], verts[b]))))
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return verts, faces


def unit(v):
    n = math.sqrt(sum(c * c for c in v))
    return tuple(c / n for c in v)


def bump(v):
    x, y, z = v
    r = 1.0 + 0.22 * math.sin(2.0 * x + 0.5) * math.cos(1.5 * y) + 0.18 * z * z - 0.12 * x * y * z
    return (r * x, 0.8 * r * y, 1.2 * r * z)


def main(path):
    verts, faces = icosphere(3)
    with open(path, "w") as out:
        out.write("OFF\n%d %d 0\n" % (len(verts), len(faces)))
        for v in verts:
            out.write("%.12f %.12f %.12f\n" % bump(v))
        for f in faces:
            out.write("3 %d %d %d\n" % f)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "blob.off")
