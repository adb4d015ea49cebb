#!/usr/bin/env python3
"""Generate the obstacle-channel mesh fixtures.

Domain: unit square with a circular hole of radius 0.1 centered at
(0.5, 0.5). The point set is graded: a uniform base grid of spacing
2*h_min everywhere, refined to h_min inside a band around the circle,
plus a polygonal approximation of the circle itself. Only the left half
(x <= 0.5) is triangulated (scipy Delaunay + Laplacian smoothing); the
right half is its mirror image, so the mesh is exactly symmetric about
x = 0.5.

Usage:
    python3 scripts/gen_obstacle_mesh.py <log2_hmin> <out.msh>

    log2_hmin = 7 gives h_min = 1/128 (base 1/64), the main fixture;
    log2_hmin = 5 gives a coarse variant for fast tests.
"""

import sys

import numpy as np
from scipy.spatial import Delaunay

CX, CY, R = 0.5, 0.5, 0.1


def half_points(k: int):
    n_f = 2**k
    n_c = n_f // 2
    h_f = 1.0 / n_f
    r_excl = R + 0.45 * h_f
    r_band = R + 8.0 * h_f
    pts = []

    def dist(x, y):
        return np.hypot(x - CX, y - CY)

    # base grid on the half rectangle
    for j in range(n_c + 1):
        for i in range(n_c // 2 + 1):
            x, y = i / n_c, j / n_c
            if dist(x, y) >= r_excl:
                pts.append((x, y))
    # refined band (skip points already on the base grid)
    for j in range(n_f + 1):
        for i in range(n_f // 2 + 1):
            if i % 2 == 0 and j % 2 == 0:
                continue
            x, y = i / n_f, j / n_f
            if r_excl <= dist(x, y) <= r_band:
                pts.append((x, y))
    # circle polygon, left half including the two points on x = 0.5
    n_circ = 10 * 2**(k - 4) * 4 // 4
    n_circ = {5: 20, 6: 40, 7: 80}.get(k, 10 * 2 ** (k - 3))
    for m in range(n_circ // 4, 3 * n_circ // 4 + 1):
        th = 2.0 * np.pi * m / n_circ
        pts.append((CX + R * np.cos(th), CY + R * np.sin(th)))

    pts = np.array(sorted(set(pts)))
    return pts, h_f, n_circ


def triangulate(pts):
    tri = Delaunay(pts)
    cells = tri.simplices.copy()
    cent = pts[cells].mean(axis=1)
    keep = np.hypot(cent[:, 0] - CX, cent[:, 1] - CY) >= R
    # drop degenerate slivers as well
    p0, p1, p2 = pts[cells[:, 0]], pts[cells[:, 1]], pts[cells[:, 2]]
    area = 0.5 * ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
                  - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0]))
    keep &= np.abs(area) > 1e-14
    return cells[keep]


def smooth(pts, h_f, iterations=4):
    movable = np.ones(len(pts), dtype=bool)
    x, y = pts[:, 0], pts[:, 1]
    eps = 1e-12
    movable &= (x > eps) & (x < 0.5 - eps)
    movable &= (y > eps) & (y < 1.0 - eps)
    movable &= np.hypot(x - CX, y - CY) > R + 1.5 * h_f

    for _ in range(iterations):
        cells = triangulate(pts)
        nbr_sum = np.zeros_like(pts)
        nbr_cnt = np.zeros(len(pts))
        for a, b in ((0, 1), (1, 2), (2, 0)):
            np.add.at(nbr_sum, cells[:, a], pts[cells[:, b]])
            np.add.at(nbr_cnt, cells[:, a], 1)
            np.add.at(nbr_sum, cells[:, b], pts[cells[:, a]])
            np.add.at(nbr_cnt, cells[:, b], 1)
        ok = movable & (nbr_cnt > 0)
        pts = pts.copy()
        pts[ok] = nbr_sum[ok] / nbr_cnt[ok, None]
    return pts


def mirror(pts, cells):
    """Mirror the half mesh about x = 0.5 and merge the seam."""
    n = len(pts)
    right_index = np.full(n, -1, dtype=int)
    new_pts = list(map(tuple, pts))
    for i, (x, y) in enumerate(pts):
        if x >= 0.5 - 1e-12:
            right_index[i] = i  # on the seam: shared vertex
        else:
            right_index[i] = len(new_pts)
            new_pts.append((1.0 - x, y))
    all_cells = [tuple(c) for c in cells]
    for a, b, c in cells:
        # mirroring flips orientation; swap two vertices to restore it
        all_cells.append((right_index[a], right_index[c], right_index[b]))
    return np.array(new_pts), np.array(all_cells)


def orient_ccw(pts, cells):
    p0, p1, p2 = pts[cells[:, 0]], pts[cells[:, 1]], pts[cells[:, 2]]
    area = 0.5 * ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
                  - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0]))
    flip = area < 0
    cells[flip, 1], cells[flip, 2] = cells[flip, 2].copy(), cells[flip, 1].copy()
    return cells, np.abs(area)


def validate(pts, cells, areas):
    from collections import defaultdict
    edges = defaultdict(int)
    for a, b, c in cells:
        for u, v in ((a, b), (b, c), (c, a)):
            edges[(min(u, v), max(u, v))] += 1
    counts = np.array(list(edges.values()))
    assert counts.max() <= 2, "non-manifold edge"
    v, e, c = len(pts), len(edges), len(cells)
    assert v - e + c == 0, f"Euler characteristic {v - e + c} != 0 (one hole expected)"
    assert areas.min() > 0
    # min angle
    amin = 180.0
    for tri in cells:
        p = pts[tri]
        for i in range(3):
            u = p[(i + 1) % 3] - p[i]
            w = p[(i + 2) % 3] - p[i]
            cosang = np.dot(u, w) / (np.linalg.norm(u) * np.linalg.norm(w))
            amin = min(amin, np.degrees(np.arccos(np.clip(cosang, -1, 1))))
    n_bnd = int((counts == 1).sum())
    return v, e, c, n_bnd, amin


def main():
    k = int(sys.argv[1])
    out = sys.argv[2]
    pts, h_f, n_circ = half_points(k)
    pts = smooth(pts, h_f)
    cells = triangulate(pts)
    pts, cells = mirror(pts, cells)
    cells, areas = orient_ccw(pts, cells)
    v, e, c, n_bnd, amin = validate(pts, cells, areas)
    total = areas.sum()
    print(f"h_min = 1/{2**k}: {v} vertices, {c} cells, {e} edges "
          f"({n_bnd} boundary), area {total:.12f}, min angle {amin:.1f} deg")
    print(f"velocity DoFs {2 * v + c}, pressure DoFs {c}")

    with open(out, "w") as f:
        f.write("# unit square with circular hole (center 0.5 0.5, radius 0.1)\n")
        f.write(f"# graded: base spacing 1/{2**(k-1)}, 1/{2**k} near the circle, "
                f"{n_circ}-point circle polygon\n")
        f.write("# mirror-symmetric about x = 0.5; "
                "generated by scripts/gen_obstacle_mesh.py\n")
        f.write(f"area {total:.17g}\n")
        f.write(f"vertices {v}\n")
        for x, y in pts:
            f.write(f"{x:.17g} {y:.17g}\n")
        f.write(f"cells {c}\n")
        for a, b, cc in cells:
            f.write(f"{a} {b} {cc}\n")


if __name__ == "__main__":
    main()
