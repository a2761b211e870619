"""Independent fine-step ray-march oracle for first-hit checks.

Marches 1e-3 along the ray; whenever the sampled cell changes, the boundary
crossings inside that window are resolved exactly (at most one per axis per
window), so no cell the ray crosses can be skipped no matter how thin the
clip. Shares no traversal state with the incremental DDA it checks.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

STEP = 1e-3


@njit(cache=True)
def march_first_hit(grid, ox, oy, oz, solid, ex, ey, ez, dx, dy, dz, max_dist):
    """Returns (hit, cx, cy, cz, t_entry) in world coordinates."""
    nx, ny, nz = grid.shape[0], grid.shape[1], grid.shape[2]

    # box clip (in grid-local coordinates)
    gx, gy, gz = ex - ox, ey - oy, ez - oz
    t0 = 0.0
    t1 = max_dist
    for axis in range(3):
        if axis == 0:
            o, d, n = gx, dx, nx
        elif axis == 1:
            o, d, n = gy, dy, ny
        else:
            o, d, n = gz, dz, nz
        if abs(d) < 1e-15:
            if o < 0.0 or o > n:
                return False, 0, 0, 0, 0.0
        else:
            ta = (0.0 - o) / d
            tb = (n - o) / d
            if ta > tb:
                ta, tb = tb, ta
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
    if t0 > t1:
        return False, 0, 0, 0, 0.0

    t = t0
    px = gx + dx * (t + 1e-12)
    py = gy + dy * (t + 1e-12)
    pz = gz + dz * (t + 1e-12)
    cx = int(math.floor(px))
    cy = int(math.floor(py))
    cz = int(math.floor(pz))
    if 0 <= cx < nx and 0 <= cy < ny and 0 <= cz < nz and solid[grid[cx, cy, cz]]:
        return True, cx + ox, cy + oy, cz + oz, t

    while t <= t1:
        t2 = t + STEP
        qx = gx + dx * t2
        qy = gy + dy * t2
        qz = gz + dz * t2
        nx2 = int(math.floor(qx))
        ny2 = int(math.floor(qy))
        nz2 = int(math.floor(qz))
        if nx2 != cx or ny2 != cy or nz2 != cz:
            # resolve boundary crossings inside (t, t2]; one per axis max
            times = np.full(3, 1e30)
            newc = np.zeros(3, dtype=np.int64)
            if nx2 != cx:
                plane = cx + 1 if nx2 > cx else cx
                times[0] = (plane - gx) / dx
                newc[0] = nx2
            if ny2 != cy:
                plane = cy + 1 if ny2 > cy else cy
                times[1] = (plane - gy) / dy
                newc[1] = ny2
            if nz2 != cz:
                plane = cz + 1 if nz2 > cz else cz
                times[2] = (plane - gz) / dz
                newc[2] = nz2
            for _ in range(3):
                best = -1
                best_t = 1e30
                for a in range(3):
                    if times[a] < best_t:
                        best_t = times[a]
                        best = a
                if best < 0:
                    break
                times[best] = 1e30
                if best == 0:
                    cx = newc[0]
                elif best == 1:
                    cy = newc[1]
                else:
                    cz = newc[2]
                if best_t > t1:
                    return False, 0, 0, 0, 0.0
                if 0 <= cx < nx and 0 <= cy < ny and 0 <= cz < nz:
                    if solid[grid[cx, cy, cz]]:
                        return True, cx + ox, cy + oy, cz + oz, best_t
        t = t2
    return False, 0, 0, 0, 0.0


@njit(cache=True)
def march_image(grid, ox, oy, oz, solid, ex, ey, ez,
                fx, fy, fz, rx, ry, rz, ux, uy, uz, tan_h, tan_v,
                max_dist, cells, tvals):
    """Fine-step march for every pixel ray of a frame (same ray formula as
    the renderer's pixel rays)."""
    h, w = cells.shape[0], cells.shape[1]
    for py in range(h):
        vv = 1.0 - 2.0 * (py + 0.5) / h
        for px in range(w):
            uu = 2.0 * (px + 0.5) / w - 1.0
            dx = fx + uu * tan_h * rx + vv * tan_v * ux
            dy = fy + uu * tan_h * ry + vv * tan_v * uy
            dz = fz + uu * tan_h * rz + vv * tan_v * uz
            inv = 1.0 / math.sqrt(dx * dx + dy * dy + dz * dz)
            dx *= inv
            dy *= inv
            dz *= inv
            hit, cx, cy, cz, t = march_first_hit(
                grid, ox, oy, oz, solid, ex, ey, ez, dx, dy, dz, max_dist
            )
            if hit:
                cells[py, px, 0] = cx
                cells[py, px, 1] = cy
                cells[py, px, 2] = cz
                tvals[py, px] = t
            else:
                cells[py, px, 0] = -1
                cells[py, px, 1] = -1
                cells[py, px, 2] = -1
                tvals[py, px] = -1.0


def solid_lut_for(world) -> np.ndarray:
    lut = np.zeros(65536, dtype=np.bool_)
    reg = world.registry
    for nid in range(len(reg)):
        lut[nid] = reg.get(nid).solid
    lut[0xFFFF] = True
    return lut


def oracle_raycast(world, origin, direction, max_dist):
    """(hit, cell, t_entry) using the fine-step march over the world grid."""
    (ox, oy, oz), grid = world.dense()
    lut = solid_lut_for(world)
    hit, cx, cy, cz, t = march_first_hit(
        grid, ox, oy, oz, lut,
        float(origin[0]), float(origin[1]), float(origin[2]),
        float(direction[0]), float(direction[1]), float(direction[2]),
        float(max_dist),
    )
    return hit, (cx, cy, cz), t


def entry_point_edge_distance(origin, direction, t_entry):
    """Distance of the hit point from the nearest cell edge, transversally.

    The entry point sits on one cell face; ambiguity comes from how close
    it is to that face's edges, i.e. how close the *other* coordinates are
    to the integer lattice.
    """
    coords = [origin[a] + direction[a] * t_entry for a in range(3)]
    dists = sorted(abs(c - round(c)) for c in coords)
    # the smallest distance is the entry plane itself (should be ~0);
    # the next one is the closest edge
    return dists[1]
