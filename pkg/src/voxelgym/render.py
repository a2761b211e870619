"""Software raycast renderer producing the agent's RGB observation.

Per pixel: cast a ray through the pixel center, walk the voxel grid (exact
DDA), test entity boxes, shade the nearest hit by entry face and distance,
or fall back to the sky gradient. All shading runs in double precision and
rounds half-to-even to bytes at the very end, so identical inputs give
byte-identical frames everywhere. The per-pixel loop is JIT-compiled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .sim import EYE_HEIGHT, SPIDER_COLOR, SPIDER_HALF
from .world import VoxelWorld

VIEW_DISTANCE = 64.0
DEFAULT_FOV_H = 72.0

SKY_TOP = (120.0, 167.0, 255.0)
SKY_HORIZON = (200.0, 220.0, 255.0)

FACE_TOP = 1.0
FACE_BOTTOM = 0.5
FACE_X = 0.8
FACE_Z = 0.6
MIN_DIST_FACTOR = 0.2


@dataclass(frozen=True)
class Camera:
    eye: tuple[float, float, float]
    yaw: float
    pitch: float
    fov_h: float = DEFAULT_FOV_H

    def __post_init__(self):
        if not 10.0 < self.fov_h < 170.0:
            raise ValueError("fov_h must be in (10, 170) degrees")

    @classmethod
    def for_player(cls, player) -> "Camera":
        return cls(
            eye=(player.pos[0], player.pos[1] + EYE_HEIGHT, player.pos[2]),
            yaw=player.yaw,
            pitch=player.pitch,
        )


@dataclass(frozen=True)
class Framebuffer:
    w: int
    h: int
    pixels: bytes  # row-major, top row first, RGB

    def __post_init__(self):
        if len(self.pixels) != 3 * self.w * self.h:
            raise ValueError("framebuffer byte count does not match dimensions")

    def as_array(self) -> np.ndarray:
        return np.frombuffer(self.pixels, dtype=np.uint8).reshape(self.h, self.w, 3)


def camera_basis(camera: Camera):
    """(forward, right, up) orthonormal basis for the view."""
    yr = math.radians(camera.yaw)
    pr = math.radians(camera.pitch)
    f = (math.sin(yr) * math.cos(pr), math.sin(pr), math.cos(yr) * math.cos(pr))
    r = (math.cos(yr), 0.0, -math.sin(yr))
    u = (
        f[1] * r[2] - f[2] * r[1],
        f[2] * r[0] - f[0] * r[2],
        f[0] * r[1] - f[1] * r[0],
    )
    return f, r, u


def pixel_ray(camera: Camera, px: int, py: int, w: int, h: int) -> tuple[float, float, float]:
    """Unit direction through the center of pixel (px, py); py 0 is the top row."""
    if not (0 <= px < w and 0 <= py < h):
        raise ValueError("pixel index out of range")
    f, r, u = camera_basis(camera)
    tan_h = math.tan(math.radians(camera.fov_h) / 2.0)
    tan_v = tan_h * h / w
    uu = 2.0 * (px + 0.5) / w - 1.0
    vv = 1.0 - 2.0 * (py + 0.5) / h
    dx = f[0] + uu * tan_h * r[0] + vv * tan_v * u[0]
    dy = f[1] + uu * tan_h * r[1] + vv * tan_v * u[1]
    dz = f[2] + uu * tan_h * r[2] + vv * tan_v * u[2]
    inv = 1.0 / math.sqrt(dx * dx + dy * dy + dz * dz)
    return (dx * inv, dy * inv, dz * inv)


@njit(cache=True)
def _round_even(v):
    f = math.floor(v)
    frac = v - f
    if frac > 0.5:
        return f + 1.0
    if frac < 0.5:
        return f
    if f % 2.0 == 0.0:
        return f
    return f + 1.0


@njit(cache=True)
def _shade_kernel(grid, ox, oy, oz, solid, colors, emissive,
                  ex, ey, ez, fx, fy, fz, rx, ry, rz, ux, uy, uz,
                  tan_h, tan_v, max_dist,
                  ent_mins, ent_maxs, ent_colors, out, cells):
    h = out.shape[0]
    w = out.shape[1]
    nx, ny, nz = grid.shape[0], grid.shape[1], grid.shape[2]
    n_ents = ent_mins.shape[0]
    for py in range(h):
        vv = 1.0 - 2.0 * (py + 0.5) / h
        if h > 1:
            tsky = py / (h - 1.0)
        else:
            tsky = 0.0
        for px in range(w):
            uu = 2.0 * (px + 0.5) / w - 1.0
            dx = fx + uu * tan_h * rx + vv * tan_v * ux
            dy = fy + uu * tan_h * ry + vv * tan_v * uy
            dz = fz + uu * tan_h * rz + vv * tan_v * uz
            inv = 1.0 / math.sqrt(dx * dx + dy * dy + dz * dz)
            dx *= inv
            dy *= inv
            dz *= inv

            # clip the ray against the grid box
            t0 = 0.0
            t1 = max_dist
            inside = True
            for axis in range(3):
                if axis == 0:
                    o = ex - ox
                    d = dx
                    n = nx
                elif axis == 1:
                    o = ey - oy
                    d = dy
                    n = ny
                else:
                    o = ez - oz
                    d = dz
                    n = nz
                if abs(d) < 1e-15:
                    if o < 0.0 or o > n:
                        inside = False
                        break
                else:
                    ta = (0.0 - o) / d
                    tb = (n - o) / d
                    if ta > tb:
                        ta, tb = tb, ta
                    if ta > t0:
                        t0 = ta
                    if tb < t1:
                        t1 = tb

            hit_id = -1
            hit_t = 0.0
            hit_axis = 0
            hit_sign = 1
            if inside and t0 <= t1:
                gx = ex - ox
                gy = ey - oy
                gz = ez - oz
                cx = int(math.floor(gx + dx * (t0 + 1e-12)))
                cy = int(math.floor(gy + dy * (t0 + 1e-12)))
                cz = int(math.floor(gz + dz * (t0 + 1e-12)))
                stx = 1 if dx > 0 else (-1 if dx < 0 else 0)
                sty = 1 if dy > 0 else (-1 if dy < 0 else 0)
                stz = 1 if dz > 0 else (-1 if dz < 0 else 0)
                big = 1e30
                if stx != 0:
                    tmx = t0 + ((cx + (1 if stx > 0 else 0)) - (gx + dx * t0)) / dx
                    tdx = abs(1.0 / dx)
                else:
                    tmx = big
                    tdx = big
                if sty != 0:
                    tmy = t0 + ((cy + (1 if sty > 0 else 0)) - (gy + dy * t0)) / dy
                    tdy = abs(1.0 / dy)
                else:
                    tmy = big
                    tdy = big
                if stz != 0:
                    tmz = t0 + ((cz + (1 if stz > 0 else 0)) - (gz + dz * t0)) / dz
                    tdz = abs(1.0 / dz)
                else:
                    tmz = big
                    tdz = big
                t = t0
                entry_axis = -1
                entry_sign = 0
                while t <= t1:
                    if 0 <= cx < nx and 0 <= cy < ny and 0 <= cz < nz:
                        nid = grid[cx, cy, cz]
                        if solid[nid]:
                            if entry_axis < 0:
                                # started inside: attribute the dominant axis
                                if abs(dx) >= abs(dy) and abs(dx) >= abs(dz):
                                    entry_axis = 0
                                    entry_sign = -stx if stx != 0 else 1
                                elif abs(dy) >= abs(dz):
                                    entry_axis = 1
                                    entry_sign = -sty if sty != 0 else 1
                                else:
                                    entry_axis = 2
                                    entry_sign = -stz if stz != 0 else 1
                            hit_id = nid
                            hit_t = t
                            hit_axis = entry_axis
                            hit_sign = entry_sign
                            cells[py, px, 0] = cx + ox
                            cells[py, px, 1] = cy + oy
                            cells[py, px, 2] = cz + oz
                            break
                    if tmx < tmy and tmx < tmz:
                        t = tmx
                        cx += stx
                        tmx += tdx
                        entry_axis = 0
                        entry_sign = -stx
                    elif tmy < tmz:
                        t = tmy
                        cy += sty
                        tmy += tdy
                        entry_axis = 1
                        entry_sign = -sty
                    else:
                        t = tmz
                        cz += stz
                        tmz += tdz
                        entry_axis = 2
                        entry_sign = -stz

            # entity boxes: flat color, nearest wins strictly
            ent_idx = -1
            ent_t = 0.0
            for i in range(n_ents):
                et0 = 0.0
                et1 = max_dist
                miss = False
                for axis in range(3):
                    if axis == 0:
                        o = ex
                        d = dx
                    elif axis == 1:
                        o = ey
                        d = dy
                    else:
                        o = ez
                        d = dz
                    if abs(d) < 1e-15:
                        if o < ent_mins[i, axis] or o > ent_maxs[i, axis]:
                            miss = True
                            break
                    else:
                        ta = (ent_mins[i, axis] - o) / d
                        tb = (ent_maxs[i, axis] - o) / d
                        if ta > tb:
                            ta, tb = tb, ta
                        if ta > et0:
                            et0 = ta
                        if tb < et1:
                            et1 = tb
                if miss or et0 > et1:
                    continue
                if ent_idx < 0 or et0 < ent_t:
                    ent_idx = i
                    ent_t = et0

            if ent_idx >= 0 and (hit_id < 0 or ent_t < hit_t):
                dfac = 1.0 - ent_t / 64.0
                if dfac < MIN_DIST_FACTOR:
                    dfac = MIN_DIST_FACTOR
                for c in range(3):
                    v = ent_colors[ent_idx, c] * dfac
                    if v < 0.0:
                        v = 0.0
                    if v > 255.0:
                        v = 255.0
                    out[py, px, c] = np.uint8(_round_even(v))
                cells[py, px, 0] = -1
                cells[py, px, 1] = -1
                cells[py, px, 2] = -1
            elif hit_id >= 0:
                if hit_axis == 1:
                    ffac = FACE_TOP if hit_sign > 0 else FACE_BOTTOM
                elif hit_axis == 0:
                    ffac = FACE_X
                else:
                    ffac = FACE_Z
                if emissive[hit_id]:
                    dfac = 1.0
                else:
                    dfac = 1.0 - hit_t / 64.0
                    if dfac < MIN_DIST_FACTOR:
                        dfac = MIN_DIST_FACTOR
                for c in range(3):
                    v = colors[hit_id, c] * ffac * dfac
                    if v < 0.0:
                        v = 0.0
                    if v > 255.0:
                        v = 255.0
                    out[py, px, c] = np.uint8(_round_even(v))
            else:
                out[py, px, 0] = np.uint8(_round_even(120.0 + (200.0 - 120.0) * tsky))
                out[py, px, 1] = np.uint8(_round_even(167.0 + (220.0 - 167.0) * tsky))
                out[py, px, 2] = np.uint8(255)
                cells[py, px, 0] = -1
                cells[py, px, 1] = -1
                cells[py, px, 2] = -1


def _render_luts(registry):
    cached = getattr(registry, "_render_luts", None)
    if cached is not None and cached[0] == len(registry):
        return cached[1:]
    solid = np.zeros(65536, dtype=np.bool_)
    emissive = np.zeros(65536, dtype=np.bool_)
    colors = np.zeros((65536, 3), dtype=np.float64)
    for nid in range(len(registry)):
        ndef = registry.get(nid)
        solid[nid] = ndef.solid
        emissive[nid] = ndef.emissive
        colors[nid] = ndef.color
    barrier = registry.get(0xFFFF)
    solid[0xFFFF] = True
    emissive[0xFFFF] = barrier.emissive
    colors[0xFFFF] = barrier.color
    registry._render_luts = (len(registry), solid, colors, emissive)
    return solid, colors, emissive


def _entity_arrays(entities):
    n = len(entities)
    mins = np.zeros((n, 3), dtype=np.float64)
    maxs = np.zeros((n, 3), dtype=np.float64)
    colors = np.zeros((n, 3), dtype=np.float64)
    for i, e in enumerate(entities):
        mins[i] = (e.pos[0] - SPIDER_HALF[0], e.pos[1], e.pos[2] - SPIDER_HALF[2])
        maxs[i] = (
            e.pos[0] + SPIDER_HALF[0],
            e.pos[1] + 2 * SPIDER_HALF[1],
            e.pos[2] + SPIDER_HALF[2],
        )
        colors[i] = SPIDER_COLOR
    return mins, maxs, colors


def _render_raw(world: VoxelWorld, entities, camera: Camera, w: int, h: int):
    if w < 1 or h < 1:
        raise ValueError("framebuffer dimensions must be positive")
    origin, grid = world.dense()
    solid, colors, emissive = _render_luts(world.registry)
    mins, maxs, ecolors = _entity_arrays(entities)
    f, r, u = camera_basis(camera)
    tan_h = math.tan(math.radians(camera.fov_h) / 2.0)
    tan_v = tan_h * h / w
    out = np.zeros((h, w, 3), dtype=np.uint8)
    cells = np.full((h, w, 3), -1, dtype=np.int64)
    _shade_kernel(
        grid, origin[0], origin[1], origin[2], solid, colors, emissive,
        camera.eye[0], camera.eye[1], camera.eye[2],
        f[0], f[1], f[2], r[0], r[1], r[2], u[0], u[1], u[2],
        tan_h, tan_v, VIEW_DISTANCE, mins, maxs, ecolors, out, cells,
    )
    return out, cells


def render(world: VoxelWorld, entities, camera: Camera, w: int, h: int) -> Framebuffer:
    out, _ = _render_raw(world, entities, camera, w, h)
    return Framebuffer(w, h, out.tobytes())


def first_hit_cells(world: VoxelWorld, camera: Camera, w: int, h: int) -> np.ndarray:
    """Per-pixel first-hit voxel coordinates ((-1,-1,-1) for miss/entity)."""
    _, cells = _render_raw(world, [], camera, w, h)
    return cells
