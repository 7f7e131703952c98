"""Synthetic goban renderer with exact ground truth.

Renders a Go board under a pinhole camera (look-at basis, principal point at
the image centre) with procedural wood, grid lines, lens-shaped stones,
shadow polygons, and image-space occluders. Every render is deterministic
given (scene, seed) and returns the true grid-point projections, camera pose
and board occupancy, so recognition code can be scored against exact truth.

World frame: origin at the central grid point, x and y parallel to the grid
lines, z up. The unit of length is half of the longitudinal grid side, so the
grid corners sit at (+-1, +-t, 0) where t is the side ratio of the board.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .game import BLACK, EMPTY, WHITE, BoardState, apply_move
from .raster import Photo

STONE_HEIGHT = 0.10  # world units, lens thickness used by renderer and pose math

_WOOD_YELLOW = np.array([206.0, 168.0, 106.0])
_WOOD_GREY = np.array([162.0, 157.0, 150.0])
_TABLE_COLOR = np.array([74.0, 62.0, 54.0])
_LINE_COLOR = np.array([42.0, 32.0, 22.0])
_WHITE_STONE = np.array([233.0, 233.0, 228.0])
_BLACK_STONE = np.array([40.0, 38.0, 36.0])
_SKIN = np.array([186.0, 140.0, 106.0])
_SLEEVE = np.array([52.0, 48.0, 58.0])


@dataclass(frozen=True)
class StonePlacement:
    """A stone on the board: (col, row) grid indices plus its placement error
    as a fraction of the local cell pitch."""

    col: int
    row: int
    color: int
    offset: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class SceneSpec:
    """Full description of one rendered photograph."""

    size: int = 19
    t: float = 1.0
    camera: tuple[float, float, float] = (0.0, -4.0, 4.0)
    aim: tuple[float, float] = (0.0, 0.0)
    roll: float = 0.0
    focal_px: float = 1400.0
    width: int = 1024
    height: int = 768
    stones: tuple[StonePlacement, ...] = ()
    ambient: float = 1.0
    shadow_polys: tuple[tuple[tuple[float, float], ...], ...] = ()
    occluders: tuple[tuple[tuple[tuple[float, float], ...], str], ...] = ()
    noise_sigma: float = 2.0
    wood: str = "yellow"
    border_cells: float = 1.4
    star_points: bool = True

    def cell_pitch(self) -> tuple[float, float]:
        step = 2.0 / (self.size - 1)
        return step, self.t * step

    def world_x(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.size)

    def world_y(self) -> np.ndarray:
        return np.linspace(-self.t, self.t, self.size)


@dataclass(frozen=True)
class TruePose:
    camera: np.ndarray  # (3,) world
    aim: np.ndarray  # (2,) world, on the board plane
    roll: float
    t: float
    focal_px: float

    @property
    def elevation(self) -> float:
        horiz = math.hypot(self.camera[0] - self.aim[0], self.camera[1] - self.aim[1])
        return math.atan2(self.camera[2], horiz)


@dataclass
class RenderTruth:
    """Exact per-render ground truth."""

    grid_points: np.ndarray  # (n, n, 2): [row i, col j] -> image (x, y)
    pose: TruePose
    cells: np.ndarray  # (n, n) int8, [row, col]
    stone_centers: dict  # (col, row) -> image (x, y) of the lens centre
    spec: SceneSpec


class CameraModel:
    """Pinhole camera with look-at basis; shared by render and projection."""

    def __init__(self, spec: SceneSpec):
        n = np.array(spec.camera, dtype=np.float64)
        g = np.array([spec.aim[0], spec.aim[1], 0.0])
        fwd = g - n
        norm = np.linalg.norm(fwd)
        if norm <= 0 or n[2] <= 0:
            raise ValueError("camera must sit above the board, aimed at it")
        fwd = fwd / norm
        up_w = np.array([0.0, 0.0, 1.0])
        e_u0 = np.cross(fwd, up_w)
        if np.linalg.norm(e_u0) < 1e-9:  # straight top-down
            e_u0 = np.array([1.0, 0.0, 0.0])
        e_u0 /= np.linalg.norm(e_u0)
        e_v0 = np.cross(fwd, e_u0)
        c, s = math.cos(spec.roll), math.sin(spec.roll)
        self.e_u = c * e_u0 + s * e_v0
        self.e_v = -s * e_u0 + c * e_v0
        self.fwd = fwd
        self.origin = n
        self.focal = float(spec.focal_px)
        self.cx = spec.width / 2.0
        self.cy = spec.height / 2.0

    def project(self, points: np.ndarray) -> np.ndarray:
        """World (..., 3) -> image (..., 2)."""
        q = np.asarray(points, dtype=np.float64) - self.origin
        z = q @ self.fwd
        u = self.cx + self.focal * (q @ self.e_u) / z
        v = self.cy + self.focal * (q @ self.e_v) / z
        return np.stack([u, v], axis=-1)

    def board_intersections(self, width: int, height: int):
        """Per-pixel world (x, y) where each pixel ray meets the board plane."""
        us = np.arange(width, dtype=np.float64) + 0.5
        vs = np.arange(height, dtype=np.float64) + 0.5
        du = (us - self.cx) / self.focal
        dv = (vs - self.cy) / self.focal
        dxu = du[None, :, None] * self.e_u[None, None, :]
        dxv = dv[:, None, None] * self.e_v[None, None, :]
        d = self.fwd[None, None, :] + dxu + dxv
        dz = d[..., 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(dz < -1e-12, -self.origin[2] / dz, np.nan)
        wx = self.origin[0] + s * d[..., 0]
        wy = self.origin[1] + s * d[..., 1]
        return wx, wy, d


def _nearest_rail(coord: np.ndarray, rails: np.ndarray) -> np.ndarray:
    """Distance from each value to the nearest entry of a sorted rail array."""
    idx = np.searchsorted(rails, coord)
    idx = np.clip(idx, 1, len(rails) - 1)
    lo = rails[idx - 1]
    hi = rails[idx]
    return np.minimum(np.abs(coord - lo), np.abs(coord - hi))


def _pixel_scale(w_coord: np.ndarray) -> np.ndarray:
    """Per-pixel |gradient| of a world coordinate map, for analytic AA."""
    gy, gx = np.gradient(w_coord)
    scale = np.hypot(gx, gy)
    return np.maximum(scale, 1e-9)


def _coverage(dist_world: np.ndarray, halfwidth_world: float, scale: np.ndarray) -> np.ndarray:
    """Soft 1-pixel-wide coverage of |dist| <= halfwidth."""
    d_px = (halfwidth_world - dist_world) / scale
    return np.clip(d_px + 0.5, 0.0, 1.0)


def _point_in_polygon(xs: np.ndarray, ys: np.ndarray, poly: np.ndarray) -> np.ndarray:
    inside = np.zeros(xs.shape, dtype=bool)
    m = len(poly)
    for k in range(m):
        x0, y0 = poly[k]
        x1, y1 = poly[(k + 1) % m]
        crosses = (y0 <= ys) != (y1 <= ys)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_at = x0 + (ys - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (xs < x_at)
    return inside


_STAR_POINTS = {
    19: [(3, 3), (3, 9), (3, 15), (9, 3), (9, 9), (9, 15), (15, 3), (15, 9), (15, 15)],
    13: [(3, 3), (3, 9), (9, 3), (9, 9), (6, 6)],
    9: [(2, 2), (2, 6), (6, 2), (6, 6), (4, 4)],
}


def render(spec: SceneSpec, seed: int = 0) -> tuple[Photo, RenderTruth]:
    """Render one photograph and its exact ground truth."""
    rng = np.random.default_rng(seed)
    cam = CameraModel(spec)
    n = spec.size
    xs = spec.world_x()
    ys = spec.world_y()
    dx, dy = spec.cell_pitch()

    wx, wy, _ = cam.board_intersections(spec.width, spec.height)
    bad = ~np.isfinite(wx)
    wxs = np.where(bad, 1e6, wx)
    wys = np.where(bad, 1e6, wy)
    scale_x = _pixel_scale(wxs)
    scale_y = _pixel_scale(wys)

    base = _WOOD_YELLOW if spec.wood == "yellow" else _WOOD_GREY
    img = np.empty((spec.height, spec.width, 3), dtype=np.float64)
    img[:] = _TABLE_COLOR

    # Wood slab with a soft edge, then the grain.
    half_w = 1.0 + spec.border_cells * dx
    half_h = spec.t + spec.border_cells * dy
    inside_x = _coverage(np.abs(wxs), half_w, scale_x)
    inside_y = _coverage(np.abs(wys), half_h, scale_y)
    wood_cov = inside_x * inside_y
    wood_cov[bad] = 0.0
    phase = rng.uniform(0, 2 * math.pi, size=3)
    grain = (
        5.0 * np.sin(2 * math.pi * wys * 6.5 / spec.t + 2.2 * np.sin(2 * math.pi * wxs * 0.7) + phase[0])
        + 3.0 * np.sin(2 * math.pi * wxs * 2.3 + phase[1])
    )
    wood = base[None, None, :] + grain[..., None]
    img = wood_cov[..., None] * wood + (1 - wood_cov[..., None]) * img

    # Grid lines, clipped to the grid rectangle.
    line_hw = 0.022 * dx
    in_grid_y = _coverage(np.abs(wys), spec.t + line_hw, scale_y)
    in_grid_x = _coverage(np.abs(wxs), 1.0 + line_hw, scale_x)
    dist_vx = _nearest_rail(wxs.ravel(), xs).reshape(wxs.shape)
    dist_hy = _nearest_rail(wys.ravel(), ys).reshape(wys.shape)
    cov_v = _coverage(dist_vx, line_hw, scale_x) * in_grid_y
    cov_h = _coverage(dist_hy, line_hw, scale_y) * in_grid_x
    line_cov = np.clip(cov_v + cov_h, 0.0, 1.0) * wood_cov
    img = line_cov[..., None] * _LINE_COLOR[None, None, :] + (1 - line_cov[..., None]) * img

    if spec.star_points and n in _STAR_POINTS:
        star_r = 0.11 * dx
        for j, i in _STAR_POINTS[n]:
            d2 = np.hypot(wxs - xs[j], wys - ys[i])
            cov = _coverage(d2, star_r, np.maximum(scale_x, scale_y)) * wood_cov
            img = cov[..., None] * _LINE_COLOR[None, None, :] + (1 - cov[..., None]) * img

    # Shadows darken the board they fall on.
    for poly in spec.shadow_polys:
        mask = _point_in_polygon(wxs, wys, np.asarray(poly, dtype=np.float64))
        img[mask] *= 0.55

    img *= spec.ambient

    # Stones, farthest first so nearer lenses paint over.
    r_s = 0.5 * dx * 1.02
    half_h_stone = STONE_HEIGHT / 2.0
    light = np.array([0.25, -0.35, 0.9])
    light /= np.linalg.norm(light)
    cells = np.zeros((n, n), dtype=np.int8)
    stone_centers: dict = {}
    order = sorted(
        spec.stones,
        key=lambda s: -np.linalg.norm(
            np.array([xs[s.col] + s.offset[0] * dx, ys[s.row] + s.offset[1] * dy, 0.0])
            - np.asarray(spec.camera)
        ),
    )
    for stone in order:
        cells[stone.row, stone.col] = stone.color
        cx_w = xs[stone.col] + stone.offset[0] * dx
        cy_w = ys[stone.row] + stone.offset[1] * dy
        center = np.array([cx_w, cy_w, half_h_stone])
        stone_centers[(stone.col, stone.row)] = cam.project(center)
        img = _draw_stone(img, cam, spec, center, r_s, half_h_stone, stone.color, light, rng)

    # Image-space occluders (arms, hands) painted last.
    uu, vv = np.meshgrid(
        np.arange(spec.width, dtype=np.float64) + 0.5,
        np.arange(spec.height, dtype=np.float64) + 0.5,
    )
    for poly, kind in spec.occluders:
        mask = _point_in_polygon(uu, vv, np.asarray(poly, dtype=np.float64))
        color = _SKIN if kind == "skin" else _SLEEVE
        img[mask] = color + rng.normal(0, 3.0, size=(int(mask.sum()), 3))

    if spec.noise_sigma > 0:
        img += rng.normal(0.0, spec.noise_sigma, size=img.shape)
    photo = Photo(np.clip(img, 0, 255).astype(np.uint8))

    gx, gy = np.meshgrid(xs, ys)  # gy[i, j] = ys[i], gx[i, j] = xs[j]
    world_points = np.stack([gx, gy, np.zeros_like(gx)], axis=-1)
    grid_points = cam.project(world_points)
    pose = TruePose(
        camera=np.asarray(spec.camera, dtype=np.float64),
        aim=np.asarray(spec.aim, dtype=np.float64),
        roll=spec.roll,
        t=spec.t,
        focal_px=spec.focal_px,
    )
    return photo, RenderTruth(grid_points, pose, cells, stone_centers, spec)


def _draw_stone(img, cam: CameraModel, spec, center, r_s, half_h, color, light, rng):
    """Blend one lens-shaped stone (ellipsoid) into the image."""
    corners = center[None, :] + np.array(
        [
            [sx * r_s, sy * r_s, sz * half_h]
            for sx in (-1, 1)
            for sy in (-1, 1)
            for sz in (-1, 1)
        ]
    )
    proj = cam.project(corners)
    x0 = max(0, int(np.floor(proj[:, 0].min())) - 2)
    x1 = min(spec.width, int(np.ceil(proj[:, 0].max())) + 2)
    y0 = max(0, int(np.floor(proj[:, 1].min())) - 2)
    y1 = min(spec.height, int(np.ceil(proj[:, 1].max())) + 2)
    if x1 <= x0 or y1 <= y0:
        return img
    us = np.arange(x0, x1, dtype=np.float64) + 0.5
    vs = np.arange(y0, y1, dtype=np.float64) + 0.5
    du = (us - cam.cx) / cam.focal
    dv = (vs - cam.cy) / cam.focal
    d = (
        cam.fwd[None, None, :]
        + du[None, :, None] * cam.e_u[None, None, :]
        + dv[:, None, None] * cam.e_v[None, None, :]
    )
    scale = np.array([1.0 / r_s, 1.0 / r_s, 1.0 / half_h])
    o = (cam.origin - center) * scale
    dd = d * scale[None, None, :]
    a = np.einsum("ijk,ijk->ij", dd, dd)
    b = np.einsum("k,ijk->ij", o, dd)
    c = float(np.dot(o, o)) - 1.0
    disc = b * b - a * c
    # Signed-distance-ish AA from the discriminant's pixel gradient.
    gy_, gx_ = np.gradient(disc)
    gnorm = np.maximum(np.hypot(gx_, gy_), 1e-9)
    cov = np.clip(0.5 + disc / gnorm / 1.5, 0.0, 1.0)
    if not (cov > 0).any():
        return img
    safe_disc = np.maximum(disc, 0.0)
    with np.errstate(invalid="ignore"):
        s_hit = (-b - np.sqrt(safe_disc)) / np.maximum(a, 1e-12)
    hit = cam.origin[None, None, :] + s_hit[..., None] * d
    normal = (hit - center[None, None, :]) * (scale**2)[None, None, :]
    normal /= np.maximum(np.linalg.norm(normal, axis=-1, keepdims=True), 1e-9)
    lambert = np.clip(np.einsum("ijk,k->ij", normal, light), 0.0, 1.0)
    base = _WHITE_STONE if color == WHITE else _BLACK_STONE
    shade = (0.62 + 0.38 * lambert) if color == WHITE else (0.55 + 0.85 * lambert)
    tint = rng.normal(0, 2.0)
    stone_rgb = (base[None, None, :] + tint) * shade[..., None] * spec.ambient
    patch = img[y0:y1, x0:x1]
    img[y0:y1, x0:x1] = cov[..., None] * stone_rgb + (1 - cov[..., None]) * patch
    return img


# ---------------------------------------------------------------------------
# Scene construction helpers and whole-game corpora
# ---------------------------------------------------------------------------

PROFILES = {
    "optimal": {"elevation": (55.0, 70.0), "fill": (0.60, 0.72)},
    "good": {"elevation": (40.0, 55.0), "fill": (0.52, 0.68)},
    "fair": {"elevation": (30.0, 40.0), "fill": (0.42, 0.55)},
    "poor": {"elevation": (18.0, 30.0), "fill": (0.30, 0.45)},
}


def make_scene(
    size: int = 19,
    profile: str = "good",
    width: int = 1024,
    height: int = 768,
    t: float = 1.0,
    seed: int = 0,
    roll_range: float = 5.0,
    **overrides,
) -> SceneSpec:
    """Randomized scene within a named viewing-condition profile."""
    rng = np.random.default_rng(seed)
    prof = PROFILES[profile]
    elevation = math.radians(rng.uniform(*prof["elevation"]))
    fill = rng.uniform(*prof["fill"])
    azimuth = rng.uniform(0, 2 * math.pi)
    rho = rng.uniform(4.0, 6.5)
    aim = (rng.uniform(-0.25, 0.25), rng.uniform(-0.25, 0.25))
    cam = (
        aim[0] + rho * math.cos(elevation) * math.cos(azimuth),
        aim[1] + rho * math.cos(elevation) * math.sin(azimuth),
        rho * math.sin(elevation),
    )
    roll = math.radians(rng.uniform(-roll_range, roll_range))
    spec = SceneSpec(
        size=size,
        t=t,
        camera=cam,
        aim=aim,
        roll=roll,
        focal_px=1000.0,
        width=width,
        height=height,
        **overrides,
    )
    return fit_focal(spec, fill)


def fit_focal(spec: SceneSpec, fill: float, margin_cells: float = 2.4) -> SceneSpec:
    """Scale the focal length so the grid spans ``fill`` of the image width
    while the whole slab stays inside the frame with a tracking margin."""
    dx, dy = spec.cell_pitch()
    b = 1.0 + margin_cells * dx
    bt = spec.t + margin_cells * dy
    slab = np.array([[-b, -bt, 0.0], [b, -bt, 0.0], [b, bt, 0.0], [-b, bt, 0.0]])
    grid = np.array([[-1, -spec.t, 0.0], [1, -spec.t, 0.0], [1, spec.t, 0.0], [-1, spec.t, 0.0]])
    proj = CameraModel(spec).project(grid)
    span = max(proj[:, 0].max() - proj[:, 0].min(), proj[:, 1].max() - proj[:, 1].min())
    spec = replace(spec, focal_px=float(spec.focal_px * fill * spec.width / span))
    for _ in range(24):
        proj = CameraModel(spec).project(slab)
        if (
            proj[:, 0].min() > 4
            and proj[:, 0].max() < spec.width - 4
            and proj[:, 1].min() > 4
            and proj[:, 1].max() < spec.height - 4
        ):
            break
        spec = replace(spec, focal_px=float(spec.focal_px * 0.94))
    return spec


@dataclass
class GameFrame:
    """One emitted photo of a rendered game."""

    photo: Photo
    truth: RenderTruth
    state_after: BoardState
    new_moves: list  # [(color, (col, row))] new since the previous emitted frame
    kind: str  # initial | move | duplicate
    disturbed: bool = False


@dataclass
class GameCorpus:
    frames: list
    moves: list  # full move list [(color, (col, row))]
    size: int


def random_legal_moves(
    size: int, count: int, seed: int = 0, avoid_corners: bool = True
) -> list:
    """Alternating random legal moves (captures respected, corners optionally
    left free so late-game grid corners stay visible)."""
    rng = np.random.default_rng(seed)
    state = BoardState.empty(size)
    forbidden = set()
    if avoid_corners:
        m = size - 1
        forbidden = {(0, 0), (0, m), (m, 0), (m, m)}
    moves = []
    color = BLACK
    while len(moves) < count:
        empties = [p for p in state.empty_points() if p not in forbidden]
        if not empties:
            break
        coord = empties[int(rng.integers(len(empties)))]
        try:
            state, _, _ = apply_move(state, color, coord)
        except Exception:
            continue
        moves.append((color, coord))
        color = WHITE if color == BLACK else BLACK
    return moves


def _arm_polygon(spec: SceneSpec, rng, avoid_px=None, avoid_radius: float = 0.0):
    """Quadrilateral from a frame edge toward the middle, like a reaching arm."""
    w, h = spec.width, spec.height
    for _ in range(60):
        edge = int(rng.integers(4))
        along = rng.uniform(0.2, 0.8)
        width_px = rng.uniform(0.08, 0.16) * max(w, h)
        reach = rng.uniform(0.45, 0.8)
        if edge == 0:  # from bottom
            base = np.array([along * w, h + 2.0])
            tip = np.array([along * w + rng.uniform(-0.2, 0.2) * w, (1 - reach) * h])
        elif edge == 1:  # from top
            base = np.array([along * w, -2.0])
            tip = np.array([along * w + rng.uniform(-0.2, 0.2) * w, reach * h])
        elif edge == 2:  # from left
            base = np.array([-2.0, along * h])
            tip = np.array([reach * w, along * h + rng.uniform(-0.2, 0.2) * h])
        else:  # from right
            base = np.array([w + 2.0, along * h])
            tip = np.array([(1 - reach) * w, along * h + rng.uniform(-0.2, 0.2) * h])
        axis = tip - base
        perp = np.array([-axis[1], axis[0]])
        perp /= max(np.linalg.norm(perp), 1e-9)
        poly = np.array(
            [
                base + perp * width_px / 2,
                tip + perp * width_px / 2,
                tip - perp * width_px / 2,
                base - perp * width_px / 2,
            ]
        )
        if avoid_px is not None:
            d = _segment_distance(poly, np.asarray(avoid_px))
            if d < avoid_radius:
                continue
        kind = "skin" if rng.random() < 0.6 else "sleeve"
        return tuple(map(tuple, poly)), kind
    return None


def _segment_distance(poly: np.ndarray, p: np.ndarray) -> float:
    if _point_in_polygon(np.array([p[0]]), np.array([p[1]]), poly)[0]:
        return 0.0
    best = np.inf
    m = len(poly)
    for k in range(m):
        a, b = poly[k], poly[(k + 1) % m]
        ab = b - a
        tt = np.clip(np.dot(p - a, ab) / max(np.dot(ab, ab), 1e-12), 0, 1)
        best = min(best, float(np.linalg.norm(a + tt * ab - p)))
    return best


def render_game(
    base: SceneSpec,
    moves: list,
    seed: int = 0,
    jitter_px: float = 0.0,
    skipped: frozenset | set = frozenset(),
    duplicated: frozenset | set = frozenset(),
    occluded_moves: dict | None = None,
    stone_offset_sigma: float = 0.03,
    occluder_avoids_new_stone: bool = True,
) -> GameCorpus:
    """Render the photo series of a whole game.

    One photo per move plus the initial empty-board photo. ``skipped`` move
    indices emit no photo; ``duplicated`` indices emit a second, re-jittered
    photo of the same position. ``occluded_moves`` maps move index -> True to
    drop a random arm over that frame.
    """
    rng = np.random.default_rng(seed)
    occluded_moves = occluded_moves or {}
    cam0 = np.asarray(base.camera, dtype=np.float64)
    aim0 = np.asarray(base.aim, dtype=np.float64)
    # Convert an image-pixel jitter budget into world units at board distance.
    dist = np.linalg.norm(cam0 - np.array([aim0[0], aim0[1], 0.0]))
    jitter_w = jitter_px * dist / base.focal_px

    state = BoardState.empty(base.size)
    placements: list[StonePlacement] = []
    frames: list[GameFrame] = []

    def emit(kind, new_moves, disturbed_poly):
        spec = replace(
            base,
            stones=tuple(placements),
            camera=tuple(cam0 + rng.normal(0, jitter_w, 3) * np.array([1, 1, 0.6])),
            aim=tuple(aim0 + rng.normal(0, jitter_w * 0.5, 2)),
            occluders=base.occluders + ((disturbed_poly,) if disturbed_poly else ()),
        )
        photo, truth = render(spec, seed=int(rng.integers(2**31)))
        photo = Photo(photo.pixels, index=len(frames))
        frames.append(
            GameFrame(
                photo=photo,
                truth=truth,
                state_after=state,
                new_moves=list(new_moves),
                kind=kind,
                disturbed=disturbed_poly is not None,
            )
        )

    emit("initial", [], None)
    pending: list = []
    for k, (color, coord) in enumerate(moves):
        off = tuple(np.clip(rng.normal(0, stone_offset_sigma, 2), -0.2, 0.2))
        state, captured, _ = apply_move(state, color, coord)
        placements.append(StonePlacement(coord[0], coord[1], color, off))
        if captured:
            placements = [p for p in placements if (p.col, p.row) not in set(captured)]
        pending.append((color, coord))
        if k in skipped:
            continue
        poly = None
        if occluded_moves.get(k):
            avoid = None
            if occluder_avoids_new_stone:
                _, probe = render(replace(base, stones=tuple(placements)), seed=0)
                avoid = probe.stone_centers[(coord[0], coord[1])]
                pitch = np.linalg.norm(
                    probe.grid_points[0, 1] - probe.grid_points[0, 0]
                )
                poly = _arm_polygon(base, rng, avoid_px=avoid, avoid_radius=2.2 * pitch)
            else:
                poly = _arm_polygon(base, rng)
        emit("move", pending, poly)
        pending = []
        if k in duplicated:
            emit("duplicate", [], None)
    return GameCorpus(frames=frames, moves=list(moves), size=base.size)
