"""Hough-transform machinery: full/sampled linear transform, bounded peak
extraction, and the local fragment searches (corner, line, ellipse) used by
the per-photo tracker and the stone detector.

Lines are parameterized in the shared polar frame by a signed offset from the
pole (in radial units) and an incline in [0, pi). The incline is the angle of
the line's direction measured counterclockwise (math convention, image y
down); the offset is taken along the normal at incline + pi/2. Flipping the
incline by pi negates the offset, so (d, theta) and (-d, theta + pi) name the
same line and `normalize_line` picks the canonical representative.

The offset is signed rather than unsigned: with the pole at the image centre,
an unsigned distance plus an incline mod pi cannot tell apart the two grid
lines that sit symmetrically about the centre, and every downstream ordering
of a line family relies on a monotone sweep coordinate.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from .raster import Photo, PolarFrame, binarize, difference_of_gaussians

# Classical low-discrepancy multipliers: fractional parts of k*sqrt(2), k*sqrt(3).
RICHTMYER_ALPHA = (math.sqrt(2.0), math.sqrt(3.0))

DEFAULT_INCLINE_BINS = 512
DEFAULT_DISTANCE_RES_PX = 2.0
DEFAULT_MAX_PEAKS = 128


@dataclass(frozen=True)
class PolarLine:
    """A line as (signed offset from the pole in units, incline in [0, pi))."""

    distance: float
    incline: float

    def direction(self) -> np.ndarray:
        """Unit direction vector in image coordinates (x right, y down)."""
        return np.array([math.cos(self.incline), -math.sin(self.incline)])

    def normal(self) -> np.ndarray:
        """Unit normal at incline + pi/2, the axis the offset is measured on."""
        a = self.incline + math.pi / 2.0
        return np.array([math.cos(a), -math.sin(a)])

    def base_point(self, frame: PolarFrame) -> np.ndarray:
        """Pixel point of the foot of the perpendicular from the pole."""
        n = self.normal()
        return np.array(frame.pole) + self.distance * frame.unit * n

    def point_at(self, frame: PolarFrame, s: float) -> np.ndarray:
        """Pixel point at arc-length s (pixels) from the base point."""
        return self.base_point(frame) + s * self.direction()

    def offset_of(self, frame: PolarFrame, p: np.ndarray) -> float:
        """Signed offset (units) of pixel point(s) p measured along the normal."""
        n = self.normal()
        p = np.asarray(p, dtype=np.float64)
        return ((p[..., 0] - frame.pole[0]) * n[0] + (p[..., 1] - frame.pole[1]) * n[1]) / frame.unit


def normalize_line(distance: float, incline: float) -> PolarLine:
    """Canonical (distance, incline) with incline wrapped into [0, pi)."""
    k = math.floor(incline / math.pi)
    incline -= k * math.pi
    if k % 2:
        distance = -distance
    if incline >= math.pi:  # guard against float wrap at the boundary
        incline -= math.pi
        distance = -distance
    return PolarLine(distance, incline)


def line_through(frame: PolarFrame, p1, p2) -> PolarLine:
    """Line through two pixel points, in canonical polar form."""
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    d = p2 - p1
    norm = float(np.hypot(d[0], d[1]))
    if norm == 0.0:
        raise ValueError("coincident points do not define a line")
    incline = math.atan2(-d[1], d[0])
    n = np.array([math.cos(incline + math.pi / 2.0), -math.sin(incline + math.pi / 2.0)])
    dist = ((p1[0] - frame.pole[0]) * n[0] + (p1[1] - frame.pole[1]) * n[1]) / frame.unit
    return normalize_line(dist, incline)


def intersect_lines(frame: PolarFrame, l1: PolarLine, l2: PolarLine) -> np.ndarray | None:
    """Pixel intersection point of two polar lines, or None when near-parallel."""
    n1, n2 = l1.normal(), l2.normal()
    a = np.array([n1, n2])
    b = np.array([l1.distance * frame.unit, l2.distance * frame.unit])
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if abs(det) < 1e-12:
        return None
    rel = np.linalg.solve(a, b)
    return rel + np.array(frame.pole)


@dataclass
class HoughSpace:
    """Accumulator over (signed distance bin, incline bin).

    ``bins[i, j]`` counts votes for lines with offset near
    ``d_min + (i + 0.5) * d_res`` units and incline near ``(j + 0.5) * incline_res``.
    """

    bins: np.ndarray
    d_min: float
    d_res: float
    incline_res: float
    frame: PolarFrame

    @property
    def n_distance(self) -> int:
        return int(self.bins.shape[0])

    @property
    def n_incline(self) -> int:
        return int(self.bins.shape[1])

    def line_at(self, i: float, j: float) -> PolarLine:
        """Polar line at (possibly fractional) bin coordinates."""
        return normalize_line(
            self.d_min + (i + 0.5) * self.d_res,
            (j + 0.5) * self.incline_res,
        )

    def bin_of(self, line: PolarLine) -> tuple[int, int]:
        i = int(math.floor((line.distance - self.d_min) / self.d_res))
        j = int(math.floor(line.incline / self.incline_res))
        return i, j

    def local_peak_near(
        self,
        line: PolarLine,
        d_window: float,
        incline_window: float,
    ) -> tuple[int, PolarLine] | None:
        """Strongest bin inside a (distance, incline) window around ``line``.

        Returns (votes, refined line) or None when the window holds no votes.
        Used to snap interpolated grid lines onto weak accumulator support.
        """
        i0, j0 = self.bin_of(line)
        di = max(1, int(round(d_window / self.d_res)))
        dj = max(1, int(round(incline_window / self.incline_res)))
        ilo, ihi = max(0, i0 - di), min(self.n_distance, i0 + di + 1)
        jlo, jhi = max(0, j0 - dj), min(self.n_incline, j0 + dj + 1)
        if ilo >= ihi or jlo >= jhi:
            return None
        window = self.bins[ilo:ihi, jlo:jhi]
        flat = int(np.argmax(window))
        value = int(window.flat[flat])
        if value <= 0:
            return None
        wi, wj = divmod(flat, window.shape[1])
        ri, rj = _centroid_refine(self.bins, ilo + wi, jlo + wj)
        return value, self.line_at(ri, rj)


@dataclass(frozen=True)
class HoughPeak:
    """A strict 8-neighborhood local maximum of the accumulator."""

    line: PolarLine
    value: int
    bin_index: tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class EllipseHypothesis:
    """Expected stone outline: centre, semi-axes (major >= minor), orientation."""

    center: tuple[float, float]
    semi_axes: tuple[float, float]
    orientation: float

    def __post_init__(self) -> None:
        a, b = self.semi_axes
        if not a >= b > 0:
            raise ValueError("require semi-major >= semi-minor > 0")

    def perimeter(self) -> float:
        a, b = self.semi_axes
        h = ((a - b) / (a + b)) ** 2
        return math.pi * (a + b) * (1 + 3 * h / (10 + math.sqrt(4 - 3 * h)))


def sampling_fraction(pixel_count: int) -> float:
    """Fraction of pixels allowed to vote, by photo size.

    Full calculation up to half a Mpixel, ramping linearly down to 25% at
    2.5 Mpixels; anything larger is expected to be downscaled beforehand.
    """
    if pixel_count <= 0:
        raise ValueError("pixel_count must be positive")
    lo, hi = 500_000, 2_500_000
    if pixel_count <= lo:
        return 1.0
    if pixel_count >= hi:
        return 0.25
    return 1.0 - 0.75 * (pixel_count - lo) / (hi - lo)


def richtmyer_points(n: int, width: int, height: int) -> np.ndarray:
    """Deterministic low-discrepancy point pattern covering the image.

    Returns an (n, 2) float array of (x, y) positions, the k-th point being
    (frac(k*sqrt(2)) * width, frac(k*sqrt(3)) * height) for k = 1..n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(1, n + 1, dtype=np.float64)
    xs = np.mod(k * RICHTMYER_ALPHA[0], 1.0) * width
    ys = np.mod(k * RICHTMYER_ALPHA[1], 1.0) * height
    return np.stack([xs, ys], axis=1)


def _select_mask_pixels(mask: np.ndarray, fraction: float) -> tuple[np.ndarray, np.ndarray]:
    """(xs, ys) of voting pixels: all set pixels, or the Richtmyer subset."""
    h, w = mask.shape
    if fraction >= 1.0:
        ys, xs = np.nonzero(mask)
        return xs, ys
    n = max(1, int(round(fraction * w * h)))
    pts = richtmyer_points(n, w, h).astype(np.int64)
    xs = np.clip(pts[:, 0], 0, w - 1)
    ys = np.clip(pts[:, 1], 0, h - 1)
    lin = np.unique(ys * w + xs)
    ys, xs = lin // w, lin % w
    keep = mask[ys, xs]
    return xs[keep], ys[keep]


def linear_hough(
    mask: np.ndarray,
    frame: PolarFrame,
    fraction: float = 1.0,
    distance_res_px: float = DEFAULT_DISTANCE_RES_PX,
    incline_bins: int = DEFAULT_INCLINE_BINS,
) -> HoughSpace:
    """Linear Hough transform of an edge mask over (signed offset, incline)."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    h, w = mask.shape
    d_res = distance_res_px / frame.unit
    d_max = math.hypot(w / 2.0, h / 2.0) / frame.unit + d_res
    n_dist = int(math.ceil(2.0 * d_max / d_res))
    d_min = -d_max

    xs, ys = _select_mask_pixels(np.asarray(mask, dtype=bool), fraction)
    bins = np.zeros((n_dist, incline_bins), dtype=np.int64)
    if xs.size == 0:
        return HoughSpace(bins, d_min, d_res, math.pi / incline_bins, frame)

    incline_res = math.pi / incline_bins
    thetas = (np.arange(incline_bins) + 0.5) * incline_res
    normal_angles = thetas + math.pi / 2.0
    nx = np.cos(normal_angles)
    ny = -np.sin(normal_angles)

    px = (xs - frame.pole[0]) / frame.unit
    py = (ys - frame.pole[1]) / frame.unit
    chunk = max(1, 2_000_000 // incline_bins)
    flat_len = n_dist * incline_bins
    col = np.arange(incline_bins, dtype=np.int64)
    for start in range(0, px.size, chunk):
        cx = px[start : start + chunk]
        cy = py[start : start + chunk]
        d = cx[:, None] * nx[None, :] + cy[:, None] * ny[None, :]
        idx = np.floor((d - d_min) / d_res).astype(np.int64)
        np.clip(idx, 0, n_dist - 1, out=idx)
        flat = (idx * incline_bins + col[None, :]).ravel()
        bins += np.bincount(flat, minlength=flat_len).reshape(n_dist, incline_bins)
    return HoughSpace(bins, d_min, d_res, incline_res, frame)


def _centroid_refine(bins: np.ndarray, i: int, j: int) -> tuple[float, float]:
    """Sub-bin peak position from the vote-weighted 3x3 centroid."""
    n_dist, n_inc = bins.shape
    ilo, ihi = max(0, i - 1), min(n_dist, i + 2)
    jlo, jhi = max(0, j - 1), min(n_inc, j + 2)
    patch = bins[ilo:ihi, jlo:jhi].astype(np.float64)
    floor = patch.min()
    weights = patch - floor
    total = weights.sum()
    if total <= 0:
        return float(i), float(j)
    ii, jj = np.meshgrid(np.arange(ilo, ihi), np.arange(jlo, jhi), indexing="ij")
    return float((weights * ii).sum() / total), float((weights * jj).sum() / total)


def _local_maxima_mask(bins: np.ndarray) -> np.ndarray:
    """Strict 8-neighborhood maxima; the incline axis wraps with the offset
    axis flipped (incline pi - eps continues at incline 0 with negated offset)."""
    left = bins[::-1, -1:]
    right = bins[::-1, :1]
    padded = np.concatenate([left, bins, right], axis=1)
    pad_rows = np.full((1, padded.shape[1]), -1, dtype=padded.dtype)
    padded = np.concatenate([pad_rows, padded, pad_rows], axis=0)
    center = padded[1:-1, 1:-1]
    strict = center > 0
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            strict &= center > padded[1 + di : 1 + di + center.shape[0], 1 + dj : 1 + dj + center.shape[1]]
    return strict


def top_local_maxima(space: HoughSpace, k: int = DEFAULT_MAX_PEAKS) -> list[HoughPeak]:
    """At most k strict local maxima of the accumulator, strongest first.

    Candidates are scanned once and kept in a bounded sorted list, so the
    cost stays linear in the number of candidate maxima for the small preset
    k this pipeline uses.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    mask = _local_maxima_mask(space.bins)
    cis, cjs = np.nonzero(mask)
    values = space.bins[cis, cjs]
    best: list[tuple[int, int, int]] = []  # (-value, i, j), ascending
    for i, j, v in zip(cis.tolist(), cjs.tolist(), values.tolist()):
        entry = (-v, i, j)
        if len(best) < k:
            bisect.insort(best, entry)
        elif entry < best[-1]:
            bisect.insort(best, entry)
            best.pop()
    peaks = []
    for neg_v, i, j in best:
        ri, rj = _centroid_refine(space.bins, i, j)
        peaks.append(HoughPeak(line=space.line_at(ri, rj), value=-neg_v, bin_index=(i, j)))
    return peaks


# ---------------------------------------------------------------------------
# Fragment searches around a prior (tracking and stone confirmation)
# ---------------------------------------------------------------------------


def _crop(photo: Photo, region: tuple[int, int, int, int]) -> tuple[np.ndarray, int, int]:
    """Clip a (x0, y0, x1, y1) rectangle to the photo and return the crop."""
    x0, y0, x1, y1 = region
    if x1 <= 0 or y1 <= 0 or x0 >= photo.width or y0 >= photo.height:
        raise ValueError("region lies outside the photo")
    x0c, y0c = max(0, int(x0)), max(0, int(y0))
    x1c, y1c = min(photo.width, int(x1)), min(photo.height, int(y1))
    if x1c - x0c < 4 or y1c - y0c < 4:
        raise ValueError("region too small")
    return photo.pixels[y0c:y1c, x0c:x1c], x0c, y0c


def _local_edge_mask(crop: np.ndarray, sigmas: tuple[float, float] = (1.0, 3.0)) -> np.ndarray:
    dog = difference_of_gaussians(crop, sigmas[0], sigmas[1])
    return binarize(dog)


def _fit_line_tls(xs: np.ndarray, ys: np.ndarray, frame: PolarFrame) -> PolarLine:
    """Total-least-squares line through pixel points (principal direction)."""
    mx, my = xs.mean(), ys.mean()
    u = xs - mx
    v = ys - my
    cov = np.array([[np.dot(u, u), np.dot(u, v)], [np.dot(u, v), np.dot(v, v)]])
    w, vecs = np.linalg.eigh(cov)
    d = vecs[:, int(np.argmax(w))]
    return line_through(frame, (mx, my), (mx + d[0], my + d[1]))


def _best_line_in_window(
    xs: np.ndarray,
    ys: np.ndarray,
    frame: PolarFrame,
    expected: PolarLine,
    d_window_px: float,
    incline_window: float,
    d_res_px: float = 0.5,
    incline_steps: int = 33,
) -> tuple[PolarLine, int] | None:
    """Mini Hough over candidate pixels restricted to a window around a prior."""
    if xs.size == 0:
        return None
    thetas = expected.incline + np.linspace(-incline_window, incline_window, incline_steps)
    nxs = np.cos(thetas + math.pi / 2.0)
    nys = -np.sin(thetas + math.pi / 2.0)
    px = xs - frame.pole[0]
    py = ys - frame.pole[1]
    d_exp_px = expected.distance * frame.unit
    # Expected offset flips sign with the incline when the window crosses pi.
    n_bins = int(math.ceil(2 * d_window_px / d_res_px)) + 1
    best = None
    for j in range(incline_steps):
        d = px * nxs[j] + py * nys[j]
        rel = d - d_exp_px
        idx = np.floor((rel + d_window_px) / d_res_px).astype(np.int64)
        ok = (idx >= 0) & (idx < n_bins)
        if not ok.any():
            continue
        counts = np.bincount(idx[ok], minlength=n_bins)
        i = int(np.argmax(counts))
        v = int(counts[i])
        if best is None or v > best[0]:
            d_val = (d_exp_px - d_window_px + (i + 0.5) * d_res_px) / frame.unit
            best = (v, normalize_line(d_val, float(thetas[j])), j, i)
    if best is None or best[0] == 0:
        return None
    votes, line = best[0], best[1]
    # Subpixel polish: TLS over the inliers of the coarse line.
    pts = np.stack([xs, ys], axis=1).astype(np.float64)
    off = line.offset_of(frame, pts) - line.distance
    inliers = np.abs(off) * frame.unit <= max(1.5, d_res_px * 1.5)
    if inliers.sum() >= 2:
        line = _fit_line_tls(xs[inliers].astype(np.float64), ys[inliers].astype(np.float64), frame)
    return line, votes


def corner_fragment(
    photo: Photo,
    region: tuple[int, int, int, int],
    expected_inclines: tuple[float, float],
    frame: PolarFrame | None = None,
    incline_window: float = math.radians(5.0),
) -> tuple[np.ndarray, float]:
    """Locate a grid corner inside ``region`` as the intersection of two edge
    responses whose inclines lie near the expected external-line inclines.

    Returns (corner point in photo coordinates, score in [0, 1]); score 0
    means no acceptable pair of edges was found.
    """
    frame = frame or PolarFrame.for_photo(photo)
    crop, ox, oy = _crop(photo, region)
    mask = _local_edge_mask(crop)
    ys, xs = np.nonzero(mask)
    center = np.array([(region[0] + region[2]) / 2.0, (region[1] + region[3]) / 2.0])
    if xs.size < 8:
        return center, 0.0
    xs = xs + ox
    ys = ys + oy
    half_span = max(crop.shape[0], crop.shape[1]) / 2.0
    lines = []
    for incline in expected_inclines:
        expected = line_through(
            frame,
            center,
            center + np.array([math.cos(incline), -math.sin(incline)]),
        )
        found = _best_line_in_window(
            xs.astype(np.float64),
            ys.astype(np.float64),
            frame,
            expected,
            d_window_px=half_span,
            incline_window=incline_window,
        )
        if found is None:
            return center, 0.0
        lines.append(found)
    p = intersect_lines(frame, lines[0][0], lines[1][0])
    if p is None:
        return center, 0.0
    if not (region[0] - 2 <= p[0] <= region[2] + 2 and region[1] - 2 <= p[1] <= region[3] + 2):
        return center, 0.0
    # Each external line only runs inward from the corner, so roughly half of
    # the window span is the best a true corner can vote.
    score = min(lines[0][1], lines[1][1]) / max(half_span, 1.0)
    return p, float(min(1.0, score))


def line_fragment(
    photo: Photo,
    segments: list[tuple[tuple[float, float], tuple[float, float]]],
    expected: PolarLine,
    frame: PolarFrame | None = None,
    d_window_px: float = 8.0,
    incline_window: float = math.radians(2.5),
) -> tuple[PolarLine, float]:
    """Refine an external grid line from stone-free segments near its last
    known position. Returns (refined line, score); score 0 when the segments
    carry no usable edge evidence.
    """
    if not segments:
        raise ValueError("segments must be nonempty")
    frame = frame or PolarFrame.for_photo(photo)
    pts = np.array([p for seg in segments for p in seg], dtype=np.float64)
    margin = d_window_px + 6.0
    x0 = int(math.floor(pts[:, 0].min() - margin))
    y0 = int(math.floor(pts[:, 1].min() - margin))
    x1 = int(math.ceil(pts[:, 0].max() + margin))
    y1 = int(math.ceil(pts[:, 1].max() + margin))
    try:
        crop, ox, oy = _crop(photo, (x0, y0, x1, y1))
    except ValueError:
        return expected, 0.0
    mask = _local_edge_mask(crop)
    ys, xs = np.nonzero(mask)
    if xs.size == 0:
        return expected, 0.0
    xs = xs.astype(np.float64) + ox
    ys = ys.astype(np.float64) + oy
    # Keep pixels near the expected line and inside some stone-free span.
    p = np.stack([xs, ys], axis=1)
    off_px = (expected.offset_of(frame, p) - expected.distance) * frame.unit
    near = np.abs(off_px) <= d_window_px
    direction = expected.direction()
    base = expected.base_point(frame)
    s = (p[:, 0] - base[0]) * direction[0] + (p[:, 1] - base[1]) * direction[1]
    in_span = np.zeros(xs.shape, dtype=bool)
    total_len = 0.0
    for seg in segments:
        s0 = (seg[0][0] - base[0]) * direction[0] + (seg[0][1] - base[1]) * direction[1]
        s1 = (seg[1][0] - base[0]) * direction[0] + (seg[1][1] - base[1]) * direction[1]
        lo, hi = min(s0, s1), max(s0, s1)
        total_len += hi - lo
        in_span |= (s >= lo - 1.0) & (s <= hi + 1.0)
    keep = near & in_span
    if not keep.any() or total_len <= 0:
        return expected, 0.0
    found = _best_line_in_window(
        xs[keep], ys[keep], frame, expected, d_window_px, incline_window
    )
    if found is None:
        return expected, 0.0
    line, votes = found
    return line, float(min(1.0, votes / total_len))


def ellipse_fragment(
    photo: Photo,
    region: tuple[int, int, int, int],
    hypothesis: EllipseHypothesis,
    frame: PolarFrame | None = None,
) -> tuple[np.ndarray, float]:
    """Search for an ellipse of fixed shape, letting only its centre move
    inside ``region``. Returns (best centre, response score).

    The score is the peak accumulator count normalized by the hypothesis
    perimeter; a stone rim concentrates its votes into one centre bin while
    bare wood or grid lines spread them out.
    """
    crop, ox, oy = _crop(photo, region)
    mask = _local_edge_mask(crop)
    eys, exs = np.nonzero(mask)
    cx0 = hypothesis.center[0]
    cy0 = hypothesis.center[1]
    if exs.size == 0:
        return np.array([cx0, cy0]), 0.0
    a, b = hypothesis.semi_axes
    per = hypothesis.perimeter()
    n_samples = max(16, int(round(per)))
    psi = np.linspace(0.0, 2.0 * math.pi, n_samples, endpoint=False)
    ca, sa = math.cos(hypothesis.orientation), math.sin(hypothesis.orientation)
    bx = a * np.cos(psi)
    by = b * np.sin(psi)
    offs_x = ca * bx - sa * by
    offs_y = sa * bx + ca * by
    h, w = mask.shape
    acc = np.zeros((h, w), dtype=np.int32)
    px = exs.astype(np.float64)
    py = eys.astype(np.float64)
    cand_x = np.rint(px[:, None] - offs_x[None, :]).astype(np.int64)
    cand_y = np.rint(py[:, None] - offs_y[None, :]).astype(np.int64)
    ok = (cand_x >= 0) & (cand_x < w) & (cand_y >= 0) & (cand_y < h)
    np.add.at(acc, (cand_y[ok], cand_x[ok]), 1)
    i = int(np.argmax(acc))
    iy, ix = divmod(i, w)
    value = int(acc[iy, ix])
    if value == 0:
        return np.array([cx0, cy0]), 0.0
    ry, rx = _centroid_refine(acc, iy, ix)
    center = np.array([rx + ox, ry + oy])
    # One boundary pixel lands one vote in the true centre bin, so the peak
    # cannot usefully exceed the boundary sample count.
    score = value / max(per / 2.0, 1.0)
    return center, float(min(1.5, score))
