"""Geometric artifacts: bricks, brick assembly, oracle clouds, curves and rasters."""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from .boettcher import eval_phi_circle
from .errors import EmptyComplement
from .transseries import eval_model

# fixed work-unit sizes so results never depend on the thread count
ASSEMBLE_CHUNK = 256
RASTER_CHUNK = 1 << 16


@dataclass(frozen=True, eq=False)
class Polyline:
    points: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        if not np.all(np.isfinite(pts)):
            raise ValueError("polyline has non-finite points")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @property
    def max_step(self):
        return float(np.max(np.abs(np.diff(self.points)))) if len(self.points) > 1 else 0.0


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True, eq=False)
class RasterImage:
    width: int
    height: int
    window: tuple  # (re_min, re_max, im_min, im_max)
    pixels: np.ndarray  # uint8, (height, width) or (height, width, 3)

    @property
    def channels(self):
        return 1 if self.pixels.ndim == 2 else self.pixels.shape[2]


# --- bricks ---------------------------------------------------------------

def brick(model, u_half_width=0.05, n_samples=257, inset=0.0):
    """The model traced along the arc ``t + u``, ``|u| <= u_half_width``.

    ``s(u) = inset - 2 pi i u``; the default ``inset = 0`` samples the
    boundary itself, a positive value samples the circle ``rho = e^-inset``.
    """
    if not 0 < u_half_width <= 0.05:
        raise ValueError("u_half_width must lie in (0, 0.05]")
    if n_samples < 3 or n_samples % 2 == 0:
        raise ValueError("n_samples must be odd so that u = 0 is sampled")
    u = np.linspace(-u_half_width, u_half_width, n_samples)
    u[n_samples // 2] = 0.0
    pts = eval_model(model, inset - 2j * np.pi * u)
    meta = {
        "source": "brick",
        "angle": str(model.orbit.angle),
        "u_half_width": u_half_width,
        "n_samples": n_samples,
        "inset": inset,
    }
    return Polyline(pts, meta)


def cusp_angle(polyline, offset=None):
    """Angle between the two arms of a brick seen from its centre point."""
    pts = polyline.points
    c = len(pts) // 2
    k = offset if offset is not None else max(1, c // 8)
    a = pts[c - k] - pts[c]
    b = pts[c + k] - pts[c]
    return float(abs(np.angle(b / a)))


def pruning_box(param):
    """``(centre, half_width)`` of the square outside which copies are dropped."""
    return 0.5 + 0j, max(2.0, 2.0 / abs(param.lam))


def _pull_back_rows(param, rows, connected):
    """Both preimage copies of each row with continuous square-root branches.

    ``connected[i, j]`` says whether points ``j`` and ``j+1`` of row ``i``
    are joined; a join is cut where the branch cannot be continued
    unambiguously (the row passes close to the critical value).
    """
    r = np.sqrt(0.25 - rows / param.lam)
    same = np.abs(r[:, 1:] - r[:, :-1])
    flip = np.abs(r[:, 1:] + r[:, :-1])
    flips = (flip < same).astype(np.int64)
    sign = np.ones_like(r.real)
    sign[:, 1:] = 1 - 2 * (np.cumsum(flips, axis=1) % 2)
    r = r * sign
    ambiguous = np.minimum(same, flip) > 0.5 * np.maximum(same, flip)
    conn = connected & ~ambiguous
    plus = 0.5 + r
    minus = 0.5 - r
    out = np.empty((2 * len(rows), rows.shape[1]), dtype=complex)
    out[0::2] = plus
    out[1::2] = minus
    conn2 = np.repeat(conn, 2, axis=0)
    return out, conn2


def _prune(param, rows, connected):
    centre, half = pruning_box(param)
    d = rows - centre
    inside = (np.abs(d.real) <= half) & (np.abs(d.imag) <= half)
    keep = inside.any(axis=1)
    return rows[keep], connected[keep], keep


def assemble(param, brick_line, depth, threads=1, cumulative=False):
    """Images of the brick under all ``2**depth`` inverse branch compositions.

    Copies are ordered by branch address (``+`` before ``-`` at every
    level).  Rows leaving the pruning box entirely are dropped.  With
    ``cumulative`` the copies of every depth ``0..depth`` are returned.
    """
    if depth < 0 or depth > 20:
        raise ValueError("depth must lie in 0..20")
    rows = brick_line.points[None, :].copy()
    connected = np.ones((1, len(brick_line) - 1), dtype=bool)
    addresses = [""]
    levels = [(rows, connected, addresses)]
    for level in range(depth):
        chunks = [slice(i, i + ASSEMBLE_CHUNK) for i in range(0, len(rows), ASSEMBLE_CHUNK)]
        work = lambda sl: _pull_back_rows(param, rows[sl], connected[sl])
        if threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(threads) as pool:
                parts = list(pool.map(work, chunks))
        else:
            parts = [work(sl) for sl in chunks]
        new_rows = np.concatenate([p[0] for p in parts])
        new_conn = np.concatenate([p[1] for p in parts])
        new_addr = [a + ch for a in addresses for ch in "+-"]
        new_rows, new_conn, keep = _prune(param, new_rows, new_conn)
        addresses = [a for a, k in zip(new_addr, keep) if k]
        rows, connected = new_rows, new_conn
        levels.append((rows, connected, addresses))
    use = levels if cumulative else levels[-1:]
    out = []
    for lv_rows, lv_conn, lv_addr in use:
        for row, conn, addr in zip(lv_rows, lv_conn, lv_addr):
            out.extend(_split(row, conn, {**brick_line.meta, "address": addr, "depth": len(addr)}))
    return out


def _split(row, conn, meta):
    cuts = np.nonzero(~conn)[0]
    if len(cuts) == 0:
        return [Polyline(row, meta)]
    pieces = np.split(row, cuts + 1)
    return [Polyline(p, dict(meta, piece=i)) for i, p in enumerate(pieces) if len(p)]


def all_points(polylines):
    if not polylines:
        return np.zeros(0, dtype=complex)
    return np.concatenate([p.points for p in polylines])


# --- oracle and distances -------------------------------------------------

def _start_point(param):
    """A repelling fixed point (on J) to start inverse iteration from."""
    candidates = [0j, (param.lam - 1) / param.lam]
    mult = [abs(param.dP(x)) for x in candidates]
    k = int(np.argmax(mult))
    return candidates[k] if mult[k] > 1 else 0.5 + 0.5j


def julia_oracle(param, n_points, seed=0, burn_in=50):
    """Random inverse iteration: each step takes one of the two preimages at random."""
    rng = np.random.default_rng(seed)
    choices = rng.integers(0, 2, size=burn_in + n_points)
    lam = param.lam
    x = complex(_start_point(param))
    out = np.empty(n_points, dtype=complex)
    for i, ch in enumerate(choices):
        r = cmath.sqrt(0.25 - x / lam)
        x = 0.5 + r if ch else 0.5 - r
        if i >= burn_in:
            out[i - burn_in] = x
    return PointCloud(out, {"source": "inverse iteration", "seed": seed, "burn_in": burn_in})


def hausdorff_one_sided(a, b):
    """``max_{x in a} min_{y in b} |x - y|`` using a k-d tree on ``b``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    tree = cKDTree(np.column_stack((b.real, b.imag)))
    d, _ = tree.query(np.column_stack((a.real, a.imag)))
    return float(d.max())


def diameter(points, directions=2048):
    """Largest pairwise distance (exact on small hulls, projection sweep otherwise)."""
    pts = np.asarray(points, dtype=complex)
    xy = np.column_stack((pts.real, pts.imag))
    if len(pts) > 16:
        xy = xy[ConvexHull(xy).vertices]
    if len(xy) <= 2000:
        diff = xy[:, None, :] - xy[None, :, :]
        return float(np.sqrt((diff**2).sum(-1)).max())
    # the extent along the best of many directions is within
    # 1 - cos(pi / (2 directions)) of the diameter
    theta = np.pi * np.arange(directions) / directions
    proj = xy @ np.vstack((np.cos(theta), np.sin(theta)))
    return float((proj.max(axis=0) - proj.min(axis=0)).max())


# --- curves ---------------------------------------------------------------

def boundary_curve(param, series, rho, n_theta):
    """``phi(rho e^{2 pi i theta})`` on ``n_theta`` uniform angles."""
    pts = eval_phi_circle(series, rho, n_theta)
    return Polyline(pts, {"source": "boundary", "rho": rho, "n_theta": n_theta})


def tilde_curve(param, series, N0, m, epsilon, resolution, rho=1 - 1e-3):
    """``phi`` on angles with normal leading digits, straight segments elsewhere.

    An angle ``j / resolution`` is kept when its first ``N m`` binary
    digits are ``(epsilon, N, m)``-normal for every ``N0 <= N <= B / m``,
    ``B = log2(resolution)``.  Each maximal run of excluded angles is
    replaced by linear interpolation between its kept neighbours.
    """
    from .analysis import normal_prefix_mask

    bits = int(round(math.log2(resolution)))
    if 2**bits != resolution or bits < N0 * m:
        raise ValueError("resolution must be a power of two >= 2**(N0*m)")
    keep = np.ones(resolution, dtype=bool)
    for N in range(N0, bits // m + 1):
        keep &= normal_prefix_mask(bits, N, m, epsilon)
    if not keep.any():
        raise EmptyComplement(f"no angle is ({epsilon}, N, {m})-normal at this resolution")
    values = eval_phi_circle(series, rho, resolution)
    x = np.arange(resolution, dtype=float)
    good = np.nonzero(keep)[0]
    # periodic interpolation: pad with the kept points one turn away
    xp = np.concatenate((good - resolution, good, good + resolution)).astype(float)
    fp = np.concatenate((values[good],) * 3)
    pts = np.interp(x, xp, fp.real) + 1j * np.interp(x, xp, fp.imag)
    return Polyline(pts, {
        "source": "tilde", "N0": N0, "m": m, "epsilon": epsilon, "resolution": resolution,
        "rho": rho, "kept": keep,
    })


def interpolate_segment(x, x1, x2, y1, y2):
    """Straight segment through ``(x1, y1)`` and ``(x2, y2)``."""
    return y1 * (x2 - x) / (x2 - x1) + y2 * (x - x1) / (x2 - x1)


# --- rasters --------------------------------------------------------------

def default_window(points, margin=0.05):
    pts = np.asarray(points, dtype=complex)
    x0, x1 = pts.real.min(), pts.real.max()
    y0, y1 = pts.imag.min(), pts.imag.max()
    half = 0.5 * max(x1 - x0, y1 - y0) * (1 + 2 * margin) or 1.0
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    return (cx - half, cx + half, cy - half, cy + half)


def _densify(line, step):
    pts = line.points
    if len(pts) < 2:
        return pts
    seg = np.diff(pts)
    n = np.maximum(1, np.ceil(np.abs(seg) / step).astype(int))
    starts = np.repeat(pts[:-1], n)
    segs = np.repeat(seg, n)
    offs = np.concatenate([np.arange(k) / k for k in n])
    return np.concatenate((starts + offs * segs, pts[-1:]))


def _splat(width, height, window, pts):
    re0, re1, im0, im1 = window
    fx = (pts.real - re0) / (re1 - re0) * width - 0.5
    fy = (im1 - pts.imag) / (im1 - im0) * height - 0.5
    acc = np.zeros(height * width)
    ix = np.floor(fx).astype(np.int64)
    iy = np.floor(fy).astype(np.int64)
    tx = fx - ix
    ty = fy - iy
    for dx, dy, wgt in ((0, 0, (1 - tx) * (1 - ty)), (1, 0, tx * (1 - ty)),
                        (0, 1, (1 - tx) * ty), (1, 1, tx * ty)):
        x = ix + dx
        y = iy + dy
        ok = (x >= 0) & (x < width) & (y >= 0) & (y < height)
        np.add.at(acc, y[ok] * width + x[ok], wgt[ok])
    return acc


def raster(inputs, width, height, window=None, threads=1, gain=1.0):
    """Anti-aliased ink splat of polylines and point clouds (white background)."""
    lines = [p for p in inputs if isinstance(p, Polyline)]
    clouds = [p for p in inputs if isinstance(p, PointCloud)]
    pts = [p.points for p in clouds]
    if window is None:
        allpts = np.concatenate([l.points for l in lines] + pts) if (lines or pts) else np.zeros(1, complex)
        window = default_window(allpts)
    re0, re1, im0, im1 = window
    if not (re1 > re0 and im1 > im0):
        raise ValueError("window must be nonempty")
    step = 0.5 * (re1 - re0) / width
    pts = pts + [_densify(l, step) for l in lines]
    allpts = np.concatenate(pts) if pts else np.zeros(0, complex)
    chunks = [allpts[i:i + RASTER_CHUNK] for i in range(0, len(allpts), RASTER_CHUNK)]
    work = lambda c: _splat(width, height, window, c)
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    acc = np.zeros(height * width)
    for p in parts:  # fixed chunk order keeps the sum bit-identical
        acc += p
    ink = np.clip(acc * gain, 0.0, 1.0)
    pixels = (255 - np.round(255 * ink)).astype(np.uint8).reshape(height, width)
    return RasterImage(width, height, tuple(float(v) for v in window), pixels)


def mandelbrot_counts(c, max_iter):
    """Escape iteration (``|t_n| > 2``) of ``t -> t**2 + c`` from 0; ``max_iter`` if bounded."""
    c = np.asarray(c, dtype=complex)
    t = np.zeros_like(c)
    count = np.full(c.shape, max_iter, dtype=np.int64)
    alive = np.ones(c.shape, dtype=bool)
    for n in range(max_iter):
        t[alive] = t[alive] ** 2 + c[alive]
        esc = alive & (np.abs(t) > 2)
        count[esc] = n + 1
        alive &= ~esc
        if not alive.any():
            break
    return count


def render_mandelbrot(window, width, height, max_iter=200):
    re0, re1, im0, im1 = window
    if not (re1 > re0 and im1 > im0):
        raise ValueError("window must be nonempty")
    xs = re0 + (np.arange(width) + 0.5) * (re1 - re0) / width
    ys = im1 - (np.arange(height) + 0.5) * (im1 - im0) / height
    c = xs[None, :] + 1j * ys[:, None]
    counts = mandelbrot_counts(c, max_iter)
    shade = np.where(counts >= max_iter, 0,
                     255 - np.round(200 * np.log1p(counts) / math.log1p(max_iter))).astype(np.uint8)
    return RasterImage(width, height, tuple(float(v) for v in window), shade)


# --- writers --------------------------------------------------------------

def _comment_block(comments, prefix="# "):
    """One ``# line`` per comment line; ASCII only so the files stay portable."""
    if not comments:
        return ""
    lines = str(comments).splitlines()
    return "".join(f"{prefix}{line}\n" for line in lines).encode("ascii", "backslashreplace").decode("ascii")


def ppm_bytes(image, comments=None):
    px = image.pixels
    if px.ndim == 2:
        px = np.repeat(px[:, :, None], 3, axis=2)
    header = f"P6\n{_comment_block(comments)}{image.width} {image.height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(px, dtype=np.uint8).tobytes()


def pgm_bytes(image, comments=None):
    px = image.pixels
    if px.ndim == 3:
        px = np.round(px.mean(axis=2)).astype(np.uint8)
    header = f"P5\n{_comment_block(comments)}{image.width} {image.height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(px, dtype=np.uint8).tobytes()


def write_image(image, path, comments=None):
    """PGM if ``path`` ends in ``.pgm``, PPM otherwise; ``comments`` go into the header."""
    if str(path).lower().endswith(".pgm"):
        data = pgm_bytes(image, comments)
    else:
        data = ppm_bytes(image, comments)
    with open(path, "wb") as fh:
        fh.write(data)


def read_pnm(path):
    """Pixels and header comments of a binary PPM/PGM written by :func:`write_image`."""
    with open(path, "rb") as fh:
        data = fh.read()
    pos = 0
    fields, comments = [], []
    while len(fields) < 4:
        end = data.index(b"\n", pos)
        line = data[pos:end]
        pos = end + 1
        if line.startswith(b"#"):
            comments.append(line[1:].strip().decode("ascii"))
        else:
            fields.extend(line.split())
    magic, w, h = fields[0], int(fields[1]), int(fields[2])
    ch = 3 if magic == b"P6" else 1
    px = np.frombuffer(data[pos:], dtype=np.uint8).reshape((h, w, ch) if ch == 3 else (h, w))
    return px, comments


def points_csv(points, comments=None):
    lines = ["index,re,im"]
    lines += [f"{i},{float(z.real)!r},{float(z.imag)!r}" for i, z in enumerate(np.asarray(points, dtype=complex))]
    return _comment_block(comments) + "\n".join(lines) + "\n"


def write_csv(points, path, comments=None):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(points_csv(points, comments))


def polylines_csv(polylines, comments=None):
    """One row per vertex: ``index,re,im,copy,address``.

    ``index`` runs over all vertices, ``copy`` numbers the polylines and
    ``address`` is the inverse-branch word that produced the copy.
    """
    lines = ["index,re,im,copy,address"]
    i = 0
    for k, line in enumerate(polylines):
        addr = line.meta.get("address", "")
        for z in line.points:
            lines.append(f"{i},{float(z.real)!r},{float(z.imag)!r},{k},{addr}")
            i += 1
    return _comment_block(comments) + "\n".join(lines) + "\n"
