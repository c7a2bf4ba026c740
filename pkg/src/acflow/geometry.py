"""Level-set geometry: nodal-set extraction, curve measurements, and norms.

Conventions used throughout (and pinned by the shrinking-circle tests):

* Extracted nodal polylines are oriented with the negative phase (u < 0) on
  the left of the direction of travel.
* The per-vertex unit normal of a polyline is the left normal
  n = (-t_y, t_x); curvature is positive where the curve bends toward n.
  A counterclockwise circle of radius r therefore has curvature +1/r.
* Normal velocity of a nodal set is measured along grad(u)/|grad u| (the
  normal pointing into the positive phase), so a circle shrinking by
  curvature reports v = -1/r, and motion by curvature reads v = -kappa.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .fields import ScalarField, PERIODIC, fd_gradient, fd_hessian


# --- polylines --------------------------------------------------------------

class Polyline:
    """Ordered planar vertices; open chain or closed loop.

    Construction validates vertex counts, consecutive-vertex distinctness and
    (proper) self-intersection freedom.
    """

    def __init__(self, vertices, closed: bool = False, validate: bool = True):
        v = np.asarray(vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError(f"vertices must have shape (n, 2), got {v.shape}")
        self.vertices = v
        self.closed = bool(closed)
        if validate:
            self._validate()

    def _validate(self):
        n = len(self.vertices)
        if self.closed and n < 3:
            raise ValueError(f"closed polyline needs >= 3 vertices, got {n}")
        if not self.closed and n < 2:
            raise ValueError(f"open polyline needs >= 2 vertices, got {n}")
        seg = np.diff(self.vertices, axis=0)
        if self.closed:
            seg = np.vstack([seg, self.vertices[0] - self.vertices[-1]])
        if (np.hypot(seg[:, 0], seg[:, 1]) == 0.0).any():
            raise ValueError("consecutive vertices must be distinct")
        if self._self_intersects():
            raise ValueError("polyline is self-intersecting")

    def segments(self):
        """(S, 2, 2) array of segment endpoints."""
        a = self.vertices
        b = np.roll(a, -1, axis=0) if self.closed else a[1:]
        a = a if self.closed else a[:-1]
        return np.stack([a, b], axis=1)

    def _self_intersects(self) -> bool:
        segs = self.segments()
        s = len(segs)
        if s < 3:
            return False
        a = segs[:, 0]
        b = segs[:, 1]
        # pair (i, j), j >= i + 2, skipping the wrap-adjacent pair on loops
        ii, jj = np.triu_indices(s, k=2)
        if self.closed:
            keep = ~((ii == 0) & (jj == s - 1))
            ii, jj = ii[keep], jj[keep]
        if len(ii) == 0:
            return False

        def cross(o, p, q):
            return ((p[:, 0] - o[:, 0]) * (q[:, 1] - o[:, 1])
                    - (p[:, 1] - o[:, 1]) * (q[:, 0] - o[:, 0]))

        for lo in range(0, len(ii), 4_000_000):
            i = ii[lo:lo + 4_000_000]
            j = jj[lo:lo + 4_000_000]
            d1 = cross(a[i], b[i], a[j])
            d2 = cross(a[i], b[i], b[j])
            d3 = cross(a[j], b[j], a[i])
            d4 = cross(a[j], b[j], b[i])
            proper = (d1 * d2 < 0) & (d3 * d4 < 0)
            if proper.any():
                return True
        return False

    def arclength(self) -> np.ndarray:
        """Cumulative arclength parameter per vertex (starting at 0)."""
        d = np.hypot(*np.diff(self.vertices, axis=0).T)
        return np.concatenate([[0.0], np.cumsum(d)])

    @property
    def length(self) -> float:
        s = self.arclength()[-1]
        if self.closed:
            s += float(np.hypot(*(self.vertices[0] - self.vertices[-1])))
        return float(s)

    def signed_area(self) -> float:
        """Shoelace area; positive for counterclockwise loops."""
        if not self.closed:
            raise ValueError("signed area is defined for closed polylines")
        x, y = self.vertices.T
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def resample(self, n: int, anchor=None) -> "Polyline":
        """Arclength-uniform resample with n vertices.

        Closed loops use periodic cubic interpolation; open chains linear.
        For closed loops the start is placed at the curve point nearest
        ``anchor`` (default: vertex 0), which keeps resampled loops aligned
        across snapshots.
        """
        from scipy.interpolate import CubicSpline

        v = self.vertices
        if self.closed:
            pts = np.vstack([v, v[:1]])
            s = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(pts, axis=0).T))])
            total = s[-1]
            spl = CubicSpline(s, pts, bc_type="periodic")
            if anchor is not None:
                dense = np.linspace(0.0, total, 8 * len(v), endpoint=False)
                pd = spl(dense)
                k = int(np.argmin((pd[:, 0] - anchor[0]) ** 2 + (pd[:, 1] - anchor[1]) ** 2))
                s0 = dense[k]
            else:
                s0 = 0.0
            snew = (s0 + total * np.arange(n) / n) % total
            out = spl(snew)
            return Polyline(out, closed=True)
        s = self.arclength()
        snew = np.linspace(0.0, s[-1], n)
        x = np.interp(snew, s, v[:, 0])
        y = np.interp(snew, s, v[:, 1])
        return Polyline(np.stack([x, y], axis=1), closed=False)

    # CSV round trip: x,y columns, closed flag (and optional time) in a
    # header comment.
    def to_csv(self, path: str, time=None) -> None:
        with open(path, "w") as fh:
            extra = "" if time is None else f" time={float(time)!r}"
            fh.write(f"# closed={'true' if self.closed else 'false'}{extra}\n")
            fh.write("x,y\n")
            for x, y in self.vertices:
                fh.write(f"{float(x)!r},{float(y)!r}\n")

    @staticmethod
    def from_csv(path: str):
        """Returns (polyline, time_or_None)."""
        with open(path) as fh:
            header = fh.readline().strip()
            body = fh.read()
        closed = "closed=true" in header
        time = None
        for tok in header.split():
            if tok.startswith("time="):
                time = float(tok[5:])
        arr = np.loadtxt(io.StringIO(body), delimiter=",", skiprows=1, ndmin=2)
        return Polyline(arr, closed=closed), time


def circle_polyline(radius: float, n: int = 256, center=(0.0, 0.0)) -> Polyline:
    """Counterclockwise regular n-gon inscribed in the circle."""
    th = 2.0 * np.pi * np.arange(n) / n
    pts = np.stack([center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)], axis=1)
    return Polyline(pts, closed=True)


# --- signed distance ---------------------------------------------------------

def _point_segment_distance(points, a, b, pair_budget=4_000_000):
    """Min distance from each point to the segment set, plus nearest index.

    Exact brute force over all (point, segment) pairs, chunked so the
    temporaries stay within a fixed pair budget.
    """
    ab = b - a
    ab2 = np.maximum(np.sum(ab * ab, axis=1), 1e-300)
    best = np.full(len(points), np.inf)
    best_idx = np.zeros(len(points), dtype=np.int64)
    chunk = max(1, pair_budget // max(len(a), 1))
    for lo in range(0, len(points), chunk):
        p = points[lo:lo + chunk]
        # (m, s) projections, clipped to the segment
        t = ((p[:, None, 0] - a[None, :, 0]) * ab[None, :, 0]
             + (p[:, None, 1] - a[None, :, 1]) * ab[None, :, 1]) / ab2[None, :]
        t = np.clip(t, 0.0, 1.0)
        cx = a[None, :, 0] + t * ab[None, :, 0]
        cy = a[None, :, 1] + t * ab[None, :, 1]
        d2 = (p[:, None, 0] - cx) ** 2 + (p[:, None, 1] - cy) ** 2
        idx = np.argmin(d2, axis=1)
        rows = np.arange(len(p))
        best[lo:lo + chunk] = np.sqrt(d2[rows, idx])
        best_idx[lo:lo + chunk] = idx
    return best, best_idx


def _crossing_parity(points, poly: Polyline):
    """True where the point is inside the closed polyline (even-odd rule)."""
    x, y = points[:, 0], points[:, 1]
    v = poly.vertices
    inside = np.zeros(len(points), dtype=bool)
    n = len(v)
    for k in range(n):
        x1, y1 = v[k]
        x2, y2 = v[(k + 1) % n]
        hit = ((y1 > y) != (y2 > y))
        if not hit.any():
            continue
        xs = x1 + (y[hit] - y1) / (y2 - y1) * (x2 - x1)
        flip = np.zeros(len(points), dtype=bool)
        flip[hit] = xs > x[hit]
        inside ^= flip
    return inside


def signed_distance(points, poly: Polyline):
    """Exact signed distance from points (m, 2) to a polyline.

    Closed curves: negative inside (even-odd rule, orientation ignored).
    Open curves: positive on the left of the direction of travel, by the
    cross product with the nearest segment.
    """
    points = np.asarray(points, dtype=np.float64)
    segs = poly.segments()
    dist, idx = _point_segment_distance(points, segs[:, 0], segs[:, 1])
    if poly.closed:
        sign = np.where(_crossing_parity(points, poly), -1.0, 1.0)
    else:
        a = segs[idx, 0]
        b = segs[idx, 1]
        cr = ((b[:, 0] - a[:, 0]) * (points[:, 1] - a[:, 1])
              - (b[:, 1] - a[:, 1]) * (points[:, 0] - a[:, 0]))
        sign = np.where(cr >= 0.0, 1.0, -1.0)
    return sign * dist


# --- marching squares --------------------------------------------------------

def _interp_crossing(v1, v2):
    # crossing parameter on an edge whose endpoint values straddle zero
    return v1 / (v1 - v2)


def extract_nodal_set(u: ScalarField):
    """Zero contours by marching squares with linear edge interpolation.

    Each connected component becomes one Polyline, oriented so u < 0 lies on
    the left.  Saddle cells are split by the sign of the cell average.  On
    periodic grids, chains crossing the seam are unwrapped into continuous
    coordinates; loops that wind around the torus are returned as open
    chains.  A field without sign changes yields an empty list.
    """
    g = u.grid
    vals = u.values
    periodic = g.boundary == PERIODIC
    xs, ys = g.x_nodes(), g.y_nodes()
    lx, ly = g.x1 - g.x0, g.y1 - g.y0
    ncx = g.nx if periodic else g.nx - 1
    ncy = g.ny if periodic else g.ny - 1

    if periodic:
        vv = np.pad(vals, ((0, 1), (0, 1)), mode="wrap")
        xe = np.concatenate([xs, [g.x1]])
        ye = np.concatenate([ys, [g.y1]])
    else:
        vv, xe, ye = vals, xs, ys

    neg = vv < 0.0
    # cells with at least one sign change
    cell_any = (neg[:-1, :-1] ^ neg[:-1, 1:]) | (neg[:-1, :-1] ^ neg[1:, :-1]) \
        | (neg[1:, 1:] ^ neg[:-1, 1:]) | (neg[1:, 1:] ^ neg[1:, :-1])
    jj, ii = np.nonzero(cell_any)

    # edge ids: ('h', i, j) between nodes (i,j)-(i+1,j); ('v', i, j) between
    # (i,j)-(i,j+1); indices taken modulo the grid on periodic domains.
    def hkey(i, j):
        return (0, i % g.nx if periodic else i, j % g.ny if periodic else j)

    def vkey(i, j):
        return (1, i % g.nx if periodic else i, j % g.ny if periodic else j)

    crossings = {}

    def edge_point(kind, i, j):
        key = (kind, i % g.nx, j % g.ny) if periodic else (kind, i, j)
        if key in crossings:
            return key
        if kind == 0:
            t = _interp_crossing(vv[j, i], vv[j, i + 1])
            pt = (xe[i] + t * (xe[i + 1] - xe[i]), ye[j])
        else:
            t = _interp_crossing(vv[j, i], vv[j + 1, i])
            pt = (xe[i], ye[j] + t * (ye[j + 1] - ye[j]))
        crossings[key] = pt
        return key

    adjacency = {}

    def add_segment(k1, k2):
        adjacency.setdefault(k1, []).append(k2)
        adjacency.setdefault(k2, []).append(k1)

    for i, j in zip(ii, jj):
        bl, br = neg[j, i], neg[j, i + 1]
        tl, tr = neg[j + 1, i], neg[j + 1, i + 1]
        code = (bl << 0) | (br << 1) | (tr << 2) | (tl << 3)
        if code in (0, 15):
            continue
        eb = (0, i, j)           # bottom edge
        et = (0, i, j + 1)       # top edge
        el = (1, i, j)           # left edge
        er = (1, i + 1, j)       # right edge
        pairs = {
            1: [(el, eb)], 14: [(el, eb)],
            2: [(eb, er)], 13: [(eb, er)],
            4: [(er, et)], 11: [(er, et)],
            8: [(et, el)], 7: [(et, el)],
            3: [(el, er)], 12: [(el, er)],
            6: [(eb, et)], 9: [(eb, et)],
        }.get(code)
        if pairs is None:
            # saddle: 5 = BL+TR negative, 10 = BR+TL negative
            avg_neg = (vv[j, i] + vv[j, i + 1] + vv[j + 1, i] + vv[j + 1, i + 1]) < 0.0
            if code == 5:
                pairs = [(el, et), (eb, er)] if avg_neg else [(el, eb), (er, et)]
            else:
                pairs = [(el, eb), (er, et)] if avg_neg else [(el, et), (eb, er)]
        for k1, k2 in pairs:
            p1 = edge_point(*k1)
            p2 = edge_point(*k2)
            add_segment(p1, p2)

    if not adjacency:
        return []

    # stitch chains, endpoints (degree 1) first, remaining cycles after
    visited = set()
    chains = []
    keys_sorted = sorted(adjacency.keys())
    starts = [k for k in keys_sorted if len(adjacency[k]) == 1]
    for phase in (0, 1):
        pool = starts if phase == 0 else keys_sorted
        for start in pool:
            if start in visited or (phase == 1 and len(adjacency[start]) != 2):
                continue
            chain = [start]
            visited.add(start)
            cur = start
            closed = False
            while True:
                nxt = None
                for cand in adjacency[cur]:
                    if cand == start and len(chain) > 2:
                        closed = True
                        break
                    if cand not in visited:
                        nxt = cand
                        break
                if closed or nxt is None:
                    break
                chain.append(nxt)
                visited.add(nxt)
                cur = nxt
            if len(chain) >= 2:
                chains.append((chain, closed))

    polys = []
    gx, gy = fd_gradient(u)
    for chain, closed in chains:
        pts = np.array([crossings[k] for k in chain])
        if periodic:
            # unwrap seam jumps: consecutive crossings live in one cell
            d = np.diff(pts, axis=0)
            d[:, 0] -= lx * np.round(d[:, 0] / lx)
            d[:, 1] -= ly * np.round(d[:, 1] / ly)
            pts = np.vstack([pts[:1], pts[:1] + np.cumsum(d, axis=0)])
            if closed:
                gap = pts[0] - pts[-1]
                if abs(gap[0]) > lx / 2 or abs(gap[1]) > ly / 2:
                    closed = False  # winds around the torus
        # drop exact duplicates produced by crossings at shared nodes
        keep = np.ones(len(pts), dtype=bool)
        keep[1:] = np.hypot(*(np.diff(pts, axis=0).T)) > 0.0
        pts = pts[keep]
        if closed and len(pts) >= 2 and np.hypot(*(pts[0] - pts[-1])) == 0.0:
            pts = pts[:-1]
        if len(pts) < (3 if closed else 2):
            continue
        poly = Polyline(pts, closed=closed, validate=False)
        # orient: u < 0 on the left <=> grad u . left-normal < 0 at the
        # best-conditioned vertex
        probe = _bilinear_many(gx.values, g, poly.vertices), _bilinear_many(gy.values, g, poly.vertices)
        gxv, gyv = probe
        mag = np.hypot(gxv, gyv)
        k = int(np.argmax(mag))
        t = (pts[(k + 1) % len(pts)] - pts[k - 1]) if closed else \
            (pts[min(k + 1, len(pts) - 1)] - pts[max(k - 1, 0)])
        ndotg = -t[1] * gxv[k] + t[0] * gyv[k]
        if ndotg > 0.0:
            poly = Polyline(pts[::-1].copy(), closed=closed, validate=False)
        polys.append(poly)
    return polys


def _bilinear_many(values, grid, pts):
    """Bilinear sample of a (ny, nx) array at physical points (m, 2)."""
    from scipy.ndimage import map_coordinates

    col = (pts[:, 0] - grid.x0) / grid.hx
    row = (pts[:, 1] - grid.y0) / grid.hy
    mode = "grid-wrap" if grid.boundary == PERIODIC else "nearest"
    return map_coordinates(values, np.stack([row, col]), order=1, mode=mode)


# --- curvature ---------------------------------------------------------------

@dataclass
class CurveGeometry:
    """Per-vertex curvature / left normal / arclength, plus total length."""

    curvature: np.ndarray
    normal: np.ndarray
    arclength: np.ndarray
    length: float

    def turning_integral(self, poly: Polyline) -> float:
        """Discrete integral of kappa ds (2 pi for convex loops)."""
        v = poly.vertices
        if poly.closed:
            ds = 0.5 * (np.hypot(*(v - np.roll(v, 1, axis=0)).T)
                        + np.hypot(*(np.roll(v, -1, axis=0) - v).T))
        else:
            seg = np.hypot(*np.diff(v, axis=0).T)
            ds = np.zeros(len(v))
            ds[:-1] += 0.5 * seg
            ds[1:] += 0.5 * seg
        return float(np.sum(self.curvature * ds))


def polyline_curvature(poly: Polyline, stride: int = 1) -> CurveGeometry:
    """Signed curvature by the circle through (i-stride, i, i+stride).

    The fit is exact on vertices sampled from a circle.  Sign is positive
    where the curve bends toward the left normal; collinear triples get 0.
    On open chains the ends reuse the nearest interior stencil.
    """
    v = poly.vertices
    n = len(v)
    idx = np.arange(n)
    if poly.closed:
        im = (idx - stride) % n
        ip = (idx + stride) % n
    else:
        im = np.clip(idx - stride, 0, n - 1)
        ip = np.clip(idx + stride, 0, n - 1)
        # end vertices: shift the stencil inward so three points stay distinct
        im[0], ip[0] = 0, min(2 * stride, n - 1)
        im[-1], ip[-1] = max(n - 1 - 2 * stride, 0), n - 1
    a, b, c = v[im], v, v[ip]
    u1 = b - a
    u2 = c - b
    w = c - a
    cross = u1[:, 0] * u2[:, 1] - u1[:, 1] * u2[:, 0]
    l1 = np.hypot(*u1.T)
    l2 = np.hypot(*u2.T)
    lw = np.hypot(*w.T)
    denom = l1 * l2 * lw
    scale = np.maximum(denom, 1e-300)
    kappa = 2.0 * cross / scale
    kappa[denom == 0.0] = 0.0
    # collinear guard: |cross| below round-off relative to segment scale
    kappa[np.abs(cross) <= 1e-14 * l1 * l2] = 0.0

    t = np.where(lw[:, None] > 0, w / np.maximum(lw, 1e-300)[:, None], 0.0)
    normal = np.stack([-t[:, 1], t[:, 0]], axis=1)
    return CurveGeometry(kappa, normal, poly.arclength(), poly.length)


# --- enhanced second fundamental form ---------------------------------------

def enhanced_second_fundamental_form(u: ScalarField, grad_floor: float = 0.1) -> ScalarField:
    """|grad(grad u / |grad u|)| = sqrt(|D2 u|^2 - |grad|grad u||^2) / |grad u|.

    Bounds the curvature of every level set at once; zero iff level sets are
    flat.  Points where |grad u| < grad_floor * max|grad u| are masked with
    NaN (the quantity is meaningless in the saturated phases).  Cancellation
    can push the radicand slightly negative; it is clamped at zero.
    """
    if not grad_floor > 0.0:
        raise ValueError("grad_floor must be positive")
    gx, gy = fd_gradient(u)
    fxx, fxy, _, fyy = fd_hessian(u)
    gxv, gyv = gx.values, gy.values
    mag = np.hypot(gxv, gyv)
    floor = grad_floor * mag.max()
    with np.errstate(invalid="ignore", divide="ignore"):
        nx_, ny_ = gxv / mag, gyv / mag
        hess2 = fxx.values**2 + 2.0 * fxy.values**2 + fyy.values**2
        hn_x = fxx.values * nx_ + fxy.values * ny_
        hn_y = fxy.values * nx_ + fyy.values * ny_
        rad = hess2 - (hn_x**2 + hn_y**2)
        out = np.sqrt(np.maximum(rad, 0.0)) / mag
    out[mag < floor] = np.nan
    out[~np.isfinite(mag)] = np.nan
    return ScalarField(u.grid, out, u.time, kind="enhanced-A-masked")


# --- normal velocity ---------------------------------------------------------

def normal_velocity(traj, t_index: int, grad_floor: float = 0.1):
    """Normal speed of the nodal set at snapshot t_index.

    Uses the centered time difference of neighbouring snapshots for u_t and
    returns, for each nodal component, (polyline, v) with
    v = -u_t / |grad u| sampled by bilinear interpolation: the speed along
    the normal pointing into the positive phase (a circle with negative
    interior shrinking by curvature has v = -1/r).  Vertices where
    |grad u| falls under the floor are NaN.
    """
    snaps = traj.snapshots
    if not (0 < t_index < len(snaps) - 1):
        raise ValueError("t_index needs both neighbours for a centered difference")
    um, u0, up = snaps[t_index - 1], snaps[t_index], snaps[t_index + 1]
    dt2 = up.time - um.time
    ut = (up.values - um.values) / dt2
    gx, gy = fd_gradient(u0)
    mag = np.hypot(gx.values, gy.values)
    floor = grad_floor * mag.max()
    out = []
    for poly in extract_nodal_set(u0):
        ut_v = _bilinear_many(ut, u0.grid, poly.vertices)
        mag_v = _bilinear_many(mag, u0.grid, poly.vertices)
        v = -ut_v / np.maximum(mag_v, 1e-300)
        v[mag_v < floor] = np.nan
        out.append((poly, v))
    return out


# --- graphs over a reference -------------------------------------------------

@dataclass
class GraphOverReference:
    """Offsets of a target curve along the reference normals."""

    reference: Polyline
    offsets: np.ndarray
    valid: np.ndarray
    normals: np.ndarray

    @property
    def failure_fraction(self) -> float:
        return 1.0 - float(np.mean(self.valid))


def graph_over(target: Polyline, reference: Polyline, max_miss: float = 0.10) -> GraphOverReference:
    """Signed offsets f with reference_vertex + f * normal on the target.

    Closed references use the outward normal regardless of stored
    orientation; open references use the left normal.  Normal rays that miss
    the target are masked; more than ``max_miss`` misses is an error.
    """
    geo = polyline_curvature(reference)
    normals = geo.normal.copy()
    if reference.closed and reference.signed_area() > 0.0:
        normals = -normals  # left normal points inward on ccw loops
    segs = target.segments()
    a, b = segs[:, 0], segs[:, 1]
    ab = b - a
    f = np.full(len(reference.vertices), np.nan)
    ok = np.zeros(len(reference.vertices), dtype=bool)
    for k, (p, nvec) in enumerate(zip(reference.vertices, normals)):
        # p + f n = a + s (b - a): solve the 2x2 system per segment
        det = nvec[0] * (-ab[:, 1]) - nvec[1] * (-ab[:, 0])
        rhs = a - p
        with np.errstate(divide="ignore", invalid="ignore"):
            fs = (rhs[:, 0] * (-ab[:, 1]) - rhs[:, 1] * (-ab[:, 0])) / det
            ss = (nvec[0] * rhs[:, 1] - nvec[1] * rhs[:, 0]) / det
        hits = np.isfinite(fs) & (ss >= 0.0) & (ss <= 1.0)
        if hits.any():
            cand = fs[hits]
            f[k] = cand[np.argmin(np.abs(cand))]
            ok[k] = True
    out = GraphOverReference(reference, f, ok, normals)
    if out.failure_fraction > max_miss:
        raise ValueError(
            f"{out.failure_fraction:.1%} of normal rays miss the target "
            f"(limit {max_miss:.0%}); reference is not graph-covered"
        )
    return out


# --- parabolic Hölder seminorm ------------------------------------------------

def parabolic_holder_seminorm(points, times, values, theta: float,
                              min_sep: float, chunk: int = 512) -> float:
    """sup |v_i - v_j| / dist_p(X_i, X_j)^theta over pairs with dist_p >= min_sep,
    where dist_p = max(|x_i - x_j|, sqrt|t_i - t_j|).
    """
    if not (0.0 < theta <= 1.0):
        raise ValueError(f"theta must lie in (0, 1], got {theta}")
    if not min_sep > 0.0:
        raise ValueError("min_sep must be positive")
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[0] == 1 and points.shape[1] > 2:
        points = points.T
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    best = 0.0
    count = 0
    for lo in range(0, n, chunk):
        p = points[lo:lo + chunk]
        t = times[lo:lo + chunk]
        v = values[lo:lo + chunk]
        dx = np.sqrt(np.sum((p[:, None, :] - points[None, :, :]) ** 2, axis=2))
        dt = np.sqrt(np.abs(t[:, None] - times[None, :]))
        dp = np.maximum(dx, dt)
        adm = dp >= min_sep
        # each unordered pair is visited twice; harmless for sup and count
        count += int(adm.sum())
        if adm.any():
            ratio = np.abs(v[:, None] - values[None, :])[adm] / dp[adm] ** theta
            best = max(best, float(ratio.max()))
    if count < 2:
        raise ValueError("fewer than 2 sample pairs separated by min_sep")
    return best


# --- distances between curves --------------------------------------------------

def hausdorff_distance(a: Polyline, b: Polyline) -> float:
    """Symmetric Hausdorff distance (vertices against segments)."""
    sa = a.segments()
    sb = b.segments()
    d_ab, _ = _point_segment_distance(a.vertices, sb[:, 0], sb[:, 1])
    d_ba, _ = _point_segment_distance(b.vertices, sa[:, 0], sa[:, 1])
    return float(max(d_ab.max(), d_ba.max()))


def nearest_component(polys, ref: Polyline):
    """The extracted component closest to the reference (greedy Hausdorff)."""
    if not polys:
        raise ValueError("no components to match")
    dists = [hausdorff_distance(p, ref) for p in polys]
    return polys[int(np.argmin(dists))]
