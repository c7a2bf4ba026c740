"""Layer decomposition at rescaled variables: Fermi frames along the nodal
set, the optimal per-vertex profile shift, and the residual's discrete norms.

Everything here works in profile coordinates: the normal offset z counts in
units of the layer width (a physical offset of eps * z), so the standing wave
has unit width and the cutoff profile with parameter eps_eff describes the
expected layer shape.  The shift h(y) positions the profile along each normal
so that the remainder u - gbar(z - h) is L2-orthogonal to gbar'(z - h); the
root is unique and well conditioned because F(h) = integral
(u - gbar(z - h)) gbar'(z - h) dz increases through it with slope ~ alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import PERIODIC, ScalarField
from .geometry import (Polyline, extract_nodal_set, nearest_component,
                       parabolic_holder_seminorm, polyline_curvature)
from .profile import _gbar


@dataclass
class FermiFrame:
    """A reference curve with per-vertex unit normals and a tube half-width.

    ``z_max`` is in profile units; the physical tube half-width is
    eps * z_max.  Construction verifies that normal segments of that physical
    length do not cross (the tube stays embedded).
    """

    reference: Polyline
    normals: np.ndarray
    z_max: float
    epsilon: float

    def __post_init__(self):
        n = np.asarray(self.normals, dtype=np.float64)
        if n.shape != self.reference.vertices.shape:
            raise ValueError("one unit normal per reference vertex required")
        norms = np.hypot(n[:, 0], n[:, 1])
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("normals must be unit vectors")
        self.normals = n
        if self.z_max <= 0.0:
            raise ValueError("z_max must be positive")
        if self._normals_cross():
            raise ValueError(
                "normal lines cross inside the tube; reduce z_max below the reach"
            )

    def _normals_cross(self) -> bool:
        v = self.reference.vertices
        reach = self.epsilon * self.z_max
        a = v - reach * self.normals
        b = v + reach * self.normals
        n = len(v)
        if n > 600:  # thin out the pairwise test on dense frames
            pick = np.unique(np.linspace(0, n - 1, 600).astype(int))
            a, b = a[pick], b[pick]
            n = len(pick)
        ii, jj = np.triu_indices(n, k=1)

        def cross(o, p, q):
            return ((p[:, 0] - o[:, 0]) * (q[:, 1] - o[:, 1])
                    - (p[:, 1] - o[:, 1]) * (q[:, 0] - o[:, 0]))

        d1 = cross(a[ii], b[ii], a[jj])
        d2 = cross(a[ii], b[ii], b[jj])
        d3 = cross(a[jj], b[jj], a[ii])
        d4 = cross(a[jj], b[jj], b[ii])
        return bool(((d1 * d2 < 0) & (d3 * d4 < 0)).any())


def frame_from_nodal_set(u: ScalarField, eps: float, n_vertices: int = 256,
                         z_max: float | None = None, anchor=None,
                         reach_fraction: float = 0.7) -> FermiFrame:
    """Frame on the main nodal component, normals pointing into u > 0.

    z_max defaults to the cutoff support 6 |log eps| capped by
    ``reach_fraction`` of the curve's focal reach 1/max|kappa| (in profile
    units), so the tube stays embedded even when the full cutoff support does
    not fit inside the curve.
    """
    from .fields import fd_gradient
    from .geometry import _bilinear_many

    polys = extract_nodal_set(u)
    if not polys:
        raise ValueError("field has no nodal set")
    poly = max(polys, key=lambda p: p.length)
    if poly.closed:
        poly = poly.resample(n_vertices, anchor=anchor)
    geo = polyline_curvature(poly)
    normals = geo.normal.copy()
    gx, gy = fd_gradient(u)
    gxa = _bilinear_many(gx.values, u.grid, poly.vertices)
    gya = _bilinear_many(gy.values, u.grid, poly.vertices)
    flip = (gxa * normals[:, 0] + gya * normals[:, 1]) < 0.0
    normals[flip] *= -1.0
    zc = 6.0 * abs(math.log(eps))
    kmax = float(np.max(np.abs(geo.curvature)))
    if kmax > 0.0:
        zc = min(zc, reach_fraction / (kmax * eps))
    if z_max is not None:
        zc = min(zc, z_max)
    return FermiFrame(poly, normals, zc, eps)


def fermi_coordinates(frame: FermiFrame, p):
    """(nearest vertex index, signed normal offset z) or None outside the tube."""
    p = np.asarray(p, dtype=np.float64)
    d = frame.reference.vertices - p
    i = int(np.argmin(d[:, 0] ** 2 + d[:, 1] ** 2))
    z = float((p - frame.reference.vertices[i]) @ frame.normals[i]) / frame.epsilon
    if abs(z) > frame.z_max:
        return None
    return i, z


def normal_z_grid(frame: FermiFrame, samples_per_unit: float = 4.0) -> np.ndarray:
    n = int(math.ceil(frame.z_max * samples_per_unit))
    return np.linspace(-frame.z_max, frame.z_max, 2 * n + 1)


def sample_normal_lines(u: ScalarField, frame: FermiFrame,
                        z: np.ndarray | None = None, order: int = 5):
    """Sample u along each vertex normal at profile offsets z.

    Returns (z, lines) with lines[i, k] = u(vertex_i + eps * z_k * normal_i),
    interpolated with a spline of the given order (5 keeps the interpolation
    error far below the layer-shape signal at 4 samples per unit).
    """
    from scipy.ndimage import map_coordinates

    if z is None:
        z = normal_z_grid(frame)
    g = u.grid
    v = frame.reference.vertices
    pts = v[:, None, :] + (frame.epsilon * z)[None, :, None] * frame.normals[:, None, :]
    col = (pts[..., 0] - g.x0) / g.hx
    row = (pts[..., 1] - g.y0) / g.hy
    mode = "grid-wrap" if g.boundary == PERIODIC else "nearest"
    lines = map_coordinates(u.values, np.stack([row.ravel(), col.ravel()]),
                            order=order, mode=mode).reshape(pts.shape[:2])
    return z, lines


@dataclass
class ShiftField:
    """Per-vertex profile shifts with root-solve residuals and failure flags."""

    h: np.ndarray
    residuals: np.ndarray
    failed: np.ndarray

    @property
    def failure_fraction(self) -> float:
        return float(np.mean(self.failed))


def _ortho_integral(lines, z, h, eps_eff):
    """F_i(h_i) = integral (u_i(z) - gbar(z - h_i)) gbar'(z - h_i) dz (trapezoid)."""
    zz = z[None, :] - h[:, None]
    gb = _gbar(zz, eps_eff, 0)
    gb1 = _gbar(zz, eps_eff, 1)
    return np.trapezoid((lines - gb) * gb1, z, axis=1)


def solve_optimal_shift(lines: np.ndarray, z: np.ndarray, eps_eff: float,
                        bracket: float = 3.0, rel_tol: float = 1e-8,
                        max_fail: float = 0.05) -> ShiftField:
    """Per-vertex root of the orthogonality condition, by bisection.

    The residual is driven below rel_tol * integral(gbar'^2) at every vertex;
    vertices with no sign change in [-bracket, bracket] are flagged, and more
    than ``max_fail`` of them is an error (the layer is mis-tracked).
    """
    lines = np.asarray(lines, dtype=np.float64)
    if lines.ndim == 1:
        lines = lines[None, :]
    nv = lines.shape[0]
    weight = float(np.trapezoid(_gbar(z, eps_eff, 1) ** 2, z))
    tol = rel_tol * weight

    lo = np.full(nv, -bracket)
    hi = np.full(nv, bracket)
    flo = _ortho_integral(lines, z, lo, eps_eff)
    fhi = _ortho_integral(lines, z, hi, eps_eff)
    failed = ~((flo <= 0.0) & (fhi >= 0.0))
    # F increases through the root; ~60 bisections push the bracket to 1e-17
    h = 0.5 * (lo + hi)
    for _ in range(60):
        fm = _ortho_integral(lines, z, h, eps_eff)
        done = np.abs(fm) <= tol
        take_lo = (fm < 0.0) & ~done
        take_hi = (fm > 0.0) & ~done
        lo = np.where(take_lo, h, lo)
        hi = np.where(take_hi, h, hi)
        h = np.where(done, h, 0.5 * (lo + hi))
        if bool(np.all(done | failed)):
            break
    res = np.abs(_ortho_integral(lines, z, h, eps_eff))
    failed |= res > tol
    h = np.where(failed, np.nan, h)
    sf = ShiftField(h, res / weight, failed)
    if sf.failure_fraction > max_fail:
        raise ValueError(
            f"{sf.failure_fraction:.1%} of vertices have no profile-shift root "
            f"in [-{bracket}, {bracket}] (limit {max_fail:.0%})"
        )
    return sf


def build_shifted_profile(z: np.ndarray, shift: ShiftField, eps_eff: float) -> np.ndarray:
    """The optimal layer approximation gbar(z - h_i) on the sampled normals."""
    h = np.where(shift.failed, 0.0, shift.h)
    return _gbar(z[None, :] - h[:, None], eps_eff, 0)


@dataclass
class ResidualReport:
    """Discrete norms of the layer remainder phi = u - gbar(z - h)."""

    sup_norm: float
    grad_sup: float
    hess_sup: float
    time_deriv_sup: float
    holder_c2theta: float

    @property
    def c2theta_total(self) -> float:
        return (self.sup_norm + self.grad_sup + self.hess_sup
                + self.time_deriv_sup + self.holder_c2theta)


def residual_report(lines_t: np.ndarray, gstar_t: np.ndarray, z: np.ndarray,
                    arclen_step: float, times: np.ndarray, theta: float = 0.5,
                    closed: bool = True, min_sep: float | None = None,
                    max_samples: int = 1200) -> ResidualReport:
    """Sup norms and the parabolic Hölder seminorm of phi = u - g_shifted.

    ``lines_t`` and ``gstar_t`` have shape (n_times, n_vertices, n_z); y
    spacing is the (uniform) arclength step and z the profile grid, both in
    profile units, so times must be rescaled times (physical / eps^2).  The
    Hölder seminorm (exponent theta) is taken over subsampled second
    derivatives and the time derivative, with the parabolic metric
    max(|dx|, sqrt|dt|).
    """
    phi = np.asarray(lines_t, dtype=np.float64) - np.asarray(gstar_t, dtype=np.float64)
    if phi.ndim == 2:
        phi = phi[None, ...]
    nt, nv, nz = phi.shape
    dz = z[1] - z[0]
    dy = arclen_step

    def d_y(a):
        if closed:
            return (np.roll(a, -1, axis=1) - np.roll(a, 1, axis=1)) / (2.0 * dy)
        out = np.gradient(a, dy, axis=1)
        return out

    def d_z(a):
        return np.gradient(a, dz, axis=2)

    phi_y, phi_z = d_y(phi), d_z(phi)
    phi_yy, phi_zz, phi_yz = d_y(phi_y), d_z(phi_z), d_z(phi_y)
    sup = float(np.max(np.abs(phi)))
    grad = float(max(np.max(np.abs(phi_y)), np.max(np.abs(phi_z))))
    hess = float(max(np.max(np.abs(phi_yy)), np.max(np.abs(phi_zz)),
                     np.max(np.abs(phi_yz))))
    if nt > 1:
        phi_t = np.gradient(phi, times, axis=0)
        tds = float(np.max(np.abs(phi_t)))
    else:
        phi_t = None
        tds = 0.0

    holder = 0.0
    if nt > 1:
        # subsample (y, z, t) points; positions in profile units
        stride_v = max(1, nv * nz * nt // max_samples)
        yy = (np.arange(nv) * dy)[None, :, None]
        zzp = z[None, None, :]
        ys = np.broadcast_to(yy, phi.shape).ravel()[::stride_v]
        zs = np.broadcast_to(zzp, phi.shape).ravel()[::stride_v]
        ts = np.broadcast_to(times[:, None, None], phi.shape).ravel()[::stride_v]
        pts = np.stack([ys, zs], axis=1)
        sep = min_sep if min_sep is not None else 2.0 * max(dy, dz)
        for channel in (phi_yy, phi_zz, phi_yz, phi_t):
            vals = channel.ravel()[::stride_v]
            try:
                holder = max(holder, parabolic_holder_seminorm(pts, ts, vals,
                                                               theta, sep))
            except ValueError:
                pass
    return ResidualReport(sup, grad, hess, tds, holder)
