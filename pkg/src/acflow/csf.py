"""Curve shortening flow references: exact solutions and front tracking.

These are the oracles the phase-field nodal sets are measured against: the
shrinking circle r(t) = sqrt(r0^2 - 2t), the translating grim-reaper graph
y = t - log cos x, and a front-tracking integrator for everything else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Polyline, polyline_curvature

EXTINCT = None


def circle_exact(r0: float, t: float):
    """Radius of the shrinking circle, or None past extinction (t >= r0^2/2)."""
    if r0 <= 0.0:
        raise ValueError("r0 must be positive")
    rad2 = r0 * r0 - 2.0 * t
    if rad2 <= 0.0:
        return EXTINCT
    return math.sqrt(rad2)


def grim_reaper(x, t):
    """Height of the unit-speed translating graph y = t - log cos x, |x| < pi/2."""
    xa = np.asarray(x, dtype=np.float64)
    if np.any(np.abs(xa) >= math.pi / 2.0):
        raise ValueError("grim reaper is defined for |x| < pi/2")
    out = t - np.log(np.cos(xa))
    return out if out.ndim else float(out)


def grim_reaper_curve(t: float = 0.0, cut: float = 0.05, tail: float = 0.0,
                      spacing: float = 0.01) -> Polyline:
    """Polyline sampling of the reaper at time t, truncated to |x| <= pi/2 - cut.

    ``tail`` > 0 extends both ends straight up along the vertical asymptotes
    (the finite-window stand-in for the eternal solution's infinite arms).
    """
    xm = math.pi / 2.0 - cut
    n = max(64, int(2.0 * xm / spacing))
    x = np.linspace(-xm, xm, n)
    pts = np.stack([x, grim_reaper(x, t)], axis=1)
    if tail > 0.0:
        ytop = pts[-1, 1]
        m = max(2, int(tail / max(spacing, 1e-6)))
        yt = np.linspace(ytop, ytop + tail, m + 1)[1:]
        right = np.stack([np.full_like(yt, xm), yt], axis=1)
        left = np.stack([np.full_like(yt, -xm), yt], axis=1)[::-1]
        pts = np.concatenate([left, pts, right], axis=0)
    return Polyline(pts, closed=False)


@dataclass
class CsfState:
    curve: Polyline
    time: float = 0.0


def front_tracking_step(state: CsfState, dt: float,
                        reparam_ratio: float = 4.0) -> CsfState:
    """Move each vertex by kappa * dt along the curvature vector.

    The curvature comes from the circumscribed-circle fit, which is exact on
    sampled circles, so the shrinking-circle oracle is reproduced to the time
    discretization error.  Vertices are resampled to uniform arclength when
    the max/min segment ratio exceeds ``reparam_ratio``.
    """
    poly = state.curve
    seg = np.hypot(*np.diff(poly.vertices, axis=0).T)
    if poly.closed:
        seg = np.append(seg, np.hypot(*(poly.vertices[0] - poly.vertices[-1])))
    if dt > seg.min() ** 2 / 2.0:
        raise ValueError(
            f"dt = {dt:.3e} exceeds (min segment)^2 / 2 = {seg.min() ** 2 / 2:.3e}"
        )
    geo = polyline_curvature(poly)
    kmax = float(np.max(np.abs(geo.curvature)))
    if kmax * dt > 0.1:
        raise ValueError(
            f"curvature step too large: max|kappa| dt = {kmax * dt:.3g} > 0.1; "
            f"reduce dt below {0.1 / max(kmax, 1e-300):.3e}"
        )
    moved = poly.vertices + dt * geo.curvature[:, None] * geo.normal
    out = Polyline(moved, closed=poly.closed, validate=False)
    seg2 = np.hypot(*np.diff(out.vertices, axis=0).T)
    if poly.closed:
        seg2 = np.append(seg2, np.hypot(*(out.vertices[0] - out.vertices[-1])))
    if seg2.max() / max(seg2.min(), 1e-300) > reparam_ratio:
        out = out.resample(len(poly.vertices))
    return CsfState(out, state.time + dt)


def front_tracking(curve: Polyline, dt: float, t_end: float,
                   snapshot_every: int = 50):
    """Run front tracking from t = 0 to t_end; returns the list of states."""
    state = CsfState(curve, 0.0)
    states = [state]
    n = int(round(t_end / dt))
    for k in range(1, n + 1):
        state = front_tracking_step(state, dt)
        if k % snapshot_every == 0 or k == n:
            states.append(state)
    return states


def curve_gaussian_density(curve: Polyline, y, s: float) -> float:
    """Line integral of (4 pi s)^(-1/2) exp(-|x - y|^2 / 4s) along the curve."""
    segs = curve.segments()
    mid = 0.5 * (segs[:, 0] + segs[:, 1])
    ell = np.hypot(*(segs[:, 1] - segs[:, 0]).T)
    d2 = (mid[:, 0] - y[0]) ** 2 + (mid[:, 1] - y[1]) ** 2
    return float(np.sum(np.exp(-d2 / (4.0 * s)) * ell) / math.sqrt(4.0 * math.pi * s))


def csf_entropy(curve: Polyline, centers: int = 16, n_s: int = 32,
                s_min: float | None = None, s_max: float | None = None,
                refine: bool = True) -> float:
    """Entropy of a curve: sup over (y, s) of its Gaussian density.

    A straight line has entropy 1, a circle sqrt(2 pi / e) ~ 1.5203, and the
    grim reaper approaches 2 from below as its arms lengthen.
    """
    v = curve.vertices
    lo = v.min(axis=0)
    hi = v.max(axis=0)
    diam = float(np.hypot(*(hi - lo))) + 1e-12
    s_lo = s_min if s_min is not None else (diam / 200.0) ** 2
    s_hi = s_max if s_max is not None else diam**2
    cx = np.linspace(lo[0], hi[0], centers)
    cy = np.linspace(lo[1], hi[1], centers)
    best, yb, sb = -np.inf, None, None
    for s in np.geomspace(s_lo, s_hi, n_s):
        for yy in cy:
            for xx in cx:
                val = curve_gaussian_density(curve, (xx, yy), s)
                if val > best:
                    best, yb, sb = val, (xx, yy), s
    if refine:
        gr = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = math.log(sb / 4.0), math.log(sb * 4.0)
        c, d = b - gr * (b - a), a + gr * (b - a)
        fc = curve_gaussian_density(curve, yb, math.exp(c))
        fd = curve_gaussian_density(curve, yb, math.exp(d))
        for _ in range(40):
            if fc > fd:
                b, d, fd = d, c, fc
                c = b - gr * (b - a)
                fc = curve_gaussian_density(curve, yb, math.exp(c))
            else:
                a, c, fc = c, d, fd
                d = a + gr * (b - a)
                fd = curve_gaussian_density(curve, yb, math.exp(d))
        best = max(best, curve_gaussian_density(curve, yb, math.exp((a + b) / 2.0)))
    return float(best)
