"""Argument-principle zero counting and Jensen-type identity verifiers.

Winding numbers are accumulated from phase increments along adaptively
sampled closed paths.  A step is rejected and refined whenever the phase
jumps by more than pi/2 between adjacent samples, which makes missing a full
turn impossible for analytic integrands: sneaking past a zero would force a
near-pi step on the neighbouring intervals first.  A minimum-modulus guard
converts "zero on the contour" into a typed error so callers can perturb.

Functions are evaluated either directly or in "log form": a log-form
callable returns log f(z) (any branch per point); only phase differences and
log-magnitude differences are consumed, so the branch never matters.  Log
form lets the resonance solver count windings of channel functions whose
magnitudes span hundreds of decades.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import BoundaryConflictError, NumericalError, QuadratureError

__all__ = [
    "ContourBox",
    "winding_count",
    "locate_zeros",
    "JensenTestCase",
    "jensen_residual",
    "sector_jensen_residual",
]

_TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Boxes
# ---------------------------------------------------------------------------

@dataclass
class ContourBox:
    """Axis-aligned rectangle in the complex plane."""

    lower_left: complex
    upper_right: complex
    winding: int | None = None
    depth: int = 0

    def __post_init__(self):
        if not (self.upper_right.real > self.lower_left.real
                and self.upper_right.imag > self.lower_left.imag):
            raise ValueError("corners must define a nonempty rectangle")

    @property
    def width(self) -> float:
        return self.upper_right.real - self.lower_left.real

    @property
    def height(self) -> float:
        return self.upper_right.imag - self.lower_left.imag

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def center(self) -> complex:
        return 0.5 * (self.lower_left + self.upper_right)

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (self.lower_left.real - pad <= z.real <= self.upper_right.real + pad
                and self.lower_left.imag - pad <= z.imag <= self.upper_right.imag + pad)

    def corners(self):
        ll, ur = self.lower_left, self.upper_right
        return [ll, complex(ur.real, ll.imag), ur, complex(ll.real, ur.imag)]

    def expanded(self, margin: float, ceiling: float | None = None) -> "ContourBox":
        """Grow outward by margin; a ceiling caps the top edge (used when the
        integrand is only trustworthy below some line)."""
        m = complex(margin, margin)
        ur = self.upper_right + m
        if ceiling is not None:
            ur = complex(ur.real, min(ur.imag, ceiling))
        return ContourBox(self.lower_left - m, ur, depth=self.depth)

    def quadrisect(self, jitter: float = 0.0):
        """Split into four children; jitter shifts the split point."""
        c = self.center + complex(jitter, jitter)
        ll, ur = self.lower_left, self.upper_right
        d = self.depth + 1
        return [
            ContourBox(ll, c, depth=d),
            ContourBox(complex(c.real, ll.imag), complex(ur.real, c.imag), depth=d),
            ContourBox(complex(ll.real, c.imag), complex(c.real, ur.imag), depth=d),
            ContourBox(c, ur, depth=d),
        ]


# ---------------------------------------------------------------------------
# Evaluation helpers
# ---------------------------------------------------------------------------

def _make_log_evaluator(f, log_form: bool):
    """Wrap f into a vectorized z-array -> log f(z) evaluator."""

    def evaluate(zs: np.ndarray) -> np.ndarray:
        try:
            vals = np.asarray(f(zs), dtype=complex)
            if vals.shape != zs.shape:
                raise TypeError
        except TypeError:
            vals = np.array([complex(f(complex(z))) for z in zs])
        if log_form:
            return vals
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(vals)

    return evaluate


def _wrap_phase(d: np.ndarray) -> np.ndarray:
    return (d + math.pi) % _TWO_PI - math.pi


def _wrap1(x: float) -> float:
    return (x + math.pi) % _TWO_PI - math.pi


class _LoopSampler:
    """Adaptive sampling of a closed path with phase-step rejection."""

    def __init__(self, gamma, eval_w, n0: int, what: str):
        self.gamma = gamma
        self.eval_w = eval_w
        self.what = what
        ts = np.linspace(0.0, 1.0, max(8, n0) + 1)
        self.ts = ts
        self.zs = gamma(ts)
        self.ws = eval_w(self.zs)

    def _check_finite(self):
        if not np.all(np.isfinite(self.ws)):
            raise BoundaryConflictError(
                f"{self.what}: non-finite (or exactly zero) value on the contour")

    def refine_until_smooth(self, max_new: int = 200000):
        """Insert midpoints until all phase steps are trustworthy.

        Rejects an interval when its wrapped phase step exceeds pi/2, and
        also when the full complex log-step of the interval *or a neighbour*
        is large: a zero of multiplicity m straddled symmetrically by one
        interval can carry a true phase step near 2 pi (invisible after
        wrapping), but its neighbours then necessarily see the approach to
        the zero as a large log-magnitude swing.
        """
        self._check_finite()
        budget = max_new
        while True:
            dphi = _wrap_phase(np.diff(self.ws.imag))
            d = dphi
            dw = np.abs(np.diff(self.ws.real) + 1j * dphi)
            steep = dw > 1.5
            bad = np.abs(dphi) > math.pi / 2.0
            bad |= steep
            bad[1:] |= steep[:-1]
            bad[:-1] |= steep[1:]
            if not np.any(bad):
                return d
            dts = np.diff(self.ts)[bad]
            if np.min(dts) < 1e-12:
                raise BoundaryConflictError(
                    f"{self.what}: phase step will not settle under refinement "
                    "(zero on or almost on the contour)")
            mids = 0.5 * (self.ts[:-1][bad] + self.ts[1:][bad])
            budget -= mids.size
            if budget < 0:
                raise NumericalError(f"{self.what}: refinement budget exhausted")
            mz = self.gamma(mids)
            mw = self.eval_w(mz)
            order = np.searchsorted(self.ts, mids)
            self.ts = np.insert(self.ts, order, mids)
            self.zs = np.insert(self.zs, order, mz)
            self.ws = np.insert(self.ws, order, mw)
            self._check_finite()

    def double(self):
        mids = 0.5 * (self.ts[:-1] + self.ts[1:])
        mz = self.gamma(mids)
        mw = self.eval_w(mz)
        order = np.searchsorted(self.ts, mids)
        self.ts = np.insert(self.ts, order, mids)
        self.zs = np.insert(self.zs, order, mz)
        self.ws = np.insert(self.ws, order, mw)
        self._check_finite()

    def min_zero_distance(self) -> float:
        """Smallest |f/f'| estimate along the path, from finite differences."""
        dz = np.abs(np.diff(self.zs))
        dw = np.abs(np.diff(self.ws.real) + 1j * _wrap_phase(np.diff(self.ws.imag)))
        mask = dw > 1e-9
        if not np.any(mask):
            return math.inf
        return float(np.min(dz[mask] / dw[mask]))

    def phase_total(self, d=None) -> float:
        if d is None:
            d = _wrap_phase(np.diff(self.ws.imag))
        return float(np.sum(d)) / _TWO_PI

    def moment(self, n_zeros: int) -> complex:
        """First moment (1/(2 pi i n)) * contour integral of z dlog f."""
        dw = np.diff(self.ws.real) + 1j * _wrap_phase(np.diff(self.ws.imag))
        mid = 0.5 * (self.zs[:-1] + self.zs[1:])
        return complex(np.sum(mid * dw) / (2j * math.pi * n_zeros))


def _winding_on_loop(gamma, eval_w, n0, guard_dist, what) -> tuple[int, "_LoopSampler"]:
    loop = _LoopSampler(gamma, eval_w, n0, what)
    d = loop.refine_until_smooth()
    if loop.min_zero_distance() < guard_dist:
        raise BoundaryConflictError(
            f"{what}: a zero lies within {guard_dist:.3g} of the contour; "
            "perturb the box and retry")
    total = loop.phase_total(d)
    snapped = round(total)
    if abs(total - snapped) > 0.05:
        loop.double()
        d = loop.refine_until_smooth()
        total2 = loop.phase_total(d)
        if abs(total2 - round(total2)) > 0.25 or round(total2) != snapped:
            raise NumericalError(
                f"{what}: winding estimate {total:.3f} -> {total2:.3f} does not "
                "settle on an integer")
        snapped = round(total2)
    return int(snapped), loop


def _box_gamma(box: ContourBox):
    cs = box.corners()
    cs.append(cs[0])
    cs = np.array(cs, dtype=complex)

    def gamma(ts):
        ts = np.asarray(ts, dtype=float)
        seg = np.minimum((ts * 4).astype(int), 3)
        frac = ts * 4 - seg
        return cs[seg] * (1 - frac) + cs[seg + 1] * frac

    return gamma


def _circle_gamma(center: complex, radius: float):
    def gamma(ts):
        return center + radius * np.exp(2j * math.pi * np.asarray(ts))

    return gamma


def winding_count(f, box: ContourBox, samples: int = 32, *,
                  log_form: bool = False, guard: float = 1e-3) -> int:
    """Number of zeros of f inside the box, counted with multiplicity.

    f must be holomorphic on a neighbourhood of the closed box with no zero
    within ``guard * diameter`` of the boundary; a suspected boundary zero
    raises BoundaryConflictError.  ``samples`` sets the initial sampling of
    the whole boundary loop.
    """
    eval_w = _make_log_evaluator(f, log_form)
    w, _ = _winding_on_loop(_box_gamma(box), eval_w, samples,
                            guard * box.diameter, f"winding over {box.lower_left}..{box.upper_right}")
    box.winding = w
    return w


# ---------------------------------------------------------------------------
# Zero localization
# ---------------------------------------------------------------------------

def _newton_polish(eval_w, z0: complex, mult: int, tol: float, bound_check):
    """Secant iteration on log f, exact for an isolated power (z - z*)^mult.

    From two iterates, rho = exp((log f_b - log f_a)/mult) equals
    (z_b - z*)/(z_a - z*), which solves for z* directly; for analytic f this
    converges superlinearly and, unlike derivative stencils, keeps working
    arbitrarily close to the zero (no stencil ever straddles it).  Returns
    (z, last_step) or None on failure.
    """
    scale = max(abs(z0), 1.0)
    za = z0
    values = eval_w(np.array([za]))
    wa = complex(values[0])
    if not np.isfinite(values[0]):
        return za, 0.0  # landed on an exact zero of f
    zb = z0 + 1e-5 * scale * complex(0.6, 0.8)
    values = eval_w(np.array([zb]))
    wb = complex(values[0])
    if not np.isfinite(values[0]):
        return zb, 0.0
    step = math.inf
    for _ in range(60):
        dw = wb - wa
        dw = complex(dw.real, _wrap1(dw.imag)) / mult
        rho = cmath.exp(dw)
        denom = 1.0 - rho
        if denom == 0:
            return None
        z_new = (zb - rho * za) / denom
        step = abs(z_new - zb)
        if not bound_check(z_new):
            return None
        za, wa = zb, wb
        zb = z_new
        values = eval_w(np.array([zb]))
        wb = complex(values[0])
        if not np.isfinite(values[0]):
            return zb, 0.0
        if step < 1e-14 * max(abs(z_new), 1.0):
            return zb, step
    return (zb, step) if step < tol else None


def _circle_winding(eval_w, center: complex, radius: float, what: str) -> int:
    w, _ = _winding_on_loop(_circle_gamma(center, radius), eval_w, 16,
                            radius * 1e-6, what)
    return w


def _winding_with_perturbation(eval_w, box: ContourBox, samples: int,
                               tol: float, what: str,
                               ceiling: float | None = None,
                               guard_dist: float | None = None):
    """Winding of a box, expanding it slightly on boundary conflicts.

    Returns (winding, effective_box).  Expansion never loses interior zeros;
    it may capture a zero just outside, which deduplication downstream
    removes.  A ceiling keeps the expanded top edge below a line the caller
    must not cross; guard_dist overrides the default minimum zero-to-contour
    distance of 1e-3 times the diameter (large sweep contours legitimately
    pass close to zeros they enclose).
    """
    margin0 = max(tol, 2e-3 * box.diameter)
    last = None
    for attempt in range(8):
        if attempt == 0:
            eff = box
        else:
            # expand outward and shift a little so retries do not keep
            # marching toward the same external zero
            m = margin0 * attempt * (math.sqrt(2) - 1.0)
            shift = complex(m / 3.0 * ((attempt % 3) - 1),
                            -m / 5.0 * (attempt % 2))
            ll = box.lower_left - complex(m, m) + shift
            ur = box.upper_right + complex(m, m) + shift
            if ceiling is not None:
                ur = complex(ur.real, min(ur.imag, ceiling))
            eff = ContourBox(ll, ur, depth=box.depth)
        try:
            w, loop = _winding_on_loop(
                _box_gamma(eff), eval_w, samples,
                guard_dist if guard_dist is not None else 1e-3 * eff.diameter,
                what)
            return w, eff, loop
        except BoundaryConflictError as exc:
            last = exc
    raise BoundaryConflictError(
        f"{what}: persistent boundary conflicts after perturbation") from last


def locate_zeros(f, box: ContourBox, tol: float, *, fprime=None,
                 log_form: bool = False, samples: int = 32,
                 residual_tol: float | None = None,
                 ceiling: float | None = None,
                 guard_dist: float | None = None):
    """All zeros of f inside the box, as (location, multiplicity) pairs.

    Quadrisects recursively until sub-boxes carry winding <= 1 or shrink
    below ``tol`` in diameter, refines isolated zeros by Newton iteration,
    and reads multiplicities off the winding of a small circle around each
    accepted zero.  Clusters tighter than ``tol`` are reported as one zero
    with the aggregate multiplicity at the cluster's winding centroid.
    """
    del fprime  # log-derivative differences serve all callers uniformly
    eval_w = _make_log_evaluator(f, log_form)
    found: list[tuple[complex, int]] = []
    top_w, top_box, top_loop = _winding_with_perturbation(
        eval_w, box, samples, tol, "locate_zeros top box", ceiling, guard_dist)
    stack = [(top_box, top_w, top_loop)]
    while stack:
        b, w, loop = stack.pop()
        if w == 0:
            continue
        if w < 0:
            raise NumericalError(
                f"negative winding {w} over box at {b.center:.6g}: the "
                "integrand has a pole inside (not holomorphic)")
        if w == 1 or b.diameter < tol:
            z = _resolve_single_box(eval_w, b, w, tol, residual_tol, loop)
            if z is not None:
                found.append(z)
                continue
            # Newton failed: keep quadrisecting toward the cluster limit
            if b.diameter < tol:
                raise NumericalError(
                    f"could not resolve zero in box around {b.center:.6g}")
        for child, cw, cloop in _split_box(eval_w, b, w, samples, tol, ceiling):
            stack.append((child, cw, cloop))

    return _dedup_zeros(found, tol)


def _resolve_single_box(eval_w, b: ContourBox, w: int, tol, residual_tol,
                        loop: "_LoopSampler | None" = None):
    """Newton (w == 1) or centroid (cluster) resolution inside one box.

    When the caller's boundary sampling is available, the first contour
    moment seeds Newton: for a winding-1 box the moment *is* the zero up to
    quadrature error, so the iteration converges in a couple of steps and
    does not wander off to a neighbouring zero.
    """
    what = f"multiplicity circle at box {b.center:.6g}"
    if w == 1:
        seed = b.center
        if loop is not None:
            m1 = loop.moment(1)
            if b.contains(m1, pad=0.25 * b.diameter):
                seed = m1
        res = _newton_polish(eval_w, seed, 1, tol,
                             lambda z: b.contains(z, pad=0.75 * b.diameter))
        if res is not None:
            z, _ = res
            # accept only zeros strictly inside: Newton may slide to a
            # neighbouring zero outside, which belongs to another box
            if b.contains(z):
                mult = _circle_winding(eval_w, z, _mult_radius(z, tol), what)
                if mult >= 1 and _residual_ok(eval_w, z, residual_tol):
                    return z, mult
        if b.diameter >= tol:
            return None
    # cluster (or stubborn) case: winding centroid plus multiplicity circle
    loop = _LoopSampler(_box_gamma(b.expanded(0.25 * tol)), eval_w, 64,
                        f"cluster box at {b.center:.6g}")
    loop.refine_until_smooth()
    z = loop.moment(max(w, 1))
    res = _newton_polish(eval_w, z, max(w, 1), tol,
                         lambda zz: b.contains(zz, pad=b.diameter))
    if res is not None and b.contains(res[0], pad=0.25 * b.diameter):
        z = res[0]
    mult = _circle_winding(eval_w, z, _mult_radius(z, tol), what)
    if mult < 1:
        mult = w
    if not _residual_ok(eval_w, z, residual_tol):
        raise NumericalError(f"residual check failed for zero near {z:.6g}")
    return z, mult


def _mult_radius(z: complex, tol: float) -> float:
    return max(2.0 * tol, 1e-9 * max(abs(z), 1.0))


def _residual_ok(eval_w, z: complex, residual_tol) -> bool:
    if residual_tol is None:
        return True
    w = eval_w(np.array([z]))[0]
    if not np.isfinite(w):          # log(0): the point is an exact zero
        return True
    return math.exp(min(w.real, 700.0)) < residual_tol


def _split_box(eval_w, b: ContourBox, w: int, samples: int, tol: float,
               ceiling: float | None = None):
    """Quadrisect b, jittering the split point until children are clean.

    Jitter handles zeros on the split cross; zeros hugging the *outer*
    boundary are handled by nudging the whole parent (expand plus shift) and
    re-deriving its winding, since no amount of cross jitter moves the outer
    edges.  The parent only ever grows, so no interior zero can be lost;
    captured neighbours are deduplicated downstream.
    """
    if b.depth > 60:
        raise NumericalError(f"subdivision depth exhausted at {b.center:.6g}")
    eff, weff = b, w
    for attempt in range(10):
        jitter = 0.0 if attempt == 0 else (
            eff.width * (math.sqrt(2) - 1.0) / 16.0 * (1 + attempt % 4))
        children = eff.quadrisect(jitter)
        triples = []
        try:
            for c in children:
                cw, cloop = _winding_on_loop(
                    _box_gamma(c), eval_w, samples, 1e-3 * c.diameter,
                    f"child box {c.lower_left}..{c.upper_right}")
                triples.append((c, cw, cloop))
            if sum(cw for _, cw, _loop in triples) == weff:
                return triples
        except BoundaryConflictError:
            pass
        if attempt % 2 == 1:
            # nudge the parent to free its outer edges from nearby zeros
            grow = max(tol, 1.5e-3 * b.diameter) * (attempt + 1)
            shift = complex(grow / 3.0 * ((attempt % 3) - 1),
                            -grow / 4.0 * ((attempt // 2) % 2))
            ll = b.lower_left - complex(grow, grow) + shift
            ur = b.upper_right + complex(grow, grow) + shift
            if ceiling is not None:
                ur = complex(ur.real, min(ur.imag, ceiling))
            candidate = ContourBox(ll, ur, depth=b.depth)
            try:
                weff, _ = _winding_on_loop(
                    _box_gamma(candidate), eval_w, samples,
                    1e-3 * candidate.diameter,
                    f"nudged parent {candidate.lower_left}..{candidate.upper_right}")
                eff = candidate
            except BoundaryConflictError:
                continue
    raise BoundaryConflictError(
        f"could not split box at {b.center:.6g} without boundary conflicts")


def _dedup_zeros(found, tol):
    found.sort(key=lambda p: (p[0].real, p[0].imag))
    out: list[tuple[complex, int]] = []
    for z, m in found:
        if out and abs(z - out[-1][0]) < 0.5 * tol:
            zp, mp = out[-1]
            out[-1] = (zp, max(mp, m))
            continue
        out.append((z, m))
    return out


# ---------------------------------------------------------------------------
# Jensen-type identity verifiers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JensenTestCase:
    """Rational function with zeros in the open upper half plane, poles in
    the open lower half plane, scaled so that |f(0)| = 1."""

    zeros: tuple
    poles: tuple
    scale: float = field(default=1.0)

    @classmethod
    def make(cls, zeros, poles) -> "JensenTestCase":
        zeros = tuple(complex(z) for z in zeros)
        poles = tuple(complex(p) for p in poles)
        for z in zeros:
            if z.imag <= 0:
                raise ValueError(f"zero {z} is not in the open upper half plane")
        for p in poles:
            if p.imag >= 0:
                raise ValueError(f"pole {p} is not in the open lower half plane")
        if set(zeros) & set(poles):
            raise ValueError("zero and pole lists must be disjoint")
        log_scale = sum(math.log(abs(p)) for p in poles) - sum(
            math.log(abs(z)) for z in zeros)
        return cls(zeros=zeros, poles=poles, scale=math.exp(log_scale))

    def value(self, z):
        out = np.full(np.shape(z) or (1,), self.scale, dtype=complex)
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        for a in self.zeros:
            out = out * (zz - a)
        for p in self.poles:
            out = out / (zz - p)
        return out if np.shape(z) else complex(out[0])

    def log_abs(self, z) -> float:
        v = self.value(z)
        return float(np.log(np.abs(v)))

    def ray_log_increment(self, t: float, angle: float) -> complex:
        """Continuous log f(t e^{i angle}) - log f(0) along the ray.

        Each factor contributes Log((t e^{i angle} - a)/(-a)) with the
        principal branch, which is exact for straight paths because a segment
        never subtends an angle pi or more from an external point.
        """
        e = cmath.exp(1j * angle)
        acc = 0.0 + 0.0j
        for a in self.zeros:
            acc += cmath.log((t * e - a) / (-a))
        for p in self.poles:
            acc -= cmath.log((t * e - p) / (-p))
        return acc


def jensen_residual(tc: JensenTestCase, r: float, quad_tol: float = 1e-10) -> float:
    """Residual of the half-plane Jensen-type identity at radius r.

    Left side: sum of ln(r/|a|) over zeros with |a| <= r (closed form).
    Right side: (1/2pi) Im int_0^r (1/t) int_{-t}^{t} f'/f ds dt plus
    (1/2pi) int_0^pi ln|f(r e^{i theta})| d theta, both by quadrature.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    for a in tc.zeros + tc.poles:
        if abs(abs(a) - r) < 1e-12:
            raise ValueError(f"zero/pole {a} sits on the circle |z| = r; perturb r")
    lhs = sum(math.log(r / abs(a)) for a in tc.zeros if abs(a) <= r)

    def real_axis_term(t):
        if t == 0.0:
            return 0.0
        inner = tc.ray_log_increment(t, 0.0) - tc.ray_log_increment(t, math.pi)
        return inner.imag / t

    term1 = _quad(real_axis_term, 0.0, r, quad_tol, "jensen real-axis term") / _TWO_PI
    term2 = _quad(lambda th: tc.log_abs(r * cmath.exp(1j * th)), 0.0, math.pi,
                  quad_tol, "jensen arc term") / _TWO_PI
    return abs(lhs - (term1 + term2))


def sector_jensen_residual(tc: JensenTestCase, r: float, phi: float, theta: float,
                           quad_tol: float = 1e-10) -> float:
    """Residual of the sector zero-counting identity at radius r.

    The three right-hand terms: the theta-derivative of the logarithmic means
    J^t (differentiated under the integral), the argument variation along the
    ray at angle phi, and the angular log-magnitude integral from phi to
    theta.
    """
    if not 0.0 < phi < theta < math.pi:
        raise ValueError("sector angles must satisfy 0 < phi < theta < pi")
    for a in tc.zeros:
        if abs(a) <= r * (1 + 1e-12):
            ang = cmath.phase(a)
            if abs(ang - phi) < 1e-12 or abs(ang - theta) < 1e-12:
                raise ValueError(f"zero {a} lies on a sector boundary ray")
    for p in tc.poles:
        if phi <= cmath.phase(p) <= theta and abs(p) <= 1.5 * r:
            raise ValueError(f"pole {p} lies inside the closed sector")

    lhs = sum(math.log(r / abs(a)) for a in tc.zeros
              if abs(a) <= r and phi < cmath.phase(a) < theta)

    def dtheta_term(t):
        if t == 0.0:
            return 0.0
        return (1j * tc.ray_log_increment(t, theta)).real / t

    def argvar_term(t):
        if t == 0.0:
            return 0.0
        return tc.ray_log_increment(t, phi).imag / t

    term1 = _quad(dtheta_term, 0.0, r, quad_tol, "sector d/dtheta term") / _TWO_PI
    term2 = _quad(argvar_term, 0.0, r, quad_tol, "sector ray term") / _TWO_PI
    term3 = _quad(lambda om: tc.log_abs(r * cmath.exp(1j * om)), phi, theta,
                  quad_tol, "sector arc term") / _TWO_PI
    return abs(lhs - (term1 + term2 + term3))


def _quad(fn, a, b, tol, what):
    value, err, info, *rest = quad(fn, a, b, epsabs=tol, epsrel=tol,
                                   limit=300, full_output=1)
    if rest:
        raise QuadratureError(f"{what}: {rest[0].strip()}",
                              estimate=value, achieved_error=err)
    return value
