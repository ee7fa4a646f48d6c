"""Resonances of -Laplacian + V in dimension 3 for radial step potentials.

A step potential of depth v0 supported on |x| <= a scatters partial waves
independently; in channel ell the outgoing-matching condition is the
Wronskian-type function

    W_ell(lambda) = k j_ell'(k a) h_ell(lambda a) - lambda j_ell(k a) h_ell'(lambda a),
    k = sqrt(lambda^2 - v0),

whose zeros in the open lower half plane are the channel-ell resonances,
each carrying the spherical-harmonic weight 2 ell + 1.

The solver never works with W directly: W carries a removable factor k^ell
(so the naive function vanishes at lambda^2 = v0 for every ell >= 1 and, for
odd ell, is not even single-valued in lambda), and its magnitude spans
hundreds of decades over a search region.  Both problems disappear for

    g_ell(lambda) = (2 ell + 1)!! W_ell(lambda) / k^ell,

which is analytic in lambda and is evaluated here in log form
(log-magnitude plus phase), the representation the contour machinery
consumes.  Zeros of g_ell in the open lower half plane coincide with the
resonances exactly.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .contour import (
    ContourBox,
    _winding_with_perturbation,
    _wrap_phase,
    locate_zeros,
)
from .errors import BoundaryConflictError, EvaluationOverflowError, NumericalError
from .special import _log_double_factorial, sph_h_pair_log, sph_j_pair_log

__all__ = [
    "RadialStepPotential",
    "Resonance",
    "ResonanceSet",
    "channel_condition",
    "channel_matcher_log",
    "ell_cutoff",
    "find_resonances",
    "scattering_log_det",
]

_IRR = math.sqrt(2.0) - 1.0


@dataclass(frozen=True)
class RadialStepPotential:
    """V(x) = v0 on |x| <= a, zero outside, in dimension 3."""

    a: float
    v0: complex

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("potential radius must be positive")

    @property
    def is_free(self) -> bool:
        return self.v0 == 0

    def to_dict(self):
        return {"a": self.a, "v0_re": self.v0.real, "v0_im": self.v0.imag}

    @classmethod
    def from_dict(cls, doc):
        return cls(a=doc["a"], v0=complex(doc["v0_re"], doc["v0_im"]))


@dataclass(frozen=True)
class Resonance:
    """A located pole: channel ell, weight 2*ell+1, residual |W_ell(lambda)|."""

    lam: complex
    ell: int
    multiplicity: int
    residual: float

    def __post_init__(self):
        if self.lam.imag >= 0:
            raise ValueError("resonances lie strictly in the lower half plane")
        if self.multiplicity != 2 * self.ell + 1:
            raise ValueError("multiplicity must equal 2*ell + 1")


def arg_lower(lam: complex) -> float:
    """Argument in (pi, 2*pi) for a lower-half-plane point."""
    return math.atan2(lam.imag, lam.real) + 2.0 * math.pi


@dataclass
class ResonanceSet:
    potential: RadialStepPotential
    search_radius: float
    resonances: list[Resonance]
    ell_max: int
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        self.resonances = sorted(
            self.resonances, key=lambda r: (abs(r.lam), arg_lower(r.lam), r.ell))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            f.write("ell,re_lambda,im_lambda,multiplicity,residual\n")
            for r in self.resonances:
                f.write(f"{r.ell},{r.lam.real:.17g},{r.lam.imag:.17g},"
                        f"{r.multiplicity},{r.residual:.17g}\n")

    def to_json(self, path) -> None:
        doc = {
            "potential": self.potential.to_dict(),
            "search_radius": self.search_radius,
            "ell_max": self.ell_max,
            "tolerances": self.tolerances,
            "resonances": [
                {"ell": r.ell, "re_lambda": r.lam.real, "im_lambda": r.lam.imag,
                 "multiplicity": r.multiplicity, "residual": r.residual}
                for r in self.resonances
            ],
        }
        with open(path, "w") as f:
            json.dump(doc, f, indent=1)
            f.write("\n")

    @classmethod
    def from_json(cls, path) -> "ResonanceSet":
        with open(path) as f:
            doc = json.load(f)
        return cls(
            potential=RadialStepPotential.from_dict(doc["potential"]),
            search_radius=doc["search_radius"],
            ell_max=doc["ell_max"],
            tolerances=doc["tolerances"],
            resonances=[
                Resonance(lam=complex(r["re_lambda"], r["im_lambda"]),
                          ell=r["ell"], multiplicity=r["multiplicity"],
                          residual=r["residual"])
                for r in doc["resonances"]
            ],
        )


# ---------------------------------------------------------------------------
# Channel functions
# ---------------------------------------------------------------------------

def channel_condition(ell: int, pot: RadialStepPotential, lam):
    """The bare matching function W_ell(lambda) (scalar or array).

    Uses the principal branch of k = sqrt(lambda^2 - v0); flipping the branch
    multiplies W by (-1)^ell, which leaves the zero set unchanged.  Raises
    EvaluationOverflowError when the value exceeds double range.
    """
    arr = np.atleast_1d(np.asarray(lam, dtype=complex))
    scalar = np.shape(lam) == ()
    if np.any(arr == 0):
        raise ValueError("channel condition requires lambda != 0")
    a = pot.a
    k = np.sqrt(arr * arr - pot.v0)
    jm1, jl, sj = sph_j_pair_log(ell, k * a)
    hm1, hl, sh = sph_h_pair_log(ell, arr * a, kind=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        jp = jm1 - (ell + 1) / (k * a) * jl
    hp = hm1 - (ell + 1) / (arr * a) * hl
    wt = k * jp * hl - arr * jl * hp
    # lambda^2 = v0 makes k*a = 0; the limit of W there is finite for ell = 0
    # and 0 for ell >= 1, but the expression above hits 0/0, so patch it.
    kz = k * a == 0
    if np.any(kz):
        wt[kz] = (-arr[kz] * hp[kz]) if ell == 0 else 0.0
        sj = np.where(kz, 0.0, sj)
    scale = sj + sh
    nonzero = wt != 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        logmag = np.where(nonzero, np.log(np.abs(np.where(nonzero, wt, 1.0))), -np.inf) + scale
    if np.any(nonzero & (logmag > 709.0)):
        raise EvaluationOverflowError(
            f"channel condition overflows double range in channel {ell}")
    with np.errstate(over="ignore", under="ignore"):
        out = wt * np.exp(scale)
    return complex(out[0]) if scalar else out.reshape(np.shape(lam))


def _shat_series_pair(ell: int, u: np.ndarray):
    """S(u) and S'(u) for S(u) = sum c_m u^m, c_0 = 1,
    c_{m+1} = -c_m / (2 (m+1)(2 ell + 2 m + 3))."""
    s = np.ones_like(u)
    ds = np.zeros_like(u)
    c = np.ones_like(u)  # c_m u^m
    for m in range(80):
        c_next = c * (-0.5) / ((m + 1) * (2 * ell + 2 * m + 3))  # c_{m+1} u^m
        ds = ds + (m + 1) * c_next
        c = c_next * u                                            # c_{m+1} u^{m+1}
        s = s + c
        if np.all(np.abs(c) <= 1e-19 * np.abs(s)):
            break
    return s, ds


def channel_matcher_log(ell: int, pot: RadialStepPotential, kind: int = 1):
    """Vectorized lambda-array -> log g_ell(lambda) evaluator (log form).

    g_ell = (2 ell + 1)!! (lambda a)^(ell+1) W_ell / k^ell is an entire
    function of lambda: the k^ell quotient removes the removable branch
    factor at lambda^2 = v0 (assembled from the even power series of
    j_ell(z)/z^ell near that point, so the square root never enters), and
    the (lambda a)^(ell+1) factor cancels the Hankel pole at the origin,
    which would otherwise sit a hair above the search region and poison
    winding counts on nearby tiles.  Zeros in the open lower half plane are
    exactly the channel resonances.
    """
    a = pot.a
    v0 = pot.v0
    lndd = _log_double_factorial(2 * ell + 1)

    def evaluate(lam: np.ndarray) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)
        k2 = lam * lam - v0
        k = np.sqrt(k2)
        la = lam * a
        pole_kill = (ell + 1) * np.log(la)
        hm1, hl, sh = sph_h_pair_log(ell, la, kind=kind)
        hp = hm1 - (ell + 1) / la * hl
        out = np.empty_like(lam)
        small = np.abs(k) * a < 0.5
        if np.any(small):
            u = k2[small] * (a * a)
            s, ds = _shat_series_pair(ell, u)
            A = 2.0 * a ** (ell + 1) * k2[small] * ds
            if ell > 0:
                A = A + ell * a ** (ell - 1) * s
            B = lam[small] * a ** ell * s
            g = A * hl[small] - B * hp[small]
            with np.errstate(divide="ignore", invalid="ignore"):
                out[small] = np.log(g) + sh[small] + pole_kill[small]
        big = ~small
        if np.any(big):
            kb = k[big]
            jm1, jl, sj = sph_j_pair_log(ell, kb * a)
            jp = jm1 - (ell + 1) / (kb * a) * jl
            wt = kb * jp * hl[big] - lam[big] * jl * hp[big]
            with np.errstate(divide="ignore", invalid="ignore"):
                out[big] = (np.log(wt) + sj + sh[big] + lndd
                            - ell * np.log(kb) + pole_kill[big])
        return out

    return evaluate


# ---------------------------------------------------------------------------
# Search geometry
# ---------------------------------------------------------------------------

def _search_frame(pot: RadialStepPotential, R: float, delta_axis: float,
                  attempt: int = 0):
    """Tile grid and bounding box covering the lower half disk |lambda| <= R.

    The grid origin carries an irrational-ratio offset so that grid lines do
    not coincide with symmetry axes of the zero set; retries shift it again.
    """
    a = pot.a
    side = min(1.0, R * a / 16.0) / a
    pad = side
    x0 = -(R + pad) + _IRR / 2.0 * (1.0 + 0.37 * attempt) * side
    nx = int(math.ceil(((R + pad) - x0) / side))
    y_top = -delta_axis
    ny = int(math.ceil((R + pad - delta_axis) / side))
    return side, x0, nx, y_top, ny


def _box_for_frame(x0, nx, side, y_top, ny) -> ContourBox:
    return ContourBox(complex(x0, y_top - ny * side), complex(x0 + nx * side, y_top))


def _tile_windings_batch(eval_w, tiles, samples_per_edge: int):
    """Windings for many equal tiles at once.

    Returns (windings, unresolved) where unresolved lists tile indices whose
    phase steps exceeded pi/2 somewhere (to be redone adaptively).
    """
    if not tiles:
        return np.zeros(0, dtype=int), []
    m = samples_per_edge
    t = np.arange(m) / m
    corners = np.array([[x + 1j * y, x + side + 1j * y,
                         x + side + 1j * (y + side), x + 1j * (y + side)]
                        for (x, y, side) in tiles])
    loop = np.concatenate([
        corners[:, [0]] * (1 - t) + corners[:, [1]] * t,
        corners[:, [1]] * (1 - t) + corners[:, [2]] * t,
        corners[:, [2]] * (1 - t) + corners[:, [3]] * t,
        corners[:, [3]] * (1 - t) + corners[:, [0]] * t,
        corners[:, [0]],
    ], axis=1)
    flat = loop.ravel()
    ws = np.empty(flat.shape, dtype=complex)
    chunk = 200_000
    for i in range(0, flat.size, chunk):
        ws[i:i + chunk] = eval_w(flat[i:i + chunk])
    ws = ws.reshape(loop.shape)
    d = _wrap_phase(np.diff(ws.imag, axis=1))
    dw = np.abs(np.diff(ws.real, axis=1) + 1j * d)
    finite = np.all(np.isfinite(ws), axis=1)
    smooth = (np.all(np.abs(d) <= math.pi / 2.0, axis=1) & finite
              & np.all(dw <= 1.5, axis=1))
    totals = d.sum(axis=1) / (2.0 * math.pi)
    snapped = np.rint(totals).astype(int)
    ok = smooth & (np.abs(totals - snapped) <= 0.05) & (snapped >= 0)
    windings = np.where(ok, snapped, -1)
    unresolved = [i for i in range(len(tiles)) if not ok[i]]
    return windings, unresolved


def _channel_zeros(ell: int, pot: RadialStepPotential, R: float,
                   delta_axis: float, zero_tol: float, attempt: int = 0):
    """All zeros (with multiplicity) of the channel matcher in the frame."""
    eval_w = channel_matcher_log(ell, pot)
    ceiling = -0.5 * delta_axis
    side, x0, nx, y_top, ny = _search_frame(pot, R, delta_axis, attempt)
    frame = _box_for_frame(x0, nx, side, y_top, ny)
    total, _, _ = _winding_with_perturbation(
        eval_w, frame, max(96, int(10 * R * pot.a)), zero_tol,
        f"channel {ell} frame", ceiling,
        guard_dist=max(0.4 * delta_axis, 4.0 * zero_tol))
    if total == 0:
        return [], 0
    tiles = [(x0 + i * side, y_top - (j + 1) * side, side)
             for i in range(nx) for j in range(ny)]
    windings, unresolved = _tile_windings_batch(eval_w, tiles, 12)
    unresolved = set(unresolved)
    guard = max(100.0 * zero_tol, 1e-8)  # absolute; zero spacing is far larger
    zeros: list[tuple[complex, int]] = []
    for idx, (x, y, s) in enumerate(tiles):
        w = None
        box = ContourBox(complex(x, y), complex(x + s, y + s))
        if idx not in unresolved:
            w = int(windings[idx])
        else:
            try:
                w, _, _ = _winding_with_perturbation(
                    eval_w, box, 64, zero_tol, f"channel {ell} tile", ceiling,
                    guard_dist=guard)
            except BoundaryConflictError:
                # a zero pins the tile boundary; hand the enlarged tile to
                # the locator, which subdivides with jitter (duplicates from
                # the overlap are removed below)
                box = ContourBox(
                    complex(x - 0.3 * s, y - 0.3 * s),
                    complex(x + 1.3 * s, min(y + 1.3 * s, ceiling)))
        if w == 0:
            continue
        zeros.extend(locate_zeros(eval_w, box, zero_tol, log_form=True,
                                  ceiling=ceiling, guard_dist=guard))
    zeros = _dedup(zeros, zero_tol)
    count = sum(m for _, m in zeros)
    if count < total:
        # a zero may straddle the perturbed frame boundary; retile and retry
        if attempt < 2:
            return _channel_zeros(ell, pot, R, delta_axis, zero_tol, attempt + 1)
        raise NumericalError(
            f"channel {ell}: located {count} zeros but frame winding is {total}")
    return zeros, total


def _dedup(zeros, tol):
    zeros.sort(key=lambda p: (p[0].real, p[0].imag))
    out: list[tuple[complex, int]] = []
    for z, m in zeros:
        dup = False
        for i in range(len(out) - 1, -1, -1):
            zp, mp = out[i]
            if abs(z - zp) < 4.0 * tol:
                out[i] = (zp, max(mp, m))
                dup = True
                break
            if z.real - zp.real > 4.0 * tol:
                break
        if not dup:
            out.append((z, m))
    return out


def _channel_total(ell: int, pot: RadialStepPotential, R: float,
                   delta_axis: float, zero_tol: float) -> int:
    eval_w = channel_matcher_log(ell, pot)
    side, x0, nx, y_top, ny = _search_frame(pot, R, delta_axis)
    frame = _box_for_frame(x0, nx, side, y_top, ny)
    total, _, _ = _winding_with_perturbation(
        eval_w, frame, max(96, int(10 * R * pot.a)), zero_tol,
        f"channel {ell} frame", -0.5 * delta_axis,
        guard_dist=max(0.4 * delta_axis, 4.0 * zero_tol))
    return total


def _default_zero_tol(pot: RadialStepPotential, R: float) -> float:
    return 1e-9 * max(1.0, R * pot.a) / pot.a


def ell_cutoff(pot: RadialStepPotential, R: float, *,
               delta_axis: float | None = None) -> int:
    """Smallest L with empty channels L+1, L+2, L+3 over the search frame.

    Starts from the generous guess ceil(1.5 R a + 2 sqrt(|v0|) a) + 10 and
    walks down (or, if needed, up; giving up 50 channels above the guess).
    """
    if R <= 0:
        raise ValueError("search radius must be positive")
    a = pot.a
    delta = delta_axis if delta_axis is not None else 1e-6 / a
    tol = _default_zero_tol(pot, R)
    guess = int(math.ceil(1.5 * R * a + 2.0 * math.sqrt(abs(pot.v0)) * a)) + 10

    cache: dict[int, bool] = {}

    def empty(l: int) -> bool:
        if l not in cache:
            cache[l] = _channel_total(l, pot, R, delta, tol) == 0
        return cache[l]

    if all(empty(l) for l in (guess + 1, guess + 2, guess + 3)):
        L = guess
        while L >= 0 and empty(L):
            L -= 1
        return max(L, 0)
    L = guess + 1
    while L <= guess + 50:
        if all(empty(l) for l in (L + 1, L + 2, L + 3)):
            return L
        L += 1
    raise NumericalError(
        f"channels remain nonempty {50} orders past the cutoff guess {guess}; "
        "suspected parameter pathology")


def find_resonances(pot: RadialStepPotential, R: float, *,
                    threads: int | None = None,
                    delta_axis: float | None = None) -> ResonanceSet:
    """Locate all resonances with |lambda| <= R, Im lambda < 0.

    Channels are independent work units and may be solved in separate
    processes; the merged set is identical for any thread count.
    """
    if R <= 0:
        raise ValueError("search radius must be positive")
    a = pot.a
    delta = delta_axis if delta_axis is not None else 1e-6 / a
    tol = _default_zero_tol(pot, R)
    tolerances = {"zero_tol": tol, "delta_axis": delta, "residual_tol": 1e-6}
    if pot.is_free:
        # the free resolvent has no poles in odd dimensions; verify channel 0
        cutoff = ell_cutoff(pot, R, delta_axis=delta)
        return ResonanceSet(potential=pot, search_radius=R, resonances=[],
                            ell_max=cutoff, tolerances=tolerances)

    cutoff = ell_cutoff(pot, R, delta_axis=delta)
    ells = list(range(cutoff + 1))
    results: dict[int, list] = {}
    nthreads = threads or 1
    if nthreads > 1 and len(ells) > 1:
        with ProcessPoolExecutor(max_workers=nthreads) as pool:
            futs = {ell: pool.submit(_channel_zeros, ell, pot, R, delta, tol)
                    for ell in ells}
            for ell in ells:
                results[ell] = futs[ell].result()[0]
    else:
        for ell in ells:
            results[ell] = _channel_zeros(ell, pot, R, delta, tol)[0]

    resonances: list[Resonance] = []
    for ell in ells:
        zs = [(z, m) for z, m in results[ell] if abs(z) <= R and z.imag < -delta / 2]
        if not zs:
            continue
        lams = np.array([z for z, _ in zs])
        residuals = np.abs(channel_condition(ell, pot, lams))
        for (z, m), res in zip(zs, residuals):
            for _ in range(m):  # order-m zeros enter as m coincident poles
                resonances.append(Resonance(lam=z, ell=ell,
                                            multiplicity=2 * ell + 1,
                                            residual=float(res)))
    return ResonanceSet(potential=pot, search_radius=R, resonances=resonances,
                        ell_max=cutoff, tolerances=tolerances)


# ---------------------------------------------------------------------------
# Scattering determinant
# ---------------------------------------------------------------------------

def scattering_log_det(pot: RadialStepPotential, lam: complex,
                       ell_limit: int | None = None,
                       rel_tol: float = 1e-10,
                       pole_guard: float = 1e-12) -> float:
    """ln |det S_V(lambda)| for Im lambda >= 0, by channel summation.

    Each channel contributes (2 ell + 1) ln |S_ell| with
    S_ell = -W_ell^(2) / W_ell (the incoming-wave Wronskian over the outgoing
    one); the normalizing factors of the matcher cancel in the ratio.
    Summation stops once ten consecutive channels contribute less than
    rel_tol of the running total (only after ell has passed |lambda| a).
    """
    lam = complex(lam)
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    if lam.imag < 0:
        raise ValueError("scattering_log_det is defined for Im lambda >= 0")
    if pot.is_free:
        return 0.0
    # pole detection compares |W_ell| at lambda against nearby points: for
    # lambda far from the real axis |W^(1)| << |W^(2)| is ordinary
    # exponential asymmetry, so a ratio against W^(2) would misfire
    arr = np.array([lam, lam * (1.0 + 1e-4), lam * (1.0 - 1e-4)])
    total = 0.0
    quiet = 0
    lmax = ell_limit if ell_limit is not None else 2000
    for ell in range(lmax + 1):
        w1 = channel_matcher_log(ell, pot, kind=1)(arr)
        w2 = channel_matcher_log(ell, pot, kind=2)(np.array([lam]))[0]
        if not (np.all(np.isfinite(w1)) and np.isfinite(w2)):
            raise NumericalError(f"channel {ell}: matcher not finite at {lam}")
        if w1[0].real - max(w1[1].real, w1[2].real) < math.log(pole_guard):
            raise NumericalError(
                f"channel {ell}: |W_ell| vanishes at lambda={lam} (S-matrix pole)")
        term = (2 * ell + 1) * (w2.real - w1[0].real)
        total += term
        if ell_limit is None:
            if ell > abs(lam) * pot.a and abs(term) < rel_tol * max(abs(total), 1.0):
                quiet += 1
                if quiet >= 10:
                    return total
            else:
                quiet = 0
    if ell_limit is None:
        raise NumericalError(f"channel sum did not settle by ell = {lmax}")
    return total
