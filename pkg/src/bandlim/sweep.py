"""Cell-sweep evaluation machinery behind the certified norms.

Away from the integer grid every elementary signal factors as
f(t) = sin(pi t)/pi * g(t) with g(t) = sum_k c'_k / (t - k) and
c'_k = (-1)^k c_k.  The sweep walks unit cells [m, m+1]; in each cell
the few nearby coefficients are kept exact while the remaining "far
field" g-contribution is carried as a degree-2 Taylor model around the
cell midpoint whose coefficients are power sums
sum c'_k/(t0-k)^m.  For coefficient runs (constant value on an
arithmetic index progression) those power sums telescope to polygamma
differences, so cost per cell is polylogarithmic in the window size.

The same machinery drives the absolute-value quadrature (Gauss-Legendre
panels with a derivative-bound remainder, adaptive bisection around
sign changes), the infinite tails of the line integral, and the
branch-and-bound peak search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import dsl
from .config import DEFAULT_BUDGET, Budget
from .dyadic import Dyadic
from .enclosure import Enclosure
from .errors import GeneratorFailure, Inconclusive, ResourceLimit
from .series import (
    digamma,
    pi_enclosure,
    sin_pi,
    sinc_enclosure,
    tetragamma,
    trigamma,
)
from .signal import AlternatingCoeffs, MaterializedCoeffs, _entry_pair

_ZERO = dsl.ZERO
_HALF = Fraction(1, 2)


def _neg_expr(e):
    if isinstance(e, dsl.Lit):
        return dsl.Lit(-e.value)
    if isinstance(e, dsl.Neg):
        return e.a
    return dsl.Neg(e)


# ---------------------------------------------------------------------------
# coefficient runs
# ---------------------------------------------------------------------------

@dataclass
class Run:
    """Constant sign-folded coefficient on an arithmetic progression:
    c'_k = value for k = start, start+stride, ..., last."""

    start: int
    count: int
    stride: int
    cp_expr: object  # expression for c'_k (constant over the run)

    @property
    def last(self) -> int:
        return self.start + (self.count - 1) * self.stride

    def positions(self):
        return range(self.start, self.last + 1, self.stride)


class RunSet:
    """Sign-folded coefficient structure of a real elementary object."""

    def __init__(self, runs, supp_lo, supp_hi):
        self.runs = runs
        self.supp_lo = supp_lo
        self.supp_hi = supp_hi
        self._enc_cache = {}
        self._frac_cache = {}

    # -- construction ----------------------------------------------------

    @staticmethod
    def from_store(store):
        lo, hi = store.support()
        if isinstance(store, AlternatingCoeffs):
            if store.mode == "const":
                # c_k = base, so c'_k = (-1)^k base: two stride-2 runs
                runs = []
                for parity in (0, 1):
                    first = lo + ((parity - lo) % 2)
                    if first > hi:
                        continue
                    count = (hi - first) // 2 + 1
                    cp = store.base if parity == 0 else _neg_expr(store.base)
                    runs.append(Run(first, count, 2, cp))
                return RunSet(runs, lo, hi)
            # c_k = (-1)^(k+mode) base, so c'_k = (-1)^mode base: one run
            cp = store.base if store.mode == 0 else _neg_expr(store.base)
            return RunSet([Run(lo, hi - lo + 1, 1, cp)], lo, hi)
        if not isinstance(store, MaterializedCoeffs):
            raise GeneratorFailure("unsupported coefficient store for sweep")
        # group positions by sign-folded expression, then split each
        # group into arithmetic progressions
        groups = {}
        for k, entry in store.items():
            re, im = _entry_pair(entry)
            iv = dsl.eval_exact(im, {}) if im is not _ZERO else Fraction(0)
            if iv is None or iv != 0:
                raise GeneratorFailure("sweep requires real coefficients")
            if isinstance(re, dsl.Lit) and re.value == 0:
                continue
            cp = re if k % 2 == 0 else _neg_expr(re)
            groups.setdefault(cp, []).append(k)
        runs = []
        for cp, ks in groups.items():
            i = 0
            while i < len(ks):
                if i + 1 < len(ks):
                    stride = ks[i + 1] - ks[i]
                    j = i + 1
                    while j + 1 < len(ks) and ks[j + 1] - ks[j] == stride:
                        j += 1
                    runs.append(Run(ks[i], j - i + 1, stride, cp))
                    i = j + 1
                else:
                    runs.append(Run(ks[i], 1, 1, cp))
                    i += 1
        runs.sort(key=lambda r: (r.start, r.stride, r.count))
        return RunSet(runs, lo, hi)

    # -- coefficient values ----------------------------------------------

    def cp_enclosure(self, run: Run, prec: int) -> Enclosure:
        key = (id(run), prec)
        out = self._enc_cache.get(key)
        if out is None:
            out = dsl.eval_enclosure(run.cp_expr, {}, prec)
            self._enc_cache[key] = out
        return out

    def cp_fraction(self, run: Run):
        key = id(run)
        if key not in self._frac_cache:
            self._frac_cache[key] = dsl.eval_exact(run.cp_expr, {})
        return self._frac_cache[key]

    # -- aggregates --------------------------------------------------------

    def alternating_sum(self, prec: int):
        """(exact Fraction or None, enclosure) of sum_k c'_k."""
        exact = Fraction(0)
        enc = Enclosure.ZERO
        all_exact = True
        for r in self.runs:
            fr = self.cp_fraction(r)
            if fr is not None:
                exact += fr * r.count
                enc = enc + Enclosure.from_fraction(fr * r.count, prec)
            else:
                all_exact = False
                enc = enc + self.cp_enclosure(r, prec).scale(Dyadic(r.count))
        return (exact if all_exact else None), enc.round(prec)

    def abs_sum(self, prec: int) -> Enclosure:
        """Enclosure of sum_k |c_k| (= sum |c'_k|)."""
        enc = Enclosure.ZERO
        for r in self.runs:
            enc = enc + self.cp_enclosure(r, prec).abs().scale(Dyadic(r.count))
        return enc.round(prec)

    def weighted_moment(self, power: int, prec: int, absolute: bool):
        """Enclosure of sum c'_k k^power (or sum |c'_k| |k|^power)."""
        enc = Enclosure.ZERO
        for r in self.runs:
            cp = self.cp_enclosure(r, prec)
            if absolute:
                cp = cp.abs()
            total = 0
            for k in r.positions():
                total += abs(k) ** power if absolute else k**power
            enc = enc + cp.scale(Dyadic(1)).mul(
                Enclosure.from_int(total), prec
            )
        return enc.round(prec)

    def is_empty(self) -> bool:
        return not self.runs

    def mirrored(self) -> "RunSet":
        """Runs of t -> f(-t); sign-folded values are preserved."""
        runs = [Run(-r.last, r.count, r.stride, r.cp_expr) for r in self.runs]
        return RunSet(runs, -self.supp_hi, -self.supp_lo)


# ---------------------------------------------------------------------------
# lattice power sums via polygamma
# ---------------------------------------------------------------------------

_DIRECT_SEG_LIMIT = 8


def _seg_inv_pow(t0: Fraction, k_first: int, k_last: int, stride: int,
                 m: int, prec: int) -> Enclosure:
    """sum over k in {k_first, k_first+stride, ..., k_last} of
    1/|t0 - k|^m; the segment must lie entirely on one side of t0."""
    count = (k_last - k_first) // stride + 1
    if count <= 0:
        return Enclosure.ZERO
    if count <= _DIRECT_SEG_LIMIT:
        g = prec + 6
        acc = Enclosure.ZERO
        for k in range(k_first, k_last + 1, stride):
            d = abs(t0 - k)
            acc = acc + Enclosure.from_fraction(d**m, g).recip(g)
        return acc.round(prec)
    g = prec + 6
    # scale so successive positions differ by 1
    if k_first < t0:
        closest, farthest = k_last, k_first
    else:
        closest, farthest = k_first, k_last
    u = abs(t0 - closest) / stride
    if m == 1:
        s = digamma(u + count, g) - digamma(u, g)
    elif m == 2:
        s = trigamma(u, g) - trigamma(u + count, g)
    elif m == 3:
        s = (tetragamma(u + count, g) - tetragamma(u, g)).shifted(-1)
    else:
        raise ValueError("unsupported power")
    inv_sm = Enclosure.from_fraction(Fraction(1, stride**m), g)
    return s.mul(inv_sm, prec)


def _split_run_segments(run: Run, lo_excl, hi_excl):
    """Parts of the run outside [lo_excl, hi_excl], as (first, last);
    lo_excl=None means no exclusion."""
    if lo_excl is None:
        return [(run.start, run.last)]
    segs = []
    if run.start <= lo_excl - 1:
        last = min(run.last, lo_excl - 1)
        last = run.start + ((last - run.start) // run.stride) * run.stride
        segs.append((run.start, last))
    if run.last >= hi_excl + 1:
        steps_back = (run.last - (hi_excl + 1)) // run.stride
        first = max(run.last - steps_back * run.stride, run.start)
        segs.append((first, run.last))
    return segs


def _run_positions_in(run: Run, a: int, b: int):
    """Aligned run positions inside [a, b], without scanning the run."""
    lo = max(a, run.start)
    hi = min(b, run.last)
    if lo > hi:
        return
    offset = lo - run.start
    first = run.start + (-((-offset) // run.stride)) * run.stride
    for k in range(first, hi + 1, run.stride):
        yield k


# ---------------------------------------------------------------------------
# per-cell far-field Taylor model
# ---------------------------------------------------------------------------

class CellModel:
    """Taylor model of the far field around a cell midpoint t0:

    F(t0 + d) = F0 - F1 d + F2 d^2 - R,   F_m = sum c'_k/(t0-k)^(m+1),
    |R| <= |d|^3 * rem3 / (1 - |d|/dmin),

    where the sum ranges over far coefficients (|t0 - k| >= dmin).
    The identity 1/(D+d) = 1/D - d/D^2 + d^2/D^3 - d^3/(D^3 (D+d)) makes
    the remainder exact, not asymptotic.
    """

    __slots__ = ("mid", "near", "F0", "F1", "F2", "rem3", "dmin",
                 "abs_far", "prec")

    def __init__(self, mid, near, F0, F1, F2, rem3, dmin, abs_far, prec):
        self.mid = mid
        self.near = near  # list of (k, entry_expr)
        self.F0 = F0
        self.F1 = F1
        self.F2 = F2
        self.rem3 = rem3  # enclosure of sum |c'|/|D|^3
        self.dmin = dmin  # Fraction lower bound on far distances
        self.abs_far = abs_far
        self.prec = prec

    def far_at(self, delta: Enclosure, prec: int) -> Enclosure:
        """Enclosure of F(mid + delta) for |delta| < dmin (within cell)."""
        dm = delta.mag_upper().as_fraction()
        if dm >= self.dmin:
            raise GeneratorFailure("Taylor evaluation outside cell radius")
        g = prec + 4
        val = self.F0 - self.F1.mul(delta, g) + self.F2.mul(delta.square(g), g)
        # |R| <= |d|^3 sum |c'|/(|D|^3 (|D| - |d|)) <= |d|^3 rem3/(dmin - |d|)
        bound = self.rem3.mag_upper().as_fraction() * dm**3 / (self.dmin - dm)
        return val.widen(Dyadic.from_fraction_ceil(bound, g)).round(prec)


def build_cell_model(runset: RunSet, cache, mid: Fraction, near_lo: int,
                     near_hi: int, prec: int) -> CellModel:
    """Far-field Taylor model at mid, with [near_lo, near_hi] excluded."""
    g = prec + 6
    F = [Enclosure.ZERO, Enclosure.ZERO, Enclosure.ZERO]
    rem3 = Enclosure.ZERO
    abs_far = Enclosure.ZERO
    dmin = None
    near = []
    for run in runset.runs:
        cp = runset.cp_enclosure(run, g)
        cp_abs = cp.abs()
        for first, last in _split_run_segments(run, near_lo, near_hi):
            if (first < mid) != (last < mid):
                raise GeneratorFailure("far segment straddles the midpoint")
            d_near = min(abs(mid - first), abs(mid - last))
            dmin = d_near if dmin is None or d_near < dmin else dmin
            side = -1 if first > mid else 1  # sign of D = mid - k
            count = (last - first) // run.stride + 1
            for m in (1, 2, 3):
                mag = _seg_inv_pow(mid, first, last, run.stride, m, g)
                sgn = 1 if (side > 0 or m % 2 == 0) else -1
                signed = mag if sgn > 0 else -mag
                F[m - 1] = F[m - 1] + cp.mul(signed, g)
                if m == 3:
                    rem3 = rem3 + cp_abs.mul(mag, g)
            abs_far = abs_far + cp_abs.scale(Dyadic(count))
        for k in _run_positions_in(run, near_lo, near_hi):
            near.append((k, run.cp_expr))
    near.sort(key=lambda kv: kv[0])
    if dmin is None:
        dmin = Fraction(10**9)
    return CellModel(mid, near, F[0], F[1], F[2], rem3, dmin, abs_far, prec)
