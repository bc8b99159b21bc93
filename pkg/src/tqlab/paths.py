"""
Piecewise-linear cadlag paths
=============================

A :class:`CadlagPath` is stored as breakpoints ``0 = t[0] < t[1] < ... <= horizon``,
the value immediately after each breakpoint, and the slope of the linear piece
that starts there. Every queueing process in the package (counting processes,
cumulative input, busy time, workload, queue length and their rescalings) is
one of these, so the reflection map and the random time change only need to
be implemented once, exactly.

Times that differ by less than :data:`TIME_TOL` are treated as equal wherever
two independently computed breakpoints have to be matched.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Optional, TextIO, Tuple, Union

import numpy as np

TIME_TOL = 1e-12

ArrayLike = Union[float, Iterable[float], np.ndarray]


class DomainError(ValueError):
    """A path was evaluated, composed or rescaled outside its domain."""


class ContractError(ValueError):
    """An operation received a path that breaks its precondition."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CadlagPath:
    """Right-continuous piecewise-linear path on ``[0, horizon]``.

    Parameters
    ----------
    breakpoints : array_like
        Strictly increasing times, the first one equal to 0.
    right_values : array_like
        Value of the path at each breakpoint (right limit).
    slopes : array_like
        Slope of the segment starting at each breakpoint.
    horizon : float
        Final time; the last segment extends up to it.
    """

    breakpoints: np.ndarray
    right_values: np.ndarray
    slopes: np.ndarray
    horizon: float

    def __post_init__(self):
        t = np.array(self.breakpoints, dtype=float).ravel()
        v = np.array(self.right_values, dtype=float).ravel()
        s = np.array(self.slopes, dtype=float).ravel()
        h = float(self.horizon)
        if t.size == 0 or not (t.size == v.size == s.size):
            raise ContractError("breakpoints, right_values and slopes must be non-empty and of equal length")
        if t[0] != 0.0:
            raise ContractError(f"first breakpoint must be 0, got {t[0]!r}")
        if not (t[1:] > t[:-1]).all():
            raise ContractError("breakpoints must be strictly increasing")
        if t[-1] > h:
            raise ContractError(f"breakpoint {t[-1]!r} beyond horizon {h!r}")
        if not (np.isfinite(v).all() and np.isfinite(s).all() and np.isfinite(h)):
            raise ContractError("path data must be finite")
        object.__setattr__(self, "breakpoints", _frozen(t))
        object.__setattr__(self, "right_values", _frozen(v))
        object.__setattr__(self, "slopes", _frozen(s))
        object.__setattr__(self, "horizon", h)

    @classmethod
    def _trusted(cls, t: np.ndarray, v: np.ndarray, s: np.ndarray, horizon: float) -> "CadlagPath":
        # for results whose invariants hold by construction
        self = object.__new__(cls)
        object.__setattr__(self, "breakpoints", _frozen(t))
        object.__setattr__(self, "right_values", _frozen(v))
        object.__setattr__(self, "slopes", _frozen(s))
        object.__setattr__(self, "horizon", float(horizon))
        return self

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, value: float, horizon: float) -> "CadlagPath":
        return cls([0.0], [value], [0.0], horizon)

    @classmethod
    def line(cls, slope: float, horizon: float, intercept: float = 0.0) -> "CadlagPath":
        """The path ``t -> intercept + slope * t``."""
        return cls([0.0], [intercept], [slope], horizon)

    @classmethod
    def step(cls, times: ArrayLike, sizes: ArrayLike = 1.0, horizon: Optional[float] = None,
             initial: float = 0.0) -> "CadlagPath":
        """Pure jump path with jumps of ``sizes`` at ``times``.

        Jumps at identical times are merged; jumps after ``horizon`` are
        dropped. ``horizon`` defaults to the last jump time.
        """
        times = np.asarray(times, dtype=float).ravel()
        sizes = np.broadcast_to(np.asarray(sizes, dtype=float), times.shape)
        if times.size and np.any(times < 0):
            raise DomainError("jump times must be nonnegative")
        if horizon is None:
            horizon = float(times.max()) if times.size else 0.0
        keep = times <= horizon
        times, sizes = times[keep], sizes[keep]
        order = np.argsort(times, kind="stable")
        times, sizes = times[order], sizes[order]
        if times.size:
            uniq, first = np.unique(times, return_index=True)
            sizes = np.add.reduceat(sizes, first)
            times = uniq
        values = initial + np.cumsum(sizes)
        if times.size == 0 or times[0] > 0.0:
            times = np.concatenate(([0.0], times))
            values = np.concatenate(([initial], values))
        return cls(times, values, np.zeros_like(times), horizon)

    @classmethod
    def interpolate(cls, times: ArrayLike, values: ArrayLike, horizon: Optional[float] = None) -> "CadlagPath":
        """Continuous path through ``(times, values)``, linear in between.

        ``times[0]`` must be 0; after the last knot the path is held constant.
        """
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        if horizon is None:
            horizon = float(t[-1])
        s = np.zeros_like(v)
        s[:-1] = np.diff(v) / np.diff(t)
        return cls(t, v, s, horizon)

    # -- evaluation -------------------------------------------------------

    def _check_domain(self, x: np.ndarray) -> np.ndarray:
        tol = TIME_TOL * max(1.0, self.horizon)
        if x.size and (x.min() < -tol or x.max() > self.horizon + tol):
            raise DomainError(f"time outside [0, {self.horizon}]")
        return np.clip(x, 0.0, self.horizon)

    def _segment(self, x: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.breakpoints, x, side="right") - 1

    def __call__(self, t: ArrayLike):
        x = self._check_domain(np.asarray(t, dtype=float))
        i = self._segment(x)
        out = self.right_values[i] + self.slopes[i] * (x - self.breakpoints[i])
        return float(out) if out.ndim == 0 else out

    def left_limit(self, t: ArrayLike):
        """``f(t-)``; at ``t = 0`` this is ``f(0)``."""
        x = self._check_domain(np.asarray(t, dtype=float))
        i = np.maximum(np.searchsorted(self.breakpoints, x, side="left") - 1, 0)
        out = self.right_values[i] + self.slopes[i] * (x - self.breakpoints[i])
        return float(out) if out.ndim == 0 else out

    def _right(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        # value and slope at points already known to lie in the domain
        i = self._segment(x)
        return self.right_values[i] + self.slopes[i] * (x - self.breakpoints[i]), self.slopes[i]

    @property
    def segment_ends(self) -> np.ndarray:
        return np.append(self.breakpoints[1:], self.horizon)

    @property
    def end_values(self) -> np.ndarray:
        """Left limit at the end of every segment."""
        return self.right_values + self.slopes * (self.segment_ends - self.breakpoints)

    def jumps(self) -> np.ndarray:
        """Jump ``f(t) - f(t-)`` at every breakpoint (0 at ``t = 0``)."""
        out = np.zeros_like(self.right_values)
        out[1:] = self.right_values[1:] - self.end_values[:-1]
        return out

    @property
    def terminal_value(self) -> float:
        return float(self.end_values[-1])

    def is_nondecreasing(self, tol: float = 0.0) -> bool:
        return bool(np.all(self.slopes >= -tol) and np.all(self.jumps() >= -tol))

    # -- transformations --------------------------------------------------

    def restrict(self, horizon: float) -> "CadlagPath":
        if horizon > self.horizon + TIME_TOL * max(1.0, self.horizon):
            raise DomainError(f"cannot extend a path with horizon {self.horizon} to {horizon}")
        horizon = min(float(horizon), self.horizon)
        k = np.searchsorted(self.breakpoints, horizon, side="right")
        return CadlagPath._trusted(self.breakpoints[:k], self.right_values[:k], self.slopes[:k], horizon)

    def rescale(self, time_factor: float, value_factor: float = 1.0,
                horizon: Optional[float] = None) -> "CadlagPath":
        """Return ``u -> value_factor * f(u * time_factor)``."""
        if time_factor <= 0:
            raise ContractError("time_factor must be positive")
        t = self.breakpoints / time_factor
        t[0] = 0.0
        out = CadlagPath(t, value_factor * self.right_values,
                         value_factor * time_factor * self.slopes, self.horizon / time_factor)
        return out if horizon is None else out.restrict(horizon)

    def _combine(self, other: "CadlagPath", a: float, b: float) -> "CadlagPath":
        h = min(self.horizon, other.horizon)
        t = np.union1d(self.breakpoints, other.breakpoints)
        t = t[t <= h]
        v1, s1 = self._right(t)
        v2, s2 = other._right(t)
        return CadlagPath._trusted(t, a * v1 + b * v2, a * s1 + b * s2, h)

    def __add__(self, other):
        if isinstance(other, CadlagPath):
            return self._combine(other, 1.0, 1.0)
        return CadlagPath._trusted(self.breakpoints, self.right_values + float(other), self.slopes, self.horizon)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, CadlagPath):
            return self._combine(other, 1.0, -1.0)
        return self + (-float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self * -1.0

    def __mul__(self, c):
        if isinstance(c, CadlagPath):
            return NotImplemented
        c = float(c)
        return CadlagPath._trusted(self.breakpoints, c * self.right_values, c * self.slopes, self.horizon)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / float(c))

    def __repr__(self):
        return f"CadlagPath(<{self.breakpoints.size} breakpoints>, horizon={self.horizon!r})"

    # -- io ---------------------------------------------------------------

    def to_csv(self, stream: TextIO, grid: Optional[ArrayLike] = None) -> None:
        """Write ``t,value`` rows at the breakpoints plus an optional grid."""
        t = self.breakpoints
        if grid is not None:
            g = np.asarray(grid, dtype=float)
            t = np.union1d(t, g[(g >= 0) & (g <= self.horizon)])
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["t", "value"])
        for ti, vi in zip(t, self(t)):
            writer.writerow([repr(float(ti)), repr(float(vi))])


def _interleave(base: Tuple[np.ndarray, ...], extra: Tuple[np.ndarray, ...],
                counts: np.ndarray) -> Tuple[np.ndarray, ...]:
    """Place ``counts[k]`` extra rows right after base row ``k``, in order."""
    n_base = base[0].size
    total = n_base + counts.sum()
    base_pos = np.arange(n_base) + np.concatenate(([0], np.cumsum(counts)[:-1]))
    mask = np.ones(total, dtype=bool)
    mask[base_pos] = False
    out = []
    for b, e in zip(base, extra):
        arr = np.empty(total, dtype=float)
        arr[base_pos] = b
        arr[mask] = e
        out.append(arr)
    return tuple(out)


def _drop_collapsed(t, v, s):
    # Round-off can produce equal successive times; the later row wins.
    if t.size < 2:
        return t, v, s
    keep = np.append(np.diff(t) > 0, True)
    return t[keep], v[keep], s[keep]


def evaluate(path: CadlagPath, t: ArrayLike):
    """Right-continuous value of ``path`` at ``t``."""
    return path(t)


def reflect(path: CadlagPath) -> Tuple[CadlagPath, CadlagPath]:
    """One-sided Skorokhod reflection at zero.

    Returns ``(phi, psi)`` with ``psi(t) = sup_{s<=t} max(0, -f(s))`` and
    ``phi = f + psi``. The running infimum is computed segment by segment: on
    a decreasing segment the path can undercut the previous minimum, and the
    crossing time is inserted as a new breakpoint.
    """
    t, v, s = path.breakpoints, path.right_values, path.slopes
    ends = path.segment_ends
    e = path.end_values
    seg_inf = np.minimum(v, e)
    # running minimum level (clipped at 0) before each segment
    before = np.minimum.accumulate(np.concatenate(([0.0], seg_inf[:-1])))
    start = np.minimum(before, v)
    crosses = (s < 0) & (e < start)
    at_start = crosses & (v <= before)
    tau = np.where(crosses & ~at_start, t + (start - v) / np.where(s < 0, s, -1.0), 0.0)
    interior = crosses & ~at_start & (tau > t) & (tau < ends)
    at_start = at_start | (crosses & ~at_start & ~interior)

    psi_base = (t, -start, np.where(at_start, -s, 0.0))
    phi_base = (t, v - start, np.where(at_start, 0.0, s))
    phi_base[1][at_start] = 0.0
    idx = np.flatnonzero(interior)
    counts = interior.astype(int)
    psi_extra = (tau[idx], -start[idx], -s[idx])
    phi_extra = (tau[idx], np.zeros(idx.size), np.zeros(idx.size))

    pt, pv, ps = _drop_collapsed(*_interleave(psi_base, psi_extra, counts))
    ft, fv, fs = _drop_collapsed(*_interleave(phi_base, phi_extra, counts))
    return CadlagPath._trusted(ft, fv, fs, path.horizon), CadlagPath._trusted(pt, pv, ps, path.horizon)


def compose(outer: CadlagPath, inner: CadlagPath, tol: float = TIME_TOL) -> CadlagPath:
    """Random time change ``t -> outer(inner(t))`` for nondecreasing ``inner``.

    New breakpoints are the preimages of ``outer``'s breakpoints on the
    increasing pieces of ``inner``. An inner value within ``tol`` below an
    outer breakpoint is treated as having reached it, so a busy-time path that
    equals a partial service sum up to round-off still registers the departure.
    """
    if not inner.is_nondecreasing(tol):
        raise ContractError("inner path must be nondecreasing")
    top = max(inner.terminal_value, float(inner.right_values[-1]))
    if top > outer.horizon + tol or inner.right_values[0] < -tol:
        raise DomainError(f"inner range [{inner.right_values[0]}, {top}] exceeds outer domain [0, {outer.horizon}]")

    ti, ui, si = inner.breakpoints, inner.right_values, inner.slopes
    hi = inner.end_values
    to, vo, so = outer.breakpoints, outer.right_values, outer.slopes
    up = si > 0
    lo_idx = np.searchsorted(to, ui + tol, side="right")
    hi_idx = np.searchsorted(to, hi - tol, side="left")
    counts = np.where(up, np.maximum(hi_idx - lo_idx, 0), 0)

    # value at inner breakpoints, snapping up to an outer breakpoint within tol
    j0 = np.clip(np.searchsorted(to, np.minimum(ui, outer.horizon) + tol, side="right") - 1, 0, None)
    base = (ti, vo[j0] + so[j0] * (ui - to[j0]), so[j0] * si)

    seg = np.repeat(np.arange(ti.size), counts)
    offset = np.arange(seg.size) - np.repeat(np.cumsum(counts) - counts, counts)
    j = lo_idx[seg] + offset
    b = to[j]
    extra = (ti[seg] + (b - ui[seg]) / si[seg], vo[j], so[j] * si[seg])

    t, v, s = _drop_collapsed(*_interleave(base, extra, counts))
    return CadlagPath._trusted(t, v, s, inner.horizon)


def merged_breakpoints(*paths: CadlagPath, horizon: Optional[float] = None) -> np.ndarray:
    h = min(p.horizon for p in paths) if horizon is None else horizon
    t = np.unique(np.concatenate([p.breakpoints for p in paths] + [[h]]))
    return t[t <= h]


def sup_diff(a: CadlagPath, b: CadlagPath, T: Optional[float] = None) -> float:
    """``sup_{t<=T} |a(t) - b(t)|`` over right values and left limits."""
    if T is None:
        T = min(a.horizon, b.horizon)
    if T > min(a.horizon, b.horizon) + TIME_TOL * max(1.0, T):
        raise DomainError(f"T={T} exceeds a path horizon")
    T = min(T, a.horizon, b.horizon)
    t = merged_breakpoints(a, b, horizon=T)
    right = np.abs(a(t) - b(t))
    left = np.abs(a.left_limit(t[1:]) - b.left_limit(t[1:])) if t.size > 1 else np.zeros(0)
    return float(max(right.max(), left.max(initial=0.0)))


def cluster_times(t: np.ndarray, tol: float = TIME_TOL) -> Tuple[np.ndarray, np.ndarray]:
    """Group sorted times into clusters of consecutive gaps ``<= tol``.

    Returns the first and last time of every cluster.
    """
    t = np.unique(t)
    if t.size == 0:
        return t, t
    gaps = np.diff(t) > tol
    starts = np.concatenate(([0], np.flatnonzero(gaps) + 1))
    stops = np.concatenate((np.flatnonzero(gaps), [t.size - 1]))
    return t[starts], t[stops]


def max_discrepancy(a: CadlagPath, b: CadlagPath, tol: float = TIME_TOL) -> float:
    """Like :func:`sup_diff`, but tolerant to breakpoints shifted by up to ``tol``.

    Both paths are compared just before and just after every cluster of
    nearly coincident breakpoints, so a jump computed at ``D`` in one path
    and at ``D + 1e-16`` in the other does not count as a mismatch.
    """
    h = min(a.horizon, b.horizon)
    first, last = cluster_times(merged_breakpoints(a, b, horizon=h), tol)
    after = np.abs(a(last) - b(last))
    lim = first[first > 0]
    before = np.abs(a.left_limit(lim) - b.left_limit(lim))
    return float(max(after.max(initial=0.0), before.max(initial=0.0)))


def integrate(f: CadlagPath, g: CadlagPath) -> float:
    """Stieltjes integral ``int_0^H f(t) dg(t)``.

    The continuous part of ``g`` is integrated exactly (``f`` is linear and
    ``g'`` constant between merged breakpoints); at a jump of ``g`` the right
    value of ``f`` is used.
    """
    h = min(f.horizon, g.horizon)
    t = merged_breakpoints(f, g, horizon=h)
    lengths = np.diff(t)
    fl, _ = f._right(t[:-1])
    fr = f.left_limit(t[1:])
    _, gs = g._right(t[:-1])
    cont = float(np.sum(gs * 0.5 * (fl + fr) * lengths))
    jumps = g.jumps()
    jt = g.breakpoints[(jumps != 0) & (g.breakpoints <= h)]
    jv = jumps[(jumps != 0) & (g.breakpoints <= h)]
    return cont + float(np.sum(f(jt) * jv)) if jt.size else cont
