"""Time-occupancy densities of a single trajectory.

Samples sit on a uniform time grid, so the plain sample histogram of ``x`` is
the discretized ``p(x) dx = p(t) dt`` with ``p(t) = A = 1/T``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
from scipy.signal import find_peaks

from ..core.integrate import Trajectory
from ..core.model import ModelSpec, max_x_closed_form
from ..core.tables import read_table, write_table

logger = logging.getLogger(__name__)

DEFAULT_BINS = 100
DEFAULT_PROMINENCE = 0.05
DENSITY_COLUMNS = ("bin_left", "bin_right", "density")


@dataclass(frozen=True, eq=False)
class DensityEstimate:
    """Binned probability density with unit integral."""

    edges: np.ndarray
    p: np.ndarray
    A: float = math.nan
    support: Tuple[float, float] = (math.nan, math.nan)
    samples: int = 0
    counts: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        edges = np.array(self.edges, dtype=float)
        p = np.array(self.p, dtype=float)
        if edges.ndim != 1 or edges.size < 2:
            raise ValueError("a density needs at least two edges")
        if p.size != edges.size - 1:
            raise ValueError("p must have one value per bin")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be strictly increasing")
        if np.any(p < 0):
            raise ValueError("densities must be non-negative")
        edges.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "p", p)
        if self.counts is not None:
            counts = np.array(self.counts, dtype=np.int64)
            counts.setflags(write=False)
            object.__setattr__(self, "counts", counts)

    @classmethod
    def from_values(cls, edges: np.ndarray, p: np.ndarray, *, A: float = math.nan) -> "DensityEstimate":
        """Normalize arbitrary non-negative bin values into a density."""

        edges = np.asarray(edges, dtype=float)
        values = np.asarray(p, dtype=float)
        mass = float(np.sum(values * np.diff(edges)))
        if not mass > 0:
            raise ValueError("density values must have positive mass")
        return cls(edges=edges, p=values / mass, A=A, support=(float(edges[0]), float(edges[-1])))

    # ------------------------------------------------------------------ geometry
    @property
    def bins(self) -> int:
        return int(self.p.size)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def integral(self) -> float:
        return float(np.sum(self.p * self.widths))

    def mass_between(self, start: int, stop: int) -> float:
        """Probability carried by bins ``start .. stop - 1``."""

        return float(np.sum(self.p[start:stop] * self.widths[start:stop]))

    def mode_locations(self, prominence: float = DEFAULT_PROMINENCE) -> List[float]:
        return [float(self.centers[i]) for i in _mode_indices(self.p, prominence)]


# ---------------------------------------------------------------------- construction
def density_edges(lo: float, hi: float, bins: int) -> np.ndarray:
    """Edges of ``bins`` equal bins centred on ``lo`` .. ``hi`` (half-bin padding).

    A degenerate support yields one bin of half-width ``1e-9 * max(1, |x|)``.
    """

    if bins < 2:
        raise ValueError("bins must be >= 2")
    if not hi > lo:
        pad = 1e-9 * max(1.0, abs(lo))
        return np.array([lo - pad, lo + pad])
    width = (hi - lo) / (bins - 1)
    return lo - 0.5 * width + width * np.arange(bins + 1, dtype=float)


def bin_indices(edges: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Bin index of each sample; samples outside the edges are clipped in."""

    index = np.searchsorted(edges, x, side="right") - 1
    return np.clip(index, 0, edges.size - 2)


def density_from_counts(
    edges: np.ndarray,
    counts: np.ndarray,
    *,
    A: float,
    support: Tuple[float, float],
) -> DensityEstimate:
    counts = np.asarray(counts, dtype=np.int64)
    total = int(counts.sum())
    if total == 0:
        raise ValueError("cannot build a density from zero samples")
    p = counts / (total * np.diff(edges))
    return DensityEstimate(edges=edges, p=p, A=A, support=support, samples=total, counts=counts)


def estimate_density(traj: Trajectory, bins: int = DEFAULT_BINS) -> DensityEstimate:
    """Histogram of the trajectory's samples normalized to unit integral."""

    if traj.diverged:
        raise ValueError("cannot estimate a density from a diverged trajectory")
    if bins < 2:
        raise ValueError("bins must be >= 2")
    lo, hi = float(np.min(traj.x)), float(np.max(traj.x))
    edges = density_edges(lo, hi, bins)
    counts = np.bincount(bin_indices(edges, traj.x), minlength=edges.size - 1)
    return density_from_counts(edges, counts, A=1.0 / traj.duration, support=(lo, hi))


def support_width(d: DensityEstimate) -> float:
    return float(d.support[1] - d.support[0])


# ---------------------------------------------------------------------- closed-form branches
def analytic_branch_density(spec: ModelSpec, x0: float, xgrid: np.ndarray) -> np.ndarray:
    """Point density ``p = A/|u|`` summed over both monotone branches of one period.

    Applies to the unforced correlated model with ``B = 0``. Over a period the
    state rises from ``x0`` to the period maximum and falls back, crossing each
    interior level twice with equal speed, so ``p(x) = (omega/pi) / |u(x)|``.
    The result integrates to one; levels outside the open reachable range,
    including the turning points themselves, get 0.
    """

    if not spec.has_closed_form or spec.B != 0.0:
        raise ValueError("analytic_branch_density requires the unforced correlated model with B = 0")
    if not 0.0 < x0 < spec.K:
        raise ValueError("analytic_branch_density requires 0 < x0 < K")
    x = np.asarray(xgrid, dtype=float)
    out = np.zeros_like(x)
    if spec.N0 == 0.0:
        return out
    K = spec.K
    top = max_x_closed_form(spec, x0)
    inside = (x > x0) & (x < top)
    xi = x[inside]
    amplitude = spec.N0 / spec.omega
    phi = np.log(xi / (K - xi)) - math.log(x0 / (K - x0))
    cos_theta = np.clip(1.0 - phi / amplitude, -1.0, 1.0)
    sin_theta = np.sqrt(1.0 - cos_theta * cos_theta)
    speed = xi * (1.0 - xi / K) * spec.N0 * sin_theta
    with np.errstate(divide="ignore"):
        values = (spec.omega / math.pi) / speed
    out[inside] = np.where(np.isfinite(values), values, 0.0)
    return out


# ---------------------------------------------------------------------- modes
def _smoothed(p: np.ndarray) -> np.ndarray:
    padded = np.pad(np.asarray(p, dtype=float), 1, mode="edge")
    return np.convolve(padded, np.ones(3) / 3.0, mode="valid")


def _mode_indices(p: np.ndarray, prominence: float) -> np.ndarray:
    if not 0.0 < prominence < 1.0:
        raise ValueError("prominence must lie in (0, 1)")
    smooth = _smoothed(p)
    top = float(np.max(smooth))
    if top <= 0.0:
        return np.empty(0, dtype=int)
    framed = np.concatenate(([-1.0], smooth, [-1.0]))
    peaks, _ = find_peaks(framed, height=prominence * top)
    kept: List[int] = []
    for peak in peaks - 1:
        if kept:
            last = kept[-1]
            valley = float(np.min(smooth[last: peak + 1]))
            # neighbours whose dip is within the threshold are one mode
            if min(smooth[last], smooth[peak]) - valley < prominence * top:
                if smooth[peak] > smooth[last]:
                    kept[-1] = int(peak)
                continue
        kept.append(int(peak))
    return np.asarray(kept, dtype=int)


def count_modes(d: DensityEstimate, prominence: float = DEFAULT_PROMINENCE) -> int:
    """Local maxima of the 3-bin moving average above ``prominence * max``.

    Flat tops count once, and a maximum in an end bin counts as a mode.
    Neighbouring maxima separated by a dip shallower than ``prominence * max``
    merge into the higher one, so histogram ripple does not add modes.
    """

    return int(_mode_indices(d.p, prominence).size)


# ---------------------------------------------------------------------- serialization
def write_density_csv(d: DensityEstimate, path: Union[str, Path]) -> Path:
    return write_table(path, DENSITY_COLUMNS, [d.edges[:-1], d.edges[1:], d.p])


def read_density_csv(path: Union[str, Path]) -> DensityEstimate:
    _, rows = read_table(path, DENSITY_COLUMNS)
    if rows.shape[0] == 0:
        raise ValueError(f"'{path}' holds no bins")
    edges = np.append(rows[:, 0], rows[-1, 1])
    return DensityEstimate(edges=edges, p=rows[:, 2], support=(float(edges[0]), float(edges[-1])))


__all__ = [
    "DEFAULT_BINS",
    "DEFAULT_PROMINENCE",
    "DENSITY_COLUMNS",
    "DensityEstimate",
    "analytic_branch_density",
    "bin_indices",
    "count_modes",
    "density_edges",
    "density_from_counts",
    "estimate_density",
    "read_density_csv",
    "support_width",
    "write_density_csv",
]
