"""Genetic resampling: multinomial reallocation of particles across bins.

Each step redraws the N particle slots across bins with probabilities
proportional to post-reaction bin mass, then fills every bin's quota from
the particles currently inside it:

* target <= current: a uniform subset of the residents survives,
* target  > current: uniform picks with replacement from the residents,
* empty bin:         fresh positions uniform over the bin's box.

Draw order within one stream: (1) multinomial counts, (2) one global
permutation for the subset branch, (3) with-replacement picks, (4) empty-bin
uniforms.  Single-worker runs are bit-reproducible given (seed, stream).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DensityField,
    ParticleEnsemble,
    SgipError,
    bin_index,
    bin_lower_corner,
    field_total_mass,
)
from .transport import RngStream


class ExtinctionError(SgipError):
    """Total mass is zero or negative; there is nothing to resample."""


class ResampleError(SgipError):
    """Inconsistent inputs to the resampling step."""


@dataclass(frozen=True)
class ResamplePlan:
    """Per-bin probabilities, target counts and current counts."""

    probabilities: np.ndarray
    target_counts: np.ndarray
    current_counts: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=np.float64)
        n = np.asarray(self.target_counts, dtype=np.int64)
        c = np.asarray(self.current_counts, dtype=np.int64)
        if not (p.shape == n.shape == c.shape):
            raise ResampleError("plan arrays must share one shape")
        if p.min() < 0 or abs(p.sum() - 1.0) > 1e-12:
            raise ResampleError("probabilities must be >= 0 and sum to 1")
        if n.min() < 0 or c.min() < 0:
            raise ResampleError("counts must be >= 0")
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "target_counts", n)
        object.__setattr__(self, "current_counts", c)

    @property
    def n_particles(self) -> int:
        return int(self.target_counts.sum())


def bin_probabilities(field: DensityField) -> np.ndarray:
    """p_j = u_j * dx^d / total mass; raises on an extinct field.

    The bin volume cancels against the total, so the ratio is computed from
    the raw values; that stays finite even when the total mass is about to
    underflow (decaying kinetics near extinction).
    """
    total = float(np.sum(field.values))
    if total <= 0.0:
        raise ExtinctionError("field has zero total mass")
    p = field.values / total
    # Renormalize away the last ulp of rounding so the multinomial sampler
    # never sees a sum above 1.
    return p / p.sum()


def multinomial_draw(n: int, p: np.ndarray, rng: RngStream) -> np.ndarray:
    """Multinomial counts summing to ``n`` with marginals Binomial(n, p_j).

    NumPy's generator implements the sequential conditional-binomial chain,
    which is O(number of bins) per draw.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return _multinomial(rng.generator(), n, np.asarray(p, dtype=np.float64))


def _multinomial(gen: np.random.Generator, n: int, p: np.ndarray) -> np.ndarray:
    return gen.multinomial(n, p).astype(np.int64)


def resample(
    ensemble_star: ParticleEnsemble,
    field_next: DensityField,
    m_next: float,
    rng: RngStream,
) -> ParticleEnsemble:
    """Redistribute particles to match ``field_next``; masses become m_next/N.

    The output has exactly N particles and its histogram on the field's grid
    reproduces the multinomial counts bin for bin.
    """
    if m_next <= 0.0:
        raise ExtinctionError(f"total mass {m_next} <= 0")
    total = field_total_mass(field_next)
    if abs(total - m_next) > 1e-9 * max(abs(total), abs(m_next)):
        raise ResampleError(f"m_next={m_next} disagrees with field mass {total}")

    grid = field_next.grid
    n_total = ensemble_star.n
    gen = rng.generator()

    p = bin_probabilities(field_next)
    target = _multinomial(gen, n_total, p)                        # draw (1)

    flat = bin_index(ensemble_star.positions, grid)
    current = np.bincount(flat, minlength=grid.total_bins).astype(np.int64)
    plan = ResamplePlan(p, target, current)

    # Random within-bin order: permute globally, then stable-sort by bin.
    perm = gen.permutation(n_total)                               # draw (2)
    shuffled = ensemble_star.positions[perm]
    order = np.argsort(flat[perm], kind="stable")
    by_bin = shuffled[order]
    starts = np.concatenate(([0], np.cumsum(current)))

    pieces = []

    # Survivor subsets: first n_j entries of each randomly ordered segment.
    subset = (target > 0) & (target <= current)
    if subset.any():
        take = target[subset]
        seg_start = starts[:-1][subset]
        idx = np.repeat(seg_start, take) + _ragged_arange(take)
        pieces.append(by_bin[idx])

    # Oversampled bins: n_j independent uniform picks from the residents.
    over = target > current
    if (over & (current > 0)).any():
        over &= current > 0
        n_over = target[over]
        u = gen.random(int(n_over.sum()))                         # draw (3)
        within = np.floor(u * np.repeat(current[over], n_over)).astype(np.int64)
        idx = np.repeat(starts[:-1][over], n_over) + within
        pieces.append(by_bin[idx])

    # Empty bins: uniforms over the bin box, lower face included.
    empty = (target > 0) & (current == 0)
    if empty.any():
        n_new = target[empty]
        bins = np.repeat(np.flatnonzero(empty), n_new)
        corners = bin_lower_corner(bins, grid)
        u = gen.random((len(bins), grid.dim))                     # draw (4)
        pieces.append(corners + u * grid.bin_size)

    positions = pieces[0] if len(pieces) == 1 else np.concatenate(pieces, axis=0)
    if positions.shape[0] != plan.n_particles or plan.n_particles != n_total:
        raise ResampleError(
            f"assembled {positions.shape[0]} particles, expected {n_total}"
        )
    return ParticleEnsemble(positions, m_next / n_total)


def _ragged_arange(lengths: np.ndarray) -> np.ndarray:
    """Concatenation of arange(l) for each l in lengths, vectorized."""
    total = int(lengths.sum())
    out = np.arange(total, dtype=np.int64)
    shifts = np.repeat(np.concatenate(([0], np.cumsum(lengths)[:-1])), lengths)
    return out - shifts
