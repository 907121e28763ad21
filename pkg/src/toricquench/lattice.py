"""2D bookkeeping: disorder realizations, regions, row jobs, and assembly.

The perturbed toric code on an L x L torus decomposes exactly into 2L
independent transverse-field Ising chains of length L.  This module samples
the disordered couplings reproducibly, maps Wilson-loop and cylinder-entropy
regions onto per-row jobs, and reassembles row results (products for loops,
sums for entropies) into the 2D observables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .chains import PICTURE_MU, SECTOR_EVEN, ChainCouplings

DEFAULT_SECTOR = "W1x=+1,W2z=+1"
ROW_VALUE_TOL = 1e-8


@dataclass(frozen=True)
class LatticeConfig:
    """Geometry and coupling parameters of the perturbed toric code.

    The lattice is L x L with periodic boundaries, giving 2L chain rows.
    Bond couplings are J_j = base_coupling + epsilon * eta_j with eta i.i.d.
    uniform on [-1, 1]; every row carries the uniform transverse field
    ``field_strength``.  Only the (W1^x = +1, W2^z = +1) topological sector
    is simulated.
    """

    L: int
    epsilon: float
    base_coupling: float = 1.0
    field_strength: float = 0.5
    sector: str = DEFAULT_SECTOR

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("lattice size must be at least 2")
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError("disorder strength must lie in [0, 1)")
        if self.epsilon >= self.base_coupling:
            raise ValueError("disorder strength must stay below the base coupling")
        if self.field_strength <= 0:
            raise ValueError("field strength must be positive")

    @property
    def num_rows(self) -> int:
        return 2 * self.L


@dataclass(frozen=True, eq=False)
class DisorderRealization:
    """One sampled coupling configuration: 2L chains of length L."""

    rows: tuple[ChainCouplings, ...]
    seed: int
    epsilon: float

    def __post_init__(self):
        lengths = {row.length for row in self.rows}
        if len(lengths) != 1:
            raise ValueError("all rows must share the same length")
        (n,) = lengths
        if len(self.rows) != 2 * n:
            raise ValueError("a realization must contain exactly 2L rows of length L")

    @property
    def L(self) -> int:
        return self.rows[0].length


@dataclass(frozen=True)
class SquareRegion:
    """D x D square region for a Wilson loop, anchored at (row, column)."""

    D: int
    anchor: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.D < 1:
            raise ValueError("region side must be at least 1")


@dataclass(frozen=True)
class CylinderRegion:
    """Cylindrical L x D region for the entanglement boundary law."""

    D: int
    anchor_column: int = 0

    def __post_init__(self):
        if self.D < 1:
            raise ValueError("region width must be at least 1")


def build_disorder_realization(config: LatticeConfig, seed: int) -> DisorderRealization:
    """Sample the 2L mu-picture chains of one disorder realization.

    Each row draws its bonds from an independent counter-keyed stream derived
    from (seed, row index), so regeneration is bit-identical and rows can be
    processed in any order.  epsilon = 0 yields bonds exactly equal to the
    base coupling.
    """
    rows = []
    fields = np.full(config.L, config.field_strength)
    for row_index in range(config.num_rows):
        stream = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(row_index,)))
        eta = stream.uniform(-1.0, 1.0, size=config.L)
        bonds = config.base_coupling + config.epsilon * eta
        rows.append(
            ChainCouplings(fields=fields, bonds=bonds, picture=PICTURE_MU, sector=SECTOR_EVEN)
        )
    return DisorderRealization(rows=tuple(rows), seed=int(seed), epsilon=config.epsilon)


class RowJob(NamedTuple):
    """One per-row work item: a row index plus a site pair or interval."""

    row: int
    sites: tuple[int, int]


def _check_region_width(D: int, L: int):
    if not 1 <= D <= L - 2:
        raise ValueError(f"region width {D} does not fit an L={L} torus (need 1 <= D <= L-2)")


def wilson_loop_jobs(real: DisorderRealization, region: SquareRegion) -> list[RowJob]:
    """Per-row two-point jobs whose product is the Wilson loop around ``region``.

    Returns exactly D jobs, one per row crossing the region, each asking for
    the string correlator between columns (c, c + D).  The column anchor must
    leave the pair unwrapped; row indices wrap around the 2L rows.
    """
    L = real.L
    _check_region_width(region.D, L)
    row0, col = region.anchor
    if not 0 <= col <= L - region.D:
        raise ValueError(
            f"column anchor {col} would wrap a separation-{region.D} pair on {L} columns"
        )
    return [
        RowJob(row=(row0 + i) % (2 * L), sites=(col, col + region.D)) for i in range(region.D)
    ]


def cylinder_entropy_jobs(real: DisorderRealization, region: CylinderRegion) -> list[RowJob]:
    """Interval-entropy jobs for a cylindrical region: one per row, all 2L rows."""
    L = real.L
    _check_region_width(region.D, L)
    a = region.anchor_column
    if not 0 <= a <= L - region.D:
        raise ValueError(f"column anchor {a} would wrap a width-{region.D} interval")
    return [RowJob(row=l, sites=(a, a + region.D)) for l in range(2 * L)]


class WilsonAssembly(NamedTuple):
    product: float
    geometric_mean: float


def assemble_wilson(row_values) -> WilsonAssembly:
    """Product of per-row string correlators, plus their geometric mean.

    Inputs are correlator magnitudes; anything outside [0, 1 + 1e-8] is
    flagged as an error rather than clamped.
    """
    values = np.asarray(list(row_values), dtype=float)
    if values.size == 0:
        raise ValueError("cannot assemble a Wilson loop from zero rows")
    if np.any(values < 0.0) or np.any(values > 1.0 + ROW_VALUE_TOL):
        raise ValueError("row correlator magnitudes must lie in [0, 1 + 1e-8]")
    product = float(np.prod(values))
    # log-domain geometric mean survives products that underflow to zero
    if np.all(values > 0.0):
        geometric = float(np.exp(np.mean(np.log(values))))
    else:
        geometric = 0.0
    return WilsonAssembly(product=product, geometric_mean=geometric)


def assemble_entropy(row_values) -> float:
    """Sum of per-row interval entropies, in bits."""
    values = np.asarray(list(row_values), dtype=float)
    if values.size == 0:
        return 0.0
    if np.any(values < -ROW_VALUE_TOL):
        raise ValueError("row entropies must be nonnegative")
    return float(np.sum(np.maximum(values, 0.0)))
