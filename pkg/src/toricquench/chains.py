"""Quadratic-fermion engine for a single transverse-field Ising chain.

A periodic spin chain H = -sum_j g_j X_j X_{j+1} - sum_j f_j Z_j maps, via
Jordan-Wigner in the even parity sector (antiperiodic fermions), onto a
quadratic fermionic Hamiltonian H = (1/2) psi^dag Hbdg psi in the interleaved
basis psi^dag = (c_1^dag, c_1, ..., c_N^dag, c_N).  This module builds Hbdg,
diagonalizes it into Bogoliubov coefficient blocks (g, h) with the orthogonal
combinations phi = g + h and psi = g - h, evaluates the one-particle
propagator U(t) = exp(-i t Hbdg), and extracts lightcone / dynamical
localization diagnostics from it.

Two chain "pictures" occur: the tau-picture (disordered on-site couplings,
uniform bonds) drives the propagator diagnostics, and its Kramers-Wannier
dual mu-picture (uniform field, disordered bonds) drives all string and
entropy observables.  Both are the same engine with field/bond roles swapped.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import DiagonalizationError

PICTURE_TAU = "tau"
PICTURE_MU = "mu"
SECTOR_EVEN = "even"

HERMITICITY_TOL = 1e-12
ORTHOGONALITY_TOL = 1e-8
FRONT_THRESHOLD = 1e-3


@dataclass(frozen=True, eq=False)
class ChainCouplings:
    """Couplings of one chain: on-site fields f_j >= 0 and bonds g_j.

    ``bonds[-1]`` is the wrap-around bond.  ``picture`` records whether the
    disorder sits on the fields (tau) or on the bonds (mu); ``sector`` is the
    fermion parity sector (even = antiperiodic fermions).  Zero bonds are
    tolerated at this level so decoupled-site limits stay constructible; the
    lattice factories enforce strict positivity.
    """

    fields: np.ndarray
    bonds: np.ndarray
    picture: str = PICTURE_MU
    sector: str = SECTOR_EVEN

    def __post_init__(self):
        f = np.ascontiguousarray(np.asarray(self.fields, dtype=float))
        g = np.ascontiguousarray(np.asarray(self.bonds, dtype=float))
        f.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "fields", f)
        object.__setattr__(self, "bonds", g)
        if f.ndim != 1 or g.ndim != 1 or f.size != g.size:
            raise ValueError("fields and bonds must be 1-d arrays of equal length")
        if f.size < 2:
            raise ValueError("chain length must be at least 2")
        if np.any(f < 0):
            raise ValueError("on-site fields must be nonnegative")
        if np.any(g < 0):
            raise ValueError("bond couplings must be nonnegative")
        if self.picture not in (PICTURE_TAU, PICTURE_MU):
            raise ValueError(f"unknown picture {self.picture!r}")
        if self.sector != SECTOR_EVEN:
            raise ValueError("only the even parity sector is supported")

    @property
    def length(self) -> int:
        return self.fields.size

    def dual(self) -> "ChainCouplings":
        """Kramers-Wannier dual chain: swap field and bond roles."""
        other = PICTURE_TAU if self.picture == PICTURE_MU else PICTURE_MU
        return replace(self, fields=self.bonds, bonds=self.fields, picture=other)

    def with_fields(self, value) -> "ChainCouplings":
        f = np.broadcast_to(np.asarray(value, dtype=float), (self.length,)).copy()
        return replace(self, fields=f)


class BdGMatrix:
    """Single-particle Hamiltonian in the interleaved (c^dag, c) basis.

    The matrix is real symmetric and particle-hole symmetric: conjugating by
    the per-site swap of (c^dag, c) negates it.  Eigendecomposition is cached
    so propagators at many times reuse one factorization.
    """

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] % 2:
            raise ValueError("BdG matrix must be square with even dimension")
        if np.max(np.abs(matrix - matrix.T)) > HERMITICITY_TOL:
            raise ValueError("BdG matrix is not symmetric within tolerance")
        swapped = matrix.reshape(matrix.shape[0] // 2, 2, matrix.shape[1] // 2, 2)
        swapped = swapped[:, ::-1, :, ::-1].reshape(matrix.shape)
        if np.max(np.abs(swapped + matrix)) > 1e-10:
            raise ValueError("BdG matrix violates particle-hole symmetry")
        self.matrix = matrix
        self.matrix.setflags(write=False)
        self._eig = None

    @property
    def num_sites(self) -> int:
        return self.matrix.shape[0] // 2

    def eigensystem(self):
        """Cached (eigenvalues, orthogonal eigenvectors) of the matrix."""
        if self._eig is None:
            self._eig = np.linalg.eigh(self.matrix)
        return self._eig


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Bogoliubov diagonalization output.

    ``omega`` holds the N nonnegative quasiparticle energies; ``gblock`` and
    ``hblock`` are the real coefficient blocks of eta_k = sum_l g_kl c_l +
    h_kl c_l^dag, and ``phi = g + h``, ``psi = g - h`` are real orthogonal.
    """

    omega: np.ndarray
    gblock: np.ndarray
    hblock: np.ndarray
    phi: np.ndarray
    psi: np.ndarray

    @property
    def num_sites(self) -> int:
        return self.omega.size

    @property
    def ground_energy(self) -> float:
        return -0.5 * float(np.sum(self.omega))


def build_bdg(chain: ChainCouplings) -> BdGMatrix:
    """Assemble the 2N x 2N single-particle matrix for ``chain``.

    Diagonal 2x2 blocks are 2 f_j sigma^z; the bond between j and j+1
    contributes -g_j (sigma^z + i sigma^y) in the (j, j+1) block.  The wrap
    bond enters with flipped sign in the even parity (antiperiodic) sector.
    """
    n = chain.length
    if n < 2:
        raise ValueError("chain length must be at least 2")
    amat = np.zeros((n, n))
    bmat = np.zeros((n, n))
    amat[np.arange(n), np.arange(n)] = 2.0 * chain.fields
    for j in range(n):
        k = (j + 1) % n
        sign = -1.0 if k else 1.0  # antiperiodic wrap on the bond into site 0
        amat[j, k] += sign * chain.bonds[j]
        amat[k, j] += sign * chain.bonds[j]
        bmat[j, k] += sign * chain.bonds[j]
        bmat[k, j] -= sign * chain.bonds[j]
    full = np.zeros((2 * n, 2 * n))
    full[0::2, 0::2] = amat
    full[0::2, 1::2] = bmat
    full[1::2, 0::2] = -bmat
    full[1::2, 1::2] = -amat
    return BdGMatrix(full)


def hopping_pairing_blocks(bdg: BdGMatrix):
    """Return (A, B): the symmetric hopping and antisymmetric pairing blocks."""
    m = bdg.matrix
    return m[0::2, 0::2], m[0::2, 1::2]


def diagonalize(bdg: BdGMatrix, chain: ChainCouplings | None = None) -> SpectralData:
    """Bogoliubov-diagonalize ``bdg`` into SpectralData with omega_k >= 0.

    Works through the singular value decomposition of the real N x N matrix
    A - B, which realizes phi (A - B) = omega psi with orthogonal phi, psi.
    This resolves degenerate quasiparticle energies (uniform chains, zero
    fields) without any particle-hole pairing ambiguity.

    Raises
    ------
    DiagonalizationError
        if the (g, h) orthogonality residual exceeds 1e-8.
    """
    if chain is not None and chain.length != bdg.num_sites:
        raise ValueError("chain and BdG matrix sizes disagree")
    amat, bmat = hopping_pairing_blocks(bdg)
    left, omega, right = np.linalg.svd(amat - bmat)
    phi = left.T
    psi = right
    gblock = 0.5 * (phi + psi)
    hblock = 0.5 * (phi - psi)
    n = omega.size
    res = max(
        np.max(np.abs(gblock @ gblock.T + hblock @ hblock.T - np.eye(n))),
        np.max(np.abs(gblock @ hblock.T + hblock @ gblock.T)),
    )
    if res > ORTHOGONALITY_TOL:
        raise DiagonalizationError(
            f"coefficient blocks violate canonical orthogonality (residual {res:.3e})"
        )
    return SpectralData(omega=omega, gblock=gblock, hblock=hblock, phi=phi, psi=psi)


def propagator(bdg: BdGMatrix, t: float) -> np.ndarray:
    """One-particle propagator U(t) = exp(-i t Hbdg), unitary, U(0) = 1."""
    evals, evecs = bdg.eigensystem()
    phases = np.exp(-1j * t * evals)
    return (evecs * phases) @ evecs.T


@dataclass(frozen=True, eq=False)
class LightconeProfile:
    """Propagator-weight matrix M_lj(t) maximized over a time grid.

    ``sup_m[l, j]`` is the sup over ``t_grid`` of
    M_lj(t) = |U(t)_{2l, 2j}| + |U(t)_{2l, 2j+1}| (0-based interleaved
    indices); entries lie in [0, 2].  ``front_radius[i]`` is the largest ring
    distance at which the distance-averaged M(t_grid[i]) still exceeds
    ``front_threshold`` (0 when none does), which feeds the ballistic-front
    velocity fit in the clean case.  ``snapshots`` maps requested times to
    full M(t) matrices.
    """

    sup_m: np.ndarray
    t_grid: np.ndarray
    front_radius: np.ndarray
    front_threshold: float
    snapshots: dict


@dataclass(frozen=True)
class LocalizationFit:
    """Result of fitting sup-M decay and, when available, the front velocity.

    ``mu`` is the exponential decay rate per |l-j|^zeta, ``prefactor`` the
    fitted amplitude, ``r2`` the decay-fit quality.  ``no_decay`` flags fits
    with r2 < 0.5 (e.g. a clean, ballistic profile fed to the localized
    fitter).  ``velocity``/``velocity_r2`` come from the linear front-radius
    fit and are None when the profile carries no usable front data.
    """

    mu: float
    prefactor: float
    zeta: float
    r2: float
    no_decay: bool
    velocity: float | None = None
    velocity_r2: float | None = None


def ring_distance_matrix(n: int) -> np.ndarray:
    """Matrix of periodic (chordal) distances min(|l-j|, n-|l-j|)."""
    idx = np.arange(n)
    diff = np.abs(idx[:, None] - idx[None, :])
    return np.minimum(diff, n - diff)


def distance_profile(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Average ``matrix`` over ordered site pairs at each ring distance.

    Returns (distances 0..N//2, mean value per distance).
    """
    n = matrix.shape[0]
    dist = ring_distance_matrix(n)
    dmax = n // 2
    sums = np.bincount(dist.ravel(), weights=matrix.ravel(), minlength=dmax + 1)
    counts = np.bincount(dist.ravel(), minlength=dmax + 1)
    return np.arange(dmax + 1), sums / counts


def lightcone_profile(
    bdg: BdGMatrix,
    t_grid: Sequence[float],
    snapshot_times: Sequence[float] = (),
    front_threshold: float = FRONT_THRESHOLD,
) -> LightconeProfile:
    """Sweep the propagator over ``t_grid`` and accumulate sup of M_lj(t).

    Only the odd-index (annihilation-operator) rows of U(t) are formed, which
    halves the work.  ``snapshot_times`` requests full M(t) matrices at given
    times; they need not belong to the grid.
    """
    t_grid = np.asarray(list(t_grid), dtype=float)
    if t_grid.size == 0:
        raise ValueError("time grid must be nonempty")
    evals, evecs = bdg.eigensystem()
    rows = evecs[0::2, :]
    n = bdg.num_sites
    dist = ring_distance_matrix(n)
    dmax = n // 2
    counts = np.bincount(dist.ravel(), minlength=dmax + 1)

    def weight_matrix(t: float) -> np.ndarray:
        block = (rows * np.exp(-1j * t * evals)) @ evecs.T
        return np.abs(block[:, 0::2]) + np.abs(block[:, 1::2])

    sup_m = np.zeros((n, n))
    front = np.zeros(t_grid.size)
    for i, t in enumerate(t_grid):
        m = weight_matrix(t)
        np.maximum(sup_m, m, out=sup_m)
        prof = np.bincount(dist.ravel(), weights=m.ravel(), minlength=dmax + 1) / counts
        above = np.nonzero(prof >= front_threshold)[0]
        front[i] = above[-1] if above.size else 0
    snapshots = {float(t): weight_matrix(float(t)) for t in snapshot_times}
    return LightconeProfile(
        sup_m=sup_m,
        t_grid=t_grid,
        front_radius=front,
        front_threshold=front_threshold,
        snapshots=snapshots,
    )


def linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares line y = a x + b; returns (a, b, r2)."""
    a, b = np.polyfit(x, y, 1)
    resid = y - (a * x + b)
    total = y - np.mean(y)
    denom = float(total @ total)
    r2 = 1.0 - float(resid @ resid) / denom if denom > 0 else 0.0
    return float(a), float(b), r2


def fit_decay(
    distances: np.ndarray,
    values: np.ndarray,
    d_min: int = 4,
    d_max: int | None = None,
    fit_zeta: bool = False,
) -> tuple[float, float, float, float, bool]:
    """Fit values ~ C exp(-mu d^zeta) over [d_min, d_max].

    Distances below 4 (lattice-scale effects) and above N/2 - 4 (wrap
    contamination) are excluded by default.  Returns (mu, C, zeta, r2,
    no_decay); zeta is fixed to 1 unless ``fit_zeta``.
    """
    distances = np.asarray(distances, dtype=float)
    values = np.asarray(values, dtype=float)
    if d_max is None:
        d_max = int(distances.max()) - 4
    mask = (distances >= d_min) & (distances <= d_max) & (values > 0)
    if np.count_nonzero(mask) < 3:
        return 0.0, float("nan"), 1.0, 0.0, True
    x = distances[mask]
    logy = np.log(values[mask])
    if fit_zeta:
        from scipy.optimize import curve_fit

        def model(d, logc, mu, zeta):
            return logc - mu * d**zeta

        p0 = (logy[0], max(-(logy[-1] - logy[0]) / (x[-1] - x[0]), 1e-3), 1.0)
        try:
            popt, _ = curve_fit(model, x, logy, p0=p0, bounds=([-50, 0, 1e-3], [50, 50, 1.0]), maxfev=10000)
        except RuntimeError:
            return 0.0, float("nan"), 1.0, 0.0, True
        logc, mu, zeta = popt
        resid = logy - model(x, *popt)
        total = logy - np.mean(logy)
        r2 = 1.0 - float(resid @ resid) / float(total @ total) if total @ total > 0 else 0.0
    else:
        slope, intercept, r2 = linear_fit(x, logy)
        mu, logc, zeta = -slope, intercept, 1.0
    no_decay = bool(r2 < 0.5 or mu <= 0)
    return float(max(mu, 0.0)), float(np.exp(logc)), float(zeta), float(r2), no_decay


def fit_localization(
    profile: LightconeProfile,
    fit_zeta: bool = False,
    velocity_window: tuple[float, float] = (5.0, 50.0),
) -> LocalizationFit:
    """Fit exponential decay of sup-M versus ring distance, plus front velocity.

    Requires the profile to cover distances of at least 16 so the default fit
    window [4, N/2 - 4] is meaningful.  The velocity comes from a linear fit
    of front radius against time inside ``velocity_window``, restricted to
    radii that have not saturated the ring.
    """
    n = profile.sup_m.shape[0]
    if n // 2 < 16:
        raise ValueError("profile must cover distances >= 16 for a meaningful fit")
    distances, values = distance_profile(profile.sup_m)
    mu, prefactor, zeta, r2, no_decay = fit_decay(distances[1:], values[1:], fit_zeta=fit_zeta)

    velocity = None
    velocity_r2 = None
    t = profile.t_grid
    radius = profile.front_radius
    mask = (t >= velocity_window[0]) & (t <= velocity_window[1]) & (radius < n // 2 - 2)
    if np.count_nonzero(mask) >= 3:
        velocity, _, velocity_r2 = linear_fit(t[mask], radius[mask])
    return LocalizationFit(
        mu=mu,
        prefactor=prefactor,
        zeta=zeta,
        r2=r2,
        no_decay=no_decay,
        velocity=velocity,
        velocity_r2=velocity_r2,
    )


def default_time_grid(t_max: float = 250.0, num: int = 512, t_min: float = 0.1) -> np.ndarray:
    """Log-spaced sup grid on [t_min, t_max] with t = 0 prepended."""
    return np.concatenate([[0.0], np.geomspace(t_min, t_max, num)])
