"""Physical observables from two-point correlator blocks.

String (order-parameter) correlators <X_j X_l> of a chain reduce, via Wick's
theorem, to the Pfaffian of an antisymmetric matrix of Jordan-Wigner two-point
functions; only the magnitude is needed, so it is evaluated as sqrt(det).
Interval entanglement entropies come from the spectrum of the real
antisymmetric Majorana correlation matrix of the interval.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .errors import GammaResidualError
from .quench import EvolvedFrame

STRUCTURE_TOL = 1e-8
NEGATIVE_DET_TOL = -1e-6
PAIRING_TOL = 1e-6
LN2 = np.log(2.0)


@dataclass(frozen=True, eq=False)
class StringGamma:
    """Antisymmetric contraction matrix of one string correlator.

    Block form [[S, G], [-G^T, Q]] where S collects <B B> contractions over
    the string's first operators, Q the <A A> ones, and G the <B A> cross
    terms; S and Q are purely imaginary with zero diagonal and G is real.
    Block dimension is l - j (one B and one A per bond the string crosses).
    """

    matrix: np.ndarray
    j: int
    l: int


@dataclass(frozen=True, eq=False)
class MajoranaGamma:
    """Real antisymmetric correlation matrix of an interval of width W.

    Defined by <d_m d_n> = delta_mn + i Gamma_mn over the 2W interleaved
    Majorana operators d_(2l) = A_l, d_(2l+1) = i B_l of the interval.
    """

    matrix: np.ndarray
    start: int
    width: int


@dataclass(frozen=True, eq=False)
class EntropySpectrum:
    """Pairing values nu_m in [0, 1] and the entropy they carry, in bits."""

    nu: np.ndarray
    entropy: float


def build_string_gamma(frame: EvolvedFrame, j: int, l: int) -> StringGamma:
    """Contraction matrix for the string correlator between sites j < l.

    Site indices are 0-based; the caller resolves periodic pairs to an
    unwrapped representative with j < l before building.
    """
    n = frame.num_sites
    if not 0 <= j < l <= n - 1:
        raise ValueError(f"string endpoints must satisfy 0 <= j < l < N, got ({j}, {l})")
    k = l - j
    smat = np.eye(k) + frame.bb[j:l, j:l]
    qmat = -np.eye(k) + frame.aa[j + 1 : l + 1, j + 1 : l + 1]
    gmat = frame.ba[j:l, j + 1 : l + 1]
    gamma = np.block([[smat, gmat], [-gmat.T, qmat]])
    res = max(
        np.max(np.abs(gamma + gamma.T)),
        np.max(np.abs(smat.real)),
        np.max(np.abs(qmat.real)),
        np.max(np.abs(gmat.imag)),
    )
    if res > STRUCTURE_TOL:
        raise GammaResidualError(f"string contraction matrix malformed (residual {res:.3e})")
    return StringGamma(matrix=gamma, j=j, l=l)


def string_correlator(gamma: StringGamma) -> float:
    """Magnitude of the string correlator, sqrt(max(det Gamma, 0)).

    A determinant below -1e-6 signals a construction bug and raises instead
    of being clamped.
    """
    det = np.linalg.det(gamma.matrix)
    if det.real < NEGATIVE_DET_TOL:
        raise GammaResidualError(f"string correlator determinant is negative ({det.real:.3e})")
    value = float(np.sqrt(max(det.real, 0.0)))
    return min(value, 1.0 + 1e-8)


def build_majorana_gamma(frame: EvolvedFrame, start: int, width: int) -> MajoranaGamma:
    """Majorana correlation matrix for the interval [start, start + width).

    The complex assembly must be real up to a residue below 1e-8; the real
    part is kept and exactly antisymmetrized.
    """
    n = frame.num_sites
    if width < 1 or start < 0 or start + width > n:
        raise ValueError("interval must lie within the chain")
    sl = slice(start, start + width)
    aa = frame.aa[sl, sl]
    bb = frame.bb[sl, sl]
    ab = frame.ab[sl, sl]
    ba = frame.ba[sl, sl]
    w = width
    gamma = np.zeros((2 * w, 2 * w), dtype=complex)
    gamma[0::2, 0::2] = -1j * (aa - np.eye(w))
    gamma[1::2, 1::2] = -1j * (-bb - np.eye(w))
    gamma[0::2, 1::2] = ab
    gamma[1::2, 0::2] = ba
    residue = max(np.max(np.abs(gamma.imag)), np.max(np.abs(gamma.real + gamma.real.T)))
    if residue > STRUCTURE_TOL:
        raise GammaResidualError(f"Majorana correlation matrix malformed (residue {residue:.3e})")
    real = 0.5 * (gamma.real - gamma.real.T)
    return MajoranaGamma(matrix=real, start=start, width=width)


def interval_entropy(gamma: MajoranaGamma) -> EntropySpectrum:
    """Entanglement entropy of the interval, in bits.

    The pairing values nu_m are the nonnegative eigenvalues of the Hermitian
    matrix i Gamma (they come in +/- pairs); the entropy is the sum of binary
    entropies H_b((1 - nu_m)/2).
    """
    w = gamma.width
    evals = np.linalg.eigvalsh(1j * gamma.matrix)
    nu = np.sort(evals)[w:]
    if np.max(np.abs(evals)) > 1.0 + PAIRING_TOL:
        raise GammaResidualError(
            f"pairing value out of range (max |nu| = {np.max(np.abs(evals)):.9f})"
        )
    nu = np.clip(nu, 0.0, 1.0)
    return EntropySpectrum(nu=nu, entropy=float(np.sum(binary_entropy((1.0 - nu) / 2.0))))


def binary_entropy(x) -> np.ndarray:
    """H_b(x) = -x log2 x - (1-x) log2 (1-x), with H_b(0) = H_b(1) = 0."""
    x = np.asarray(x, dtype=float)
    return -(xlogy(x, x) + xlogy(1.0 - x, 1.0 - x)) / LN2
