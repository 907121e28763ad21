"""Brute-force many-body reference for short chains (N <= 12).

Everything here works on dense 2^N-dimensional spin representations of the
chain H = -sum_j g_j X_j X_{j+1} - sum_j f_j Z_j with periodic bonds, and on
the exact Jordan-Wigner images of its fermion operators.  It exists purely to
certify the free-fermion pipeline: ground states, unitary evolution, string
correlators, interval entropies, Majorana covariances and single-particle
propagators are all computed without any Gaussian-state shortcut.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chains import ChainCouplings
from .errors import DegenerateGroundStateError

MAX_SITES = 12
DEGENERACY_TOL = 1e-10

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
_ID = np.eye(2)


@dataclass(frozen=True, eq=False)
class DenseState:
    """Unit-norm many-body state supported in one parity sector."""

    amplitudes: np.ndarray
    num_sites: int
    sector: str = "even"


def _check_size(n: int):
    if n > MAX_SITES:
        raise ValueError(f"oracle is capped at {MAX_SITES} sites, got {n}")


def _site_operator(op: np.ndarray, site: int, n: int) -> np.ndarray:
    out = np.array([[1.0 + 0.0j]])
    for j in range(n):
        out = np.kron(out, op if j == site else _ID)
    return out


def _string_operator(ops: dict[int, np.ndarray], n: int) -> np.ndarray:
    """Tensor product with ``ops[site]`` inserted at each listed site."""
    out = np.array([[1.0 + 0.0j]])
    for j in range(n):
        out = np.kron(out, ops.get(j, _ID))
    return out


def dense_hamiltonian(chain: ChainCouplings) -> np.ndarray:
    """Dense 2^N x 2^N matrix of the periodic chain Hamiltonian."""
    n = chain.length
    _check_size(n)
    dim = 2**n
    ham = np.zeros((dim, dim), dtype=complex)
    for j in range(n):
        ham -= chain.fields[j] * _string_operator({j: _SZ}, n)
        k = (j + 1) % n
        ham -= chain.bonds[j] * _string_operator({j: _SX, k: _SX}, n)
    return ham


def parity_diagonal(n: int) -> np.ndarray:
    """Diagonal of prod_j Z_j over the computational basis."""
    bits = np.arange(2**n)
    pop = np.zeros(2**n, dtype=int)
    for j in range(n):
        pop += (bits >> j) & 1
    return np.where(pop % 2 == 0, 1.0, -1.0)


def exact_ground_state(chain: ChainCouplings) -> DenseState:
    """Lowest eigenvector of the chain within the even-parity sector.

    Raises
    ------
    DegenerateGroundStateError
        if the two lowest even-sector energies agree within 1e-10, rather
        than silently picking a representative.
    """
    n = chain.length
    _check_size(n)
    ham = dense_hamiltonian(chain)
    even = np.nonzero(parity_diagonal(n) > 0)[0]
    block = ham[np.ix_(even, even)]
    evals, evecs = np.linalg.eigh(block)
    if evals[1] - evals[0] < DEGENERACY_TOL:
        raise DegenerateGroundStateError(
            f"even-sector ground state degenerate (gap {evals[1] - evals[0]:.3e})"
        )
    amps = np.zeros(2**n, dtype=complex)
    amps[even] = evecs[:, 0]
    return DenseState(amplitudes=amps, num_sites=n, sector="even")


def exact_evolve(chain_post: ChainCouplings, state: DenseState, t: float) -> DenseState:
    """Unitary evolution exp(-i t H_post) |state> via full eigendecomposition."""
    n = state.num_sites
    _check_size(n)
    evals, evecs = np.linalg.eigh(dense_hamiltonian(chain_post))
    amps = evecs @ (np.exp(-1j * t * evals) * (evecs.conj().T @ state.amplitudes))
    return DenseState(amplitudes=amps, num_sites=n, sector=state.sector)


def evolve_grid(chain_post: ChainCouplings, state: DenseState, times) -> list[DenseState]:
    """Evolved states at several times sharing one eigendecomposition."""
    n = state.num_sites
    _check_size(n)
    evals, evecs = np.linalg.eigh(dense_hamiltonian(chain_post))
    coeff = evecs.conj().T @ state.amplitudes
    out = []
    for t in times:
        amps = evecs @ (np.exp(-1j * t * evals) * coeff)
        out.append(DenseState(amplitudes=amps, num_sites=n, sector=state.sector))
    return out


def expectation(state: DenseState, operator: np.ndarray) -> complex:
    return complex(state.amplitudes.conj() @ (operator @ state.amplitudes))


def exact_string_correlator(state: DenseState, j: int, l: int) -> complex:
    """<X_j X_l> by direct operator expectation (j = l gives 1)."""
    n = state.num_sites
    if j == l:
        return 1.0 + 0.0j
    op = _string_operator({j: _SX, l: _SX}, n)
    return expectation(state, op)


def exact_interval_entropy(state: DenseState, start: int, width: int) -> float:
    """Von Neumann entropy (bits) of sites [start, start + width)."""
    n = state.num_sites
    if width < 0 or start < 0 or start + width > n:
        raise ValueError("interval must lie within the chain")
    if width == 0 or width == n:
        return 0.0
    psi = state.amplitudes.reshape(2**start, 2**width, 2 ** (n - start - width))
    rho = np.einsum("aib,akb->ik", psi, psi.conj())
    evals = np.clip(np.linalg.eigvalsh(rho).real, 0.0, 1.0)
    nz = evals[evals > 1e-14]
    return float(-np.sum(nz * np.log2(nz)))


def _jordan_wigner_majoranas(n: int) -> list[np.ndarray]:
    """Dense Majorana operators d_(2l) = string X_l, d_(2l+1) = string Y_l."""
    ops = []
    for l in range(n):
        string = {j: _SZ for j in range(l)}
        ops.append(_string_operator({**string, l: _SX}, n))
        ops.append(_string_operator({**string, l: _SY}, n))
    return ops


def exact_majorana_covariance(state: DenseState) -> np.ndarray:
    """Matrix of <d_m d_n> over the 2N Jordan-Wigner Majorana operators."""
    n = state.num_sites
    _check_size(n)
    majoranas = _jordan_wigner_majoranas(n)
    applied = [op @ state.amplitudes for op in majoranas]
    cov = np.empty((2 * n, 2 * n), dtype=complex)
    for m in range(2 * n):
        bra = applied[m].conj()
        for k in range(2 * n):
            cov[m, k] = bra @ applied[k]
    return cov


def dense_fermion_hamiltonian(chain: ChainCouplings) -> np.ndarray:
    """Dense antiperiodic-fermion Hamiltonian (even-sector branch on all states).

    The spin Hamiltonian's wrap bond carries a parity-dependent sign after
    Jordan-Wigner; this fixes the even-sector (antiperiodic) sign globally,
    which is what the quadratic single-particle description evolves with.
    """
    n = chain.length
    _check_size(n)
    majorana = _jordan_wigner_majoranas(n)
    dim = 2**n
    ham = np.zeros((dim, dim), dtype=complex)
    for j in range(n):
        ham -= chain.fields[j] * _string_operator({j: _SZ}, n)
    # bond terms -g_j B_j A_{j+1} with B_l = -i d_{2l+1}, A_l = d_{2l}
    for j in range(n - 1):
        ham += 1j * chain.bonds[j] * (majorana[2 * j + 1] @ majorana[2 * j + 2])
    ham -= 1j * chain.bonds[n - 1] * (majorana[2 * n - 1] @ majorana[0])
    return ham


def exact_propagator(chain: ChainCouplings, t: float) -> np.ndarray:
    """Single-particle propagator read off from many-body Heisenberg evolution.

    Evolves each annihilation operator in the full 2^N space under the
    antiperiodic fermion Hamiltonian and projects via anticommutators:
    U_{2l, 2j} = {c_l(t), c_j^dag}, U_{2l, 2j+1} = {c_l(t), c_j} (0-based
    interleaved indices); the creation-operator rows follow by conjugation.
    """
    n = chain.length
    _check_size(n)
    evals, evecs = np.linalg.eigh(dense_fermion_hamiltonian(chain))
    forward = evecs * np.exp(1j * t * evals)
    annihilators = []
    for l in range(n):
        string = {j: _SZ for j in range(l)}
        lower = (_SX + 1j * _SY) / 2.0
        annihilators.append(_string_operator({**string, l: lower}, n))
    dim = 2**n
    evolved = [forward @ (evecs.conj().T @ op @ evecs) @ forward.conj().T for op in annihilators]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    for l in range(n):
        for j in range(n):
            cdag = annihilators[j].conj().T
            out[2 * l, 2 * j] = np.trace(evolved[l] @ cdag + cdag @ evolved[l]) / dim
            out[2 * l, 2 * j + 1] = np.trace(
                evolved[l] @ annihilators[j] + annihilators[j] @ evolved[l]
            ) / dim
    out[1::2, 0::2] = out[0::2, 1::2].conj()
    out[1::2, 1::2] = out[0::2, 0::2].conj()
    return out


def pfaffian_recursive(matrix: np.ndarray) -> complex:
    """Signed Pfaffian by Laplace expansion along the first row (dim <= 12)."""
    a = np.asarray(matrix)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[0] != a.shape[1] or n % 2:
        raise ValueError("Pfaffian needs a square matrix of even dimension")
    if n > MAX_SITES:
        raise ValueError(f"recursive Pfaffian capped at dimension {MAX_SITES}")
    if np.max(np.abs(a + a.T)) > 1e-10:
        raise ValueError("matrix is not antisymmetric within tolerance")
    return _pfaffian(a)


def _pfaffian(a: np.ndarray) -> complex:
    n = a.shape[0]
    if n == 0:
        return 1.0
    if n == 2:
        return a[0, 1]
    total = 0.0
    for k in range(1, n):
        keep = [i for i in range(1, n) if i != k]
        sub = a[np.ix_(keep, keep)]
        total += (-1.0) ** (k + 1) * a[0, k] * _pfaffian(sub)
    return total
