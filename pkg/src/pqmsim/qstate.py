"""Small-Hilbert-space quantum state arithmetic.

States are plain numpy arrays: a 1-D complex array is a pure state (ket),
a 2-D square array is a density matrix with ``rho[i, j] = <i|rho|j>``.
Basis index ``i`` encodes qubits most-significant-first in the listed mode
order, e.g. ``|q0 q1>`` has index ``2*q0 + q1``.  Every multi-mode object in
the package uses this ordering.
"""
from typing import NamedTuple, Sequence

import numpy as np

NORM_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
HERMITIAN_TOL = 1e-12

SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SYSY = np.kron(SIGMA_Y, SIGMA_Y)


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray   # real, descending
    eigenvectors: np.ndarray  # columns, orthonormal


def _n_qubits(dim):
    n = int(round(np.log2(dim)))
    if dim < 1 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def ket(amplitudes):
    """Return a validated, complex pure-state vector."""
    psi = np.asarray(amplitudes, dtype=complex)
    if psi.ndim != 1:
        raise ValueError("a pure state must be a 1-D amplitude vector")
    _n_qubits(psi.size)
    norm = np.vdot(psi, psi).real
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
    return psi


def density_matrix(entries, atol=TRACE_TOL):
    """Return a validated density matrix (Hermitian, unit trace, PSD)."""
    rho = np.asarray(entries, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("a density matrix must be square")
    _n_qubits(rho.shape[0])
    if np.max(np.abs(rho - rho.conj().T)) > max(HERMITIAN_TOL, atol):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > atol:
        raise ValueError("density matrix trace differs from 1")
    if hermitian_eig(rho).eigenvalues[-1] < -PSD_TOL:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def to_density(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def basis_state(bits):
    """Computational basis ket for a bit string such as ``"01"``."""
    vec = np.zeros(2 ** len(bits), dtype=complex)
    vec[int(bits, 2)] = 1.0
    return vec


def tensor(a, b):
    """Kronecker product, left operand as the more significant subsystem.

    Both operands must be of the same kind: two kets or two density matrices.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != b.ndim or a.ndim not in (1, 2):
        raise TypeError("tensor() needs two kets or two density matrices; convert first")
    return np.kron(a, b)


def partial_trace(rho, keep: Sequence[int]):
    """Reduce ``rho`` (n qubits) to the qubits listed in ``keep``, in that order."""
    rho = np.asarray(rho, dtype=complex)
    n = _n_qubits(rho.shape[0])
    keep = list(keep)
    if not keep:
        raise ValueError("keep must name at least one qubit")
    if len(set(keep)) != len(keep):
        raise ValueError("keep indices must be distinct")
    if any(q < 0 or q >= n for q in keep):
        raise ValueError(f"qubit index out of range for {n} qubits")
    drop = [q for q in range(n) if q not in keep]
    k, m = len(keep), len(drop)
    t = rho.reshape((2,) * (2 * n))
    order = keep + drop + [n + q for q in keep] + [n + q for q in drop]
    t = t.transpose(order).reshape(2**k, 2**m, 2**k, 2**m)
    return np.einsum("ajbj->ab", t)


def hermitian_eig(h):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("matrix must be square")
    h = 0.5 * (h + h.conj().T)
    w, v = np.linalg.eigh(h)
    return EigenDecomposition(w[::-1].copy(), v[:, ::-1].copy())


def matrix_sqrt_psd(rho):
    """Principal square root of a positive semidefinite matrix.

    Eigenvalues down to ``-PSD_TOL`` are clamped to zero.
    """
    w, v = hermitian_eig(rho)
    if w[-1] < -PSD_TOL:
        raise ValueError(f"matrix is not PSD (min eigenvalue {w[-1]:.3e})")
    root = np.sqrt(np.clip(w, 0.0, None))
    return (v * root) @ v.conj().T


def l1_coherence(rho):
    rho = np.asarray(rho, dtype=complex)
    off = np.abs(rho)
    return float(off.sum() - np.trace(off).real)


def purity(rho):
    rho = np.asarray(rho, dtype=complex)
    # Tr(rho^2) = sum_ij |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(rho) ** 2))


def concurrence_pure(psi):
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (4,):
        raise ValueError("concurrence_pure needs a two-qubit ket")
    a, b, c, d = psi
    return float(2 * abs(a * d - b * c))


def spin_flip(rho):
    """(sy x sy) rho* (sy x sy)."""
    return _SYSY @ np.asarray(rho, dtype=complex).conj() @ _SYSY


def wootters_lambdas(rho):
    """Square roots of the eigenvalues of rho rho~, descending.

    Computed as the singular values of tau_ij = v_i^T (sy x sy) v_j with
    v_i = sqrt(w_i) e_i from the eigen-decomposition of rho.  This avoids
    taking square roots of round-off-sized eigenvalues, which for
    rank-deficient states costs ~1e-8 in the eigenvalue route.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("concurrence needs a 4x4 two-qubit density matrix")
    w, e = hermitian_eig(rho)
    if w[-1] < -PSD_TOL:
        raise ValueError(f"matrix is not PSD (min eigenvalue {w[-1]:.3e})")
    return factor_lambdas(e * np.sqrt(np.clip(w, 0.0, None)))


def factor_lambdas(v):
    """Wootters lambdas of rho = v v^dag for any 4 x k factor ``v``.

    Any ensemble decomposition works (the singular values of v^T S v do not
    depend on the choice), e.g. the conditional states of a purification.
    """
    v = np.asarray(v, dtype=complex)
    if v.ndim != 2 or v.shape[0] != 4:
        raise ValueError("factor must have 4 rows")
    lam = np.linalg.svd(v.T @ _SYSY @ v, compute_uv=False)
    return np.concatenate([lam, np.zeros(max(0, 4 - lam.size))])[:4]


def concurrence_from_factor(v):
    lam = factor_lambdas(v)
    return float(min(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]), 1.0))


def m_matrix_lambdas(rho):
    """Eigenvalues of M = sqrt(sqrt(rho) rho~ sqrt(rho)), descending."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("concurrence needs a 4x4 two-qubit density matrix")
    s = matrix_sqrt_psd(rho)
    w = hermitian_eig(s @ spin_flip(rho) @ s).eigenvalues
    return np.sqrt(np.clip(w, 0.0, None))


def concurrence_max_form(rho):
    """max(0, 2*l_max - Tr M) evaluated through M itself."""
    lam = m_matrix_lambdas(rho)
    return float(max(0.0, 2 * lam[0] - lam.sum()))


def concurrence_mixed(rho, check=False):
    """Two-qubit concurrence, max(0, l1 - l2 - l3 - l4).

    ``check`` re-evaluates the max(0, 2*l_max - Tr M) form through the
    matrix M and raises if the two differ by more than 1e-7.
    """
    lam = wootters_lambdas(rho)
    c = min(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]), 1.0)
    if check:
        alt = concurrence_max_form(rho)
        if abs(alt - c) > 1e-7:
            raise ArithmeticError(f"concurrence forms disagree: {c!r} vs {alt!r}")
    return float(c)


def mean_photon_number(state, mode: int):
    """<n> on one mode: probability of that qubit being |1>."""
    state = np.asarray(state, dtype=complex)
    rho = to_density(state) if state.ndim == 1 else state
    n = _n_qubits(rho.shape[0])
    if not 0 <= mode < n:
        raise ValueError(f"mode {mode} out of range for {n} qubits")
    return float(partial_trace(rho, [mode])[1, 1].real)
