"""Dense state-vector and density-matrix primitives for qubit registers.

States are plain complex numpy arrays. A pure state on ``n_q`` qubits is a
vector of length ``D = 2**n_q``; qubit 0 is the most significant bit of the
basis index. Most state routines also accept a stack of states with shape
``(..., D)`` and act on the last axis.

A density matrix is a ``(D, D)`` complex array.
"""

from functools import lru_cache

import numpy as np

from .errors import CapacityError, ValidationError

MAX_STATE_QUBITS = 12
MAX_MATRIX_QUBITS = 10
MAX_DENSITY_QUBITS = 7

UNITARY_TOL = 1e-10
POSITIVITY_SLACK = 1e-9

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def num_qubits(dim):
    """Return ``n`` such that ``dim == 2**n``; raise ValueError otherwise."""
    dim = int(dim)
    if dim < 1 or dim & (dim - 1):
        raise ValueError(f"dimension {dim} is not a power of two")
    return dim.bit_length() - 1


def check_capacity(n_q, limit, what="state-vector"):
    if n_q > limit:
        raise CapacityError(
            f"{what} simulation is limited to {limit} qubits, got {n_q}")


def basis_state(n_q, index=0):
    """Computational basis state ``|index>`` on ``n_q`` qubits."""
    if n_q < 1:
        raise ValueError("n_q must be >= 1")
    check_capacity(n_q, MAX_STATE_QUBITS)
    dim = 2 ** n_q
    if not 0 <= index < dim:
        raise IndexError(f"basis index {index} out of range for D={dim}")
    psi = np.zeros(dim, dtype=complex)
    psi[index] = 1.0
    return psi


def ghz_state(n_q):
    psi = np.zeros(2 ** n_q, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return psi


def unitarity_error(mat):
    """``max|M^dag M - I|`` for a square matrix (or a stack of them)."""
    mat = np.asarray(mat)
    prod = np.swapaxes(mat.conj(), -1, -2) @ mat
    return float(np.max(np.abs(prod - np.eye(mat.shape[-1]))))


def check_unitary(mat, tol=UNITARY_TOL):
    mat = np.asarray(mat)
    if mat.ndim < 2 or mat.shape[-1] != mat.shape[-2]:
        raise ValidationError(f"expected a square matrix, got shape {mat.shape}")
    err = unitarity_error(mat)
    if err > tol:
        raise ValidationError(f"matrix is not unitary: max|U^dag U - I| = {err:.3e}")
    return mat


def check_density_matrix(rho, tol=UNITARY_TOL):
    """Validate Hermiticity, unit trace and positivity (with slack)."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol:
        raise ValidationError(f"density matrix not Hermitian ({herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise ValidationError(f"density matrix trace is {tr.real:.12g}, not 1")
    lo = np.linalg.eigvalsh(rho).min()
    if lo < -POSITIVITY_SLACK:
        raise ValidationError(f"density matrix has negative eigenvalue {lo:.3e}")
    return rho


def _split(state, target, n_q):
    """View ``state`` as ``(..., left, 2, right)`` around qubit ``target``."""
    left = 2 ** target
    right = 2 ** (n_q - target - 1)
    return state.reshape(state.shape[:-1] + (left, 2, right))


def apply_single_qubit_gate(state, gate, target, check=True):
    """Apply a 2x2 ``gate`` to qubit ``target`` of ``state``.

    ``gate`` may carry leading batch axes that broadcast against the batch
    axes of ``state`` (used to run many circuits at once).
    """
    state = np.asarray(state)
    n_q = num_qubits(state.shape[-1])
    if not 0 <= target < n_q:
        raise IndexError(f"target qubit {target} out of range for n_q={n_q}")
    gate = np.asarray(gate)
    if check:
        check_unitary(gate)
    out = np.einsum("...ab,...ibj->...iaj", gate, _split(state, target, n_q))
    return out.reshape(out.shape[:-3] + state.shape[-1:])


@lru_cache(maxsize=None)
def zz_parities(n_q):
    """``s(k) = sum_j z_j(k) z_{j+1}(k)`` for every basis index ``k``.

    ``z_j(k)`` is +1 when bit ``j`` of ``k`` (qubit 0 = MSB) is 0 and -1
    otherwise. Open chain, no wraparound.
    """
    k = np.arange(2 ** n_q)
    z = 1 - 2 * ((k[:, None] >> (n_q - 1 - np.arange(n_q))) & 1)
    s = np.sum(z[:, :-1] * z[:, 1:], axis=1)
    s.flags.writeable = False
    return s


def zz_phases(n_q, angle=np.pi / 4):
    """Diagonal of ``exp(i * angle * sum_j Z_j Z_{j+1})``."""
    return np.exp(1j * angle * zz_parities(n_q))


def apply_zz_coupling_layer(state, angle=np.pi / 4):
    """Multiply each basis amplitude by its nearest-neighbour ZZ phase."""
    state = np.asarray(state)
    n_q = num_qubits(state.shape[-1])
    if n_q < 2:
        raise ValueError("the ZZ coupling layer needs at least two qubits")
    return state * zz_phases(n_q, angle)


def reduced_density_matrix(state, i):
    """2x2 reduced density matrix of qubit ``i`` (batched over leading axes)."""
    state = np.asarray(state)
    n_q = num_qubits(state.shape[-1])
    if not 0 <= i < n_q:
        raise IndexError(f"qubit {i} out of range for n_q={n_q}")
    v = _split(state, i, n_q)
    return np.einsum("...xay,...xby->...ab", v, v.conj())


def reduced_qubit_purity(state, i):
    """``Tr[rho_i^2]`` for qubit ``i`` without forming ``|psi><psi|``."""
    rho = reduced_density_matrix(state, i)
    p = np.sum(np.abs(rho) ** 2, axis=(-2, -1))
    return float(p) if p.ndim == 0 else p


def qubit_purities(state):
    """Array of single-qubit purities, last axis indexed by qubit."""
    state = np.asarray(state)
    n_q = num_qubits(state.shape[-1])
    return np.stack([np.asarray(reduced_qubit_purity(state, i))
                     for i in range(n_q)], axis=-1)


def pure_density_matrix(state):
    state = np.asarray(state)
    check_capacity(num_qubits(state.shape[-1]), MAX_DENSITY_QUBITS, "density-matrix")
    return np.outer(state, state.conj())


def maximally_mixed(n_q):
    check_capacity(n_q, MAX_DENSITY_QUBITS, "density-matrix")
    d = 2 ** n_q
    return np.eye(d, dtype=complex) / d


def purity(rho):
    """``Tr[rho^2]``; for Hermitian ``rho`` this is the squared Frobenius norm."""
    rho = np.asarray(rho)
    return float(np.real(np.vdot(rho.conj().T, rho)))


def fidelity_pure(a, b):
    """``|<a|b>|^2``."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.abs(np.vdot(a, b)) ** 2)


def fidelity_pure_mixed(a, rho):
    """``<a|rho|a>``."""
    a, rho = np.asarray(a), np.asarray(rho)
    if rho.shape != (a.size, a.size):
        raise ValueError(f"dimension mismatch: state {a.shape} vs rho {rho.shape}")
    return float(np.real(np.vdot(a, rho @ a)))


def _same_dims(u, v):
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")


def compose(u, v):
    """Matrix product ``u @ v`` (apply ``v`` first)."""
    u, v = np.asarray(u), np.asarray(v)
    _same_dims(u, v)
    return u @ v


def adjoint(u):
    return np.asarray(u).conj().T


def apply_unitary(state, u):
    state, u = np.asarray(state), np.asarray(u)
    if u.shape[-1] != state.shape[-1]:
        raise ValueError(f"dimension mismatch: state {state.shape} vs U {u.shape}")
    return state @ u.T


def conjugate_channel(rho, u):
    """``u @ rho @ u^dag``."""
    rho, u = np.asarray(rho), np.asarray(u)
    _same_dims(rho, u)
    return u @ rho @ u.conj().T
