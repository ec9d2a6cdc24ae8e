"""Haar-measure samplers.

``sample_u2`` uses the Hurwitz (Euler-angle) parametrization of U(2) and is
what the random circuits draw from. ``sample_haar_unitary`` uses Ginibre +
QR with the R-diagonal phase fix and serves as the reference CUE sampler.

Randomness comes from :class:`numpy.random.Generator`. Independent streams
for trials are derived with :func:`child_rng`, which hashes
``(root_seed, *key)`` through :class:`numpy.random.SeedSequence`, so a
trial's draws depend only on the root seed and its own index.
"""

from typing import NamedTuple

import numpy as np

from .errors import CapacityError

MAX_HAAR_DIM = 4096
TWO_PI = 2 * np.pi


class HurwitzAngles(NamedTuple):
    """Angles of one U(2) element.

    ``alpha`` is the global phase; ``psi`` and ``chi`` are the relative
    phases; ``xi = sin(phi)**2`` sets the polar angle. Haar measure on U(2)
    corresponds to all four being uniform on their ranges.
    """
    alpha: float
    psi: float
    chi: float
    xi: float


def make_rng(seed=None):
    return np.random.default_rng(seed)


def child_rng(seed, *key):
    """Generator for the stream identified by ``key`` under root ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def sample_hurwitz_angles(rng, size=()):
    """Draw Haar-distributed angle quadruples; result has shape ``size + (4,)``."""
    if isinstance(size, int):
        size = (size,)
    u = rng.random(tuple(size) + (4,))
    u[..., :3] *= TWO_PI
    return u


def hurwitz_u2(alpha, psi, chi, xi):
    """U(2) matrix for the given angles; arguments broadcast elementwise."""
    alpha, psi, chi, xi = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (alpha, psi, chi, xi)))
    cos = np.sqrt(1.0 - xi)
    sin = np.sqrt(xi)
    g = np.exp(1j * alpha)
    u = np.empty(alpha.shape + (2, 2), dtype=complex)
    u[..., 0, 0] = g * np.exp(1j * psi) * cos
    u[..., 0, 1] = g * np.exp(1j * chi) * sin
    u[..., 1, 0] = -g * np.exp(-1j * chi) * sin
    u[..., 1, 1] = g * np.exp(-1j * psi) * cos
    return u


def angles_to_u2(angles):
    """Vectorized :func:`hurwitz_u2` over an array whose last axis holds the 4 angles."""
    angles = np.asarray(angles, dtype=float)
    return hurwitz_u2(angles[..., 0], angles[..., 1], angles[..., 2], angles[..., 3])


def sample_u2(rng):
    return angles_to_u2(sample_hurwitz_angles(rng))


def _check_dim(dim):
    if not 1 <= dim <= MAX_HAAR_DIM:
        raise CapacityError(f"Haar sampling supports 1 <= D <= {MAX_HAAR_DIM}, got {dim}")


def ginibre(dim, rng, size=()):
    """i.i.d. standard complex Gaussian entries, E|z|^2 = 1."""
    shape = tuple(size) + (dim, dim)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def haar_from_ginibre(z):
    """Map Ginibre matrices (possibly stacked) to Haar unitaries.

    Plain QR is not Haar: each column of Q has to be multiplied by the phase
    ``conj(R_jj)/|R_jj|`` so that R has a positive diagonal.
    """
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def sample_haar_unitary(dim, rng):
    _check_dim(dim)
    return haar_from_ginibre(ginibre(dim, rng))


def sample_haar_state(dim, rng):
    """Uniformly random pure state; same law as a column of a Haar unitary."""
    _check_dim(dim)
    z = (rng.standard_normal(dim) + 1j * rng.standard_normal(dim)) / np.sqrt(2)
    return z / np.linalg.norm(z)
