"""Noise channels and the motion-reversal (echo) protocol.

A trial draws one unitary ``U``, starts from a basis state, applies
``Lambda o U`` ``n`` times and then ``Lambda o U^dag`` ``n`` times, where
``Lambda`` is the noise channel. Without noise the state returns exactly;
the loss of fidelity to the initial state and the loss of purity measure
the noise.

Unitary (coherent) noise runs on state vectors. Depolarizing and dephasing
channels need density matrices, capped at ``MAX_DENSITY_QUBITS`` qubits.
"""

import csv
import io
import json
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from . import qcore
from .circuit import apply_circuit, apply_inverse_circuit, circuit_to_matrix, CircuitSpec
from .errors import ModeError, ValidationError
from .haar import child_rng, ginibre, sample_haar_unitary, sample_hurwitz_angles
from .stats import STREAM_HAMILTONIAN, STREAM_UNITARY, CircuitSource, HaarSource

NOISE_GRAMMAR = "none, coherent:DELTA[:SEED], depolarizing:P, dephasing:GAMMA"


@dataclass(frozen=True)
class NoNoise:
    kind = "none"
    unitary = True

    def descriptor(self):
        return "none"


@dataclass(frozen=True, eq=False)
class CoherentPerturbation:
    """Static unitary error ``V = exp(-i delta H)`` with ``||H||_2 = 1``.

    ``hamiltonian`` may be left unset; it is then drawn once per experiment
    from the stream ``(seed, STREAM_HAMILTONIAN, 0)``, using ``seed`` if given
    and the experiment seed otherwise.
    """
    delta: float
    hamiltonian: np.ndarray | None = None
    seed: int | None = None
    kind = "coherent"
    unitary = True

    def __post_init__(self):
        if not np.isfinite(self.delta):
            raise ValueError("delta must be finite")
        if self.hamiltonian is not None:
            h = np.asarray(self.hamiltonian, dtype=complex)
            if np.max(np.abs(h - h.conj().T)) > 1e-10:
                raise ValidationError("perturbation generator is not Hermitian")
            if abs(np.linalg.norm(h, 2) - 1) > 1e-8:
                raise ValidationError("perturbation generator must have unit spectral norm")
            object.__setattr__(self, "hamiltonian", h)

    def descriptor(self):
        d = f"coherent:{self.delta!r}"
        return d if self.seed is None else f"{d}:{self.seed}"

    def materialize(self, n_q, seed):
        """Copy with a concrete generator for ``n_q`` qubits."""
        if self.hamiltonian is not None:
            if self.hamiltonian.shape[0] != 2 ** n_q:
                raise ValueError("perturbation generator has the wrong dimension")
            return self
        s = seed if self.seed is None else self.seed
        h = random_hermitian(2 ** n_q, child_rng(s, STREAM_HAMILTONIAN, 0))
        return replace(self, hamiltonian=h)

    @cached_property
    def operator(self):
        if self.hamiltonian is None:
            raise ValueError("generator not set; call materialize(n_q, seed) first")
        lam, w = np.linalg.eigh(self.hamiltonian)
        return (w * np.exp(-1j * self.delta * lam)) @ w.conj().T


@dataclass(frozen=True)
class Depolarizing:
    """``rho -> (1-p) rho + p I/D``."""
    p: float
    kind = "depolarizing"
    unitary = False

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ValueError(f"depolarizing probability must lie in [0, 1], got {self.p}")

    def descriptor(self):
        return f"depolarizing:{self.p!r}"


@dataclass(frozen=True)
class DephasingPerQubit:
    """Independent phase flips: Kraus ``{sqrt(1-gamma) I, sqrt(gamma) Z}`` on every qubit."""
    gamma: float
    kind = "dephasing"
    unitary = False

    def __post_init__(self):
        if not 0 <= self.gamma <= 1:
            raise ValueError(f"dephasing probability must lie in [0, 1], got {self.gamma}")

    def descriptor(self):
        return f"dephasing:{self.gamma!r}"


def parse_noise(text):
    """Parse ``none``, ``coherent:DELTA[:SEED]``, ``depolarizing:P`` or ``dephasing:GAMMA``."""
    parts = text.strip().split(":")
    kind, args = parts[0].lower(), parts[1:]
    expected = {"none": (0, 0), "coherent": (1, 2), "depolarizing": (1, 1),
                "dephasing": (1, 1)}
    if kind not in expected:
        raise ValueError(f"unknown noise kind {kind!r}; accepted: {NOISE_GRAMMAR}")
    lo, hi = expected[kind]
    if not lo <= len(args) <= hi:
        raise ValueError(f"noise {kind!r} takes {lo}..{hi} parameters, got {len(args)}")
    try:
        if kind == "none":
            return NoNoise()
        if kind == "coherent":
            seed = int(args[1]) if len(args) > 1 else None
            return CoherentPerturbation(float(args[0]), seed=seed)
        if kind == "depolarizing":
            return Depolarizing(float(args[0]))
        return DephasingPerQubit(float(args[0]))
    except ValueError as exc:
        raise ValueError(f"bad noise descriptor {text!r}: {exc}") from exc


def random_hermitian(dim, rng):
    """Gaussian Hermitian matrix scaled to unit spectral norm."""
    a = ginibre(dim, rng)
    h = (a + a.conj().T) / 2
    return h / np.linalg.norm(h, 2)


@dataclass(frozen=True, eq=False)
class FixedSource:
    """The same user-supplied unitary in every trial."""
    matrix: np.ndarray
    kind = "fixed"

    @property
    def n_q(self):
        return qcore.num_qubits(np.asarray(self.matrix).shape[0])

    @property
    def dim(self):
        return np.asarray(self.matrix).shape[0]

    def describe(self):
        return {"source": self.kind, "n_q": self.n_q}


def apply_noise(x, model):
    """Apply one use of the channel to a pure state (1-D) or density matrix (2-D)."""
    x = np.asarray(x)
    if isinstance(model, NoNoise):
        return x
    pure = x.ndim == 1
    if isinstance(model, CoherentPerturbation):
        v = model.operator
        return v @ x if pure else v @ x @ v.conj().T
    if pure:
        raise ModeError(f"{model.kind} noise is not unitary; "
                        "simulate with a density matrix instead of a state vector")
    d = x.shape[0]
    if isinstance(model, Depolarizing):
        return (1 - model.p) * x + model.p * np.eye(d) / d
    if isinstance(model, DephasingPerQubit):
        n_q = qcore.num_qubits(d)
        k = np.arange(d)
        for q in range(n_q):
            z = 1 - 2 * ((k >> (n_q - 1 - q)) & 1)
            x = (1 - model.gamma) * x + model.gamma * x * np.outer(z, z)
        return x
    raise TypeError(f"unknown noise model {model!r}")


@dataclass
class DecayCurve:
    n_values: np.ndarray
    fidelity: np.ndarray
    fidelity_std: np.ndarray
    purity: np.ndarray
    purity_std: np.ndarray
    metadata: dict = field(default_factory=dict)
    fidelity_trials: np.ndarray | None = None
    purity_trials: np.ndarray | None = None

    def rows(self):
        return list(zip(self.n_values.tolist(), self.fidelity.tolist(),
                        self.fidelity_std.tolist(), self.purity.tolist(),
                        self.purity_std.tolist()))

    def to_csv(self, metadata=True):
        buf = io.StringIO()
        if metadata:
            buf.write("# " + json.dumps(self.metadata, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "fidelity_mean", "fidelity_std", "purity_mean", "purity_std"])
        for n, f, fs, p, ps in self.rows():
            w.writerow([n, repr(f), repr(fs), repr(p), repr(ps)])
        return buf.getvalue()


class _Trial:
    """Forward/backward actions of one trial's unitary on a state or density matrix."""

    def __init__(self, source, seed, t, density):
        self.circuit = None
        rng = child_rng(seed, STREAM_UNITARY, t)
        if isinstance(source, CircuitSource):
            c = CircuitSpec(source.n_q, sample_hurwitz_angles(rng, (source.m, source.n_q)))
            if density:
                self.u = circuit_to_matrix(c)
            else:
                self.circuit = c
        elif isinstance(source, HaarSource):
            self.u = sample_haar_unitary(source.dim, rng)
        else:
            self.u = qcore.check_unitary(np.asarray(source.matrix, dtype=complex))
        if self.circuit is None:
            self.u_dag = self.u.conj().T

    def forward(self, x):
        if self.circuit is not None:
            return apply_circuit(x, self.circuit)
        return self.u @ x @ self.u_dag if x.ndim == 2 else self.u @ x

    def backward(self, x):
        if self.circuit is not None:
            return apply_inverse_circuit(x, self.circuit)
        return self.u_dag @ x @ self.u if x.ndim == 2 else self.u_dag @ x


def echo(trial, noise, x0, n):
    """``n`` noisy forward steps followed by ``n`` noisy backward steps."""
    x = x0
    for _ in range(n):
        x = apply_noise(trial.forward(x), noise)
    for _ in range(n):
        x = apply_noise(trial.backward(x), noise)
    return x


def _resolve_mode(noise, mode):
    if mode is None:
        return "pure" if noise.unitary else "density"
    if mode not in ("pure", "density"):
        raise ValueError(f"mode must be 'pure' or 'density', got {mode!r}")
    if mode == "pure" and not noise.unitary:
        raise ModeError(f"{noise.kind} noise requires density-matrix mode")
    return mode


def motion_reversal_curve(u_source, noise, n_max, initial=0, n_trials=1, seed=0,
                          mode=None):
    """Echo fidelity and purity for ``n = 1..n_max`` averaged over trials.

    Each trial draws one unitary and reuses it for every ``n``. Noise acts
    after each of the ``2n`` unitary applications.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    mode = _resolve_mode(noise, mode)
    n_q = u_source.n_q
    if mode == "density":
        qcore.check_capacity(n_q, qcore.MAX_DENSITY_QUBITS, "density-matrix")
    else:
        qcore.check_capacity(n_q, qcore.MAX_STATE_QUBITS)
    if isinstance(noise, CoherentPerturbation):
        noise = noise.materialize(n_q, seed)
    psi0 = qcore.basis_state(n_q, initial)
    x0 = qcore.pure_density_matrix(psi0) if mode == "density" else psi0

    fid = np.empty((n_trials, n_max))
    pur = np.ones((n_trials, n_max))
    for t in range(n_trials):
        trial = _Trial(u_source, seed, t, mode == "density")
        for j, n in enumerate(range(1, n_max + 1)):
            x = echo(trial, noise, x0, n)
            if mode == "density":
                fid[t, j] = qcore.fidelity_pure_mixed(psi0, x)
                pur[t, j] = qcore.purity(x)
            else:
                fid[t, j] = qcore.fidelity_pure(psi0, x)

    ddof = 1 if n_trials > 1 else 0
    meta = dict(u_source.describe(), noise=noise.descriptor(), mode=mode,
                initial=initial, n_max=n_max, n_trials=n_trials, seed=seed)
    if getattr(noise, "seed", None) is not None:
        meta["noise_seed"] = noise.seed
    return DecayCurve(
        n_values=np.arange(1, n_max + 1),
        fidelity=fid.mean(axis=0),
        fidelity_std=fid.std(axis=0, ddof=ddof),
        purity=pur.mean(axis=0),
        purity_std=pur.std(axis=0, ddof=ddof),
        metadata=meta,
        fidelity_trials=fid,
        purity_trials=pur,
    )


def average_fidelity_decay(u_source, noise, n_max, n_trials, seed, initial_states=(0,),
                           mode=None):
    """Trial-averaged decay curves, one per initial basis state.

    Returns a dict ``{basis_index: DecayCurve}``. The same trial unitaries are
    used for every initial state.
    """
    return {k: motion_reversal_curve(u_source, noise, n_max, k, n_trials, seed, mode)
            for k in initial_states}

