"""Entanglement and distribution diagnostics for random-unitary ensembles.

The Meyer-Wallach indicator ``Q = 2 - (2/n_q) sum_i Tr[rho_i^2]`` measures
multipartite entanglement; for Haar-random states on ``D = 2**n_q``
dimensions its mean is ``(D-2)/(D+1)``. Matrix elements ``|U_ij|^2`` of a
Haar unitary follow ``P(y <= t) = 1 - (1-t)**(D-1)``, as do the components
``|v_k|^2`` of its eigenvectors.
"""

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats as sps

from . import qcore
from .circuit import circuits_to_matrices, run_layers
from .errors import NumericalError
from .haar import angles_to_u2, child_rng, sample_haar_state, sample_haar_unitary, \
    sample_hurwitz_angles

# child-seed streams: (seed, stream, trial) -> generator
STREAM_UNITARY = 0
STREAM_REFERENCE = 1
STREAM_HAMILTONIAN = 2

DEFAULT_BINS = 50
CHUNK = 256
Q_SLACK = 1e-9
EIG_TOL = 1e-8
DEGENERACY_GAP = 1e-10


@dataclass(frozen=True)
class CircuitSource:
    """Random circuits with ``m`` layers on ``n_q`` qubits."""
    n_q: int
    m: int
    kind = "circuit"

    @property
    def dim(self):
        return 2 ** self.n_q

    def describe(self):
        return {"source": self.kind, "n_q": self.n_q, "m": self.m}


@dataclass(frozen=True)
class HaarSource:
    """Haar (CUE) unitaries on ``D = 2**n_q`` dimensions."""
    n_q: int
    kind = "haar"

    @property
    def dim(self):
        return 2 ** self.n_q

    def describe(self):
        return {"source": self.kind, "n_q": self.n_q}


def _circuit_gates(source, seed, trials):
    angles = np.stack([
        sample_hurwitz_angles(child_rng(seed, STREAM_UNITARY, t), (source.m, source.n_q))
        for t in trials])
    return angles_to_u2(angles)


def sample_unitaries(source, n_trials, seed, start=0):
    """Yield ``(trial_index, U)`` for each trial; ``U`` is a dense matrix."""
    if isinstance(source, CircuitSource):
        qcore.check_capacity(source.n_q, qcore.MAX_MATRIX_QUBITS, "matrix")
        for lo in range(start, start + n_trials, CHUNK):
            trials = range(lo, min(lo + CHUNK, start + n_trials))
            mats = circuits_to_matrices(_circuit_gates(source, seed, trials), source.n_q)
            yield from zip(trials, mats)
    else:
        for t in range(start, start + n_trials):
            yield t, sample_haar_unitary(source.dim, child_rng(seed, STREAM_UNITARY, t))


# Meyer-Wallach indicator

def meyer_wallach_q(state):
    """Meyer-Wallach Q of a pure state (batched over leading axes)."""
    state = np.asarray(state)
    n_q = qcore.num_qubits(state.shape[-1])
    if n_q < 2:
        raise ValueError("Q is undefined for a single qubit")
    q = 2.0 - 2.0 / n_q * qcore.qubit_purities(state).sum(axis=-1)
    over = np.maximum(q - 1.0, -q)
    if np.any(over > Q_SLACK):
        raise NumericalError(f"Q outside [0, 1] by {np.max(over):.3e}; is the state normalized?")
    q = np.clip(q, 0.0, 1.0)
    return float(q) if q.ndim == 0 else q


def cue_q_mean_exact(dim):
    return Fraction(dim - 2, dim + 1)


def cue_q_mean(dim):
    """Exact CUE average of Q, ``(D-2)/(D+1)``."""
    if dim < 4 or dim & (dim - 1):
        raise ValueError("D must be 2**n_q with n_q >= 2")
    return float(cue_q_mean_exact(dim))


def element_cdf(dim):
    """CDF of ``|U_ij|^2`` for a Haar unitary on ``dim`` dimensions."""
    def cdf(y):
        y = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
        return 1.0 - (1.0 - y) ** (dim - 1)
    return cdf


@dataclass(frozen=True)
class CueReference:
    dim: int

    @property
    def q_mean_exact(self):
        return cue_q_mean(self.dim)

    @property
    def element_cdf(self):
        return element_cdf(self.dim)


# Kolmogorov-Smirnov distances

def ks_statistic(samples, cdf):
    """One-sample KS distance ``sup_y |F_n(y) - cdf(y)|``."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("ks_statistic needs at least one sample")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return float(np.clip(max(d_plus, d_minus), 0.0, 1.0))


def ks_two_sample(a, b):
    """Two-sample KS distance between empirical CDFs of ``a`` and ``b``."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("ks_two_sample needs non-empty inputs")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


# Q ensembles

@dataclass
class EnsembleReport:
    n_trials: int
    q_mean: float
    q_std: float
    bin_edges: np.ndarray
    counts: np.ndarray
    ks_to_cue: float
    metadata: dict = field(default_factory=dict)
    q_samples: np.ndarray | None = None

    @property
    def q_sem(self):
        return self.q_std / np.sqrt(self.n_trials)

    def to_dict(self, include_samples=True):
        d = {
            "n_trials": self.n_trials,
            "q_mean": self.q_mean,
            "q_std": self.q_std,
            "ks_to_cue": self.ks_to_cue,
            "histogram": {"bin_edges": self.bin_edges.tolist(),
                          "counts": self.counts.tolist()},
            "metadata": self.metadata,
        }
        if include_samples and self.q_samples is not None:
            d["q_samples"] = self.q_samples.tolist()
        return d

    def to_json(self, include_samples=True):
        return json.dumps(self.to_dict(include_samples), indent=1, sort_keys=True)


def q_samples(source, n_trials, seed, basis_index=0, stream=STREAM_UNITARY):
    """Q of ``U|basis_index>`` for ``n_trials`` independent draws from ``source``."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    qcore.check_capacity(source.n_q, qcore.MAX_STATE_QUBITS)
    psi0 = qcore.basis_state(source.n_q, basis_index)
    out = np.empty(n_trials)
    if isinstance(source, CircuitSource):
        for lo in range(0, n_trials, CHUNK):
            trials = range(lo, min(lo + CHUNK, n_trials))
            angles = np.stack([
                sample_hurwitz_angles(child_rng(seed, stream, t), (source.m, source.n_q))
                for t in trials])
            states = run_layers(psi0, angles_to_u2(angles), source.n_q)
            out[lo:lo + len(trials)] = meyer_wallach_q(states)
    else:
        # U|k> for Haar U is a Haar-random state whatever k is
        for t in range(n_trials):
            out[t] = meyer_wallach_q(sample_haar_state(source.dim, child_rng(seed, stream, t)))
    return out


def cue_reference_q(n_q, n_trials, seed):
    """Haar baseline Q samples drawn from a stream disjoint from the trial stream."""
    return q_samples(HaarSource(n_q), n_trials, seed, stream=STREAM_REFERENCE)


def run_q_ensemble(source, n_trials, seed, basis_index=0, bins=DEFAULT_BINS,
                   reference=None, keep_samples=True):
    """Sample ``n_trials`` unitaries, apply each to ``|basis_index>`` and summarize Q.

    ``ks_to_cue`` is the two-sample KS distance to a Haar baseline sample
    (``reference``; drawn with ``n_trials`` trials from a separate stream of
    ``seed`` when not given).
    """
    q = q_samples(source, n_trials, seed, basis_index)
    if reference is None:
        reference = cue_reference_q(source.n_q, n_trials, seed)
    counts, edges = np.histogram(q, bins=bins, range=(0.0, 1.0))
    meta = dict(source.describe(), seed=seed, basis_index=basis_index,
                statistic="meyer_wallach_q", bins=bins,
                cue_q_mean=cue_q_mean(source.dim))
    return EnsembleReport(
        n_trials=n_trials,
        q_mean=float(q.mean()),
        q_std=float(q.std(ddof=1)) if n_trials > 1 else 0.0,
        bin_edges=edges,
        counts=counts,
        ks_to_cue=ks_two_sample(q, reference),
        metadata=meta,
        q_samples=q if keep_samples else None,
    )


@dataclass
class GapRow:
    m: int
    q_mean: float
    q_std: float
    sem: float
    ks_to_cue: float
    abs_gap_to_cue: float


def q_gap_scan(n_q, m_values, n_trials, seed, basis_index=0):
    """Mean-Q gap to the CUE value for circuits of each depth in ``m_values``."""
    reference = cue_reference_q(n_q, n_trials, seed)
    target = cue_q_mean(2 ** n_q)
    rows = []
    for m in m_values:
        r = run_q_ensemble(CircuitSource(n_q, m), n_trials, seed, basis_index,
                           reference=reference, keep_samples=False)
        rows.append(GapRow(m, r.q_mean, r.q_std, r.q_sem, r.ks_to_cue,
                           abs(r.q_mean - target)))
    return rows


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


def linear_fit(x, y):
    res = sps.linregress(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return LinearFit(float(res.slope), float(res.intercept), float(res.rvalue ** 2))


def fit_convergence_rate(m_values, gaps):
    """Regress ``log|gap|`` on ``m``; the decay rate is ``-slope``."""
    gaps = np.abs(np.asarray(gaps, dtype=float))
    if np.any(gaps <= 0):
        raise ValueError("gaps must be non-zero to take logarithms")
    return linear_fit(m_values, np.log(gaps))


@dataclass
class ConcentrationScan:
    n_q: list
    q_std: list
    q_mean: list
    fit: LinearFit | None

    def rows(self):
        return list(zip(self.n_q, self.q_std))


def concentration_scan(n_q_list, n_trials, seed):
    """Standard deviation of Q over Haar states for each register size."""
    n_q_list = [int(n) for n in n_q_list]
    means, stds = [], []
    for n_q in n_q_list:
        q = q_samples(HaarSource(n_q), n_trials, seed)
        means.append(float(q.mean()))
        stds.append(float(q.std(ddof=1)))
    fit = linear_fit(n_q_list, np.log(stds)) if len(n_q_list) > 1 else None
    return ConcentrationScan(n_q_list, stds, means, fit)


# Matrix-element and eigenvector statistics

def matrix_element_samples(source, n_trials, seed):
    """Pooled ``|U_ij|^2`` over all entries of ``n_trials`` sampled unitaries.

    Entries of one matrix are correlated (rows and columns are unit vectors);
    pooling accepts that.
    """
    return np.concatenate([(np.abs(u) ** 2).ravel()
                           for _, u in sample_unitaries(source, n_trials, seed)])


@dataclass
class ComponentSamples:
    values: np.ndarray
    n_used: int
    n_skipped: int


def eigenvector_components(u):
    """Eigen-decomposition check for one unitary; returns ``|v_k|^2`` or None if degenerate."""
    lam, vecs = np.linalg.eig(u)
    off_circle = np.max(np.abs(np.abs(lam) - 1.0))
    resid = np.max(np.linalg.norm(u @ vecs - vecs * lam, axis=0))
    if off_circle > EIG_TOL or resid > EIG_TOL:
        raise NumericalError(
            f"eigensolver failed for {u.shape[0]}x{u.shape[0]} unitary: "
            f"max||lambda|-1| = {off_circle:.3e}, max residual = {resid:.3e}, "
            f"unitarity error = {qcore.unitarity_error(u):.3e}")
    gaps = np.abs(lam[:, None] - lam[None, :])
    np.fill_diagonal(gaps, np.inf)
    if gaps.min() < DEGENERACY_GAP:
        return None
    return (np.abs(vecs) ** 2).ravel()


def eigenvector_component_samples(source, n_trials, seed):
    """Pooled eigenvector components ``|v_k|^2``, skipping degenerate spectra."""
    values, skipped = [], 0
    for _, u in sample_unitaries(source, n_trials, seed):
        comp = eigenvector_components(u)
        if comp is None:
            skipped += 1
        else:
            values.append(comp)
    arr = np.concatenate(values) if values else np.empty(0)
    return ComponentSamples(arr, n_trials - skipped, skipped)


# CSV emission

def samples_csv(values, metadata=None):
    """``trial,value`` CSV; ``metadata`` goes on a leading ``#`` comment line as JSON."""
    buf = io.StringIO()
    if metadata is not None:
        buf.write("# " + json.dumps(metadata, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "value"])
    for i, v in enumerate(np.asarray(values, dtype=float).ravel()):
        w.writerow([i, repr(float(v))])
    return buf.getvalue()
