"""Pseudo-random circuits built from a repeated constant-depth gate.

One layer rotates every qubit by an independent Haar-random U(2) element and
then applies the fixed nearest-neighbour coupling
``exp(i * theta * sum_j Z_j Z_{j+1})`` with ``theta = pi/4`` on an open chain.

A :class:`CircuitSpec` stores the Hurwitz angles for every layer and qubit as
an ``(m, n_q, 4)`` array; the per-layer :class:`Layer` view is built on demand.
"""

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import qcore
from .errors import ParseError, UnsupportedVersionError
from .haar import HurwitzAngles, angles_to_u2, sample_hurwitz_angles

FORMAT_VERSION = 1
DEFAULT_COUPLING = np.pi / 4
ANGLE_FIELDS = HurwitzAngles._fields


@dataclass(frozen=True)
class Layer:
    rotations: tuple
    coupling_angle: float = DEFAULT_COUPLING


@dataclass(frozen=True, eq=False)
class CircuitSpec:
    n_q: int
    angles: np.ndarray
    coupling_angle: float = DEFAULT_COUPLING
    seed: int | None = None

    def __post_init__(self):
        if self.n_q < 2:
            raise ValueError("a circuit needs at least two qubits")
        angles = np.array(self.angles, dtype=float).reshape(-1, self.n_q, 4)
        angles.flags.writeable = False
        object.__setattr__(self, "angles", angles)

    @property
    def m(self):
        return self.angles.shape[0]

    @property
    def dim(self):
        return 2 ** self.n_q

    @property
    def layers(self):
        return [Layer(tuple(HurwitzAngles(*map(float, a)) for a in layer),
                      self.coupling_angle)
                for layer in self.angles]

    @cached_property
    def gates(self):
        """Rotation matrices, shape ``(m, n_q, 2, 2)``."""
        g = angles_to_u2(self.angles)
        g.flags.writeable = False
        return g

    def __eq__(self, other):
        if not isinstance(other, CircuitSpec):
            return NotImplemented
        return (self.n_q == other.n_q
                and self.coupling_angle == other.coupling_angle
                and self.seed == other.seed
                and self.angles.shape == other.angles.shape
                and bool(np.all(self.angles == other.angles)))

    __hash__ = None

    @classmethod
    def from_layers(cls, n_q, layers, seed=None):
        layers = list(layers)
        angles = np.array([[tuple(r) for r in layer.rotations] for layer in layers],
                          dtype=float).reshape(len(layers), n_q, 4)
        coupling = {layer.coupling_angle for layer in layers} or {DEFAULT_COUPLING}
        if len(coupling) != 1:
            raise ValueError("all layers must share one coupling angle")
        return cls(n_q, angles, coupling.pop(), seed)


def sample_circuit(n_q, m, rng, seed=None):
    """Draw an ``m``-layer circuit on ``n_q`` qubits."""
    if n_q < 2:
        raise ValueError("a circuit needs at least two qubits")
    if m < 0:
        raise ValueError("layer count must be non-negative")
    qcore.check_capacity(n_q, qcore.MAX_STATE_QUBITS)
    return CircuitSpec(n_q, sample_hurwitz_angles(rng, (m, n_q)), seed=seed)


def _check_state(state, n_q):
    state = np.asarray(state)
    if state.shape[-1] != 2 ** n_q:
        raise ValueError(
            f"state dimension {state.shape[-1]} does not match circuit D={2 ** n_q}")
    return state


def run_layers(states, gates, n_q, coupling_angle=DEFAULT_COUPLING, inverse=False):
    """Apply stacked layers of rotations + coupling to ``states``.

    ``gates`` has shape ``(*batch, m, n_q, 2, 2)`` where ``batch`` broadcasts
    against the leading axes of ``states`` (shape ``(*batch, D)``); this lets
    many independent circuits run in one pass.
    """
    m = gates.shape[-4]
    phases = qcore.zz_phases(n_q, coupling_angle)
    out = np.asarray(states, dtype=complex)
    if not inverse:
        for layer in range(m):
            g = gates[..., layer, :, :, :]
            for q in range(n_q):
                out = qcore.apply_single_qubit_gate(out, g[..., q, :, :], q, check=False)
            out = out * phases
    else:
        phases = phases.conj()
        for layer in reversed(range(m)):
            out = out * phases
            g = np.swapaxes(gates[..., layer, :, :, :], -1, -2).conj()
            for q in range(n_q):
                out = qcore.apply_single_qubit_gate(out, g[..., q, :, :], q, check=False)
    return out


def apply_circuit(state, c):
    state = _check_state(state, c.n_q)
    return run_layers(state, c.gates, c.n_q, c.coupling_angle)


def apply_inverse_circuit(state, c):
    """Undo :func:`apply_circuit` exactly using the stored angles."""
    state = _check_state(state, c.n_q)
    return run_layers(state, c.gates, c.n_q, c.coupling_angle, inverse=True)


def circuit_to_matrix(c):
    """Dense unitary whose column ``k`` is the circuit applied to ``|k>``."""
    qcore.check_capacity(c.n_q, qcore.MAX_MATRIX_QUBITS, "matrix")
    rows = apply_circuit(np.eye(c.dim, dtype=complex), c)
    return np.ascontiguousarray(rows.T)


def circuits_to_matrices(gates, n_q, coupling_angle=DEFAULT_COUPLING):
    """Batched :func:`circuit_to_matrix` for gates of shape ``(B, m, n_q, 2, 2)``."""
    qcore.check_capacity(n_q, qcore.MAX_MATRIX_QUBITS, "matrix")
    eye = np.eye(2 ** n_q, dtype=complex)
    rows = run_layers(eye, gates[:, None], n_q, coupling_angle)
    return np.swapaxes(rows, -1, -2)


# serialization

def to_dict(c):
    doc = {
        "version": FORMAT_VERSION,
        "n_q": c.n_q,
        "m": c.m,
        "coupling_angle": c.coupling_angle,
    }
    if c.seed is not None:
        doc["seed"] = c.seed
    doc["layers"] = [[dict(zip(ANGLE_FIELDS, map(float, rot))) for rot in layer]
                     for layer in c.angles]
    return doc


def _fmt(x):
    return format(float(x), ".17g")


def serialize(c):
    """JSON text for ``c``; angles carry 17 significant digits."""
    head = to_dict(c)
    head.pop("layers")
    head["coupling_angle"] = _fmt(c.coupling_angle)
    lines = ["{"]
    lines += [f' "{k}": {v if k == "coupling_angle" else json.dumps(v)},'
              for k, v in head.items()]
    layer_txt = []
    for layer in c.angles:
        recs = ", ".join(
            "{" + ", ".join(f'"{k}": {_fmt(v)}' for k, v in zip(ANGLE_FIELDS, rot)) + "}"
            for rot in layer)
        layer_txt.append(f"  [{recs}]")
    lines.append(' "layers": [' + ("\n" + ",\n".join(layer_txt) + "\n ]" if layer_txt else "]"))
    lines.append("}")
    return "\n".join(lines) + "\n"


def _require(doc, key, where):
    if key not in doc:
        raise ParseError(f"{where}: missing field '{key}'")
    return doc[key]


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: expected a number, got {value!r}")
    return float(value)


def from_dict(doc):
    if not isinstance(doc, dict):
        raise ParseError("circuit document must be a JSON object")
    version = _require(doc, "version", "document")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"unsupported circuit format version {version!r} (expected {FORMAT_VERSION})")
    n_q = _require(doc, "n_q", "document")
    m = _require(doc, "m", "document")
    for key, value in (("n_q", n_q), ("m", m)):
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise ParseError(f"document: field '{key}' must be a non-negative integer")
    coupling = _number(_require(doc, "coupling_angle", "document"), "coupling_angle")
    seed = doc.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ParseError("document: field 'seed' must be an integer")
    layers = _require(doc, "layers", "document")
    if not isinstance(layers, list) or len(layers) != m:
        raise ParseError(f"document: 'layers' must be a list of m={m} layers")
    angles = np.empty((m, n_q, 4))
    for i, layer in enumerate(layers):
        if not isinstance(layer, list) or len(layer) != n_q:
            raise ParseError(f"layers[{i}]: expected {n_q} rotation records")
        for q, rot in enumerate(layer):
            where = f"layers[{i}][{q}]"
            if not isinstance(rot, dict):
                raise ParseError(f"{where}: rotation record must be an object")
            for k, name in enumerate(ANGLE_FIELDS):
                angles[i, q, k] = _number(_require(rot, name, where), f"{where}.{name}")
            if not 0 <= angles[i, q, 3] < 1:
                raise ParseError(f"{where}.xi: must lie in [0, 1)")
    try:
        return CircuitSpec(n_q, angles, coupling, seed)
    except ValueError as exc:
        raise ParseError(f"document: {exc}") from exc


def deserialize(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return from_dict(doc)
