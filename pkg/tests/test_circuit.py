import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from randcircuit import circuit as circ
from randcircuit import qcore
from randcircuit.errors import CapacityError, ParseError, UnsupportedVersionError
from randcircuit.haar import HurwitzAngles, child_rng, sample_haar_state
from randcircuit.stats import meyer_wallach_q

import oracles


def sample(n_q, m, seed=0):
    return circ.sample_circuit(n_q, m, child_rng(seed, 0), seed=seed)


def identity_layer(n_q):
    return circ.Layer(tuple(HurwitzAngles(0.0, 0.0, 0.0, 0.0) for _ in range(n_q)))


def test_empty_circuit_is_identity():
    c = sample(3, 0)
    psi = sample_haar_state(8, child_rng(1))
    assert c.m == 0
    assert np.array_equal(circ.apply_circuit(psi, c), psi)
    assert np.array_equal(circ.apply_inverse_circuit(psi, c), psi)
    assert np.allclose(circ.circuit_to_matrix(c), np.eye(8))


def test_sampling_is_deterministic():
    assert sample(4, 7, seed=3) == sample(4, 7, seed=3)
    assert sample(4, 7, seed=3) != sample(4, 7, seed=4)


def test_shape():
    c = sample(8, 40)
    assert c.angles.shape == (40, 8, 4)
    assert len(c.layers) == 40
    assert all(len(layer.rotations) == 8 for layer in c.layers)
    assert all(layer.coupling_angle == np.pi / 4 for layer in c.layers)


def test_sample_circuit_errors():
    with pytest.raises(ValueError):
        sample(1, 3)
    with pytest.raises(ValueError):
        circ.sample_circuit(3, -1, child_rng(0))


def test_identity_rotation_layer_gives_zz_phase():
    c = circ.CircuitSpec.from_layers(2, [identity_layer(2)])
    out = circ.apply_circuit(qcore.basis_state(2), c)
    assert np.allclose(out, np.exp(1j * np.pi / 4) * qcore.basis_state(2), atol=1e-15)
    assert meyer_wallach_q(out) == 0.0
    w = np.exp(1j * np.pi / 4)
    assert np.allclose(circ.circuit_to_matrix(c), np.diag([w, w.conj(), w.conj(), w]))


@pytest.mark.parametrize("n_q", [2, 3])
def test_matches_dense_layer_products(n_q):
    c = sample(n_q, 6, seed=n_q)
    dense = oracles.dense_circuit(c.gates, n_q)
    psi = sample_haar_state(2 ** n_q, child_rng(5))
    assert np.abs(circ.apply_circuit(psi, c) - dense @ psi).max() <= 1e-10
    assert np.abs(circ.circuit_to_matrix(c) - dense).max() <= 1e-10


def test_inverse_matrix_is_adjoint():
    c = sample(3, 5, seed=11)
    m = circ.circuit_to_matrix(c)
    inv = circ.apply_inverse_circuit(np.eye(8, dtype=complex), c).T
    assert np.abs(m.conj().T - inv).max() <= 1e-9


def test_single_layer_round_trip():
    c = sample(4, 1, seed=2)
    psi = sample_haar_state(16, child_rng(6))
    back = circ.apply_inverse_circuit(circ.apply_circuit(psi, c), c)
    assert abs(qcore.fidelity_pure(psi, back) - 1) <= 1e-10


def test_round_trip_random_states():
    rng = child_rng(7)
    for t in range(100):
        n_q = 2 + t % 5
        c = circ.sample_circuit(n_q, 1 + t % 30, rng)
        psi = sample_haar_state(2 ** n_q, rng)
        back = circ.apply_inverse_circuit(circ.apply_circuit(psi, c), c)
        assert abs(qcore.fidelity_pure(back, psi) - 1) <= 1e-9


@given(st.integers(2, 10), st.integers(0, 200), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=15, deadline=None)
def test_matrix_unitarity(n_q, m, seed):
    # keep the big cases affordable
    if n_q >= 9:
        m = min(m, 20)
    c = sample(n_q, m, seed)
    assert qcore.unitarity_error(circ.circuit_to_matrix(c)) <= 1e-10


def test_norm_preserved():
    c = sample(6, 200, seed=8)
    out = circ.apply_circuit(qcore.basis_state(6), c)
    assert abs(np.linalg.norm(out) - 1) <= 1e-10 * c.m


def test_batched_matrices_match_single():
    cs = [sample(3, 4, seed=s) for s in range(5)]
    mats = circ.circuits_to_matrices(np.stack([c.gates for c in cs]), 3)
    for c, m in zip(cs, mats):
        assert np.array_equal(m, circ.circuit_to_matrix(c))


def test_dimension_and_capacity_errors():
    c = sample(3, 2)
    with pytest.raises(ValueError):
        circ.apply_circuit(qcore.basis_state(2), c)
    with pytest.raises(ValueError):
        circ.apply_inverse_circuit(qcore.basis_state(4), c)
    with pytest.raises(CapacityError):
        circ.circuit_to_matrix(sample(11, 1))


def test_serialize_round_trip():
    for c in (sample(2, 0), sample(5, 7, seed=9), circ.CircuitSpec(3, sample(3, 2).angles)):
        assert circ.deserialize(circ.serialize(c)) == c


def test_serialized_fields():
    c = sample(2, 1, seed=5)
    doc = json.loads(circ.serialize(c))
    assert doc["version"] == 1
    assert (doc["n_q"], doc["m"], doc["seed"]) == (2, 1, 5)
    assert doc["coupling_angle"] == np.pi / 4
    assert set(doc["layers"][0][0]) == {"alpha", "psi", "chi", "xi"}


def _doc():
    return json.loads(circ.serialize(sample(2, 2, seed=1)))


def test_missing_field_named():
    doc = _doc()
    del doc["layers"][1][0]["chi"]
    with pytest.raises(ParseError, match=r"layers\[1\]\[0\].*'chi'"):
        circ.deserialize(json.dumps(doc))
    doc = _doc()
    del doc["layers"]
    with pytest.raises(ParseError, match="'layers'"):
        circ.deserialize(json.dumps(doc))


def test_version_mismatch():
    doc = _doc()
    doc["version"] = 2
    with pytest.raises(UnsupportedVersionError):
        circ.deserialize(json.dumps(doc))


def test_malformed_documents():
    with pytest.raises(ParseError, match="line 1"):
        circ.deserialize("{not json")
    doc = _doc()
    doc["m"] = 3
    with pytest.raises(ParseError):
        circ.deserialize(json.dumps(doc))
    doc = _doc()
    doc["layers"][0][1]["xi"] = 1.5
    with pytest.raises(ParseError, match="xi"):
        circ.deserialize(json.dumps(doc))
    doc = _doc()
    doc["layers"][0][1]["psi"] = "zero"
    with pytest.raises(ParseError, match="psi"):
        circ.deserialize(json.dumps(doc))


@pytest.mark.parametrize("n_q", [3, 4])
def test_ensemble_mean_q_matches_exact_twirl(n_q):
    exact = oracles.exact_circuit_q_means(n_q, 5)
    rng_seed = 21
    for m in (1, 2, 3, 5):
        qs = []
        for t in range(1500):
            c = circ.sample_circuit(n_q, m, child_rng(rng_seed, m, t))
            qs.append(meyer_wallach_q(circ.apply_circuit(qcore.basis_state(n_q), c)))
        qs = np.array(qs)
        sem = qs.std(ddof=1) / np.sqrt(qs.size)
        assert abs(qs.mean() - exact[m]) <= 4 * sem
