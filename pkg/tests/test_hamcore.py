import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gapsim.hamcore import (
    CapExceeded,
    Hamiltonian,
    LocalTerm,
    SiteSpace,
    assemble_dense,
    assemble_sparse,
    build_from_pauli,
    diagonal_energies,
    diagonal_energy,
    digits_to_index,
    dumps,
    embed,
    from_json,
    from_pauli_dict,
    graph_distance,
    index_to_digits,
    interaction_graph,
    is_diagonal,
    loads,
    metrics,
    pauli_decompose,
    pauli_string_matrix,
    set_distance,
    site_degrees,
    to_json,
)
from gapsim.constructions.examples import build_HA, build_HB
from oracles import reference as ref

pauli_words = st.text(alphabet="IXYZ", min_size=3, max_size=3)
coefs = st.floats(-2, 2, allow_nan=False)


def test_site_space_rejects_dimension_one():
    with pytest.raises(ValueError):
        SiteSpace((2, 1))


def test_local_term_rejects_non_hermitian_and_repeats():
    with pytest.raises(ValueError):
        LocalTerm((0,), np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        LocalTerm((0, 0), np.eye(4))


def test_hamiltonian_checks_support_and_shape():
    with pytest.raises(ValueError):
        Hamiltonian(SiteSpace((2, 2)), (LocalTerm((2,), np.eye(2)),))
    with pytest.raises(ValueError):
        Hamiltonian(SiteSpace((2, 3)), (LocalTerm((0, 1), np.eye(4)),))


def test_pauli_build_matches_kron():
    H = build_from_pauli(3, [(0.5, "XZI"), (-1.0, "IYY")])
    M = 0.5 * ref.word("XZI") - ref.word("IYY")
    assert np.allclose(assemble_dense(H), M, atol=1e-12)


def test_embed_orders_support_as_given():
    m = np.kron(ref.X, ref.Z)
    assert np.allclose(embed(m, (2, 0), (2, 2, 2)), ref.op(3, {2: ref.X, 0: ref.Z}))


def test_ha_energies(frozen):
    H = build_HA(4)
    for bits, e in frozen["ha4_energies"].items():
        assert diagonal_energy(H, bits) == pytest.approx(e, abs=1e-12)


def test_hb_two_sites(frozen):
    w = np.linalg.eigvalsh(assemble_dense(build_HB(2)))
    assert np.allclose(w, frozen["hb2_eigenvalues"], atol=1e-12)


def test_metrics_of_ha():
    m = metrics(build_HA(5))
    assert (m.locality_k, m.degree_r, m.term_count_M) == (2, 4, 10)
    assert m.strength_J == pytest.approx(1.0)
    assert site_degrees(build_HA(5)) == [4] * 5


def test_diagonal_detection_and_enumeration():
    H = build_HA(3)
    assert is_diagonal(H)
    assert not is_diagonal(build_HB(2))
    assert np.allclose(diagonal_energies(H), np.real(np.diag(assemble_dense(H))))


def test_sparse_matches_dense():
    H = build_HB(4)
    assert np.allclose(assemble_sparse(H).toarray(), assemble_dense(H), atol=1e-12)


def test_dense_cap():
    with pytest.raises(CapExceeded):
        assemble_dense(build_HA(6), cap_dim=32)


def test_graph_distances():
    H = build_from_pauli(4, [(1.0, "XXII"), (1.0, "IXXI"), (1.0, "IIXX")])
    G = interaction_graph(H)
    assert graph_distance(G, 0, 3) == 3
    assert set_distance(G, {0}, {2, 3}) == 2
    assert set_distance(G, {1}, {1}) == 0


def test_disconnected_distance_is_infinite():
    H = build_from_pauli(2, [(1.0, "ZI"), (1.0, "IZ")])
    assert graph_distance(interaction_graph(H), 0, 1) == float("inf")


@given(st.lists(st.integers(0, 2), min_size=1, max_size=5))
def test_digit_index_round_trip(digits):
    dims = [3] * len(digits)
    assert index_to_digits(digits_to_index(digits, dims), dims) == tuple(digits)


@given(st.lists(st.tuples(coefs, pauli_words), min_size=1, max_size=4))
def test_pauli_decomposition_round_trip(terms):
    H = build_from_pauli(3, terms)
    back = from_pauli_dict(3, pauli_decompose(H))
    assert np.allclose(assemble_dense(back), assemble_dense(H), atol=1e-12)


@given(st.lists(st.tuples(coefs, pauli_words), min_size=1, max_size=4))
def test_json_round_trip(terms):
    H = build_from_pauli(3, terms)
    again = loads(dumps(H))
    assert np.allclose(assemble_dense(again), assemble_dense(H), atol=1e-12)
    assert from_json(json.loads(json.dumps(to_json(H)))).dims == H.dims


def test_json_round_trip_qutrits():
    m = np.diag([0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).astype(complex)
    H = Hamiltonian(SiteSpace((2, 3)), (LocalTerm((0, 1), m),))
    assert np.allclose(assemble_dense(loads(dumps(H))), assemble_dense(H))


def test_pauli_string_matrix():
    assert np.allclose(pauli_string_matrix("XY"), ref.word("XY"))
