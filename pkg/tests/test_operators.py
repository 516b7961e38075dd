from __future__ import annotations

import numpy as np
import pytest

from plantedbp import (
    MessageState,
    PAIR_ORDER,
    apply_B,
    apply_Bprime,
    apply_K,
    apply_L,
    apply_M,
    bp_step,
    m_matrix,
)

from conftest import dense_L_apply, random_zero_colsum


def arc_pair_indices(arc_table, class_of) -> np.ndarray:
    lookup = {pair: k for k, pair in enumerate(PAIR_ORDER)}
    return np.array(
        [
            lookup[(int(class_of[t]), int(class_of[h]))]
            for t, h in zip(arc_table.tail, arc_table.head)
        ]
    )


def test_pair_order_is_all_ordered_pairs():
    assert len(PAIR_ORDER) == 6
    assert set(PAIR_ORDER) == {(i, j) for i in range(3) for j in range(3) if i != j}


def test_apply_B_matches_bp_step(small8):
    graph, _, at = small8
    rng = np.random.default_rng(2)
    eta = rng.dirichlet((1.0, 1.0, 1.0), size=at.num_arcs).T
    st = MessageState.from_eta(eta)
    stepped = bp_step(graph, at, st)
    direct = apply_B(graph, at, st.delta)
    assert np.max(np.abs(direct - stepped.delta)) <= 1e-14


def test_apply_B_matches_bp_step_with_saturated_messages(octahedron):
    graph, coloring, at = octahedron
    # indicator states exercise the -inf bookkeeping in both code paths
    eta = np.zeros((3, at.num_arcs))
    own = coloring.class_of[at.tail]
    eta[own, np.arange(at.num_arcs)] = 1.0
    st = MessageState.from_eta(eta)
    stepped = bp_step(graph, at, st)
    direct = apply_B(graph, at, st.delta)
    assert np.max(np.abs(direct - stepped.delta)) <= 1e-14


def test_apply_L_is_half_M_minus_K(small8):
    graph, _, at = small8
    rng = np.random.default_rng(3)
    gamma = rng.standard_normal((3, at.num_arcs))
    via_l = apply_L(graph, at, gamma)
    via_mk = np.stack(
        [
            -0.5 * (apply_M(graph, at, gamma[a]) - apply_K(graph, at, gamma[a]))
            for a in range(3)
        ]
    )
    assert np.max(np.abs(via_l - via_mk)) <= 1e-15


def test_apply_L_dense_oracle(octahedron):
    graph, _, at = octahedron
    rng = np.random.default_rng(4)
    gamma = rng.standard_normal((3, at.num_arcs))
    assert np.max(
        np.abs(apply_L(graph, at, gamma) - dense_L_apply(at, gamma))
    ) <= 1e-12


def test_apply_K_is_an_involution_and_isometry(small8):
    _, _, at = small8
    graph = small8[0]
    rng = np.random.default_rng(5)
    xi = rng.standard_normal(at.num_arcs)
    kxi = apply_K(graph, at, xi)
    assert np.array_equal(apply_K(graph, at, kxi), xi)
    assert np.linalg.norm(kxi) == pytest.approx(np.linalg.norm(xi))


def test_block_constant_vectors_evolve_by_m_matrix(small8):
    graph, coloring, at = small8
    d = 8
    pair_idx = arc_pair_indices(at, coloring.class_of)
    rng = np.random.default_rng(6)
    q = rng.standard_normal(6)
    xi = q[pair_idx]
    image = apply_M(graph, at, xi) - apply_K(graph, at, xi)
    expected_pattern = m_matrix(d) @ q
    # the image is block-constant with exactly the matrix-mapped pattern
    for k in range(6):
        block = image[pair_idx == k]
        assert np.max(np.abs(block - expected_pattern[k])) <= 1e-10


def test_m_matrix_explicit_at_d_8():
    d = 8
    expected = np.zeros((6, 6))
    index = {pair: k for k, pair in enumerate(PAIR_ORDER)}
    for col, (i, j) in enumerate(PAIR_ORDER):
        k = 3 - i - j
        expected[index[(j, k)], col] = d
        expected[index[(j, i)], col] = d - 1
    assert np.array_equal(m_matrix(8), expected)
    assert np.trace(m_matrix(8)) == 0.0


def test_m_matrix_rejects_bad_degree():
    with pytest.raises(ValueError):
        m_matrix(0)


def test_apply_L_equals_Bprime_on_zero_column_sums(small8):
    graph, _, at = small8
    gamma = random_zero_colsum(np.random.default_rng(7), at.num_arcs, 0.5)
    l_out = apply_L(graph, at, gamma)
    bp_out = apply_Bprime(graph, at, gamma)
    assert np.max(np.abs(l_out - bp_out)) <= 1e-13


def test_apply_L_preserves_zero_column_sums(small8):
    graph, _, at = small8
    gamma = random_zero_colsum(np.random.default_rng(8), at.num_arcs, 1.0)
    out = apply_L(graph, at, gamma)
    assert np.max(np.abs(out.sum(axis=0))) <= 1e-12


def test_apply_B_output_recentered_exactly(small8):
    graph, _, at = small8
    gamma = random_zero_colsum(np.random.default_rng(9), at.num_arcs, 0.05)
    out = apply_B(graph, at, gamma)
    assert np.max(np.abs(out.sum(axis=0))) <= 1e-15


def test_bprime_is_the_derivative_of_B(small8):
    graph, _, at = small8
    rng = np.random.default_rng(10)
    gamma = rng.standard_normal((3, at.num_arcs))
    gamma -= gamma.mean(axis=0, keepdims=True)
    gamma /= np.max(np.abs(gamma))
    reference = apply_Bprime(graph, at, gamma)
    errors = []
    for t in (1e-3, 1e-4, 1e-5):
        err = np.max(np.abs(apply_B(graph, at, t * gamma) / t - reference))
        errors.append(err)
    # first-order map: the finite-difference error scales linearly in t
    assert errors[0] < 1.0
    assert errors[1] < 0.15 * errors[0]
    assert errors[2] < 0.15 * errors[1]


def test_apply_B_color_permutation_equivariance(small8):
    graph, _, at = small8
    gamma = random_zero_colsum(np.random.default_rng(11), at.num_arcs, 0.05)
    perm = np.array([2, 0, 1])
    lhs = apply_B(graph, at, gamma[perm])
    rhs = apply_B(graph, at, gamma)[perm]
    assert np.max(np.abs(lhs - rhs)) <= 1e-15
