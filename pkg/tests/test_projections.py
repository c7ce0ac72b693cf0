import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from numrange.errors import (
    DimensionMismatch,
    NotARefinement,
    NotNormal,
    NotUnit,
    RankDeficient,
    ValidationFailed,
)
from numrange.geometry import multiset_distance
from numrange.linalg import (
    RngState,
    adjoint,
    complex_gaussian,
    eigs_batch,
    fro_norm,
    general_eigs,
    random_hermitian,
    random_normal,
)
from numrange.projections import (
    BlockPartition,
    FamilySpec,
    Projection,
    block_frames,
    block_projection,
    block_unit_vectors,
    check_refinement,
    commutator_norm,
    commuting_projections,
    compress,
    compression_coefficients,
    family_frames,
    projection_from_span,
    rank_k_frames,
    sample_rank_k,
)

from conftest import gaussian_matrix

seeds = st.integers(0, 2**32)
S2 = 1 / np.sqrt(2)


def assert_projection(p: Projection):
    v = p.frame
    assert np.abs(adjoint(v) @ v - np.eye(p.rank)).max() <= 1e-12
    assert p.idempotency_defect() <= 1e-11
    op = p.operator()
    assert np.array_equal(op, adjoint(op))


# -- projection_from_span -----------------------------------------------------

def test_span_examples():
    p = projection_from_span(np.array([[1], [0]]))
    assert np.array_equal(p.operator(), np.diag([1, 0]).astype(complex))
    p = projection_from_span(np.array([[S2, S2], [S2, -S2]]))
    assert np.abs(p.operator() - np.eye(2)).max() <= 1e-12
    p = projection_from_span(np.array([[1], [1], [0]]))
    expect = np.zeros((3, 3))
    expect[:2, :2] = 0.5
    assert np.abs(p.operator() - expect).max() <= 1e-15


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(1, 8), data=st.data())
def test_span_reproduces_inputs(seed, n, data):
    k = data.draw(st.integers(1, n))
    g = complex_gaussian(n, k, RngState(seed))
    p = projection_from_span(g)
    assert_projection(p)
    for c in g.T:
        assert np.linalg.norm(p.operator() @ c - c) <= 1e-10 * np.linalg.norm(c)


def test_span_rank_deficient():
    with pytest.raises(RankDeficient):
        projection_from_span(np.array([[1, 2], [2, 4]]))


# -- block partitions and projections -----------------------------------------

def test_block_partition():
    p = BlockPartition((2, 3, 1))
    assert (p.n, p.k, p.offsets) == (6, 3, (0, 2, 5, 6))
    assert [(s.start, s.stop) for s in p.slices()] == [(0, 2), (2, 5), (5, 6)]
    assert str(p) == "2,3,1"
    assert BlockPartition.parse("2, 3,1") == p
    assert BlockPartition.halves(5).sizes == (2, 3)
    with pytest.raises(ValueError):
        BlockPartition((2, 0))
    with pytest.raises(ValueError):
        BlockPartition.parse("2,x")
    with pytest.raises(DimensionMismatch):
        p.check(5)


def test_refinement():
    coarse = BlockPartition((4, 4))
    assert BlockPartition((2, 2, 2, 2)).is_refinement_of(coarse)
    assert BlockPartition((1,) * 8).is_refinement_of(coarse)
    assert coarse.is_refinement_of(coarse)
    assert not BlockPartition((3, 5)).is_refinement_of(coarse)
    with pytest.raises(NotARefinement):
        check_refinement(coarse, BlockPartition((3, 2, 3)))


def test_block_projection_examples():
    p = block_projection(BlockPartition((1, 1)), [np.ones(1), np.ones(1)])
    assert np.array_equal(p.operator(), np.eye(2, dtype=complex))
    p = block_projection(BlockPartition((2, 1)), [np.array([1, 0]), np.ones(1)])
    assert np.array_equal(p.operator(), np.diag([1, 0, 1]).astype(complex))
    f1 = np.array([1, 1]) * S2
    f2 = np.array([1, -1j]) * S2
    p = block_projection(BlockPartition((2, 2)), [f1, f2])
    v = p.frame
    assert np.vdot(v[:, 0], v[:, 1]) == 0
    assert np.abs(adjoint(v) @ v - np.eye(2)).max() <= 1e-14
    # columns embed the inputs bitwise
    assert np.array_equal(v[:2, 0], f1.astype(complex)) and np.array_equal(v[2:, 1], f2)


def test_block_projection_errors():
    part = BlockPartition((2, 1))
    with pytest.raises(NotUnit):
        block_projection(part, [np.array([1, 1]), np.ones(1)])
    with pytest.raises(DimensionMismatch):
        block_projection(part, [np.array([1, 0, 0]), np.ones(1)])
    with pytest.raises(DimensionMismatch):
        block_projection(part, [np.array([1, 0])])


def test_block_frames_consistent_with_unit_vectors():
    part = BlockPartition((2, 3, 1))
    fs = block_unit_vectors(part, 4, 9)
    frames = block_frames(part, 4, 9)
    for d in range(4):
        p = block_projection(part, [f[d] for f in fs])
        assert np.array_equal(p.frame, frames[d])
        assert_projection(p)


# -- compress -----------------------------------------------------------------

def test_compress_examples():
    a = np.array([[1, 2], [3, 4]])
    assert compress(a, projection_from_span(np.array([[1], [0]]))).tolist() == [[1]]
    c = compress(a, projection_from_span(np.array([[1], [1]])))
    assert abs(c[0, 0] - 5) <= 1e-14
    p = Projection(rank_k_frames(2, 2, 1, 3)[0])
    assert multiset_distance(general_eigs(compress(a, p)).values, general_eigs(a).values) <= 1e-9
    with pytest.raises(DimensionMismatch):
        compress(np.eye(3), p)


def test_compression_coefficients_is_transpose():
    a = gaussian_matrix(4, 1)
    p = Projection(rank_k_frames(4, 2, 1, 0)[0])
    c = compress(a, p)
    v = p.frame
    coeff = compression_coefficients(a, p)
    for i in range(2):
        for j in range(2):
            assert abs(coeff[i, j] - np.vdot(v[:, j], a @ v[:, i])) <= 1e-14
    assert np.abs(coeff - c.T).max() <= 1e-14


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(2, 7), data=st.data())
def test_compress_basis_independent(seed, n, data):
    k = data.draw(st.integers(1, n))
    a = gaussian_matrix(n, seed)
    v = rank_k_frames(n, k, 1, seed)[0]
    w = v @ rank_k_frames(k, k, 1, seed + 1)[0]  # same span, rotated basis
    ev = general_eigs(adjoint(v) @ a @ v).values
    ew = general_eigs(adjoint(w) @ a @ w).values
    # a defective compression would be ill-conditioned; random ones are not
    assert multiset_distance(ev, ew) <= 1e-9 * max(1.0, fro_norm(a))


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(1, 7), data=st.data())
def test_compression_eigenvalues_are_rayleigh_quotients(seed, n, data):
    k = data.draw(st.integers(1, n))
    a = gaussian_matrix(n, seed)
    p = Projection(rank_k_frames(n, k, 1, seed)[0])
    d = general_eigs(compress(a, p), vectors=True)
    for lam, u in zip(d.values, d.vectors.T):
        y = p.frame @ u
        y = y / np.linalg.norm(y)
        assert abs(np.vdot(y, a @ y) - lam) <= 1e-9 * max(1.0, fro_norm(a))


# -- sampled rank-k families --------------------------------------------------

def test_sample_rank_k_examples():
    for p in sample_rank_k(3, 3, 5, RngState(1)):
        assert np.abs(p.operator() - np.eye(3)).max() <= 1e-11
    a = [p.frame for p in sample_rank_k(5, 2, 3, RngState(4))]
    b = [p.frame for p in sample_rank_k(5, 2, 3, RngState(4))]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    # draw i uses stream i: a later window reproduces the tail
    c = [p.frame for p in sample_rank_k(5, 2, 2, RngState(4, 1))]
    assert all(np.array_equal(x, y) for x, y in zip(a[1:], c))
    with pytest.raises(ValueError):
        list(sample_rank_k(3, 4, 1, RngState(0)))


def test_sample_rank_k_moment():
    v = rank_k_frames(4, 2, 10_000, 2)
    # trace of VV* compressed to e1 is |row 1 of V|^2; expectation k/n
    assert np.mean(np.sum(np.abs(v[:, 0, :]) ** 2, axis=1)) == pytest.approx(0.5, abs=0.02)


@settings(max_examples=20, deadline=None)
@given(seed=seeds, n=st.integers(1, 8), data=st.data())
def test_every_sampled_projection_is_valid(seed, n, data):
    k = data.draw(st.integers(1, n))
    for p in sample_rank_k(n, k, 4, RngState(seed)):
        assert_projection(p)


# -- commuting family ---------------------------------------------------------

def _spans(projs):
    return [frozenset(np.flatnonzero(np.abs(np.diag(p.operator())) > 0.5).tolist()) for p in projs]


def test_commuting_diagonal():
    projs = commuting_projections(np.diag([1.0, 2.0, 3.0]))
    spans = _spans(projs)
    for i in range(3):
        assert frozenset([i]) in spans
    for i in range(3):
        for j in range(i + 1, 3):
            assert frozenset([i, j]) in spans
    for p in projs:
        assert_projection(p)
        assert commutator_norm(np.diag([1.0, 2.0, 3.0]), p) <= 1e-9 * np.sqrt(14)


def test_commuting_swap():
    a = np.array([[0.0, 1.0], [1.0, 0.0]])
    projs = commuting_projections(a)
    ranges = [p.operator() for p in projs if p.rank == 1]
    plus = np.full((2, 2), 0.5)
    minus = np.array([[0.5, -0.5], [-0.5, 0.5]])
    assert any(np.abs(r - plus).max() <= 1e-12 for r in ranges)
    assert any(np.abs(r - minus).max() <= 1e-12 for r in ranges)
    assert all(commutator_norm(a, p) <= 1e-12 for p in projs)


def test_commuting_user_supplied():
    a = np.array([[0, 1, 0], [0, 0, 0], [0, 0, 5]], dtype=float)
    p = projection_from_span(np.eye(3)[:, :2])
    assert commuting_projections(a, projections=[p]) == [p]
    assert commutator_norm(a, p) == 0.0
    with pytest.raises(ValidationFailed):
        commuting_projections(a, projections=[projection_from_span(np.array([[1], [1], [0]]))])


def test_commuting_requires_normal():
    with pytest.raises(NotNormal):
        commuting_projections(np.array([[0, 1], [0, 0]]))


def test_commuting_clusters_degenerate_eigenvalues():
    a = np.diag([1.0, 1.0, 2.0])
    projs = commuting_projections(a)
    # clusters {1,1} and {2}: the rank-2 eigenspace, the line, and the whole space
    assert sorted(p.rank for p in projs) == [1, 2, 3]


def test_commuting_budget_beyond_exhaustive():
    a = np.diag(np.arange(14.0))
    projs = commuting_projections(a, budget=20, seed=3)
    singles = [p for p in projs if p.rank == 1]
    assert len(singles) == 14
    assert len(projs) <= 14 + 1 + 20
    assert all(commutator_norm(a, p) <= 1e-9 * fro_norm(a) for p in projs)


@settings(max_examples=15, deadline=None)
@given(seed=seeds, n=st.integers(1, 6), hermitian=st.booleans())
def test_commuting_random_normal(seed, n, hermitian):
    a = random_hermitian(n, RngState(seed)) if hermitian else random_normal(n, RngState(seed))
    for p in commuting_projections(a):
        assert_projection(p)
        assert commutator_norm(a, p) <= 1e-9 * max(1.0, fro_norm(a))


# -- family materialisation ---------------------------------------------------

def test_family_spec():
    assert FamilySpec.rank(2).describe() == "rank:2"
    assert FamilySpec.block((2, 2)).describe() == "block:2,2"
    assert FamilySpec.commuting().describe() == "commuting"
    with pytest.raises(ValueError):
        FamilySpec("oblique")
    with pytest.raises(ValueError):
        FamilySpec.rank(0)
    with pytest.raises(DimensionMismatch):
        FamilySpec.rank(4).validate(3)
    with pytest.raises(DimensionMismatch):
        FamilySpec.block((2, 2)).validate(5)


def test_family_frames_full_rank_is_identity():
    stacks, draws = family_frames(np.eye(3), FamilySpec.rank(3, budget=50))
    assert len(stacks) == 1 and stacks[0].shape == (1, 3, 3)
    assert np.array_equal(stacks[0][0], np.eye(3))


def test_family_frames_order_independent_of_budget():
    a = gaussian_matrix(4, 0)
    s1, _ = family_frames(a, FamilySpec.rank(2, budget=10, seed=5))
    s2, _ = family_frames(a, FamilySpec.rank(2, budget=4, seed=5))
    assert np.array_equal(s1[0][:4], s2[0])
    ev, _ = eigs_batch(s1[0][:4].conj().transpose(0, 2, 1) @ a @ s1[0][:4])
    assert ev.shape == (4, 2)
