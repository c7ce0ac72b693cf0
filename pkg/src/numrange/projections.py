"""Orthogonal projections stored as orthonormal frames, and families of them.

A projection ``P = V V*`` is never materialised as an n x n idempotent unless
asked for; everything downstream works with the k x k compression ``V* A V``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import DimensionMismatch, NotARefinement, NotNormal, NotUnit, ValidationFailed
from .linalg import (
    RngState,
    adjoint,
    as_matrix,
    batch_complex_normals,
    fro_norm,
    haar_frames,
    operator_norm,
    qr_orthonormalize,
    schur_decomposition,
)

UNIT_TOL = 1e-10
NORMAL_TOL = 1e-9
COMMUTE_TOL = 1e-9
CLUSTER_TOL = 1e-8
EXHAUSTIVE_CLUSTERS = 12


@dataclass(frozen=True)
class Projection:
    """Orthogonal projection onto the column span of ``frame``."""

    frame: np.ndarray
    label: str = ""

    @property
    def dim(self) -> int:
        return self.frame.shape[0]

    @property
    def rank(self) -> int:
        return self.frame.shape[1]

    def operator(self) -> np.ndarray:
        """The n x n matrix VV*, symmetrised so it is exactly self-adjoint."""
        p = self.frame @ adjoint(self.frame)
        return 0.5 * (p + adjoint(p))

    def idempotency_defect(self) -> float:
        p = self.operator()
        return float(np.max(np.abs(p @ p - p)))


@dataclass(frozen=True)
class BlockPartition:
    """Ordered block sizes (n_1, ..., n_k) of a direct sum C^{n_1} + ... + C^{n_k}."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise DimensionMismatch(f"block sizes must be positive, got {self.sizes}")
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def halves(cls, n: int) -> "BlockPartition":
        return cls((n // 2, n - n // 2)) if n >= 2 else cls((n,))

    @classmethod
    def parse(cls, text: str) -> "BlockPartition":
        return cls(tuple(int(s) for s in text.split(",")))

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(o) for o in np.cumsum((0,) + self.sizes))

    def slices(self) -> list[slice]:
        off = self.offsets
        return [slice(off[i], off[i + 1]) for i in range(self.k)]

    def check(self, n: int) -> None:
        if self.n != n:
            raise DimensionMismatch(f"partition {self.sizes} sums to {self.n}, matrix has n={n}")

    def is_refinement_of(self, coarse: "BlockPartition") -> bool:
        return self.n == coarse.n and set(coarse.offsets) <= set(self.offsets)

    def __str__(self):
        return ",".join(map(str, self.sizes))


@dataclass(frozen=True)
class FamilySpec:
    """A family of projections to take the union of compression spectra over.

    ``kind`` is ``"rank"`` (all rank-k projections, Haar-sampled), ``"block"``
    (projections onto one unit vector per block) or ``"commuting"`` (finite
    rank projections commuting with A).  ``budget`` is the number of sampled
    members; ``projections`` optionally supplies commuting members by hand.
    """

    kind: str
    budget: int = 10_000
    seed: int = 0
    k: int | None = None
    partition: BlockPartition | None = None
    projections: tuple[Projection, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("rank", "block", "commuting"):
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind == "rank" and (self.k is None or self.k < 1):
            raise ValueError("rank family needs k >= 1")
        if self.kind == "block" and self.partition is None:
            raise ValueError("block family needs a partition")
        if self.budget < 1:
            raise ValueError("budget must be positive")

    @classmethod
    def rank(cls, k: int, budget: int = 10_000, seed: int = 0) -> "FamilySpec":
        return cls("rank", budget, seed, k=k)

    @classmethod
    def block(cls, partition, budget: int = 10_000, seed: int = 0) -> "FamilySpec":
        if not isinstance(partition, BlockPartition):
            partition = BlockPartition(tuple(partition))
        return cls("block", budget, seed, partition=partition)

    @classmethod
    def commuting(cls, projections=None, budget: int = 256, seed: int = 0) -> "FamilySpec":
        return cls("commuting", budget, seed,
                   projections=tuple(projections) if projections is not None else None)

    def validate(self, n: int) -> None:
        if self.kind == "rank" and not 1 <= self.k <= n:
            raise DimensionMismatch(f"rank family needs 1 <= k <= n, got k={self.k}, n={n}")
        if self.kind == "block":
            self.partition.check(n)

    def describe(self) -> str:
        if self.kind == "rank":
            return f"rank:{self.k}"
        if self.kind == "block":
            return f"block:{self.partition}"
        return "commuting"


# -- constructors -------------------------------------------------------------

def projection_from_span(vectors, tol: float = 1e-10, label: str = "") -> Projection:
    return Projection(qr_orthonormalize(vectors, tol), label)


def block_projection(partition: BlockPartition, unit_vectors: Sequence, label: str = "") -> Projection:
    """Projection onto span{f_1 + 0 + ..., 0 + f_2 + ..., ...}.

    Column ``i`` of the frame is ``unit_vectors[i]`` placed in block ``i`` and
    zero elsewhere, copied without arithmetic.
    """
    if len(unit_vectors) != partition.k:
        raise DimensionMismatch(f"{partition.k} blocks but {len(unit_vectors)} vectors")
    frame = np.zeros((partition.n, partition.k), dtype=np.complex128)
    for i, (sl, f) in enumerate(zip(partition.slices(), unit_vectors)):
        f = as_matrix(f).ravel()
        if f.shape[0] != sl.stop - sl.start:
            raise DimensionMismatch(f"block {i} has size {sl.stop - sl.start}, vector has {f.shape[0]}")
        if abs(np.linalg.norm(f) - 1.0) > UNIT_TOL:
            raise NotUnit(f"vector for block {i} has norm {np.linalg.norm(f):.15g}")
        frame[sl, i] = f
    return Projection(frame, label)


def compress(a, p: Projection) -> np.ndarray:
    """The compression of ``a`` to ran(P) in the frame basis: ``V* A V``."""
    a = as_matrix(a, square=True)
    if a.shape[0] != p.dim:
        raise DimensionMismatch(f"matrix is {a.shape[0]}x{a.shape[0]}, projection acts on C^{p.dim}")
    v = p.frame
    return adjoint(v) @ a @ v


def compression_coefficients(a, p: Projection) -> np.ndarray:
    """Compression written with entry (i, j) = <A v_i, v_j>, the transpose of ``compress``.

    This is the convention where row i lists the coefficients of ``P A v_i``
    in the frame basis.
    """
    return compress(a, p).T


def compress_frames(a: np.ndarray, frames: np.ndarray) -> np.ndarray:
    """``V_b* A V_b`` for a stack of frames (m, n, k)."""
    return adjoint(frames) @ a @ frames


# -- sampled families ---------------------------------------------------------

def rank_k_frames(n: int, k: int, count: int, seed: int, first_stream: int = 0) -> np.ndarray:
    return haar_frames(n, k, seed, np.arange(first_stream, first_stream + count))


def sample_rank_k(n: int, k: int, count: int, rng: RngState) -> Iterator[Projection]:
    """``count`` Haar rank-k projections; draw i uses stream ``rng.stream + i``."""
    if not 1 <= k <= n or count < 1:
        raise ValueError(f"need 1 <= k <= n and count >= 1 (n={n}, k={k}, count={count})")
    frames = rank_k_frames(n, k, count, rng.seed, rng.stream)
    for i, v in enumerate(frames):
        yield Projection(v, f"rank{k}#{rng.stream + i}")


def block_unit_vectors(partition: BlockPartition, count: int, seed: int, first_stream: int = 0):
    """Per-block Haar unit vectors; returns a list with one (count, n_i) array per block.

    Draw i consumes ``n`` complex normals from stream ``first_stream + i``,
    block after block.
    """
    g = batch_complex_normals(seed, np.arange(first_stream, first_stream + count), partition.n)
    out = []
    for sl in partition.slices():
        f = g[:, sl]
        out.append(f / np.linalg.norm(f, axis=1, keepdims=True))
    return out


def block_frames(partition: BlockPartition, count: int, seed: int, first_stream: int = 0) -> np.ndarray:
    fs = block_unit_vectors(partition, count, seed, first_stream)
    frames = np.zeros((count, partition.n, partition.k), dtype=np.complex128)
    for i, (sl, f) in enumerate(zip(partition.slices(), fs)):
        frames[:, sl, i] = f
    return frames


# -- commuting family ---------------------------------------------------------

def commutator_norm(a: np.ndarray, p: Projection) -> float:
    pa = p.frame @ (adjoint(p.frame) @ a)
    ap = (a @ p.frame) @ adjoint(p.frame)
    return fro_norm(pa - ap)


def _clusters(values: np.ndarray, tol: float) -> list[list[int]]:
    """Single-linkage groups of indices whose values lie within ``tol``."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in itertools.combinations(range(n), 2):
        if abs(values[i] - values[j]) <= tol:
            parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = list(groups.values())
    out.sort(key=lambda g: (values[g[0]].real, values[g[0]].imag))
    return out


def commuting_projections(a, tol: float = NORMAL_TOL, *, projections=None,
                          budget: int = 256, seed: int = 0,
                          cluster_tol: float = CLUSTER_TOL,
                          commute_tol: float = COMMUTE_TOL) -> list[Projection]:
    """Finite-rank orthogonal projections commuting with ``a``.

    With ``projections`` given, each is checked against ``||PA - AP||_F <=
    tol * max(1, ||A||_F)`` and returned unchanged.  Otherwise ``a`` must be
    normal; its Schur vectors are grouped by eigenvalue cluster and the
    projections onto every nonempty union of clusters are returned (random
    unions plus all singletons once there are more than 12 clusters).
    """
    a = as_matrix(a, square=True)
    afro = fro_norm(a)
    if projections is not None:
        out = []
        for p in projections:
            if p.dim != a.shape[0]:
                raise DimensionMismatch(f"projection acts on C^{p.dim}, matrix is {a.shape[0]}x{a.shape[0]}")
            r = commutator_norm(a, p)
            limit = tol * max(1.0, afro)
            if r > limit:
                raise ValidationFailed(r, limit)
            out.append(p)
        return out

    defect = fro_norm(adjoint(a) @ a - a @ adjoint(a))
    if defect > tol * max(afro ** 2, np.finfo(float).tiny):
        raise NotNormal(f"||A*A - AA*||_F = {defect:.3e}; commuting projections are only generated for normal matrices")
    t, z = schur_decomposition(a)
    clusters = _clusters(np.diag(t), cluster_tol * operator_norm(a))
    c = len(clusters)
    if c <= EXHAUSTIVE_CLUSTERS:
        subsets = [s for r in range(1, c + 1) for s in itertools.combinations(range(c), r)]
    else:
        rng = RngState(seed, 0)
        subsets = [(i,) for i in range(c)] + [tuple(range(c))]
        seen = set(subsets)
        bits = rng.uniforms(budget * c).reshape(budget, c) < 0.5
        for row in bits:
            s = tuple(int(i) for i in np.flatnonzero(row))
            if s and s not in seen:
                seen.add(s)
                subsets.append(s)
    out = []
    limit = commute_tol * max(1.0, afro)
    for s in subsets:
        cols = [j for i in s for j in clusters[i]]
        p = Projection(z[:, cols], "{" + ",".join(map(str, s)) + "}")
        r = commutator_norm(a, p)
        if r > limit:
            raise ValidationFailed(r, limit)
        out.append(p)
    return out


def family_frames(a: np.ndarray, family: FamilySpec):
    """Materialise a family: returns (list of frame stacks, list of draw-index arrays).

    Frames of equal rank are stacked together so compressions can be batched.
    """
    n = a.shape[0]
    family.validate(n)
    if family.kind == "rank":
        if family.k == n:
            return [np.eye(n, dtype=np.complex128)[None]], [np.array([0])]
        return [rank_k_frames(n, family.k, family.budget, family.seed)], [np.arange(family.budget)]
    if family.kind == "block":
        return [block_frames(family.partition, family.budget, family.seed)], [np.arange(family.budget)]
    projs = commuting_projections(a, projections=family.projections, budget=family.budget, seed=family.seed)
    by_rank: dict[int, list[int]] = {}
    for i, p in enumerate(projs):
        by_rank.setdefault(p.rank, []).append(i)
    stacks, draws = [], []
    for r in sorted(by_rank):
        idx = by_rank[r]
        stacks.append(np.stack([projs[i].frame for i in idx]))
        draws.append(np.array(idx))
    return stacks, draws


def check_refinement(coarse: BlockPartition, refined: BlockPartition) -> None:
    if not refined.is_refinement_of(coarse):
        raise NotARefinement(f"({refined}) does not refine ({coarse})")
