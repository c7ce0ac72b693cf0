"""Classical, projection-family, quadratic and block numerical ranges.

Sampled ranges come back as ``PointSet``s whose points are tagged with the
draw that produced them.  ``nr_boundary`` traces the boundary of the
classical numerical range with the rotating Hermitian-part method.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NotUnit
from .linalg import (
    RngState,
    adjoint,
    as_matrix,
    batch_complex_normals,
    eigs_batch,
    hermitian_eigs,
    hermitian_eigs_batch,
    operator_norm,
)
from .projections import (
    UNIT_TOL,
    BlockPartition,
    FamilySpec,
    block_unit_vectors,
    compress_frames,
    family_frames,
)

DEFAULT_ANGLES = 720
MAX_ANGLES = 4096
REFINE_SPACING = 1e-2
MIN_ANGLE_STEP = 1e-6
DEGENERATE_GAP = 1e-10


@dataclass
class PointSet:
    """Complex points, each tagged ``source#draw``."""

    values: np.ndarray
    draws: np.ndarray
    source: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128).ravel()
        self.draws = np.asarray(self.draws, dtype=np.int64).ravel()
        if self.values.shape != self.draws.shape:
            raise DimensionMismatch("every point needs a provenance tag")

    def __len__(self):
        return len(self.values)

    def tags(self) -> list[str]:
        return [f"{self.source}#{d}" for d in self.draws]

    def by_draw(self) -> dict[int, np.ndarray]:
        out: dict[int, list] = {}
        for d, z in zip(self.draws.tolist(), self.values):
            out.setdefault(d, []).append(z)
        return {d: np.array(v) for d, v in out.items()}


@dataclass
class BoundaryPolyline:
    """Support data of W(A) on an angle grid.

    For each angle t, ``support[i]`` is the top eigenvalue of
    ``(e^{it} A + e^{-it} A*) / 2`` and ``touch[i]`` the Rayleigh quotient of
    its eigenvector.  Where the top eigenvalue is degenerate the boundary has
    a flat piece; ``touch`` and ``touch_end`` are then its two endpoints, in
    the order met when the angle increases.  Elsewhere they coincide.
    """

    angles: np.ndarray
    support: np.ndarray
    touch: np.ndarray
    touch_end: np.ndarray
    norm: float

    def points(self) -> np.ndarray:
        return np.concatenate([self.touch, self.touch_end[self.touch_end != self.touch]])

    def polyline(self) -> np.ndarray:
        """Touch points in traversal order (each flat piece contributes both ends)."""
        pairs = np.stack([self.touch, self.touch_end], axis=1).ravel()
        keep = np.ones(len(pairs), dtype=bool)
        keep[1:] = pairs[1:] != pairs[:-1]
        return pairs[keep]

    def excess(self, z) -> np.ndarray:
        """Largest violation ``Re(e^{it} z) - support(t)`` over the traced angles.

        A non-positive value means ``z`` lies in every traced supporting
        half-plane, which contains W(A).
        """
        z = np.asarray(z, dtype=np.complex128).ravel()
        rot = np.exp(1j * self.angles)
        out = np.empty(len(z))
        step = max(1, 2_000_000 // max(1, len(rot)))
        for s in range(0, len(z), step):
            zz = z[s:s + step]
            out[s:s + step] = np.max(np.real(rot[None, :] * zz[:, None]) - self.support[None, :], axis=1)
        return out


def _rotated_parts(a: np.ndarray, angles: np.ndarray):
    rot = np.exp(1j * angles)[:, None, None]
    ah = adjoint(a)[None]
    herm = 0.5 * (rot * a[None] + np.conj(rot) * ah)
    skew = (rot * a[None] - np.conj(rot) * ah) / 2j
    herm = 0.5 * (herm + adjoint(herm))
    skew = 0.5 * (skew + adjoint(skew))
    return herm, skew


def support_function(a, angles) -> np.ndarray:
    """max over W(A) of Re(e^{it} z), for each angle t."""
    a = as_matrix(a, square=True)
    herm, _ = _rotated_parts(a, np.asarray(angles, dtype=float).ravel())
    w, _ = hermitian_eigs_batch(herm)
    return w[:, -1]


def _trace(a: np.ndarray, angles: np.ndarray, norm: float):
    herm, skew = _rotated_parts(a, angles)
    w, v = hermitian_eigs_batch(herm)
    n = a.shape[0]
    top = w[:, -1]
    x = v[:, :, -1]
    touch = np.einsum("bi,ij,bj->b", np.conj(x), a, x)
    touch_end = touch.copy()
    if n > 1:
        gap_tol = DEGENERATE_GAP * max(norm, np.finfo(float).tiny)
        for b in np.flatnonzero(top - w[:, -2] < gap_tol):
            space = v[b][:, w[b] >= top[b] - gap_tol]
            kk = adjoint(space) @ skew[b] @ space
            kk = 0.5 * (kk + adjoint(kk))
            u = hermitian_eigs(kk).vectors
            first, last = space @ u[:, -1], space @ u[:, 0]
            touch[b] = np.vdot(first, a @ first)
            touch_end[b] = np.vdot(last, a @ last)
    return top, touch, touch_end


def nr_boundary(a, m_angles: int = DEFAULT_ANGLES, *, refine: bool = True,
                max_angles: int = MAX_ANGLES, spacing: float = REFINE_SPACING) -> BoundaryPolyline:
    """Trace the boundary of the numerical range on ``m_angles`` uniform angles.

    With ``refine``, neighbouring angles whose touch points are more than
    ``spacing * ||A||`` apart are bisected, round by round, until no gap is
    left, the angle step drops below 1e-6, or ``max_angles`` is reached.
    """
    a = as_matrix(a, square=True)
    if m_angles < 8:
        raise ValueError("need at least 8 angles")
    norm = operator_norm(a)
    angles = 2.0 * np.pi * np.arange(m_angles) / m_angles
    top, touch, touch_end = _trace(a, angles, norm)
    while refine and len(angles) < max_angles:
        nxt = np.roll(touch, -1)
        width = np.diff(np.append(angles, angles[0] + 2.0 * np.pi))
        wide = (np.abs(nxt - touch_end) > spacing * norm) & (width > MIN_ANGLE_STEP)
        idx = np.flatnonzero(wide)[: max_angles - len(angles)]
        if len(idx) == 0:
            break
        new = angles[idx] + 0.5 * width[idx]
        nt, ntouch, nend = _trace(a, new, norm)
        angles = np.concatenate([angles, new])
        order = np.argsort(angles, kind="mergesort")
        angles = angles[order]
        top = np.concatenate([top, nt])[order]
        touch = np.concatenate([touch, ntouch])[order]
        touch_end = np.concatenate([touch_end, nend])[order]
    return BoundaryPolyline(angles, top, touch, touch_end, norm)


def _unit_vectors(n: int, count: int, seed: int, first_stream: int = 0) -> np.ndarray:
    x = batch_complex_normals(seed, np.arange(first_stream, first_stream + count), n)
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def nr_sample(a, count: int, rng: RngState) -> PointSet:
    """Rayleigh quotients <A x_i, x_i> of ``count`` Haar unit vectors.

    Vector i is ``haar_unit_vector(n, RngState(rng.seed, rng.stream + i))``.
    """
    a = as_matrix(a, square=True)
    if count < 1:
        raise ValueError("count must be positive")
    x = _unit_vectors(a.shape[0], count, rng.seed, rng.stream)
    z = np.einsum("si,ij,sj->s", np.conj(x), a, x)
    return PointSet(z, np.arange(rng.stream, rng.stream + count), "nr")


def pnr_sample(a, family: FamilySpec) -> PointSet:
    """Union of the spectra of the compressions of ``a`` over ``family``."""
    a = as_matrix(a, square=True)
    stacks, draws = family_frames(a, family)
    vals, tags = [], []
    for frames, d in zip(stacks, draws):
        ev, _ = eigs_batch(compress_frames(a, frames))
        vals.append(ev.ravel())
        tags.append(np.repeat(d, frames.shape[2]))
    values = np.concatenate(vals)
    tags = np.concatenate(tags)
    order = np.argsort(tags, kind="mergesort")
    return PointSet(values[order], tags[order], family.describe())


def block_matrix(a, partition: BlockPartition, vectors: Sequence) -> np.ndarray:
    """k x k matrix with entry (i, j) = <A_ij f_j, f_i> for unit f_i in block i."""
    a = as_matrix(a, square=True)
    partition.check(a.shape[0])
    if len(vectors) != partition.k:
        raise DimensionMismatch(f"{partition.k} blocks but {len(vectors)} vectors")
    fs = []
    for i, (sl, f) in enumerate(zip(partition.slices(), vectors)):
        f = as_matrix(f).ravel()
        if f.shape[0] != sl.stop - sl.start:
            raise DimensionMismatch(f"block {i} has size {sl.stop - sl.start}, vector has {f.shape[0]}")
        if abs(np.linalg.norm(f) - 1.0) > UNIT_TOL:
            raise NotUnit(f"vector for block {i} has norm {np.linalg.norm(f):.15g}")
        fs.append(f)
    sls = partition.slices()
    m = np.empty((partition.k, partition.k), dtype=np.complex128)
    for i in range(partition.k):
        for j in range(partition.k):
            m[i, j] = np.vdot(fs[i], a[sls[i], sls[j]] @ fs[j])
    return m


def qnr_matrix(a, partition: BlockPartition, f1, f2) -> np.ndarray:
    """The 2 x 2 matrix [[<A f1,f1>, <B f2,f1>], [<C f1,f2>, <D f2,f2>]]."""
    if partition.k != 2:
        raise DimensionMismatch(f"quadratic numerical range needs 2 blocks, got {partition.k}")
    return block_matrix(a, partition, [f1, f2])


def block_matrices(a: np.ndarray, partition: BlockPartition, unit_vectors) -> np.ndarray:
    """Stacked block matrices for per-block unit vectors of shape (count, n_i)."""
    sls = partition.slices()
    count = unit_vectors[0].shape[0]
    m = np.empty((count, partition.k, partition.k), dtype=np.complex128)
    for i in range(partition.k):
        fi = np.conj(unit_vectors[i])
        for j in range(partition.k):
            m[:, i, j] = np.einsum("si,ij,sj->s", fi, a[sls[i], sls[j]], unit_vectors[j])
    return m


def bnr_sample(a, partition: BlockPartition, count: int, rng: RngState) -> PointSet:
    """Sampled block numerical range; draw i uses stream ``rng.stream + i``.

    Uses the same unit vectors as ``pnr_sample`` with the block family of the
    same seed, so both produce identical spectra draw by draw.
    """
    a = as_matrix(a, square=True)
    partition.check(a.shape[0])
    if count < 1:
        raise ValueError("count must be positive")
    fs = block_unit_vectors(partition, count, rng.seed, rng.stream)
    ev, _ = eigs_batch(block_matrices(a, partition, fs))
    draws = np.repeat(np.arange(rng.stream, rng.stream + count), partition.k)
    return PointSet(ev.ravel(), draws, f"bnr:{partition}")
