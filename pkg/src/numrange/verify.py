"""One checker per property of generalized numerical ranges.

Every checker returns a ``CheckReport``.  Checks with several parts report
the part with the worst deviation-to-tolerance ratio at the top level, so
``passed`` is equivalent to ``deviation <= tolerance`` and also to every part
passing.

Set equalities between sampled ranges cannot be certified by sampling: the
containment direction is checked tightly (``containment_tol``) against the
traced supporting half-planes of W(A), the other direction as Hausdorff
closeness of hulls with a statistical ``slack``.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry import boundary_distance, convex_hull, hull_distance, hull_hausdorff, multiset_distance
from .linalg import (
    RngState,
    adjoint,
    as_matrix,
    eigs_batch,
    fro_norm,
    general_eigs,
    haar_unitary,
    operator_norm,
)
from .projections import (
    BlockPartition,
    FamilySpec,
    block_frames,
    block_unit_vectors,
    check_refinement,
    commuting_projections,
    compress_frames,
    family_frames,
    rank_k_frames,
)
from .errors import NotNormal
from .ranges import (
    DEFAULT_ANGLES,
    block_matrices,
    bnr_sample,
    nr_boundary,
    nr_sample,
    pnr_sample,
    support_function,
)


@dataclass(frozen=True)
class Tolerances:
    """Defaults used by every checker; all are relative to max(1, ||A||) unless noted."""

    containment: float = 1e-8
    slack: float = 0.05
    exact_spectrum: float = 1e-9  # absolute
    commuting: float = 1e-8
    transpose: float = 1e-10
    entrywise: float = 1e-12
    ellipse_focal: float = 1e-6  # relative to ||A||
    fill_margin: float = 0.02  # relative to ||A||
    fill: float = 0.05  # relative to ||A||
    unitary: float = 1e-8
    norm_bound: float = 1e-8  # absolute
    rayleigh: float = 1e-9
    adjoint: float = 1e-9  # absolute


DEFAULT_TOL = Tolerances()


@dataclass
class CheckReport:
    name: str
    passed: bool
    deviation: float
    tolerance: float
    seed: int | None = None
    budgets: dict = field(default_factory=dict)
    detail: str = ""
    parts: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CheckReport":
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def part(self, name: str) -> dict:
        for p in self.parts:
            if p["name"] == name:
                return p
        raise KeyError(name)


def _report(name, parts, *, seed=None, budgets=None, detail=""):
    """Fold ``parts`` = [(name, deviation, tolerance), ...] into a report."""
    rows = [{"name": n, "deviation": float(d), "tolerance": float(t), "passed": bool(d <= t)}
            for n, d, t in parts]

    def ratio(r):
        if r["deviation"] <= r["tolerance"]:
            return r["deviation"] / r["tolerance"] if r["tolerance"] > 0 else 0.0
        return np.inf if r["tolerance"] == 0 else r["deviation"] / r["tolerance"]

    worst = max(rows, key=ratio)
    return CheckReport(name, worst["passed"], worst["deviation"], worst["tolerance"],
                       seed, dict(budgets or {}), detail, rows)


def _scale(a) -> float:
    return max(1.0, operator_norm(a))


def _excess(boundary, z) -> float:
    z = np.asarray(z).ravel()
    if len(z) == 0:
        return 0.0
    return float(max(0.0, boundary.excess(z).max()))


def _hull_gap(points, boundary) -> float:
    return hull_hausdorff(convex_hull(points), convex_hull(boundary.points()))


# -- classical properties -----------------------------------------------------

def check_spectral_inclusion(a, budget=None, *, angles: int = DEFAULT_ANGLES,
                             tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Eigenvalues of A lie in the traced outer approximation of W(A)."""
    a = as_matrix(a, square=True)
    b = nr_boundary(a, angles)
    ev = general_eigs(a).values
    return _report("spectral_inclusion",
                   [("eigenvalues_in_W", _excess(b, ev), tol.containment * _scale(a))],
                   budgets={"angles": len(b.angles)})


def check_unitary_invariance(a, seed: int = 0, *, angles: int = DEFAULT_ANGLES,
                             tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    a = as_matrix(a, square=True)
    u = haar_unitary(a.shape[0], RngState(seed, 1 << 32))
    b1 = nr_boundary(a, angles)
    b2 = nr_boundary(adjoint(u) @ a @ u, angles)
    gap = hull_hausdorff(convex_hull(b1.points()), convex_hull(b2.points()))
    return _report("unitary_invariance", [("boundary_hulls", gap, tol.unitary * _scale(a))],
                   seed=seed, budgets={"angles": angles})


def check_norm_bound(a, budget: int = 10_000, seed: int = 0, *, partition=None,
                     angles: int = DEFAULT_ANGLES, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """|z| <= ||A|| for the output of every range operation."""
    a = as_matrix(a, square=True)
    n = a.shape[0]
    norm = operator_norm(a)
    partition = partition or BlockPartition.halves(n)
    clouds = {
        "nr": nr_sample(a, budget, RngState(seed)).values,
        "boundary": nr_boundary(a, angles).points(),
        "pnr_rank1": pnr_sample(a, FamilySpec.rank(1, budget, seed)).values,
        "pnr_rank_half": pnr_sample(a, FamilySpec.rank(max(1, n // 2), budget, seed)).values,
        "bnr": bnr_sample(a, partition, budget, RngState(seed)).values,
    }
    try:
        clouds["commuting"] = pnr_sample(a, FamilySpec.commuting(seed=seed)).values
    except NotNormal:
        pass
    parts = [(name, max(0.0, float(np.abs(z).max()) - norm), tol.norm_bound) for name, z in clouds.items()]
    return _report("norm_bound", parts, seed=seed, budgets={"samples": budget, "angles": angles},
                   detail=f"||A|| = {norm:.17g}")


def check_adjoint_conjugation(a, family: FamilySpec, *, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """W_P(A*) is the complex conjugate of W_P(A), draw by draw.

    (V* A V)* = V* A* V, so the same frames serve both sides.
    """
    a = as_matrix(a, square=True)
    lhs = pnr_sample(adjoint(a), family).by_draw()
    rhs = pnr_sample(a, family).by_draw()
    worst = 0.0
    for d, z in rhs.items():
        worst = max(worst, multiset_distance(lhs[d], np.conj(z)))
    return _report("adjoint_conjugation", [("per_draw", worst, tol.adjoint)],
                   seed=family.seed, budgets={"family": family.describe(), "budget": family.budget})


def check_compression_containment(a, family: FamilySpec, *, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Each compression eigenvalue is the Rayleigh quotient <Ay, y> of y = V u."""
    a = as_matrix(a, square=True)
    stacks, _ = family_frames(a, family)
    worst = 0.0
    for frames in stacks:
        vals, vecs = eigs_batch(compress_frames(a, frames), vectors=True)
        y = frames @ vecs
        y = y / np.linalg.norm(y, axis=1, keepdims=True)
        rq = np.einsum("bik,ij,bjk->bk", np.conj(y), a, y)
        worst = max(worst, float(np.abs(rq - vals).max()))
    return _report("compression_containment", [("rayleigh", worst, tol.rayleigh * _scale(a))],
                   seed=family.seed, budgets={"family": family.describe(), "budget": family.budget})


# -- projection families ------------------------------------------------------

def check_p1_equals_nr(a, budget: int = 100_000, seed: int = 0, *, angles: int = DEFAULT_ANGLES,
                       tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Rank-one compressions fill out the classical numerical range."""
    a = as_matrix(a, square=True)
    if budget < 1000:
        raise ValueError("budget must be at least 1000")
    s = _scale(a)
    b = nr_boundary(a, angles)
    pts = pnr_sample(a, FamilySpec.rank(1, budget, seed)).values
    rq = nr_sample(a, budget, RngState(seed)).values
    return _report("p1_equals_nr", [
        ("rayleigh_quotients", float(np.abs(pts - rq).max()), tol.rayleigh * s),
        ("containment", _excess(b, pts), tol.containment * s),
        ("hull_hausdorff", _hull_gap(pts, b), tol.slack * s),
    ], seed=seed, budgets={"samples": budget, "angles": len(b.angles)})


def check_pk_lemma(a, k: int, budget: int = 10_000, seed: int = 0, *, angles: int = DEFAULT_ANGLES,
                   tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Rank-k family: the spectrum when k = n, the numerical range when k < n."""
    a = as_matrix(a, square=True)
    n = a.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    s = _scale(a)
    if k == n:
        sigma = general_eigs(a).values
        dev = multiset_distance(pnr_sample(a, FamilySpec.rank(n, 1, seed)).values, sigma)
        # every unitary frame represents the identity projection too
        frames = rank_k_frames(n, n, 8, seed)
        ev, _ = eigs_batch(compress_frames(a, frames))
        other = max(multiset_distance(row, sigma) for row in ev)
        # defective eigenvalues move by ~sqrt(eps) under a unitary change of
        # basis, so the second number is informational only
        return _report("pk_lemma", [("identity_family", dev, tol.exact_spectrum)],
                       seed=seed, budgets={"k": k},
                       detail=f"k = n: family is {{Id}}; 8 unitary frames deviate by {other:.3e}")
    b = nr_boundary(a, angles)
    pts = pnr_sample(a, FamilySpec.rank(k, budget, seed)).values
    return _report("pk_lemma", [
        ("containment", _excess(b, pts), tol.containment * s),
        ("hull_hausdorff", _hull_gap(pts, b), tol.slack * s),
    ], seed=seed, budgets={"k": k, "samples": budget, "angles": len(b.angles)})


def _is_hermitian(a) -> bool:
    return float(np.max(np.abs(a - adjoint(a)), initial=0.0)) <= 1e-12 * max(fro_norm(a), 1e-300)


def check_commuting_subset(a, tol: Tolerances = DEFAULT_TOL, *, projections=None,
                           seed: int = 0) -> CheckReport:
    """Compressions to commuting projections only produce eigenvalues of A.

    For Hermitian A (automatic family) each eigenvalue must also be attained
    by a single spectral projection.
    """
    a = as_matrix(a, square=True)
    s = _scale(a)
    sigma = general_eigs(a).values
    fam = FamilySpec.commuting(projections, seed=seed)
    pset = pnr_sample(a, fam)
    dist = np.abs(pset.values[:, None] - sigma[None, :]).min(axis=1)
    parts = [("subset_of_spectrum", float(dist.max()), tol.commuting * s)]
    detail = f"{len(set(pset.draws.tolist()))} projections"
    if projections is None and _is_hermitian(a):
        projs = commuting_projections(a)
        single = [i for i, p in enumerate(projs) if "," not in p.label]
        attained = pset.values[np.isin(pset.draws, single)]
        miss = np.abs(sigma[:, None] - attained[None, :]).min(axis=1)
        parts.append(("every_eigenvalue_attained", float(miss.max()), tol.commuting * s))
    return _report("commuting_subset", parts, seed=seed, detail=detail)


def check_block_equivalence(a, partition: BlockPartition, draws: int = 1000, seed: int = 0,
                            *, tol: Tolerances = DEFAULT_TOL, name: str = "block_equivalence") -> CheckReport:
    """Compression to a block projection versus the block numerical range matrix.

    Per draw: the compression spectrum must match the spectrum of the
    transposed block matrix, and the row-coefficient form of the compression
    must equal that transpose entrywise.
    """
    a = as_matrix(a, square=True)
    partition.check(a.shape[0])
    s = _scale(a)
    frames = block_frames(partition, draws, seed)
    comp = compress_frames(a, frames)
    blocks = block_matrices(a, partition, block_unit_vectors(partition, draws, seed))
    transposed = np.swapaxes(blocks, -1, -2)
    ec, _ = eigs_batch(comp)
    eb, _ = eigs_batch(np.ascontiguousarray(transposed))
    spectral = max(multiset_distance(x, y) for x, y in zip(ec, eb))
    entry = float(np.abs(np.swapaxes(comp, -1, -2) - transposed).max())
    return _report(name, [("spectra", spectral, tol.transpose * s),
                          ("entrywise", entry, tol.entrywise * s)],
                   seed=seed, budgets={"draws": draws, "partition": str(partition)})


def check_qnr_equivalence(a, partition: BlockPartition, draws: int = 1000, seed: int = 0,
                          *, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    if partition.k != 2:
        raise ValueError("quadratic numerical range needs a 2-block partition")
    return check_block_equivalence(a, partition, draws, seed, tol=tol, name="qnr_equivalence")


def check_inclusion_chain(a, coarse: BlockPartition, refined: BlockPartition, draws: int = 10_000,
                          seed: int = 0, *, angles: int = DEFAULT_ANGLES,
                          tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Refining a partition shrinks the block numerical range, and all of them sit in W(A)."""
    a = as_matrix(a, square=True)
    coarse.check(a.shape[0])
    check_refinement(coarse, refined)
    s = _scale(a)
    b = nr_boundary(a, angles)
    cpts = bnr_sample(a, coarse, draws, RngState(seed)).values
    rpts = bnr_sample(a, refined, draws, RngState(seed)).values
    worst = float(hull_distance(convex_hull(cpts), rpts).max())
    return _report("inclusion_chain", [
        ("refined_in_coarse_hull", worst, tol.slack * s),
        ("coarse_in_W", _excess(b, cpts), tol.containment * s),
    ], seed=seed, budgets={"draws": draws, "coarse": str(coarse), "refined": str(refined)})


# -- geometry of W(A) ----------------------------------------------------------

def support_width(a, angles) -> np.ndarray:
    """Width of W(A) across each direction: h(t) + h(t + pi)."""
    angles = np.asarray(angles, dtype=float)
    return support_function(a, angles) + support_function(a, angles + np.pi)


def check_two_dim_ellipse(a, budget: int = 10_000, seed: int = 0, *, angles: int = DEFAULT_ANGLES,
                          tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """For 2 x 2 A, W(A) is an ellipse with the eigenvalues as foci."""
    a = as_matrix(a, square=True)
    if a.shape != (2, 2):
        raise ValueError("ellipse check needs a 2 x 2 matrix")
    norm = operator_norm(a)
    l1, l2 = general_eigs(a).values
    b = nr_boundary(a, angles)
    touch = b.points()
    focal = np.abs(touch - l1) + np.abs(touch - l2)
    spread = float(focal.max() - focal.min())
    minor_formula = 0.5 * np.sqrt(max(0.0, fro_norm(a) ** 2 - abs(l1) ** 2 - abs(l2) ** 2))
    minor_traced = 0.5 * float(support_width(a, b.angles).min())
    pts = nr_sample(a, budget, RngState(seed)).values
    detail = (f"foci {l1:.6g}, {l2:.6g}; semi-major {focal.mean() / 2:.10g}; "
              f"semi-minor traced {minor_traced:.10g}, from ||A||_F {minor_formula:.10g}")
    return _report("two_dim_ellipse", [
        ("focal_sum_spread", spread, tol.ellipse_focal * norm),
        ("samples_in_W", _excess(b, pts), tol.containment * max(1.0, norm)),
    ], seed=seed, budgets={"samples": budget, "angles": len(b.angles)}, detail=detail)


def check_convexity(a, budget: int = 10_000, grid: int = 20, seed: int = 0, *,
                    angles: int = DEFAULT_ANGLES, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Rayleigh-quotient samples fill the traced hull of W(A), away from its edge."""
    a = as_matrix(a, square=True)
    if budget < 10_000:
        raise ValueError("budget must be at least 10000")
    norm = operator_norm(a)
    b = nr_boundary(a, angles)
    hull = convex_hull(b.points())
    margin = tol.fill_margin * norm
    if hull.degenerate == "point":
        probe = np.empty(0, complex)
    elif hull.degenerate == "segment":
        p, q = hull.vertices[0], hull.vertices[-1]
        length = abs(q - p)
        if length <= 2 * margin:
            probe = np.empty(0, complex)
        else:
            u = (q - p) / length
            probe = p + u * np.linspace(margin, length - margin, grid * grid)
    else:
        v = hull.vertices
        xs = np.linspace(v.real.min(), v.real.max(), grid)
        ys = np.linspace(v.imag.min(), v.imag.max(), grid)
        cand = (xs[None, :] + 1j * ys[:, None]).ravel()
        keep = (hull_distance(hull, cand) == 0.0) & (boundary_distance(hull, cand) >= margin)
        probe = cand[keep]
    if len(probe) == 0:
        return _report("convexity", [("fill", 0.0, tol.fill * norm)], seed=seed,
                       budgets={"samples": budget, "grid": grid}, detail="no interior grid points")
    pts = nr_sample(a, budget, RngState(seed)).values
    gap = max(float(np.abs(pts[None, :] - z).min()) for z in probe)
    return _report("convexity", [("fill", gap, tol.fill * norm)], seed=seed,
                   budgets={"samples": budget, "grid": grid}, detail=f"{len(probe)} grid points")


# -- driver -------------------------------------------------------------------

CHECK_NAMES = (
    "spectral_inclusion", "unitary_invariance", "norm_bound", "adjoint_conjugation",
    "compression_containment", "p1_equals_nr", "pk_lemma", "commuting_subset",
    "qnr_equivalence", "block_equivalence", "inclusion_chain", "two_dim_ellipse", "convexity",
)


def _is_normal(a) -> bool:
    return fro_norm(adjoint(a) @ a - a @ adjoint(a)) <= 1e-9 * max(fro_norm(a) ** 2, 1e-300)


def run_checks(a, names=None, *, partition: BlockPartition | None = None, seed: int = 0,
               samples: int = 10_000, angles: int = DEFAULT_ANGLES,
               tol: Tolerances = DEFAULT_TOL) -> list[CheckReport]:
    """Run the named checks (default: every applicable one) on ``a``.

    Checks whose preconditions ``a`` does not meet (2 x 2 only, normal only,
    a 2-block partition) are skipped silently when running everything, and
    raise when requested by name.
    """
    a = as_matrix(a, square=True)
    n = a.shape[0]
    explicit = names is not None
    names = list(names) if explicit else list(CHECK_NAMES)
    unknown = set(names) - set(CHECK_NAMES)
    if unknown:
        raise ValueError(f"unknown checks: {sorted(unknown)}")
    if partition is not None:
        partition.check(n)
    two_block = partition if partition is not None and partition.k == 2 else (
        BlockPartition.halves(n) if n >= 2 else None)
    coarse = partition if partition is not None else BlockPartition.halves(n)
    reports = []
    for name in names:
        if name == "spectral_inclusion":
            reports.append(check_spectral_inclusion(a, angles=angles, tol=tol))
        elif name == "unitary_invariance":
            reports.append(check_unitary_invariance(a, seed, angles=angles, tol=tol))
        elif name == "norm_bound":
            reports.append(check_norm_bound(a, samples, seed, partition=partition, angles=angles, tol=tol))
        elif name == "adjoint_conjugation":
            reports.append(check_adjoint_conjugation(a, FamilySpec.rank(max(1, n // 2), samples, seed), tol=tol))
        elif name == "compression_containment":
            reports.append(check_compression_containment(a, FamilySpec.rank(max(1, n // 2), samples, seed), tol=tol))
        elif name == "p1_equals_nr":
            reports.append(check_p1_equals_nr(a, max(samples, 1000), seed, angles=angles, tol=tol))
        elif name == "pk_lemma":
            reports.append(check_pk_lemma(a, n, samples, seed, angles=angles, tol=tol))
            if n > 1:
                reports.append(check_pk_lemma(a, max(1, n // 2), samples, seed, angles=angles, tol=tol))
        elif name == "commuting_subset":
            if _is_normal(a) or explicit:
                reports.append(check_commuting_subset(a, tol, seed=seed))
        elif name == "qnr_equivalence":
            if two_block is not None:
                reports.append(check_qnr_equivalence(a, two_block, min(samples, 1000), seed, tol=tol))
            elif explicit:
                raise ValueError("qnr_equivalence needs n >= 2")
        elif name == "block_equivalence":
            if partition is not None and partition.k > 2:
                reports.append(check_block_equivalence(a, partition, min(samples, 1000), seed, tol=tol))
            elif explicit:
                raise ValueError("block_equivalence needs a partition with more than 2 blocks")
        elif name == "inclusion_chain":
            refined = BlockPartition((1,) * n)
            reports.append(check_inclusion_chain(a, coarse, refined, samples, seed, angles=angles, tol=tol))
        elif name == "two_dim_ellipse":
            if n == 2:
                reports.append(check_two_dim_ellipse(a, samples, seed, angles=angles, tol=tol))
            elif explicit:
                raise ValueError("two_dim_ellipse needs a 2 x 2 matrix")
        elif name == "convexity":
            reports.append(check_convexity(a, max(samples, 10_000), 20, seed, angles=angles, tol=tol))
    return reports
