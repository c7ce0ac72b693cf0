"""Self-contained dense complex linear algebra and seeded sampling."""
from .dense import (
    EigenDecomposition,
    adjoint,
    as_matrix,
    complex_gaussian,
    eigs_batch,
    fro_norm,
    general_eigs,
    haar_frame,
    haar_frames,
    haar_unit_vector,
    haar_unitary,
    hermitian_eigs,
    hermitian_eigs_batch,
    operator_norm,
    qr_orthonormalize,
    random_hermitian,
    random_normal,
    schur_decomposition,
    sort_complex,
)
from .rng import RngState, batch_complex_normals, batch_uniforms

__all__ = [
    "EigenDecomposition", "RngState", "adjoint", "as_matrix", "batch_complex_normals",
    "batch_uniforms", "complex_gaussian", "eigs_batch", "fro_norm", "general_eigs",
    "haar_frame", "haar_frames", "haar_unit_vector", "haar_unitary", "hermitian_eigs",
    "hermitian_eigs_batch", "operator_norm", "qr_orthonormalize", "random_hermitian",
    "random_normal", "schur_decomposition", "sort_complex",
]
