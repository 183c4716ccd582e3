"""
Dense complex-matrix kernel.

Products, subsystem rearrangements (partial trace, partial transpose,
realignment, vec), spectral summaries, norms, the SWAP operator and
characteristic-polynomial coefficients. Everything here is a pure function of
its inputs; matrices are dense complex128 numpy arrays.
"""

import os
import sys
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy import linalg as sla

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import Config
from utils.errors import ConvergenceError, DimensionError, DomainError, HermiticityError, InputError

ArrayLike = Union[np.ndarray, Sequence]
Subsystem = Union[int, str]

_SUBSYSTEM_LETTERS = "ABCDEFGH"


# =================== Data Structures ===================
@dataclass(frozen=True)
class DimSpec:
    """Ordered subsystem dimensions, e.g. (3, 3) or (2, 2, 2)."""

    dims: Tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise DimensionError("DimSpec needs at least one subsystem")
        if any(d < 2 for d in dims):
            raise DimensionError(f"Subsystem dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def coerce(cls, dims: Union["DimSpec", Iterable[int]]) -> "DimSpec":
        if isinstance(dims, DimSpec):
            return dims
        return cls(tuple(dims))

    @property
    def order(self) -> int:
        return int(np.prod(self.dims))

    @property
    def parties(self) -> int:
        return len(self.dims)

    def check(self, a: np.ndarray, name: str = "matrix") -> None:
        """Raise DimensionError unless `a` is square of order prod(dims)."""
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"{name} must be square, got shape {a.shape}")
        if a.shape[0] != self.order:
            raise DimensionError(f"{name} has order {a.shape[0]}, dims {self.dims} require {self.order}")

    def bipartite(self) -> Tuple[int, int]:
        if self.parties != 2:
            raise DimensionError(f"Expected a bipartite system, got dims {self.dims}")
        return self.dims[0], self.dims[1]

    def to_list(self) -> List[int]:
        return list(self.dims)


@dataclass
class SpectralSummary:
    """Eigenvalues or singular values sorted descending, with rank at tolerance."""

    values: np.ndarray
    tolerance: float
    rank: int
    kind: str = "eigen"

    @property
    def max(self) -> float:
        return float(self.values[0])

    @property
    def min(self) -> float:
        return float(self.values[-1])

    def nonzero(self) -> np.ndarray:
        return self.values[np.abs(self.values) > self.tolerance]

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["values"] = [float(v) for v in self.values]
        return data


# =================== Input Handling ===================
def as_matrix(a: ArrayLike, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite complex 2-D array; 1-D input becomes a column vector."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 1-D or 2-D, got {m.ndim}-D")
    if not np.all(np.isfinite(m)):
        raise DomainError(f"{name} contains NaN or Inf entries")
    return m


def subsystem_index(part: Subsystem, parties: int) -> int:
    """Resolve 0-based index or letter ('A', 'B', 'C') to an index."""
    if isinstance(part, str):
        key = part.strip().upper()
        if len(key) != 1 or key not in _SUBSYSTEM_LETTERS[:parties]:
            raise InputError(f"Unknown subsystem '{part}' for a {parties}-party system")
        return _SUBSYSTEM_LETTERS.index(key)
    index = int(part)
    if not 0 <= index < parties:
        raise InputError(f"Subsystem index {part} out of range for {parties} parties")
    return index


def _indices(parts: Union[Subsystem, Iterable[Subsystem]], parties: int) -> List[int]:
    if isinstance(parts, (int, str, np.integer)):
        parts = [parts]
    return sorted({subsystem_index(p, parties) for p in parts})


# =================== Products & Rearrangements ===================
def kron(a: ArrayLike, b: ArrayLike) -> np.ndarray:
    """Tensor product; entry (ik, jl) equals a_ij * b_kl."""
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def kron_all(factors: Iterable[ArrayLike]) -> np.ndarray:
    result = np.ones((1, 1), dtype=np.complex128)
    for f in factors:
        result = np.kron(result, as_matrix(f))
    return result


def partial_trace(rho: ArrayLike, dims: Union[DimSpec, Iterable[int]], keep: Union[Subsystem, Iterable[Subsystem]]) -> np.ndarray:
    """Trace out every subsystem not listed in `keep`."""
    spec = DimSpec.coerce(dims)
    m = as_matrix(rho, "rho")
    spec.check(m, "rho")
    kept = _indices(keep, spec.parties)
    current = list(spec.dims)
    t = m.reshape(current + current)
    for idx in reversed(range(spec.parties)):
        if idx in kept:
            continue
        t = np.trace(t, axis1=idx, axis2=idx + len(current))
        current.pop(idx)
    n = int(np.prod(current))
    return t.reshape(n, n)


def partial_transpose(rho: ArrayLike, dims: Union[DimSpec, Iterable[int]], part: Union[Subsystem, Iterable[Subsystem]] = 1) -> np.ndarray:
    """Transpose the indices of the listed subsystems; default is the second party."""
    spec = DimSpec.coerce(dims)
    m = as_matrix(rho, "rho")
    spec.check(m, "rho")
    n = spec.parties
    axes = list(range(2 * n))
    for p in _indices(part, n):
        axes[p], axes[p + n] = axes[p + n], axes[p]
    t = m.reshape(list(spec.dims) * 2).transpose(axes)
    return t.reshape(spec.order, spec.order)


def realign(rho: ArrayLike, dims: Union[DimSpec, Iterable[int]]) -> np.ndarray:
    """Realignment: row (i, j) holds the row-major vec of block Z_ij.

    For a d1 x d1 grid of d2 x d2 blocks the result is d1^2 x d2^2 and
    R(A kron B) = |A><B*|.
    """
    spec = DimSpec.coerce(dims)
    d1, d2 = spec.bipartite()
    m = as_matrix(rho, "rho")
    spec.check(m, "rho")
    return m.reshape(d1, d2, d1, d2).transpose(0, 2, 1, 3).reshape(d1 * d1, d2 * d2)


def vec(a: ArrayLike) -> np.ndarray:
    """Row-major flattening z_11, z_12, ..., z_21, ..."""
    return as_matrix(a).reshape(-1)


# =================== Spectra ===================
def svd_values(a: ArrayLike, tol: Optional[float] = None) -> SpectralSummary:
    """Singular values descending; rank counts values above tol * sigma_max."""
    m = as_matrix(a)
    tol = Config.rank_tol() if tol is None else float(tol)
    try:
        s = sla.svdvals(m)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise ConvergenceError(f"SVD failed to converge: {e}") from e
    s = np.sort(np.asarray(s, dtype=float))[::-1]
    threshold = tol * float(s[0]) if s.size and s[0] > 0 else 0.0
    rank = int(np.count_nonzero(s > threshold)) if s.size and s[0] > 0 else 0
    return SpectralSummary(values=s, tolerance=threshold, rank=rank, kind="singular")


def hermitian_defect(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def is_hermitian(a: ArrayLike, tol: Optional[float] = None) -> bool:
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        return False
    tol = Config.HERMITIAN_TOL if tol is None else tol
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    return hermitian_defect(m) <= tol * scale


def eig_hermitian(a: ArrayLike, symmetrize: bool = False, tol: Optional[float] = None) -> SpectralSummary:
    """Real eigenvalues of a Hermitian matrix, descending.

    Args:
        a: Square matrix, Hermitian within Config.HERMITIAN_TOL (relative).
        symmetrize: Replace `a` by (a + a^H)/2 instead of raising on a defect.
        tol: Relative tolerance for the rank count; defaults to the rank tolerance.

    Returns:
        SpectralSummary with kind "eigen".
    """
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"eig_hermitian needs a square matrix, got {m.shape}")
    if not is_hermitian(m):
        defect = hermitian_defect(m)
        if not symmetrize:
            raise HermiticityError(f"Matrix is not Hermitian (defect {defect:.3e})")
        logger.debug(f"Symmetrizing matrix with Hermitian defect {defect:.3e}")
    h = 0.5 * (m + m.conj().T)
    try:
        w = sla.eigh(h, eigvals_only=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise ConvergenceError(f"Hermitian eigensolver failed: {e}") from e
    w = np.asarray(w, dtype=float)[::-1]
    tol = Config.rank_tol() if tol is None else float(tol)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    threshold = tol * scale
    rank = int(np.count_nonzero(np.abs(w) > threshold)) if scale > 0 else 0
    return SpectralSummary(values=w, tolerance=threshold, rank=rank, kind="eigen")


def eigh_pairs(a: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and eigenvectors of the Hermitian part of `a`."""
    m = as_matrix(a)
    try:
        w, v = sla.eigh(0.5 * (m + m.conj().T))
    except (np.linalg.LinAlgError, ValueError) as e:
        raise ConvergenceError(f"Hermitian eigensolver failed: {e}") from e
    return np.asarray(w, dtype=float), v


def eigvals_general(a: ArrayLike) -> np.ndarray:
    """Eigenvalues of a general square matrix, sorted by descending real part."""
    m = as_matrix(a)
    try:
        w = sla.eigvals(m)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise ConvergenceError(f"Eigensolver failed: {e}") from e
    return w[np.argsort(-w.real, kind="stable")]


def lambda_min(a: ArrayLike) -> float:
    """Smallest eigenvalue of the Hermitian part."""
    return eig_hermitian(a, symmetrize=True).min


# =================== Norms ===================
def trace_norm(a: ArrayLike) -> float:
    return float(np.sum(svd_values(a).values))


def frobenius_norm(a: ArrayLike) -> float:
    return float(np.linalg.norm(as_matrix(a), "fro"))


def operator_norm(a: ArrayLike) -> float:
    s = svd_values(a).values
    return float(s[0]) if s.size else 0.0


# =================== Operators ===================
def swap_operator(d: int, normalized: bool = False) -> np.ndarray:
    """P = sum_ij |ij><ji| on C^d kron C^d; optionally scaled by 1/d."""
    d = int(d)
    if d < 1:
        raise DimensionError(f"SWAP dimension must be positive, got {d}")
    p = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            p[i * d + j, j * d + i] = 1.0
    return p / d if normalized else p


def cyclic_shift(d: int, k: int) -> np.ndarray:
    """Permutation of k tensor factors of dimension d: |x1..xk> -> |xk x1..x(k-1)>."""
    n = d ** k
    p = np.zeros((n, n), dtype=np.complex128)
    for idx in range(n):
        digits = np.unravel_index(idx, (d,) * k)
        shifted = (digits[-1],) + tuple(digits[:-1])
        p[np.ravel_multi_index(shifted, (d,) * k), idx] = 1.0
    return p


def ket(label: str, d: int = 2) -> np.ndarray:
    """Computational basis ket from a digit string, e.g. ket('01', 3)."""
    vector = np.zeros(d ** len(label), dtype=np.complex128)
    vector[int(label, d)] = 1.0
    return vector


def projector(psi: ArrayLike) -> np.ndarray:
    v = np.asarray(psi, dtype=np.complex128).reshape(-1)
    return np.outer(v, v.conj())


# =================== Characteristic Polynomial ===================
def power_traces(a: ArrayLike, upto: int) -> np.ndarray:
    """Tr[a^k] for k = 1..upto by repeated multiplication."""
    m = as_matrix(a)
    traces = np.zeros(upto, dtype=np.complex128)
    power = np.eye(m.shape[0], dtype=np.complex128)
    for k in range(upto):
        power = power @ m
        traces[k] = np.trace(power)
    return traces


def coeffs_from_moments(moments: Sequence[float]) -> List[float]:
    """Newton recursion a_k = (1/k) sum_i (-1)^(i-1) a_(k-i) m_i."""
    coeffs = [1.0]
    for k in range(1, len(moments) + 1):
        total = 0.0
        for i in range(1, k + 1):
            total += (-1) ** (i - 1) * coeffs[k - i] * moments[i - 1]
        coeffs.append(total / k)
    return coeffs[1:]


def char_coeffs(a: ArrayLike, upto: Optional[int] = None) -> List[float]:
    """Coefficients a_1..a_upto of det(x I - a) = x^n - a_1 x^(n-1) + a_2 x^(n-2) - ...

    The caller asserts a real spectrum; imaginary parts of the moments are dropped.
    """
    m = as_matrix(a)
    n = m.shape[0]
    upto = n if upto is None else int(upto)
    traces = power_traces(m, upto)
    residue = float(np.max(np.abs(traces.imag))) if upto else 0.0
    if residue > 1e-8 * max(1.0, float(np.max(np.abs(traces)))):
        logger.debug(f"char_coeffs: dropping imaginary moment residue {residue:.3e}")
    return coeffs_from_moments(list(traces.real))
