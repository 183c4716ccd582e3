"""
Moment engines and moment-based eigenvalue bounds.

Four moment kinds are computed by repeated multiplication:

    pt       p_k = Tr[(rho^T_B)^k]
    realign  m_k = Tr[R(rho)^k]
    gram     T_k = Tr[(R^dagger R)^k]
    zhang    r_k = sum_i sigma_i(R)^k

The module also carries the Descartes sign test for positive
semidefiniteness, closed-form eigenvalue bounds from the first few moments,
the SWAP identity m_1 = Tr[rho P^T_B] with a shot-noise simulation of its
measurement, and the intervals that bound T_1, T_2 and m_1 from measurable
quantities.
"""

import csv
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from loguru import logger

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import Config
from Kernel.matkit import (
    ArrayLike,
    DimSpec,
    as_matrix,
    char_coeffs,
    cyclic_shift,
    eigh_pairs,
    kron_all,
    partial_transpose,
    power_traces,
    realign,
    svd_values,
    swap_operator,
)
from States.statebank import DensityMatrix, as_state
from utils.errors import DimensionError, DomainError, InputError

StateLike = Union[DensityMatrix, ArrayLike]


# =================== Data Structures ===================
class MomentKind(str, Enum):
    PT = "pt"
    REALIGN = "realign"
    GRAM = "gram"
    ZHANG = "zhang"


@dataclass
class MomentVector:
    """Moments m_1..m_K of one kind; `values[k-1]` holds the k-th moment."""

    kind: MomentKind
    values: List[float]
    label: str = ""
    imag_residue: float = 0.0

    def __getitem__(self, k: int) -> float:
        if not 1 <= k <= len(self.values):
            raise IndexError(f"moment order {k} outside 1..{len(self.values)}")
        return self.values[k - 1]

    def __len__(self) -> int:
        return len(self.values)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "label": self.label, "values": list(self.values), "imag_residue": self.imag_residue}

    def csv_rows(self) -> List[Tuple[str, str, int, float]]:
        return [(self.label, self.kind.value, k, v) for k, v in enumerate(self.values, start=1)]


@dataclass
class EigenBounds:
    lambda_min_lb: float
    lambda_max_lb: float
    lambda_max_ub: float
    degenerate: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class DescartesResult:
    """Sign analysis of the characteristic coefficients a_1..a_n of det(xI - A)."""

    psd: bool
    coefficients: List[float]
    negative_roots: int
    tolerance: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class DkProduct:
    """Rank k of R(rho), the product D_k of its nonzero squared singular values, and D_1..D_3."""

    k: int
    d_k: float
    singular_values: List[float]
    d1: float
    d2: float
    d3: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class CopyMomentProbe:
    k: int
    reference: float
    cyclic_shift: float
    normalized_power: float
    tolerance: float = 1e-10

    @property
    def cyclic_shift_agrees(self) -> bool:
        return abs(self.cyclic_shift - self.reference) <= self.tolerance * max(1.0, abs(self.reference))

    @property
    def normalized_power_agrees(self) -> bool:
        return abs(self.normalized_power - self.reference) <= self.tolerance * max(1.0, abs(self.reference))

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["cyclic_shift_agrees"] = self.cyclic_shift_agrees
        data["normalized_power_agrees"] = self.normalized_power_agrees
        return data


@dataclass
class MomentEstimate:
    estimate: float
    standard_error: float
    shots: int
    seed: int
    exact: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class IntervalCheck:
    """Measured T_1 against the m_1-based interval; `contained` is reported, never enforced."""

    m1: float
    t1: float
    k: int
    j: int
    lower: float
    upper: float
    contained: bool
    upper_condition_holds: bool

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class M1Interval:
    case: str  # "case1", "case2" or "none"
    lower: Optional[float] = None
    upper: Optional[float] = None
    x: float = 0.0
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


# =================== Helpers ===================
def _square_dims(state: DensityMatrix) -> int:
    d1, d2 = state.dims.bipartite()
    if d1 != d2:
        raise DimensionError(f"Operation needs a d x d state, got dims {state.dims.dims}")
    return d1


def _real_moments(m: np.ndarray, upto: int) -> Tuple[List[float], float]:
    traces = power_traces(m, upto)
    residue = float(np.max(np.abs(traces.imag))) if upto else 0.0
    return [float(v) for v in traces.real], residue


# =================== Moment Engines ===================
def pt_moments(rho: StateLike, K: int = 3, dims=None) -> MomentVector:
    """p_1..p_K of the partial transpose on the second party."""
    state = as_state(rho, dims)
    values, residue = _real_moments(partial_transpose(state.matrix, state.dims), K)
    return MomentVector(MomentKind.PT, values, label=state.label, imag_residue=residue)


def realign_moments(rho: StateLike, K: int = 3, dims=None) -> MomentVector:
    state = as_state(rho, dims)
    _square_dims(state)
    values, residue = _real_moments(realign(state.matrix, state.dims), K)
    if residue > Config.CUBIC_IMAG_TOL:
        logger.debug(f"realign_moments: imaginary residue {residue:.3e} dropped")
    return MomentVector(MomentKind.REALIGN, values, label=state.label, imag_residue=residue)


def gram_moments(rho: StateLike, K: int = 3, dims=None) -> MomentVector:
    """T_k = Tr[(R^dagger R)^k]; T_1 is the squared Frobenius norm of R."""
    state = as_state(rho, dims)
    r = realign(state.matrix, state.dims)
    values, residue = _real_moments(r.conj().T @ r, K)
    return MomentVector(MomentKind.GRAM, values, label=state.label, imag_residue=residue)


def zhang_moments(rho: StateLike, K: int = 3, dims=None) -> MomentVector:
    state = as_state(rho, dims)
    sigma = svd_values(realign(state.matrix, state.dims)).values
    values = [float(np.sum(sigma ** k)) for k in range(1, K + 1)]
    return MomentVector(MomentKind.ZHANG, values, label=state.label)


def gram_char_coeffs(t1: float, t2: float, t3: float) -> Tuple[float, float, float]:
    """D_1, D_2, D_3 of the characteristic polynomial of R^dagger R from its moments."""
    return -t1, 0.5 * (t1 * t1 - t2), -(t1 ** 3 - 3 * t1 * t2 + 2 * t3) / 6


# =================== Descartes Test ===================
def descartes_psd(a: ArrayLike, tol: Optional[float] = None) -> DescartesResult:
    """PSD test for a real-spectrum matrix by the signs of its characteristic coefficients.

    With det(xI - A) = x^n - a_1 x^(n-1) + a_2 x^(n-2) - ..., a real-rooted
    polynomial has no negative root iff every a_i >= 0; the number of sign
    changes along (1, a_1, ..., a_n) counts the negative eigenvalues.
    """
    m = as_matrix(a)
    coeffs = char_coeffs(m)
    base = Config.DESCARTES_TOL if tol is None else float(tol)
    threshold = base * max(1.0, max(abs(c) for c in coeffs))
    psd = all(c >= -threshold for c in coeffs)

    signs = [1]
    for c in coeffs:
        if abs(c) > threshold:
            signs.append(1 if c > 0 else -1)
    changes = sum(1 for s0, s1 in zip(signs, signs[1:]) if s0 != s1)
    logger.debug(f"descartes_psd: tolerance {threshold:.3e}, sign changes {changes}")
    return DescartesResult(psd=psd, coefficients=coeffs, negative_roots=changes, tolerance=threshold)


# =================== Eigenvalue Bounds ===================
def _min_lb_from_moments(t1: float, t2: float, n: int) -> float:
    variance = t2 / n - (t1 / n) ** 2
    return t1 / n - math.sqrt(max(0.0, (n - 1) * variance))


def lambda_min_lb(a: ArrayLike) -> float:
    """Tr[a]/n - sqrt((n-1)(Tr[a^2]/n - (Tr[a]/n)^2)), a lower bound on the smallest eigenvalue."""
    m = as_matrix(a)
    traces = power_traces(m, 2).real
    return _min_lb_from_moments(float(traces[0]), float(traces[1]), m.shape[0])


def cubic_closed_form(t1: float, t2: float, t3: float) -> float:
    """Radical formula for the largest root of T1 x^3 - 2 T2 x^2 + T3 x + T2^2 - T1 T3."""
    p = -27 * t1 ** 2 * t2 ** 2 + 16 * t2 ** 3 + 27 * t1 ** 3 * t3 - 18 * t1 * t2 * t3
    r = 4 * t2 ** 2 - 3 * t1 * t3
    q = p * p - 4 * r ** 3
    cube = (p + np.sqrt(complex(q))) ** (1 / 3)
    if abs(cube) == 0:
        return float(4 * t2 / (6 * t1))
    value = (4 * t2 + 2 * 2 ** (1 / 3) * r / cube + 2 ** (2 / 3) * cube) / (6 * t1)
    return float(value.real)


def largest_cubic_root(t1: float, t2: float, t3: float) -> float:
    roots = np.roots([t1, -2 * t2, t3, t2 * t2 - t1 * t3])
    tol = Config.CUBIC_IMAG_TOL
    lead = max(roots, key=lambda z: z.real)
    # a double root splits into a conjugate pair of order sqrt(eps)
    if abs(lead.imag) <= math.sqrt(tol) * max(1.0, abs(lead)):
        return float(lead.real)
    real = [z.real for z in roots if abs(z.imag) <= tol * max(1.0, abs(z))]
    if not real:
        raise DomainError("Cubic bound has no real root")
    return float(max(real))


def lambda_max_bounds(t1: float, t2: float, t3: float, n: int) -> EigenBounds:
    """Moment bounds f(T1, T2, T3) <= lambda_max <= g(T1, T2, T3) for a PSD matrix of order n.

    Args:
        t1, t2, t3: Tr[A], Tr[A^2], Tr[A^3].
        n: Matrix order.

    Returns:
        EigenBounds; when all eigenvalues coincide every bound equals T1/n.
    """
    a = t2 / n - (t1 / n) ** 2
    if a <= Config.CUBIC_IMAG_TOL * max(1.0, (t1 / n) ** 2):
        mean = t1 / n
        return EigenBounds(mean, mean, mean, degenerate=True)
    b = (n * n * t3 - 3 * n * t1 * t2 + 2 * t1 ** 3) / n ** 3
    f = t1 / n + (b + math.sqrt(max(0.0, b * b + 4 * a ** 3))) / (2 * a)
    g = largest_cubic_root(t1, t2, t3)
    closed = cubic_closed_form(t1, t2, t3)
    if abs(closed - g) > 1e-6 * max(1.0, abs(g)):
        logger.debug(f"lambda_max_bounds: closed-form root {closed:.9g} differs from companion root {g:.9g}")
    return EigenBounds(lambda_min_lb=_min_lb_from_moments(t1, t2, n), lambda_max_lb=f, lambda_max_ub=g)


def gram_eigen_bounds(rho: StateLike, dims=None) -> EigenBounds:
    """lambda_max_bounds applied to R^dagger R."""
    state = as_state(rho, dims)
    t = gram_moments(state, 3)
    _, d2 = state.dims.bipartite()
    return lambda_max_bounds(t[1], t[2], t[3], d2 * d2)


# =================== Realigned Rank Products ===================
def dk_product(rho: StateLike, tol: Optional[float] = None, dims=None) -> DkProduct:
    state = as_state(rho, dims)
    summary = svd_values(realign(state.matrix, state.dims), tol=tol)
    if summary.rank == 0:
        raise DomainError("Realigned matrix is zero; D_k undefined")
    nonzero = summary.values[: summary.rank]
    d_k = float(np.prod(nonzero ** 2))
    t = gram_moments(state, 3)
    d1, d2, d3 = gram_char_coeffs(t[1], t[2], t[3])
    logger.debug(f"dk_product: rank {summary.rank} at tolerance {summary.tolerance:.3e}")
    return DkProduct(k=summary.rank, d_k=d_k, singular_values=[float(s) for s in summary.values], d1=d1, d2=d2, d3=d3)


# =================== SWAP Identities ===================
def swap_observable(d: int) -> np.ndarray:
    """P^T_B for the unnormalized SWAP on C^d kron C^d, i.e. d |phi+><phi+|."""
    return partial_transpose(swap_operator(d), (d, d))


def first_moment_via_swap(rho: StateLike, dims=None) -> float:
    """m_1 = Tr[R(rho)] evaluated as Tr[rho P^T_B]."""
    state = as_state(rho, dims)
    d = _square_dims(state)
    return float(np.real(np.trace(state.matrix @ swap_observable(d))))


def moment_via_copies(rho: StateLike, k: int, dims=None) -> CopyMomentProbe:
    """Evaluate the k-copy expression Tr[(R kron ... kron R) X] under two readings of X.

    `cyclic_shift` uses the cyclic permutation of the k copies, which
    reproduces Tr[R^k]; `normalized_power` uses (C_k / d)^k, the literal power
    of the shift carrying the 1/d normalization of the SWAP.
    """
    state = as_state(rho, dims)
    d = _square_dims(state)
    k = int(k)
    if not 1 <= k <= 3 or d > 3:
        raise InputError(f"moment_via_copies supports d <= 3 and 1 <= k <= 3, got d={d}, k={k}")
    r = realign(state.matrix, state.dims)
    copies = kron_all([r] * k)
    shift = cyclic_shift(d * d, k)
    reference = realign_moments(state, k)[k]

    cyclic = float(np.real(np.trace(copies @ shift)))
    normalized = shift / d
    power = np.eye(shift.shape[0], dtype=np.complex128)
    for _ in range(k):
        power = power @ normalized
    literal = float(np.real(np.trace(copies @ power)))
    return CopyMomentProbe(k=k, reference=reference, cyclic_shift=cyclic, normalized_power=literal)


def estimate_first_moment(rho: StateLike, shots: int = Config.DEFAULT_SHOTS, seed: int = Config.DEFAULT_SEED, dims=None) -> MomentEstimate:
    """Simulate projective measurement of P^T_B on `shots` copies of rho.

    Outcomes are eigenvalues of P^T_B drawn with Born weights <v|rho|v>; the
    sample mean estimates m_1.
    """
    if int(shots) < 1:
        raise InputError(f"shots must be >= 1, got {shots}")
    state = as_state(rho, dims)
    d = _square_dims(state)
    values, vectors = eigh_pairs(swap_observable(d))
    weights = np.real(np.einsum("ij,jk,ki->i", vectors.conj().T, state.matrix, vectors))
    weights = np.clip(weights, 0.0, None)
    weights = weights / weights.sum()
    rng = np.random.default_rng(seed)
    outcomes = rng.choice(values, size=int(shots), p=weights)
    estimate = float(np.mean(outcomes))
    stderr = float(np.std(outcomes, ddof=1) / math.sqrt(shots)) if shots > 1 else 0.0
    exact = first_moment_via_swap(state)
    logger.debug(f"estimate_first_moment: {shots} shots, estimate {estimate:.6f} +/- {stderr:.2e}, exact {exact:.6f}")
    return MomentEstimate(estimate=estimate, standard_error=stderr, shots=int(shots), seed=int(seed), exact=exact)


# =================== Estimation Intervals ===================
def _check_jk(j: int, k: int) -> None:
    if j < 1 or k < 1:
        raise InputError(f"j and k must be >= 1, got j={j}, k={k}")
    if j > k:
        raise InputError(f"interval requires j <= k, got j={j}, k={k}")


def t1_interval_from_m1(m1: float, j: int, k: int) -> Tuple[float, float]:
    """m1^2/k <= T1 <= m1^2/j."""
    _check_jk(j, k)
    return m1 * m1 / k, m1 * m1 / j


def t2_interval_from_m1(m1: float, j: int, k: int, d: int) -> Tuple[float, float]:
    """m1^4/(d^2 k^2) <= T2 <= m1^4/j^2."""
    _check_jk(j, k)
    return m1 ** 4 / (d * d * k * k), m1 ** 4 / (j * j)


def check_t1_interval(rho: StateLike, j: Optional[int] = None, dims=None) -> IntervalCheck:
    """Compare the measured T1 with its m1-based interval (defaults to j = k)."""
    state = as_state(rho, dims)
    m1 = realign_moments(state, 1)[1]
    t1 = gram_moments(state, 1)[1]
    k = dk_product(state).k
    j = k if j is None else int(j)
    lower, upper = t1_interval_from_m1(m1, j, k)
    slack = Config.DECISION_MARGIN
    contained = lower - slack <= t1 <= upper + slack
    if not contained:
        logger.info(f"T1 = {t1:.6g} outside [{lower:.6g}, {upper:.6g}] for {state.label or 'state'}")
    return IntervalCheck(m1=m1, t1=t1, k=k, j=j, lower=lower, upper=upper, contained=contained,
                         upper_condition_holds=t1 <= m1 * m1 / j + slack)


def m1_interval_from_s1(s1: float, l: float, d: int) -> M1Interval:
    """Bracket m_1 from the measured SPA quantity s_1 and the shift l.

    Case 1 applies when 2 - d^2 s1 + 2 sqrt(x) <= d^4 l <= d^4, Case 2 when
    0 <= d^4 l <= 2 - d^2 s1 - 2 sqrt(x), with x = 1 - d^2 s1.

    Raises:
        InputError: l outside [0, 1].
        DomainError: x < 0 or a negative radicand in the Case 1 bounds.
    """
    if not 0 <= l <= 1:
        raise InputError(f"l must lie in [0, 1], got {l}")
    d2, d4 = d * d, d ** 4
    x = 1 - d2 * s1
    if x < 0:
        raise DomainError(f"x = 1 - d^2 s1 = {x:.6g} < 0")
    root_x = math.sqrt(x)
    scaled = d4 * l

    if 2 - d2 * s1 + 2 * root_x <= scaled <= d4:
        radicand = d ** 8 + 2 * d ** 6 * s1 + 4 * d2 * s1 + d4 * s1 * s1 - 8 * (1 + root_x)
        if radicand < 0:
            raise DomainError(f"Case 1 radicand {radicand:.6g} < 0")
        root = math.sqrt(radicand)
        lower = 0.5 * (-d2 + s1) - root / (2 * d2)
        upper = -(x + root_x) / d2 + root / (2 * d2)
        return M1Interval("case1", lower, upper, x)
    if 0 <= scaled <= 2 - d2 * s1 - 2 * root_x:
        inner = math.sqrt(max(0.0, 1 + x - 2 * root_x))
        lower = (-x + root_x - inner) / d2
        upper = s1 / 2 + inner / d2
        return M1Interval("case2", lower, upper, x)
    return M1Interval("none", x=x, notes=[f"d^4 l = {scaled:.6g} lies between the two case windows"])


# =================== Export ===================
def write_moments_csv(vectors: Iterable[MomentVector], path: str) -> int:
    """Write (label, kind, k, value) rows; returns the row count."""
    rows = 0
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["label", "kind", "k", "value"])
        for vector in vectors:
            for row in vector.csv_rows():
                writer.writerow(row)
                rows += 1
    return rows
