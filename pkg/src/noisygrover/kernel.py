"""Exact two-amplitude form of Grover search on an unstructured database.

The N-dimensional state stays in the two-dimensional subspace spanned by the
marked basis state and the uniform superposition of the rest, so one search
step is a 2x2 matrix acting on the pair (A, B): A is the marked amplitude,
B the common amplitude of the other N-1 entries. Everything here is exact
arithmetic on that pair; the dense N x N oracle exists only to cross-check
the reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, OracleSizeError

# Dense oracle is for validation only; above this it stops being cheap.
ORACLE_MAX_N = 4096

# n above this would push 2**n past exact float range in intermediate math.
MAX_QUBITS = 40


@dataclass(frozen=True)
class ProblemSize:
    """Database of N = 2**n items with a single marked item."""

    n: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1 or self.n > MAX_QUBITS:
            raise ConfigError(f"qubit count must be an integer in [1, {MAX_QUBITS}], got {self.n!r}")

    @property
    def N(self) -> int:
        return 2 ** self.n


@dataclass(frozen=True)
class AmplitudePair:
    """Marked amplitude A and common unmarked amplitude B."""

    A: float
    B: float


@dataclass(frozen=True)
class RotationAngles:
    """One search step rotates the pair by phi = 2*theta, sin(theta) = 1/sqrt(N)."""

    theta: float
    phi: float


def initial_state(size: ProblemSize) -> AmplitudePair:
    """Uniform superposition: every amplitude is 1/sqrt(N)."""
    r = 1.0 / math.sqrt(size.N)
    return AmplitudePair(A=r, B=r)


def angles(size: ProblemSize) -> RotationAngles:
    theta = math.asin(1.0 / math.sqrt(size.N))
    return RotationAngles(theta=theta, phi=2.0 * theta)


def step_matrix(size: ProblemSize) -> np.ndarray:
    """The 2x2 restriction of one Grover step to the (A, B) subspace."""
    N = size.N
    return np.array(
        [
            [1.0 - 2.0 / N, 2.0 - 2.0 / N],
            [-2.0 / N, 1.0 - 2.0 / N],
        ]
    )


def exact_step(state: AmplitudePair, size: ProblemSize) -> AmplitudePair:
    """Apply one noiseless search step to the amplitude pair."""
    N = size.N
    c11 = 1.0 - 2.0 / N
    c12 = 2.0 - 2.0 / N
    c21 = -2.0 / N
    return AmplitudePair(
        A=c11 * state.A + c12 * state.B,
        B=c21 * state.A + c11 * state.B,
    )


def amplitude_closed_form(size: ProblemSize, m: int) -> AmplitudePair:
    """Amplitudes after m steps, from the spectral form of the step matrix."""
    if m < 0:
        raise ConfigError(f"step count must be >= 0, got {m}")
    N = size.N
    phi = angles(size).phi
    c = math.cos(m * phi)
    s = math.sin(m * phi)
    rootN = math.sqrt(N)
    rootNm1 = math.sqrt(N - 1.0)
    return AmplitudePair(
        A=(c + rootNm1 * s) / rootN,
        B=(c - s / rootNm1) / rootN,
    )


def success_probability(size: ProblemSize, m: int) -> float:
    """P(m) = A_m**2 = sin((2m+1) theta)**2."""
    if m < 0:
        raise ConfigError(f"step count must be >= 0, got {m}")
    theta = angles(size).theta
    return math.sin((2 * m + 1) * theta) ** 2

def m_max(size: ProblemSize) -> int:
    """Step count maximizing P at the first peak, near pi*sqrt(N)/4.

    P is unimodal up to the first peak, so it suffices to compare the two
    integers bracketing the asymptotic location; ties go to the smaller m.
    """
    if size.N < 4:
        raise ConfigError(f"m_max needs N >= 4, got N={size.N}")
    x = math.pi * math.sqrt(size.N) / 4.0
    lo = max(int(math.floor(x)), 0)
    hi = int(math.ceil(x))
    if success_probability(size, lo) >= success_probability(size, hi):
        return lo
    return hi


def full_matrix_oracle(size: ProblemSize, m: int) -> np.ndarray:
    """Apply the dense N x N step matrix m times to the uniform start state.

    Validation oracle for the two-amplitude reduction: component 0 must equal
    A_m and components 1..N-1 must all equal B_m. Refuses N above the size
    guard; the dense product is only meant for tests.
    """
    N = size.N
    if N > ORACLE_MAX_N:
        raise OracleSizeError(f"dense oracle limited to N <= {ORACLE_MAX_N}, got N={N}")
    if m < 0:
        raise ConfigError(f"step count must be >= 0, got {m}")
    # One step is (inversion about the mean) x (marked-phase flip), dense form:
    # column 0 sees the flipped sign of the marked amplitude.
    U = np.full((N, N), 2.0 / N)
    np.fill_diagonal(U, 2.0 / N - 1.0)
    U[:, 0] = -2.0 / N
    U[0, 0] = 1.0 - 2.0 / N
    psi = np.full(N, 1.0 / math.sqrt(N))
    for _ in range(m):
        psi = U @ psi
    return psi
