"""Per-step Gaussian noise for the two-amplitude recursion.

One noisy step is exact_step followed by an additive two-component Gaussian
sample and a renormalization of the implied N-dimensional state. The sampler
is Box-Muller over uniforms on (0,1]; the width parameter can be read as the
standard deviation (default) or placed inside the square root so that sigma
is the variance (the alternative convention, selectable per spec).

numpy ufuncs are used for every transcendental in this path on purpose:
math.log and np.log can differ in the last bit, and the batched ladder engine
must reproduce the scalar path bit-for-bit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateStateError
from .kernel import AmplitudePair, ProblemSize, exact_step

# Below this squared norm the state carries no usable information and
# renormalization would amplify garbage; treat it as a failed run.
DEGENERATE_NORM_SQ = 1e-300


class NoiseConvention(enum.Enum):
    """How the width parameter enters the Box-Muller radius.

    PAPER_EXACT:        r = sqrt(-2*sigma*ln x1), i.e. sigma is the variance.
    STANDARD_DEVIATION: r = sigma*sqrt(-2*ln x1), i.e. sigma is the SD.
    """

    PAPER_EXACT = "paper"
    STANDARD_DEVIATION = "stddev"


DEFAULT_CONVENTION = NoiseConvention.STANDARD_DEVIATION


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian width parameter plus the convention for reading it."""

    sigma: float
    convention: NoiseConvention = DEFAULT_CONVENTION

    def __post_init__(self) -> None:
        if not (self.sigma >= 0.0):
            raise ConfigError(f"noise width must be >= 0, got {self.sigma!r}")


@dataclass(frozen=True)
class NoiseSample:
    """Additive noise on (A, B) from one Box-Muller draw."""

    a: float
    b: float


class RandomStream:
    """Deterministic uniform source on (0,1], identified by a 64-bit seed.

    Wraps a PCG64 generator; identical seeds give identical sequences on any
    platform and any thread schedule. Streams for independent runs are derived
    by hashing (master_seed, run_index), never by sharing one stream.
    """

    def __init__(self, seed: int) -> None:
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ConfigError(f"seed must fit in 64 bits, got {seed!r}")
        self.seed = seed
        self._gen = np.random.Generator(np.random.PCG64(seed))

    def uniform(self) -> float:
        """One uniform double on (0,1]."""
        return 1.0 - self._gen.random()

    def uniform_block(self, shape: tuple[int, ...]) -> np.ndarray:
        """Uniform doubles on (0,1], consumed from the stream in C order.

        Block draws consume exactly the same underlying doubles as repeated
        single draws, so batched and scalar consumers stay interchangeable.
        """
        return 1.0 - self._gen.random(shape)

    @staticmethod
    def derive_seed(*entropy: int) -> int:
        """Collapse an entropy tuple to a single 64-bit stream seed."""
        ss = np.random.SeedSequence(entropy)
        return int(ss.generate_state(1, np.uint64)[0])


def sample_noise(spec: NoiseSpec, rng: RandomStream) -> NoiseSample:
    """One two-component Gaussian sample; consumes exactly two uniforms."""
    x1 = rng.uniform()
    x2 = rng.uniform()
    if spec.convention is NoiseConvention.PAPER_EXACT:
        r = np.sqrt(-2.0 * spec.sigma * np.log(x1))
    else:
        r = spec.sigma * np.sqrt(-2.0 * np.log(x1))
    angle = 2.0 * np.pi * x2
    return NoiseSample(a=float(r * np.sin(angle)), b=float(r * np.cos(angle)))


def sample_noise_block(spec: NoiseSpec, rng: RandomStream, count: int) -> tuple[np.ndarray, np.ndarray]:
    """count noise samples at once; stream-equivalent to count sample_noise calls."""
    u = rng.uniform_block((count, 2))
    if spec.convention is NoiseConvention.PAPER_EXACT:
        r = np.sqrt(-2.0 * spec.sigma * np.log(u[:, 0]))
    else:
        r = spec.sigma * np.sqrt(-2.0 * np.log(u[:, 0]))
    angle = 2.0 * np.pi * u[:, 1]
    return r * np.sin(angle), r * np.cos(angle)


def renormalize(state: AmplitudePair, size: ProblemSize) -> AmplitudePair:
    """Rescale so the implied N-vector has unit 2-norm."""
    nm1 = float(size.N - 1)
    norm2 = state.A * state.A + nm1 * state.B * state.B
    if norm2 < DEGENERATE_NORM_SQ:
        raise DegenerateStateError(f"state norm collapsed: A={state.A!r} B={state.B!r} N={size.N}")
    inv = 1.0 / np.sqrt(norm2)
    return AmplitudePair(A=float(state.A * inv), B=float(state.B * inv))


def noisy_step(state: AmplitudePair, size: ProblemSize, spec: NoiseSpec, rng: RandomStream) -> AmplitudePair:
    """One search step with additive noise before renormalization.

    With sigma=0 this short-circuits to exact_step: no uniforms are consumed
    and no renormalization is applied, so the zero-noise trajectory is
    bit-for-bit the exact trajectory.
    """
    if spec.sigma == 0.0:
        return exact_step(state, size)
    stepped = exact_step(state, size)
    noise = sample_noise(spec, rng)
    return renormalize(AmplitudePair(A=stepped.A + noise.a, B=stepped.B + noise.b), size)
