"""
Finite-N network of 2N binary neurons under asynchronous Glauber dynamics.

Weights are uniform: each synapse carries w / N, so the local field of a neuron depends only on
the cached population sums. The sums include the neuron itself (no self-exclusion), an O(1/N)
effect. One time unit is 2N single-neuron updates.

Random numbers come from `numpy.random.Generator(Philox(seed))`, a counter-based generator:
identical (config, seed) pairs give bit-identical traces.
"""

import dataclasses
import logging
import math

import numpy as np
from numba import njit

from src.config.app import DEBUG_CHECKS, Population, SystemVariant
from src.dynamics.models import SystemParams
from src.exceptions import DomainError, SimulationError

logger = logging.getLogger(__name__)

RANDOM_BLOCK = 1 << 18


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


@dataclasses.dataclass(frozen=True)
class GlauberConfig:
    """
    :param n: neurons per population
    :param params: full-variant parameters; weights are population means applied as w / N
    :param seed: 64-bit seed of the Philox generator
    :param t_end: simulated time, one unit is 2N updates
    :param sample_every: sampling interval of the population means
    :param initial_e: deterministic initial excitatory fraction (first k neurons active), random
        fair coins when absent
    """

    n: int
    params: SystemParams
    seed: int = 0
    t_end: float = 60.0
    sample_every: float = 0.05
    initial_e: float | None = None
    initial_i: float | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"Population size must be >= 1, got {self.n}")
        if not self.t_end > 0:
            raise DomainError(f"t_end must be positive, got {self.t_end}")
        if not self.sample_every > 0:
            raise DomainError(f"sample_every must be positive, got {self.sample_every}")
        if self.params.variant is not SystemVariant.FULL:
            raise DomainError("Glauber network runs the full system (with thresholds)")
        for fraction in (self.initial_e, self.initial_i):
            if fraction is not None and not 0 <= fraction <= 1:
                raise DomainError(f"Initial active fraction must lie in [0, 1], got {fraction}")

    @property
    def dt(self) -> float:
        return 1.0 / (2 * self.n)

    @property
    def total_steps(self) -> int:
        return int(math.ceil(self.t_end * 2 * self.n - 1e-9))

    @property
    def sample_stride(self) -> int:
        return max(1, int(round(self.sample_every * 2 * self.n)))

    def kernel_args(self) -> tuple[float, ...]:
        w = self.params.weights
        return (
            w.w_ee,
            w.w_ei,
            w.w_ie,
            w.w_ii,
            self.params.h_e,
            self.params.h_i,
            self.params.beta,
        )


@dataclasses.dataclass
class BinaryNetworkState:
    x_e: np.ndarray
    x_i: np.ndarray
    sum_e: int
    sum_i: int
    t: float = 0.0
    # last update, for inspection: (population, index, new value)
    last_update: tuple[Population, int, int] | None = None

    @classmethod
    def from_arrays(cls, x_e: np.ndarray, x_i: np.ndarray, t: float = 0.0) -> "BinaryNetworkState":
        x_e = np.asarray(x_e, dtype=np.int8).copy()
        x_i = np.asarray(x_i, dtype=np.int8).copy()
        if x_e.shape != x_i.shape or x_e.ndim != 1:
            raise DomainError("Both populations need the same size")
        if not (np.isin(x_e, (0, 1)).all() and np.isin(x_i, (0, 1)).all()):
            raise DomainError("Neuron states must be 0 or 1")
        return cls(x_e=x_e, x_i=x_i, sum_e=int(x_e.sum()), sum_i=int(x_i.sum()), t=t)

    @classmethod
    def initial(cls, config: GlauberConfig, rng: np.random.Generator) -> "BinaryNetworkState":
        def population(fraction: float | None) -> np.ndarray:
            if fraction is None:
                return rng.integers(0, 2, size=config.n, dtype=np.int8)
            active = np.zeros(config.n, dtype=np.int8)
            active[: int(round(fraction * config.n))] = 1
            return active

        return cls.from_arrays(population(config.initial_e), population(config.initial_i))

    @property
    def n(self) -> int:
        return len(self.x_e)

    @property
    def mean_e(self) -> float:
        return self.sum_e / self.n

    @property
    def mean_i(self) -> float:
        return self.sum_i / self.n

    def verify(self) -> None:
        """Cached sums against a full recount"""
        if self.sum_e != int(self.x_e.sum()) or self.sum_i != int(self.x_i.sum()):
            raise SimulationError(
                f"Cached sums ({self.sum_e}, {self.sum_i}) differ from the recount "
                f"({int(self.x_e.sum())}, {int(self.x_i.sum())})"
            )


@dataclasses.dataclass(frozen=True)
class PopulationTrace:
    times: np.ndarray
    mean_e: np.ndarray
    mean_i: np.ndarray

    def __post_init__(self) -> None:
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise DomainError("Trace times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    def rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.times.tolist(), self.mean_e.tolist(), self.mean_i.tolist()))


def local_field(
    index: int, population: Population, state: BinaryNetworkState, config: GlauberConfig
) -> float:
    if not 0 <= index < state.n:
        raise DomainError(f"Neuron index {index} out of range for N={state.n}")

    w_ee, w_ei, w_ie, w_ii, h_e, h_i, _ = config.kernel_args()
    # uniform weights: the field is the same for every neuron of a population
    if Population(population) is Population.E:
        return (w_ee * state.sum_e - w_ei * state.sum_i) / state.n - h_e
    return (w_ie * state.sum_e - w_ii * state.sum_i) / state.n - h_i


def activation_probability(field: float, beta: float) -> float:
    return 0.5 * (1.0 + math.tanh(beta * field))


def glauber_step(
    state: BinaryNetworkState, config: GlauberConfig, rng: np.random.Generator
) -> BinaryNetworkState:
    """Re-samples one uniformly chosen neuron among 2N, in place; returns the same state"""
    pick = int(rng.integers(0, 2 * state.n))
    uniform = float(rng.random())

    population = Population.E if pick < state.n else Population.I
    index = pick if population is Population.E else pick - state.n
    probability = activation_probability(
        local_field(index, population, state, config), config.params.beta
    )
    new_value = 1 if uniform < probability else 0

    if population is Population.E:
        state.sum_e += new_value - int(state.x_e[index])
        state.x_e[index] = new_value
    else:
        state.sum_i += new_value - int(state.x_i[index])
        state.x_i[index] = new_value

    state.t += 1.0 / (2 * state.n)
    state.last_update = (population, index, new_value)
    return state


@njit(cache=True)
def _run_block(x_e, x_i, sums, picks, uniforms, stride, step0, samples, recorded, args):
    n = x_e.shape[0]
    w_ee, w_ei, w_ie, w_ii, h_e, h_i, beta = args
    for k in range(picks.shape[0]):
        pick = picks[k]
        if pick < n:
            field = (w_ee * sums[0] - w_ei * sums[1]) / n - h_e
            new_value = 1 if uniforms[k] < 0.5 * (1.0 + math.tanh(beta * field)) else 0
            sums[0] += new_value - x_e[pick]
            x_e[pick] = new_value
        else:
            index = pick - n
            field = (w_ie * sums[0] - w_ii * sums[1]) / n - h_i
            new_value = 1 if uniforms[k] < 0.5 * (1.0 + math.tanh(beta * field)) else 0
            sums[1] += new_value - x_i[index]
            x_i[index] = new_value

        if (step0 + k + 1) % stride == 0:
            samples[recorded, 0] = sums[0] / n
            samples[recorded, 1] = sums[1] / n
            recorded += 1
    return recorded


def simulate(
    config: GlauberConfig, initial_state: BinaryNetworkState | None = None
) -> PopulationTrace:
    """
    Runs ceil(t_end * 2N) updates and samples the population means every `sample_every`
    (after the update that lands on the sampling time), starting with a sample at t = 0.
    """
    rng = make_rng(config.seed)
    state = initial_state or BinaryNetworkState.initial(config, rng)
    if state.n != config.n:
        raise DomainError(f"Initial state has N={state.n}, config expects {config.n}")

    total_steps = config.total_steps
    stride = config.sample_stride
    samples = np.empty((total_steps // stride + 1, 2))
    samples[0] = state.mean_e, state.mean_i
    recorded = 1

    x_e = state.x_e.copy()
    x_i = state.x_i.copy()
    sums = np.array([state.sum_e, state.sum_i], dtype=np.int64)
    args = config.kernel_args()
    logger.info(
        "Glauber run: N=%(n)s, %(steps)s updates, seed=%(seed)s",
        {"n": config.n, "steps": total_steps, "seed": config.seed},
    )

    done = 0
    while done < total_steps:
        block = min(RANDOM_BLOCK, total_steps - done)
        picks = rng.integers(0, 2 * config.n, size=block)
        uniforms = rng.random(block)
        recorded = _run_block(
            x_e, x_i, sums, picks, uniforms, stride, done, samples, recorded, args
        )
        done += block
        if DEBUG_CHECKS:
            BinaryNetworkState(x_e, x_i, int(sums[0]), int(sums[1])).verify()

    times = np.arange(recorded) * stride * config.dt
    return PopulationTrace(
        times=times, mean_e=samples[:recorded, 0].copy(), mean_i=samples[:recorded, 1].copy()
    )
