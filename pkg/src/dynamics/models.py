import cmath
import dataclasses
import enum
import math
from typing import NamedTuple

from src.config.app import SystemVariant, DEFAULT_BETA
from src.exceptions import DomainError, DegenerateError

MARGINAL_TOLERANCE = 1e-9


@dataclasses.dataclass(frozen=True)
class SynapticWeights:
    """
    Mean synaptic strengths of the uniform network.

    w_ei and w_ii are stored as the positive magnitudes of the inhibitory couplings,
    the sign is applied by the vector fields.
    """

    w_ee: float
    w_ei: float
    w_ie: float
    w_ii: float

    def __post_init__(self) -> None:
        for name, value in self.as_dict().items():
            if not math.isfinite(value) or value < 0:
                raise DomainError(f"Synaptic weight {name} must be finite and >= 0, got {value}")
            object.__setattr__(self, name, float(value))

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)

    def replace(self, **changes: float) -> "SynapticWeights":
        return dataclasses.replace(self, **changes)


@dataclasses.dataclass(frozen=True)
class FiringThresholds:
    h_e: float
    h_i: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.h_e) and math.isfinite(self.h_i)):
            raise DomainError(f"Thresholds must be finite: {self}")
        object.__setattr__(self, "h_e", float(self.h_e))
        object.__setattr__(self, "h_i", float(self.h_i))


@dataclasses.dataclass(frozen=True)
class SystemParams:
    weights: SynapticWeights
    thresholds: FiringThresholds | None = None
    beta: float = DEFAULT_BETA
    variant: SystemVariant = SystemVariant.REDUCED

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", SystemVariant(self.variant))
        if not math.isfinite(self.beta) or self.beta < 0:
            raise DomainError(f"Inverse temperature must be finite and >= 0, got {self.beta}")
        object.__setattr__(self, "beta", float(self.beta))
        if self.variant is SystemVariant.FULL and self.thresholds is None:
            raise DomainError("Full system needs firing thresholds")
        if self.variant is SystemVariant.REDUCED and self.thresholds is not None:
            raise DomainError("Reduced system has its thresholds eliminated")

    @classmethod
    def reduced(cls, weights: SynapticWeights, beta: float = DEFAULT_BETA) -> "SystemParams":
        return cls(weights=weights, beta=beta, variant=SystemVariant.REDUCED)

    @classmethod
    def full(
        cls, weights: SynapticWeights, thresholds: FiringThresholds, beta: float = DEFAULT_BETA
    ) -> "SystemParams":
        return cls(weights=weights, thresholds=thresholds, beta=beta, variant=SystemVariant.FULL)

    @property
    def temperature(self) -> float:
        if self.beta == 0:
            raise DegenerateError("Temperature is undefined at beta = 0")
        return 1.0 / self.beta

    @property
    def h_e(self) -> float:
        return self.thresholds.h_e if self.thresholds else 0.0

    @property
    def h_i(self) -> float:
        return self.thresholds.h_i if self.thresholds else 0.0

    @property
    def offset(self) -> float:
        """Resting level of each activity: .5 in the full system, 0 in the reduced one"""
        return 0.5 if self.variant is SystemVariant.FULL else 0.0

    @property
    def box(self) -> tuple[float, float]:
        return self.offset - 0.5, self.offset + 0.5

    def with_weights(self, **changes: float) -> "SystemParams":
        return dataclasses.replace(self, weights=self.weights.replace(**changes))

    def with_thresholds(self, **changes: float) -> "SystemParams":
        if self.thresholds is None:
            raise DomainError("Reduced system has no thresholds to change")
        return dataclasses.replace(self, thresholds=dataclasses.replace(self.thresholds, **changes))


class ActivityPoint(NamedTuple):
    s: float
    sigma: float

    def __neg__(self) -> "ActivityPoint":
        return ActivityPoint(-self.s, -self.sigma)

    def shifted(self, delta: float) -> "ActivityPoint":
        return ActivityPoint(self.s + delta, self.sigma + delta)

    def distance(self, other: "ActivityPoint") -> float:
        return math.hypot(self.s - other.s, self.sigma - other.sigma)


class StabilityClass(enum.StrEnum):
    STABLE_NODE = "StableNode"
    STABLE_SPIRAL = "StableSpiral"
    UNSTABLE_NODE = "UnstableNode"
    UNSTABLE_SPIRAL = "UnstableSpiral"
    SADDLE = "Saddle"
    MARGINAL = "Marginal"

    @property
    def is_stable(self) -> bool:
        return self in (StabilityClass.STABLE_NODE, StabilityClass.STABLE_SPIRAL)


@dataclasses.dataclass(frozen=True)
class JacobianInfo:
    a11: float
    a12: float
    a21: float
    a22: float
    eigenvalues: tuple[complex, complex]
    stability: StabilityClass

    @classmethod
    def from_entries(cls, a11: float, a12: float, a21: float, a22: float) -> "JacobianInfo":
        half_trace = 0.5 * (a11 + a22)
        det = a11 * a22 - a12 * a21
        root = cmath.sqrt(half_trace * half_trace - det)
        eigenvalues = (half_trace + root, half_trace - root)
        return cls(a11, a12, a21, a22, eigenvalues, classify_eigenvalues(eigenvalues))

    @property
    def trace(self) -> float:
        return self.a11 + self.a22

    @property
    def determinant(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a21

    @property
    def is_complex(self) -> bool:
        return self.eigenvalues[0].imag != 0.0

    @property
    def matrix(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return (self.a11, self.a12), (self.a21, self.a22)


def classify_eigenvalues(eigenvalues: tuple[complex, complex]) -> StabilityClass:
    first, second = eigenvalues
    if abs(first.real) < MARGINAL_TOLERANCE or abs(second.real) < MARGINAL_TOLERANCE:
        return StabilityClass.MARGINAL

    if first.imag != 0.0:
        return StabilityClass.STABLE_SPIRAL if first.real < 0 else StabilityClass.UNSTABLE_SPIRAL

    if first.real * second.real < 0:
        return StabilityClass.SADDLE

    return StabilityClass.STABLE_NODE if first.real < 0 else StabilityClass.UNSTABLE_NODE
