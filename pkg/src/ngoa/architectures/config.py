from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, replace
from typing import Optional


class ConfigError(ValueError):
    pass


class Kind(str, enum.Enum):
    POINT_TO_POINT = "point_to_point"
    TDM_PON = "tdm_pon"
    HYBRID = "hybrid"


class PoolPolicy(str, enum.Enum):
    OLDEST_FIRST = "oldest_first"
    LONGEST_QUEUE_FIRST = "longest_queue_first"


DEFAULT_GROUP_VELOCITY = 2.0e8


@dataclass(frozen=True)
class ArchitectureConfig:
    """Declarative description of one access architecture.

    Rates are bits/s, times seconds, sizes bytes. For point-to-point the
    dedicated per-ONU pipe runs at ``line_rate``; ``distribution_rate``
    defaults to the same value when left unset. Hybrid wavelengths each carry
    ``feeder_rate``.
    """

    kind: Kind
    onu_count: int
    users_per_onu: int = 1
    feeder_rate: float = 1e9
    distribution_rate: Optional[float] = 100e6
    line_rate: Optional[float] = None
    feeder_length_km: float = 20.0
    wavelength_count: int = 1
    transceiver_pool: int = 1
    tuning_time: float = 1e-3
    guard_time: float = 1e-6
    max_grant_bytes: int = 15500
    buffer_bytes: int = 1 << 20
    pool_policy: PoolPolicy = PoolPolicy.OLDEST_FIRST
    group_velocity: float = DEFAULT_GROUP_VELOCITY

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "pool_policy", PoolPolicy(self.pool_policy))
        self.validate()

    def validate(self) -> None:
        if self.onu_count < 1:
            raise ConfigError(f"onu_count must be >= 1, got {self.onu_count}")
        if self.users_per_onu < 1:
            raise ConfigError(f"users_per_onu must be >= 1, got {self.users_per_onu}")
        if self.kind is Kind.POINT_TO_POINT:
            if self.line_rate is None:
                raise ConfigError("point_to_point requires line_rate")
            rates = {"line_rate": self.line_rate}
        else:
            rates = {"feeder_rate": self.feeder_rate}
            if self.distribution_rate is None:
                raise ConfigError(f"{self.kind.value} requires distribution_rate")
        if self.distribution_rate is not None:
            rates["distribution_rate"] = self.distribution_rate
        for name, value in rates.items():
            if not value > 0:
                raise ConfigError(f"{name} must be > 0, got {value}")
        if self.feeder_length_km < 0:
            raise ConfigError(f"feeder_length_km must be >= 0, got {self.feeder_length_km}")
        if self.guard_time < 0:
            raise ConfigError(f"guard_time must be >= 0, got {self.guard_time}")
        if self.tuning_time < 0:
            raise ConfigError(f"tuning_time must be >= 0, got {self.tuning_time}")
        if self.max_grant_bytes < 1:
            raise ConfigError(f"max_grant_bytes must be >= 1, got {self.max_grant_bytes}")
        if self.buffer_bytes < 1:
            raise ConfigError(f"buffer_bytes must be >= 1, got {self.buffer_bytes}")
        if self.group_velocity <= 0:
            raise ConfigError("group_velocity must be > 0")
        if self.kind is Kind.HYBRID:
            k, w, n = self.transceiver_pool, self.wavelength_count, self.onu_count
            if not 1 <= k:
                raise ConfigError(f"hybrid transceiver_pool must be >= 1, got {k}")
            if k > w:
                raise ConfigError(
                    f"hybrid transceiver_pool ({k}) exceeds wavelength_count ({w})")
            if w > n:
                raise ConfigError(
                    f"hybrid wavelength_count ({w}) exceeds onu_count ({n}); "
                    "every wavelength needs at least one ONU")

    @property
    def user_count(self) -> int:
        return self.onu_count * self.users_per_onu

    @property
    def access_rate(self) -> int:
        """Rate of the OLT-side resource: dedicated pipe, feeder or wavelength."""
        if self.kind is Kind.POINT_TO_POINT:
            return int(self.line_rate)
        return int(self.feeder_rate)

    @property
    def drop_rate(self) -> int:
        """Per-user distribution (drop) rate."""
        if self.distribution_rate is None:
            return self.access_rate
        return int(self.distribution_rate)

    @property
    def ecr_bound(self) -> int:
        """No candidate can beat a circuit faster than its narrowest stage."""
        return min(self.access_rate, self.drop_rate)

    def wavelength_of(self, onu: int) -> int:
        return onu % self.wavelength_count if self.kind is Kind.HYBRID else 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        d["pool_policy"] = self.pool_policy.value
        return d

    def with_(self, **changes) -> "ArchitectureConfig":
        return replace(self, **changes)


def point_to_point_reference(candidate: ArchitectureConfig, rate: float) -> ArchitectureConfig:
    """Point-to-point circuit at `rate` serving the same users over the same reach."""
    return ArchitectureConfig(
        kind=Kind.POINT_TO_POINT,
        onu_count=candidate.onu_count,
        users_per_onu=candidate.users_per_onu,
        line_rate=rate,
        distribution_rate=rate,
        feeder_length_km=candidate.feeder_length_km,
        buffer_bytes=candidate.buffer_bytes,
        group_velocity=candidate.group_velocity,
    )
