from dataclasses import dataclass, fields, replace
from math import isfinite
from typing import Any, Self

from speedbump_mpc.domain.vehicle import VehicleState

STATE_COMPONENTS = ("x", "vx", "ax", "y", "vy", "ay")
CONTROL_COMPONENTS = ("jx", "jy")
WEIGHT_NAMES = ("q1", "q2", "q3", "q4", "q5", "r1", "r2")


@dataclass(frozen=True, kw_only=True)
class Weights:
    q1: float
    q2: float
    q3: float
    q4: float
    q5: float
    r1: float
    r2: float

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in WEIGHT_NAMES}


@dataclass(frozen=True, kw_only=True)
class Limits:
    x_min: float = -10.0
    x_max: float = 10000.0
    vx_min: float = 0.0
    vx_max: float = 20.0
    ax_min: float = -3.0
    ax_max: float = 3.0
    y_min: float = -10.0
    y_max: float = 10.0
    vy_min: float = -3.0
    vy_max: float = 3.0
    ay_min: float = -4.0
    ay_max: float = 4.0
    jx_min: float = -10.0
    jx_max: float = 10.0
    jy_min: float = -10.0
    jy_max: float = 10.0

    def bounds(self, component: str) -> tuple[float, float]:
        return getattr(self, f"{component}_min"), getattr(self, f"{component}_max")


@dataclass(frozen=True, kw_only=True)
class Scenario:
    """Everything one experiment needs: timing, road, bump window, vehicle limits
    and cost weights. Immutable; use `with_changes` to derive variants."""

    dt: float
    horizon_n: int = 30
    sim_steps: int
    road_width: float
    lateral_margin: float = 0.25
    x0: float
    y0: float
    vx0: float
    vy0: float
    ax0: float = 0.0
    ay0: float = 0.0
    theta0: float = 0.0
    v_ref: float
    y_ref: float
    bump_start: float
    bump_end: float
    v_max_bump: float
    v_turn: float
    wheelbase: float
    theta_min: float = -0.5236
    theta_max: float = 0.5236
    omega_max: float = 0.5
    weights: Weights
    limits: Limits = Limits()
    human_behavior_mode: bool = False
    strict_indicators: bool = False
    big_m: float = 1000.0
    epsilon: float = 1e-4

    def initial_state(self) -> VehicleState:
        return VehicleState(
            x=self.x0,
            y=self.y0,
            vx=self.vx0,
            vy=self.vy0,
            ax=self.ax0,
            ay=self.ay0,
            theta=self.theta0,
        )

    def lane_bounds(self) -> tuple[float, float]:
        return self.lateral_margin, self.road_width - self.lateral_margin

    def with_changes(self, **changes: Any) -> Self:
        return replace(self, **changes)


@dataclass(frozen=True)
class ScenarioViolation:
    field: str
    message: str


class InvalidScenarioError(Exception):
    violations: list[ScenarioViolation]

    def __init__(self, violations: list[ScenarioViolation]) -> None:
        super().__init__(
            "Invalid scenario: "
            + "; ".join(f"{v.field}: {v.message}" for v in violations)
        )
        self.violations = violations


class ScenarioValidator:
    _scenario: Scenario
    _violations: list[ScenarioViolation]

    def __init__(self, scenario: Scenario) -> None:
        self._scenario = scenario
        self._violations = []

    def _append_violation(self, field: str, message: str) -> None:
        self._violations.append(ScenarioViolation(field=field, message=message))

    def validate(self) -> list[ScenarioViolation]:
        self._violations = []
        if self._validate_finite():
            self._validate_timing()
            self._validate_road()
            self._validate_bump()
            self._validate_steering()
            self._validate_weights()
            self._validate_limits()
            self._validate_encoding()
        return sorted(self._violations, key=lambda v: (v.field, v.message))

    def _validate_finite(self) -> bool:
        scenario = self._scenario
        all_finite = True
        for field in fields(scenario):
            value = getattr(scenario, field.name)
            if isinstance(value, (Weights, Limits)):
                for nested in fields(value):
                    if not isfinite(getattr(value, nested.name)):
                        self._append_violation(nested.name, "must be finite")
                        all_finite = False
            elif isinstance(value, float) and not isfinite(value):
                self._append_violation(field.name, "must be finite")
                all_finite = False
        return all_finite

    def _validate_timing(self) -> None:
        scenario = self._scenario
        if not scenario.dt > 0:
            self._append_violation("dt", "must be positive")
        if scenario.horizon_n < 1:
            self._append_violation("horizon_n", "must be at least 1")
        if scenario.sim_steps < 1:
            self._append_violation("sim_steps", "must be at least 1")

    def _validate_road(self) -> None:
        scenario = self._scenario
        if scenario.lateral_margin < 0:
            self._append_violation("lateral_margin", "must be non-negative")
        lane_low, lane_high = scenario.lane_bounds()
        if not lane_high - lane_low > 0:
            self._append_violation(
                "road_width", "must exceed twice the lateral margin"
            )
            return
        for name in ("y0", "y_ref"):
            value = getattr(scenario, name)
            if not lane_low <= value <= lane_high:
                self._append_violation(
                    name, f"must lie inside the lane [{lane_low}, {lane_high}]"
                )

    def _validate_bump(self) -> None:
        scenario = self._scenario
        if not scenario.bump_start < scenario.bump_end:
            self._append_violation("bump_end", "must be greater than bump_start")
        if not 0 < scenario.v_max_bump <= scenario.limits.vx_max:
            self._append_violation(
                "v_max_bump", "must be positive and not above vx_max"
            )
        if not scenario.v_turn > 0:
            self._append_violation("v_turn", "must be positive")

    def _validate_steering(self) -> None:
        scenario = self._scenario
        if not scenario.theta_min < 0:
            self._append_violation("theta_min", "must be negative")
        if not scenario.theta_max > 0:
            self._append_violation("theta_max", "must be positive")
        if not scenario.omega_max > 0:
            self._append_violation("omega_max", "must be positive")

    def _validate_weights(self) -> None:
        weights = self._scenario.weights.as_dict()
        for name, value in weights.items():
            if value < 0:
                self._append_violation(name, "must be non-negative")
        if not sum(weights.values()) > 0:
            self._append_violation("weights", "at least one weight must be positive")

    def _validate_limits(self) -> None:
        limits = self._scenario.limits
        for component in STATE_COMPONENTS + CONTROL_COMPONENTS:
            lower, upper = limits.bounds(component)
            if lower > upper:
                self._append_violation(
                    f"{component}_min", f"must not exceed {component}_max"
                )
        if limits.vx_min < 0:
            self._append_violation("vx_min", "must be non-negative (no reversing)")

    def _validate_encoding(self) -> None:
        scenario = self._scenario
        if not scenario.big_m > 0:
            self._append_violation("big_m", "must be positive")
        if not 0 < scenario.epsilon < 1:
            self._append_violation("epsilon", "must lie strictly between 0 and 1")


def validate(scenario: Scenario) -> list[ScenarioViolation]:
    return ScenarioValidator(scenario).validate()
