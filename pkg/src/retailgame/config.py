"""Scenario configuration (JSON) with strict validation."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError, InvalidInputError
from .game import MAX_CUSTOMERS, ExpectationEngine
from .newsvendor import Prices, cost_ratio


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class PricesConfig(_Strict):
    r_r: float
    r_w: float
    b_minus: float
    b_plus: float

    @model_validator(mode="after")
    def _check(self):
        try:
            p = self.to_prices()
        except InvalidInputError as exc:
            raise ValueError(str(exc)) from None
        gamma = cost_ratio(p)
        if gamma <= 0.0 or gamma >= 1.0:
            raise ValueError(
                f"cost ratio {gamma:g} is degenerate; need b_minus > r_w > b_plus")
        return self

    def to_prices(self) -> Prices:
        return Prices(self.r_r, self.r_w, self.b_minus, self.b_plus)


class FixedAlpha(_Strict):
    kind: Literal["fixed"]
    value: float = Field(ge=0.0, le=1.0)


class UniformAlpha(_Strict):
    kind: Literal["uniform_random"]
    low: float = Field(default=0.1, ge=0.0, le=1.0)
    high: float = Field(default=0.9, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _ordered(self):
        if self.low > self.high:
            raise ValueError(f"low ({self.low}) must not exceed high ({self.high})")
        return self


class AnalyticalEngine(_Strict):
    kind: Literal["analytical"]


class MonteCarloEngine(_Strict):
    kind: Literal["monte_carlo"]
    n_samples: int = Field(ge=2)


class GridValidation(_Strict):
    n_grid: int = Field(default=100, ge=2)
    n_samples: int = Field(default=1000, ge=2)


AlphaPolicy = Annotated[Union[FixedAlpha, UniformAlpha], Field(discriminator="kind")]
EngineConfig = Annotated[Union[AnalyticalEngine, MonteCarloEngine], Field(discriminator="kind")]


class ScenarioConfig(_Strict):
    prices: PricesConfig
    customers: int = Field(ge=1, le=MAX_CUSTOMERS)
    beta_s: float = Field(ge=0.0)
    beta_u: float = Field(ge=0.0)
    alpha_policy: AlphaPolicy
    timestep_minutes: int = Field(gt=0, le=1440)
    horizon: int = Field(ge=1)
    master_seed: int = Field(ge=0, lt=2**64)
    expectation_engine: EngineConfig = AnalyticalEngine(kind="analytical")
    allocation_methods: tuple[Literal["shapley", "nucleolus"], ...] = ("shapley", "nucleolus")
    grid_validation: Optional[GridValidation] = None

    @field_validator("allocation_methods")
    @classmethod
    def _methods(cls, v):
        if not v:
            raise ValueError("at least one allocation method is required")
        if len(set(v)) != len(v):
            raise ValueError("allocation methods must be unique")
        return tuple(m for m in ("shapley", "nucleolus") if m in v)

    @property
    def steps_per_day(self) -> int:
        return max(1, 1440 // self.timestep_minutes)

    def price_model(self) -> Prices:
        return self.prices.to_prices()

    def engine(self) -> ExpectationEngine:
        e = self.expectation_engine
        if isinstance(e, MonteCarloEngine):
            return ExpectationEngine("monte_carlo", e.n_samples, self.master_seed)
        return ExpectationEngine("analytical", seed=self.master_seed)


def reference_config(**overrides) -> ScenarioConfig:
    """Reference case study: 8 customers, half-hourly steps, one 30-day month."""
    base = {
        "prices": {"r_r": 0.1, "r_w": 0.06, "b_minus": 0.16, "b_plus": 0.03},
        "customers": 8,
        "beta_s": 1.0,
        "beta_u": 0.5,
        "alpha_policy": {"kind": "uniform_random", "low": 0.1, "high": 0.9},
        "timestep_minutes": 30,
        "horizon": 48 * 30,
        "master_seed": 2021,
        "expectation_engine": {"kind": "analytical"},
        "allocation_methods": ["shapley", "nucleolus"],
        "grid_validation": None,
    }
    base.update(overrides)
    return ScenarioConfig.model_validate(base)


def format_validation_error(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        # Drop discriminator tags pydantic inserts into union locations.
        loc = [str(p) for p in err["loc"] if p not in ("fixed", "uniform_random", "analytical",
                                                       "monte_carlo")]
        path = ".".join(loc) or "<root>"
        msg = err["msg"]
        if err["type"] == "extra_forbidden":
            msg = "unknown key"
        lines.append(f"{path}: {msg}")
    return "; ".join(lines)


def parse_config(data: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(format_validation_error(exc)) from None


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return parse_config(data)


def dump_config(cfg: ScenarioConfig) -> dict:
    return cfg.model_dump(mode="json")
