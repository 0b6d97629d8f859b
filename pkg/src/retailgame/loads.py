"""Customer load decomposition and disclosure-conditioned forecasts."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidInputError
from .gaussian import GaussianDist


@dataclass(frozen=True)
class CustomerLoadComponent:
    customer_id: int
    mu_s: float
    sigma_s: float
    mu_u: float
    sigma_u: float

    def __post_init__(self):
        if self.customer_id < 1:
            raise InvalidInputError(f"customer ids start at 1, got {self.customer_id}")
        if self.sigma_s < 0 or self.sigma_u < 0:
            raise InvalidInputError(f"negative standard deviation in {self}")

    @property
    def mu_total(self) -> float:
        return self.mu_s + self.mu_u


@dataclass(frozen=True)
class DisclosedLoad:
    customer_id: int
    l_s: float


@dataclass(frozen=True)
class TimestepLoadSet:
    """Forecast components and realised schedulable loads of every customer.

    Disclosures exist for all customers; coalitions decide which are used.
    """

    timestep: int
    components: tuple[CustomerLoadComponent, ...]
    disclosures: tuple[DisclosedLoad, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "disclosures", tuple(self.disclosures))
        ids = [c.customer_id for c in self.components]
        if len(set(ids)) != len(ids):
            raise InvalidInputError(f"duplicate customer components at timestep {self.timestep}")
        known = set(ids)
        seen = set()
        for d in self.disclosures:
            if d.customer_id not in known:
                raise InvalidInputError(
                    f"disclosure for unknown customer {d.customer_id} at timestep {self.timestep}")
            if d.customer_id in seen:
                raise InvalidInputError(
                    f"duplicate disclosure for customer {d.customer_id} at timestep {self.timestep}")
            seen.add(d.customer_id)

    @property
    def n_customers(self) -> int:
        return len(self.components)

    def disclosed(self) -> dict[int, float]:
        return {d.customer_id: d.l_s for d in self.disclosures}


def split_load(mu_total: float, alpha: float, beta_s: float, beta_u: float,
               customer_id: int = 1) -> CustomerLoadComponent:
    """Split a measured load into schedulable and unschedulable Gaussian parts.

    The schedulable mean is ``alpha * mu_total``; each standard deviation is
    the matching beta times its own mean.
    """
    if mu_total < 0 or not math.isfinite(mu_total):
        raise InvalidInputError(f"measured load must be finite and >= 0, got {mu_total}")
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError(f"alpha must lie in [0, 1], got {alpha}")
    if beta_s < 0 or beta_u < 0:
        raise InvalidInputError(f"beta ratios must be >= 0, got {beta_s}, {beta_u}")
    mu_s = alpha * mu_total
    mu_u = mu_total - mu_s
    return CustomerLoadComponent(customer_id, mu_s, beta_s * mu_s, mu_u, beta_u * mu_u)


def conditional_forecast(loads: TimestepLoadSet, disclosing: Iterable[int]) -> GaussianDist:
    """Retailer forecast of total demand given the schedulable data of ``disclosing``."""
    members = set(disclosing)
    known = {c.customer_id for c in loads.components}
    if not members <= known:
        raise InvalidInputError(f"unknown customers in disclosing set: {sorted(members - known)}")
    realised = loads.disclosed()
    missing = members - realised.keys()
    if missing:
        raise InvalidInputError(
            f"no disclosure for customers {sorted(missing)} at timestep {loads.timestep}")
    mean = 0.0
    var = 0.0
    for c in loads.components:
        if c.customer_id in members:
            mean += realised[c.customer_id]
        else:
            mean += c.mu_s
            var += c.sigma_s * c.sigma_s
        mean += c.mu_u
        var += c.sigma_u * c.sigma_u
    return GaussianDist(mean, var)


def realized_demand_dist(loads: TimestepLoadSet) -> GaussianDist:
    """Distribution of the demand once every schedulable load is known."""
    return conditional_forecast(loads, [c.customer_id for c in loads.components])


def build_load_set(timestep: int, components: Sequence[CustomerLoadComponent],
                   l_s: Sequence[float]) -> TimestepLoadSet:
    disclosures = [DisclosedLoad(c.customer_id, float(x)) for c, x in zip(components, l_s)]
    return TimestepLoadSet(timestep, tuple(components), tuple(disclosures))
