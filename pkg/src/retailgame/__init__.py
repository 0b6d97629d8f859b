"""Valuing customer schedulable-load data for an energy retailer.

The retailer buys wholesale energy by a newsvendor rule on a Gaussian
forecast; customers who disclose their schedulable loads sharpen that
forecast, and the resulting expected profit gain is shared through the
Shapley value or the nucleolus of a cooperative game.
"""

__version__ = "0.1.0"

from .gaussian import GaussianDist, partial_expectation_above, std_cdf, std_quantile
from .loads import (CustomerLoadComponent, DisclosedLoad, TimestepLoadSet, conditional_forecast,
                    realized_demand_dist, split_load)
from .newsvendor import (REFERENCE_PRICES, Prices, cost, cost_ratio, expected_profit_analytical,
                         expected_profit_mc, grid_search_quantity, optimal_quantity, profit)
from .game import ExpectationEngine, ValueTable, build_value_table, coalition_value
from .allocation import (Allocation, check_individual_rationality, excess_profile, nucleolus,
                         shapley)
from .simplex import LpProblem, LpSolution, LpStatus, solve
