"""Exception taxonomy.

ValidationError: bad input data (datasets, series, temporal layouts).
ScenarioError:   a scenario configuration that is internally contradictory or
                 incompatible with the dataset it is applied to.
SolverError:     the LP backend failed in a way that is not a clean
                 infeasible/unbounded verdict (numerical trouble, bad status).
"""


class GridcapError(Exception):
    pass


class ValidationError(GridcapError):
    pass


class ScenarioError(GridcapError):
    pass


class SolverError(GridcapError):
    pass
