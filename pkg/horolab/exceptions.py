from horolab import status


class ConfigError(Exception):
    """
    Raised when an experiment config names an unknown key or carries a value outside
    the preconditions of the module that consumes it.
    """

    def __init__(self, key, msg=None):
        self.key = key
        if msg is None:
            msg = 'Invalid configuration key "{}".'.format(key)
        super().__init__(msg)


class UnimodularityError(Exception):
    def __init__(self, msg=None):
        if msg is None:
            msg = "Matrix is not unimodular within tolerance."
        super().__init__(msg)


class InvalidFlowError(Exception):
    def __init__(self, msg=None):
        if msg is None:
            msg = "Flow weights must be sorted non-increasing."
        super().__init__(msg)


class AllWeightsEqualError(Exception):
    def __init__(self, msg=None):
        if msg is None:
            msg = "All flow weights are equal; the horospherical subgroup is trivial."
        super().__init__(msg)


class EmptyPositivePartError(Exception):
    def __init__(self, msg=None):
        if msg is None:
            msg = "Representation has no positive-weight subspace for this flow."
        super().__init__(msg)


class NoStringError(Exception):
    def __init__(self, msg=None):
        if msg is None:
            msg = "Maximal weight is unreachable from the minimal weight."
        super().__init__(msg)


class ZeroSupError(Exception):
    def __init__(self, msg=None):
        if msg is None:
            msg = "Sup norm is zero; the sub-level query is degenerate."
        super().__init__(msg)


class NoNegativeWeightError(Exception):
    def __init__(self, msg=None):
        if msg is None:
            msg = "Representation has no negative weight."
        super().__init__(msg)


class NoPositiveWeightError(Exception):
    def __init__(self, msg=None):
        if msg is None:
            msg = "Representation has no positive weight."
        super().__init__(msg)


class ZeroVectorError(Exception):
    def __init__(self, msg=None):
        if msg is None:
            msg = "Vector must be non-zero."
        super().__init__(msg)


class BadIndexError(Exception):
    def __init__(self, index=None, msg=None):
        if msg is None:
            msg = "Index {} is out of range.".format(index)
        super().__init__(msg)


class ContractionNotEstablishedError(Exception):
    def __init__(self, msg=None):
        if msg is None:
            msg = "Contraction constant must be strictly below 1."
        super().__init__(msg)


class BudgetExceededError(Exception):
    """
    Raised when a drift verification needs more steps than the quadrature budget
    allows. The steps that fit are still measured and returned on `certificate`.
    """

    def __init__(self, certificate=None, msg=None):
        self.certificate = certificate
        if msg is None:
            msg = "Drift verification exceeded the quadrature budget."
        super().__init__(msg)


class EnumerationBudgetError(Exception):
    def __init__(self, budget=None, msg=None):
        self.budget = budget
        if msg is None:
            msg = "Short-vector enumeration visited more than {} nodes.".format(budget)
        super().__init__(msg)


class BadParamsError(Exception):
    pass


class NoDecayWindowError(Exception):
    """
    Raised when no window of the R grid shows a clean power-law decay. The raw table
    is kept on `table`.
    """

    def __init__(self, table=None, msg=None):
        self.table = table
        if msg is None:
            msg = "No decay window found in the equidistribution errors."
        super().__init__(msg)


class RationalInputError(Exception):
    def __init__(self, msg=None):
        if msg is None:
            msg = "Coordinate is rational; the Liouville bound is degenerate."
        super().__init__(msg)


class DecoratorsMutuallyExclusiveError(Exception):
    pass


def config_error(exception):
    """
    Generic handler for a rejected config.
    """
    return {"error": str(exception), "exit_code": status.EXIT_CONFIG_ERROR}


def assertion_failed(names):
    """
    Generic handler for a report with failing assertions.
    """
    return {
        "error": "Assertions failed: {}".format(", ".join(sorted(names))),
        "exit_code": status.EXIT_ASSERTION_FAILED,
    }
