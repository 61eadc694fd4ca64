"""Exception types raised across the package."""


class ICRegionError(Exception):
    pass


class ValidationError(ICRegionError, ValueError):
    """Instance violates one or more type invariants.

    ``problems`` lists every violation found, not only the first one.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class CanonicalizationError(ICRegionError, ValueError):
    pass


class PreconditionError(ICRegionError):
    pass


class ConditionError(PreconditionError):
    """Interference conditions fail for the requested pattern."""


class ScaleError(ICRegionError):
    pass


class EmptySliceError(ICRegionError):
    pass
