"""Exception hierarchy.

Every error raised on bad data or bad models derives from :class:`SotmError`,
which the CLI maps to exit code 3.
"""


class SotmError(ValueError):
    """Base class for data and model errors."""


class ZeroVarianceVariable(SotmError):
    def __init__(self, name: str):
        super().__init__(f"variable {name!r} has zero pooled variance")
        self.name = name


class DimensionMismatch(SotmError):
    pass


class MissingValue(SotmError):
    pass


class SchemaVersionMismatch(SotmError):
    pass


class CorruptFile(SotmError):
    pass


class DegenerateSlice(SotmError):
    pass


class EmptySlice(SotmError):
    def __init__(self, time=None):
        msg = "empty time slice" if time is None else f"time slice {time!r} has no rows"
        super().__init__(msg)
        self.time = time


class MismatchedPanel(SotmError):
    pass


class AllUnitsIdentical(SotmError):
    pass


class UnknownEntity(SotmError):
    def __init__(self, entity):
        super().__init__(f"unknown entity {entity!r}")
        self.entity = entity
