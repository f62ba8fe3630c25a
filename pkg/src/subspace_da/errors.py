"""Exception types raised across the package.

Everything derives from :class:`SubspaceDAError` (itself a ``ValueError``) so
callers, and the CLI in particular, can map every input problem to a single
exit code.
"""


class SubspaceDAError(ValueError):
    """Base class for all validation errors in this package."""


class DimensionMismatch(SubspaceDAError):
    pass


class DimensionTooLarge(SubspaceDAError):
    pass


class DegenerateData(SubspaceDAError):
    def __init__(self, message, rank=None):
        super().__init__(message)
        self.rank = rank


class SingleClassData(SubspaceDAError):
    pass


class NonBinaryLabels(SubspaceDAError):
    pass


class TooFewSamples(SubspaceDAError):
    pass


class ClassTooSmall(SubspaceDAError):
    pass


class EmptyFeasibleGrid(SubspaceDAError):
    pass


class InvalidSpec(SubspaceDAError):
    pass


class ParseError(SubspaceDAError):
    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class RaggedRows(ParseError):
    pass


class NonIntegerLabel(ParseError):
    pass
