"""Exception hierarchy shared by every module."""


class MPMIError(Exception):
    exit_code = 1


class ParseError(MPMIError):
    exit_code = 2

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class NonTreeError(MPMIError):
    """The primal graph is not a forest."""

    exit_code = 3


class CycleError(NonTreeError):
    def __init__(self, witness):
        self.witness = tuple(witness)
        super().__init__("cycle detected: " + " - ".join(str(w) for w in self.witness))


class UnboundedError(MPMIError):
    exit_code = 4

    def __init__(self, variable):
        self.variable = variable
        super().__init__(f"unbounded variable {variable}")


class UndefinedDistribution(MPMIError):
    exit_code = 5

    def __init__(self, message="distribution undefined: MI is zero"):
        super().__init__(message)


class UnsupportedWeight(MPMIError):
    exit_code = 6


class NonConformingQuery(MPMIError):
    exit_code = 7


class ConsistencyError(MPMIError):
    """Internal invariant violated; indicates an engine bug."""

    exit_code = 70
