"""
Exception types shared by the library.
Input problems derive from ValueError, failed constructive steps from RuntimeError.
"""


class GraphError(ValueError):
    """Invalid vertex, side or vertex set for a graph query."""


class GadgetError(ValueError):
    """Infeasible parameters for a Sidon set or a P/Q/R gadget."""


class ConstructionError(ValueError):
    """Parameters outside the range of a lower-bound construction."""


class StarLemmaError(ValueError):
    """Hypotheses of the star-family lemma do not hold."""


class TilerError(RuntimeError):
    """A step of the constructive tiling procedure is infeasible."""


class InvariantViolation(RuntimeError):
    """An output failed its own verification. Always a bug."""


class ParseError(ValueError):
    """Malformed graph, sidecar or factor file."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        if line:
            message = f"line {line}: {message}"
        super().__init__(message)
