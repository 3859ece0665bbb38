"""Exception hierarchy shared by all topomatch modules."""


class TopomatchError(Exception):
    """Base class; ``kind`` is the machine-readable error tag used by the CLI."""

    kind = "error"


class GraphError(TopomatchError, ValueError):
    kind = "graph-error"


class DuplicateEdgeError(GraphError):
    kind = "duplicate-edge-conflict"


class SelfLoopError(GraphError):
    kind = "self-loop"


class NonFiniteWeightError(GraphError):
    kind = "non-finite-weight"


class NoPathError(TopomatchError):
    kind = "no-path"


class PathLimitError(TopomatchError):
    kind = "path-limit-exceeded"


class AssumptionViolation(TopomatchError):
    """The subgraph cannot host a topology-preserving unit."""

    kind = "assumption-violation"


class TopologyMismatch(TopomatchError):
    kind = "topology-mismatch"


class GrowthFailure(TopomatchError):
    kind = "growth-failure"


class BudgetExceeded(TopomatchError):
    kind = "budget-exceeded"


class DegenerateInput(TopomatchError, ValueError):
    kind = "degenerate-input"


class ParseError(TopomatchError, ValueError):
    kind = "parse-error"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
