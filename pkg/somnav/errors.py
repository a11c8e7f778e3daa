from __future__ import annotations


class SomnavError(Exception):
    """Base class for every error raised by the package."""
    code = "error"

    def __init__(self, message: str = "", code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


# som-core
class InvalidConfig(SomnavError, ValueError):
    code = "invalid_config"

class DimensionMismatch(SomnavError, ValueError):
    code = "dimension_mismatch"

class InvalidInput(SomnavError, ValueError):
    code = "invalid_input"

class InvalidNode(SomnavError, ValueError):
    code = "invalid_node"

class EmptyInputSet(SomnavError, ValueError):
    code = "empty_input_set"


# transition-model
class NoEdge(SomnavError, ValueError):
    code = "no_edge"

class NoPath(SomnavError, ValueError):
    code = "no_path"


# world-sim
class InvalidPose(SomnavError, ValueError):
    code = "invalid_pose"

class MalformedGrid(SomnavError, ValueError):
    code = "malformed_grid"

class MissingStart(SomnavError, ValueError):
    code = "missing_start"

class OpenBoundary(SomnavError, ValueError):
    code = "open_boundary"


# persistence-io
class ParseError(SomnavError, ValueError):
    code = "parse_error"

class VersionUnsupported(SomnavError, ValueError):
    code = "version_unsupported"

class InvariantViolation(SomnavError, ValueError):
    code = "invariant_violation"

class SinkUnwritable(SomnavError, OSError):
    code = "sink_unwritable"


# agent / service
class MemoryNotFrozen(SomnavError, ValueError):
    code = "memory_not_frozen"

class UnknownSnapshot(SomnavError, KeyError):
    code = "unknown_snapshot"

    def __str__(self) -> str:
        # KeyError would otherwise repr() the message
        return Exception.__str__(self)

class ProtocolError(SomnavError, ValueError):
    """Malformed or unsupported operator message; `code` goes on the wire."""
    code = "malformed"

class PortInUse(SomnavError, OSError):
    code = "port_in_use"
