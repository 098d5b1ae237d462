"""Exception types shared across the toolkit."""


class OsmagError(Exception):
    """Base class for all toolkit errors."""


class MapParseError(OsmagError):
    """The document is not well-formed XML."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class IntegrityError(OsmagError):
    """Well-formed input that violates a map invariant."""


class UnknownAreaError(IntegrityError):
    """A query referenced an area name that is not in the map."""


class HierarchyError(OsmagError):
    """Parent-chain resolution failed."""


class BrokenChainError(HierarchyError):
    def __init__(self, room: str, level: str):
        super().__init__(f"broken chain at {level} while resolving {room!r}")
        self.room = room
        self.level = level


class HierarchyCycleError(HierarchyError):
    pass


class PersonNotFoundError(OsmagError):
    pass


class AmbiguousOwnerError(OsmagError):
    def __init__(self, person: str, rooms: list[str]):
        super().__init__(f"owner {person!r} appears on multiple rooms: {', '.join(rooms)}")
        self.person = person
        self.rooms = rooms


class PromptError(OsmagError):
    pass


class DatasetError(OsmagError):
    pass


class BackendError(OsmagError):
    """Terminal failure talking to a model backend."""


class AuthError(BackendError):
    pass


class RetryExhaustedError(BackendError):
    def __init__(self, message: str, last_cause: Exception | None = None):
        super().__init__(message)
        self.last_cause = last_cause
