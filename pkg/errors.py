"""Exception hierarchy shared by the optimizer, problems, metrics and the bench harness."""

from typing import Optional


class MoeaError(Exception):
    pass


class InvalidConfigError(MoeaError):
    """A configuration or parameter value is out of its allowed range."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class InvalidArgumentError(MoeaError):
    pass


class StateError(MoeaError):
    pass


class RunStoreError(MoeaError):
    """Filesystem failure while reading or writing run artifacts."""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(f"{message}: {path}" if path else message)
        self.path = path
