"""Exception types shared by the library and the CLI."""


class SpotkitError(Exception):
    """Base class for all spotkit errors."""


class ValidationError(SpotkitError):
    """Invalid data, configuration, or arguments (CLI exit code 2)."""


class SchemaError(ValidationError):
    """A document violates a file schema.

    ``path`` points at the offending location using a JSON-path-like
    string such as ``$.confidences[3][1]``.
    """

    def __init__(self, message: str, path: str = "$"):
        self.path = path
        super().__init__(f"{path}: {message}")
