class CutQuadError(Exception):
    """Base class for every error raised by cutquad."""


class ArgumentError(CutQuadError, ValueError):
    """Invalid input to a geometry, quadrature, harness or CI operation."""


class CatalogError(CutQuadError):
    """A test-case document could not be read."""

    def __init__(self, file_path, message):
        self.file_path = str(file_path)
        super().__init__(f"{self.file_path}: {message}")


class BaselineError(CutQuadError):
    """A baseline file is malformed or uses an unsupported schema."""

    def __init__(self, file_path, message, line=None, column=None):
        self.file_path = str(file_path)
        self.line = line
        self.column = column
        location = self.file_path
        if line is not None:
            location += f":{line}"
            if column is not None:
                location += f":{column}"
        super().__init__(f"{location}: {message}")


class MomentFittingError(CutQuadError):
    """The moment-fitting system is rank deficient or misses its residual."""
