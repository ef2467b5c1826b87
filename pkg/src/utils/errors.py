"""
Exception hierarchy shared by the library and the command line.
"""

from typing import Optional


class MaiouError(Exception):
    """Base class for every error raised on purpose by this package"""


class InvalidAnnotationError(MaiouError):
    """An annotation cannot be turned into a mask or box"""

    def __init__(self, message: str, annotation_id: Optional[int] = None):
        self.annotation_id = annotation_id
        if annotation_id is not None:
            message = f"annotation {annotation_id}: {message}"
        super().__init__(message)


class UnsupportedFormatError(InvalidAnnotationError):
    """The annotation uses an encoding this package does not decode"""


class InputError(MaiouError):
    """An input file is missing, unreadable or malformed"""

    def __init__(self, path, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.path = str(path)
        self.line = line
        self.column = column
        location = self.path
        if line is not None:
            location += f":{line}"
            if column is not None:
                location += f":{column}"
        super().__init__(f"{location}: {message}")


class EmptyInputError(MaiouError):
    """A statistic was requested over zero observations"""


class UsageError(MaiouError):
    """The caller asked for something inconsistent (bad flags, mismatched inputs)"""
