"""Exception hierarchy shared by the library, the CLI and the HTTP service.

Each error carries the process exit code the CLI uses for it: 2 for bad
input, 3 for degenerate data, 1 for everything else.
"""

from __future__ import annotations

from typing import Optional


class MatnetError(Exception):
    exit_code = 1
    http_status = 500


class InvalidParameterError(MatnetError, ValueError):
    exit_code = 2
    http_status = 422


class InvalidInputError(MatnetError, ValueError):
    exit_code = 2
    http_status = 422


class UnsupportedDimensionError(MatnetError, ValueError):
    exit_code = 2
    http_status = 422


class ResourceError(MatnetError):
    exit_code = 1
    http_status = 413


class DegenerateDataError(MatnetError):
    exit_code = 3
    http_status = 409

    def __init__(self, message: str, node: Optional[str] = None):
        super().__init__(message)
        self.node = node


class DataFormatError(InvalidInputError):
    def __init__(self, message: str, subject: Optional[str] = None):
        super().__init__(message)
        self.subject = subject


class DataParseError(InvalidInputError):
    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        super().__init__(message)
        self.row = row
        self.column = column
