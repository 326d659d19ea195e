"""Exception hierarchy.

Every error carries a short machine-readable ``code`` that the CLI prints
as ``error: <code>: <message>`` on a single line.
"""

from __future__ import annotations


class MogBenchError(Exception):
    code = "error"


class CatalogError(MogBenchError, KeyError):
    code = "catalog"

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class DensityError(MogBenchError):
    """Scene generation could not place every object."""

    code = "density"

    def __init__(self, message: str, achieved: int, requested: int):
        super().__init__(message)
        self.achieved = achieved
        self.requested = requested


class IdError(MogBenchError, KeyError):
    code = "id"

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class InsufficientObjectsError(MogBenchError):
    code = "insufficient-objects"


class EmptySceneError(MogBenchError):
    code = "empty-scene"


class PlanningError(MogBenchError):
    code = "planning"


class IncapableHandError(MogBenchError):
    code = "incapable-hand"


class EmptyInputError(MogBenchError):
    code = "empty-input"


class CalibrationError(MogBenchError):
    code = "calibration"


class ConfigError(MogBenchError):
    code = "validation"


class IngestError(MogBenchError):
    """A log record failed schema validation.

    ``row`` is the 1-based line/row number in the source, ``field`` the
    offending field name when known.
    """

    code = "ingest"

    def __init__(self, message: str, row: int | None = None, field: str | None = None):
        parts = []
        if row is not None:
            parts.append(f"row {row}")
        if field is not None:
            parts.append(f"field {field!r}")
        prefix = ", ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.row = row
        self.field = field
