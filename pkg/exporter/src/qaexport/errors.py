"""Exporter error types."""


class ExportError(Exception):
    """Base class for exporter failures."""


class ModelLoadError(ExportError):
    """The model reference could not be resolved or loaded."""


class OffsetRecoveryError(ExportError):
    """The tokenizer cannot report character offsets into the context."""


class DatasetError(ExportError, ValueError):
    """The input dataset file violates the record contract."""
