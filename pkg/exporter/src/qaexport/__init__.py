"""Bridge from pretrained extractive-QA runtimes to qaensemble's file formats."""

from .errors import DatasetError, ExportError, ModelLoadError, OffsetRecoveryError
from .export import ExportJob, ExportSummary, export_predictions
from .testmodel import build_tiny_qa_model

__version__ = "0.1.0"
