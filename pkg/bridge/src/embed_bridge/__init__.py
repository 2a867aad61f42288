"""Frame-embedding export bridge for self-supervised speech encoders."""

from .errors import BridgeError
from .export import ExportJob, export_embeddings
from .fmtx import read_frame_matrix, write_frame_matrix

__all__ = [
    "BridgeError",
    "ExportJob",
    "export_embeddings",
    "read_frame_matrix",
    "write_frame_matrix",
]
