"""I/O module for qgm"""

from .file_parser import FileParser, load_graph
from .format_exporter import FormatExporter, to_plain
from .schema import load_schema, validate_document

__all__ = [
    'FileParser',
    'FormatExporter',
    'load_graph',
    'load_schema',
    'to_plain',
    'validate_document',
]
