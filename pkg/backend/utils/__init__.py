"""
Utilities package for the VQE toolkit
Contains the error hierarchy, PauliSum file formats and run-record helpers
"""

from .errors import VQEError
from .run_utils import create_record, format_time, trace_filename

__all__ = ['VQEError', 'create_record', 'format_time', 'trace_filename']
