import re
from datetime import datetime
from pathlib import Path


def create_record(success, message, data=None, error=None):
    """
    Create a standardized run record

    Args:
        success: Boolean indicating success
        message: Short human-readable summary
        data: Optional data payload
        error: Optional error details

    Returns:
        Dictionary record
    """
    record = {
        'success': success,
        'message': message,
        'timestamp': datetime.now().isoformat()
    }

    if data is not None:
        record['data'] = data

    if error is not None:
        record['error'] = error

    return record


def sanitize_label(label):
    """
    Sanitize a free-form label for use inside a filename

    Args:
        label: Original label (geometry name, entangler, ...)

    Returns:
        Label restricted to alphanumerics and ._-
    """
    label = str(label).strip().replace(' ', '_')
    return re.sub(r'[^A-Za-z0-9._-]', '', label) or 'unnamed'


def geometry_label(path):
    """Label of a geometry point: the integrals file name without its suffix"""
    return sanitize_label(Path(path).stem)


def trace_filename(geometry, seed):
    """Trace CSV name for one geometry x seed run"""
    return f"trace_{sanitize_label(geometry)}_{seed}.csv"


def grid_dirname(entangler, depth):
    return f"{entangler}_d{depth}"


def format_time(seconds):
    """Format seconds into readable time string"""
    if seconds < 60:
        return f"{seconds:.1f}s"
    elif seconds < 3600:
        minutes = seconds / 60
        return f"{minutes:.1f}m"
    else:
        hours = seconds / 3600
        return f"{hours:.1f}h"
