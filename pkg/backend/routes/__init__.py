"""
Command routes for the VQE toolkit CLI
"""

import logging

from .experiment import register_experiment
from .integrals import register_integrals
from .solve import register_solve
from .taper import register_taper

logger = logging.getLogger(__name__)


def register_routes(subparsers, settings):
    """Register every sub-command with the CLI parser"""

    register_experiment(subparsers, settings)
    register_taper(subparsers, settings)
    register_solve(subparsers, settings)
    register_integrals(subparsers, settings)

    logger.debug("✅ All commands registered successfully")

__all__ = [
    'register_routes', 'register_experiment', 'register_taper', 'register_solve',
    'register_integrals',
]
