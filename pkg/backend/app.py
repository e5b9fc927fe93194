import argparse
import logging
import os
import sys

from dotenv import load_dotenv

# Load environment variables before the configuration classes read them
load_dotenv()

from config import config  # noqa: E402
from routes import register_routes  # noqa: E402

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure_logging(level):
    """Install a single stream handler on the root logger"""
    logging.basicConfig(level=getattr(logging, str(level).upper(), logging.INFO),
                        format=LOG_FORMAT, force=True)


def create_app(config_name='default'):
    """Application factory: the CLI parser with every command registered"""
    settings = config[config_name]

    parser = argparse.ArgumentParser(
        prog='vqe',
        description='Variational quantum eigensolver toolkit: Jordan-Wigner mapping, '
                    'qubit tapering, statevector simulation and SPSA sweeps',
    )
    parser.add_argument('--log-level', help=f"Logging level (default {settings.LOG_LEVEL})")
    parser.set_defaults(settings=settings, handler=None)

    subparsers = parser.add_subparsers(dest='command', metavar='{run,taper,solve,integrals}')
    register_routes(subparsers, settings)
    return parser


def main(argv=None):
    config_name = os.getenv('VQE_ENV', 'development')
    if config_name not in config:
        config_name = 'default'
    parser = create_app(config_name)
    args = parser.parse_args(argv)
    settings = args.settings

    configure_logging(args.log_level or settings.LOG_LEVEL)
    if args.handler is None:
        parser.print_help()
        return 2

    logger.debug("🔧 Environment: %s, threads: %d", config_name, settings.THREADS)
    return args.handler(args, settings)


if __name__ == '__main__':
    sys.exit(main())
