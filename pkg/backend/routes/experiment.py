import json
import logging
from dataclasses import replace
from pathlib import Path

from models.experiment import load_run_config, run_experiment
from utils.errors import VQEError
from utils.run_utils import create_record

logger = logging.getLogger(__name__)


def register_experiment(subparsers, settings):
    parser = subparsers.add_parser('run', help='Run a VQE experiment sweep from a config file')
    parser.add_argument('--config', required=True, help='YAML or JSON run configuration')
    parser.add_argument('--output', help='Override the output directory')
    parser.add_argument('--threads', type=int, help='Override the worker pool size')
    parser.add_argument('--no-progress', action='store_true', help='Hide the progress bar')
    parser.set_defaults(handler=run_command)


def run_command(args, settings):
    """Run the sweep; exit status 1 when any run failed"""
    try:
        cfg = load_run_config(args.config, settings)
    except VQEError as e:
        print(json.dumps(create_record(False, 'Invalid run configuration', error=str(e)), indent=2))
        return 1

    overrides = {}
    if args.output:
        overrides['output_dir'] = Path(args.output)
    if args.threads:
        overrides['threads'] = min(args.threads, settings.THREADS)
    if overrides:
        cfg = replace(cfg, **overrides)
    if Path(cfg.output_dir) == Path(settings.OUTPUT_FOLDER):
        settings.init_app(settings)

    logger.info("🚀 Starting sweep: %d geometries x %d grid points x %d seeds",
                len(cfg.geometries), len(cfg.grid), len(cfg.seeds))
    result = run_experiment(cfg, progress=not args.no_progress)

    failures = result.failures
    message = (f"{len(result.records) - len(failures)} runs finished, {len(failures)} failed"
               if failures else f"All {len(result.records)} runs finished")
    print(json.dumps(create_record(
        success=not failures,
        message=message,
        data={
            'output_dir': str(result.output_dir),
            'grid': result.report['grid'],
        },
        error=[f['message'] for f in failures] or None,
    ), indent=2))
    if not failures:
        logger.info("✅ Results written to %s", result.output_dir)
    return 0 if not failures else 1
