import json
import logging
from pathlib import Path

from models.molecules import (
    DIATOMICS, INTEGRAL_FORMATS, UNITS, MoleculeSweep, bond_length_range, rhf_integrals,
    write_integrals,
)
from utils.errors import VQEError
from utils.run_utils import create_record

logger = logging.getLogger(__name__)

SUFFIXES = {'json': '.json', 'fcidump': '.fcidump'}


def register_integrals(subparsers, settings):
    parser = subparsers.add_parser('integrals', help='Generate diatomic integrals files with PySCF')
    parser.add_argument('--molecule', choices=sorted(DIATOMICS), default='h2')
    lengths = parser.add_mutually_exclusive_group(required=True)
    lengths.add_argument('--bond-lengths', type=float, nargs='+', metavar='R',
                         help='Internuclear distances')
    lengths.add_argument('--range', type=float, nargs=3, metavar=('START', 'STOP', 'STEP'),
                         help='Distances from START to STOP inclusive')
    parser.add_argument('--basis', default='sto-3g')
    parser.add_argument('--unit', choices=UNITS, default='angstrom')
    parser.add_argument('--format', choices=INTEGRAL_FORMATS, default='json')
    parser.add_argument('--output', default=str(settings.INTEGRALS_PATH),
                        help='Directory for the generated files')
    parser.add_argument('--overwrite', action='store_true', help='Regenerate existing files')
    parser.set_defaults(handler=integrals_command)


def integrals_command(args, settings):
    """Write one integrals file per bond length; existing files are kept unless --overwrite"""
    try:
        bond_lengths = tuple(args.bond_lengths) if args.bond_lengths else bond_length_range(*args.range)
        sweep = MoleculeSweep(args.molecule, bond_lengths, Path(args.output), args.basis, args.unit)
        files, energies, skipped = [], {}, 0
        for bond_length in sweep.bond_lengths:
            label = sweep.label(bond_length)
            path = sweep.directory / f"{label}{SUFFIXES[args.format]}"
            if path.is_file() and not args.overwrite:
                skipped += 1
                files.append(str(path))
                continue
            spatial = rhf_integrals(args.molecule, bond_length, args.basis, args.unit)
            write_integrals(spatial, path, args.format)
            energies[label] = spatial.fci_energy
            files.append(str(path))
            logger.info("✅ %s written (E_FCI = %.10f)", path, spatial.fci_energy)
    except VQEError as e:
        logger.error("Integral generation failed: %s", e)
        print(json.dumps(create_record(False, 'Integral generation failed', error=str(e)), indent=2))
        return 1

    print(json.dumps(create_record(
        True,
        f"{len(files) - skipped} files generated, {skipped} kept",
        data={'files': files, 'fci_energies': energies, 'unit': args.unit, 'basis': args.basis},
    ), indent=2))
    return 0
