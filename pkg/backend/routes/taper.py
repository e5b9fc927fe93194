import json
import logging

from models.tapering import (
    SYMMETRY_SOURCES, build_taper_triple, build_unitary, format_sector, parse_sector,
    sector_energies, select_ground_sector, symmetry_group, taper,
)
from utils.errors import SymmetryError, VQEError
from utils.pauli_io import load_operator, save_pauli_sum, to_json
from utils.run_utils import create_record

logger = logging.getLogger(__name__)


def register_taper(subparsers, settings):
    parser = subparsers.add_parser('taper', help='Remove Z2-symmetric qubits from a Hamiltonian')
    parser.add_argument('--input', required=True,
                        help='PauliSum (.json/.txt) or integrals (.json/.fcidump) file')
    parser.add_argument('--sector', help="Generator eigenvalues, e.g. '+-' (default: lowest-energy sector)")
    parser.add_argument('--symmetry', choices=SYMMETRY_SOURCES,
                        help='spin_parity (integrals input only) or maximal symmetry search')
    parser.add_argument('--method', choices=('dense', 'clifford'), default=settings.TAPER_METHOD,
                        help='Conjugation route')
    parser.add_argument('--emit-unitary', action='store_true',
                        help='Include the dense tapering unitary in the report')
    parser.add_argument('--output', help='Write the tapered PauliSum here (.json or .txt)')
    parser.set_defaults(handler=taper_command)


def _unitary_payload(u):
    return {'re': u.real.tolist(), 'im': u.imag.tolist()}


def taper_command(args, settings):
    """Taper one Hamiltonian and print the tapered PauliSum with its report"""
    try:
        h, from_integrals = load_operator(args.input)
        symmetry = args.symmetry or (settings.DEFAULT_SYMMETRY if from_integrals else 'maximal')
        group = symmetry_group(h, symmetry)
        if group.rank == 0:
            raise SymmetryError('no symmetries found; nothing to taper')
        triple = build_taper_triple(group)
        energies = sector_energies(h, triple, args.method)
        if args.sector:
            tapered = taper(h, triple, parse_sector(args.sector), args.method)
        else:
            _, tapered = select_ground_sector(h, triple, args.method)
    except VQEError as e:
        logger.error("Tapering failed: %s", e)
        print(json.dumps(create_record(False, 'Tapering failed', error=str(e)), indent=2))
        return 1

    report = {
        'symmetry': symmetry,
        'method': args.method,
        'qubits': {'before': h.num_qubits, 'after': tapered.num_qubits},
        'r': group.rank,
        'generators': group.labels(),
        'q': list(triple.q),
        'rho': list(triple.rho),
        'tau': [t.axes for t in triple.tau],
        'permutation': list(tapered.permutation),
        'sector': format_sector(tapered.sector),
        'sector_energies': {format_sector(s): e for s, e in energies},
    }
    if args.emit_unitary:
        report['unitary'] = _unitary_payload(build_unitary(triple, h.num_qubits))
    if args.output:
        path = save_pauli_sum(tapered.hamiltonian, args.output)
        report['output'] = str(path)
        logger.info("✅ Tapered Hamiltonian saved to %s", path)

    print(json.dumps(create_record(
        True,
        f"Tapered {h.num_qubits} -> {tapered.num_qubits} qubits in sector {report['sector']}",
        data={'hamiltonian': to_json(tapered.hamiltonian), 'report': report},
    ), indent=2))
    return 0
