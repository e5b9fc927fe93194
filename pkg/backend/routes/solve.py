import json
import logging

from models.exact_solver import ground_energy, spectrum_gap
from utils.errors import VQEError
from utils.pauli_io import load_operator
from utils.run_utils import create_record

logger = logging.getLogger(__name__)


def register_solve(subparsers, settings):
    parser = subparsers.add_parser('solve', help='Exact ground energy of a Hamiltonian')
    parser.add_argument('--input', required=True,
                        help='PauliSum (.json/.txt) or integrals (.json/.fcidump) file')
    parser.add_argument('--spectrum', action='store_true', help='Print the full spectrum')
    parser.set_defaults(handler=solve_command)


def solve_command(args, settings):
    try:
        h, from_integrals = load_operator(args.input)
        result = ground_energy(h, max_qubits=settings.MAX_EXACT_QUBITS)
    except VQEError as e:
        logger.error("Solve failed: %s", e)
        print(json.dumps(create_record(False, 'Exact solve failed', error=str(e)), indent=2))
        return 1

    data = result.to_dict(include_spectrum=args.spectrum)
    data.update({
        'qubits': h.num_qubits,
        'terms': len(h),
        'gap': spectrum_gap(result),
        'jordan_wigner_mapped': from_integrals,
    })
    print(json.dumps(create_record(True, f"Ground energy {result.ground_energy:.12f}", data=data),
                     indent=2))
    return 0
