"""
Exception hierarchy for the VQE toolkit.

Every validation error is also a ValueError so callers can catch either.
"""


class VQEError(Exception):
    """Base class for all toolkit errors"""


class PauliAlgebraError(VQEError, ValueError):
    """Malformed Pauli strings, length mismatches and dense-size guards"""


class IntegralsFormatError(VQEError, ValueError):
    """Molecular integrals file that does not match the expected schema"""


class NonHermitianError(VQEError, ValueError):
    """Operator expected to be Hermitian carries imaginary residue"""


class SymmetryError(VQEError, ValueError):
    """Symmetry search, triple construction or tapering failure"""


class SimulationError(VQEError, ValueError):
    """Invalid state vector, qubit index or parameter vector"""


class OptimizerError(VQEError, ValueError):
    """SPSA configuration or landscape problem"""


class ExperimentError(VQEError, ValueError):
    """Invalid run configuration"""
