import os
from pathlib import Path


def _env_int(name, default):
    value = os.environ.get(name)
    return int(value) if value else default


class Config:
    """Base configuration"""

    # Base directory
    BASE_DIR = Path(__file__).parent

    # Logging
    LOG_LEVEL = os.environ.get('VQE_LOG_LEVEL', 'INFO').upper()

    # Worker pool for experiment sweeps
    THREADS = max(1, _env_int('VQE_THREADS', os.cpu_count() or 1))

    # Output settings
    OUTPUT_FOLDER = Path(os.environ.get('VQE_OUTPUT_DIR') or BASE_DIR / 'results')
    INTEGRALS_PATH = BASE_DIR / 'data' / 'integrals'

    # Dense-size guards (qubits)
    MAX_DENSE_QUBITS = 14
    MAX_EXACT_QUBITS = 12
    MAX_TAPER_QUBITS = 12

    # SPSA settings
    SPSA_A = 0.602
    SPSA_C = 0.01
    SPSA_GAMMA = 0.101
    CALIBRATION_SAMPLES = 25
    DEFAULT_ITERATIONS = 1000
    DEFAULT_SEEDS = list(range(10))

    # Tapering
    TAPER_METHOD = os.environ.get('VQE_TAPER_METHOD', 'dense')
    DEFAULT_SYMMETRY = 'spin_parity'

    @staticmethod
    def init_app(settings):
        """Create the output folder"""
        Path(settings.OUTPUT_FOLDER).mkdir(parents=True, exist_ok=True)


class DevelopmentConfig(Config):
    """Development configuration"""
    LOG_LEVEL = os.environ.get('VQE_LOG_LEVEL', 'DEBUG').upper()


class ProductionConfig(Config):
    """Production configuration"""


class TestingConfig(Config):
    """Testing configuration"""
    THREADS = 2
    LOG_LEVEL = 'WARNING'


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}
