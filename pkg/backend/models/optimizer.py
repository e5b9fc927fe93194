"""
Simultaneous perturbation stochastic approximation (SPSA).

Gains follow a_k = a / k^A and c_k = c / k^Gamma for k = 1..K. When ``a``
is not given it is calibrated from the mean two-point slope around the
starting point.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from utils.errors import OptimizerError

logger = logging.getLogger(__name__)

FLAT_TOL = 1e-12
TWO_PI = 2 * np.pi
LOG_EVERY = 100


@dataclass(frozen=True)
class SpsaConfig:
    a_exponent: float = 0.602
    c: float = 0.01
    gamma_exponent: float = 0.101
    calibration_samples: int = 25
    iterations: int = 1000
    seed: int = 0
    a: Optional[float] = None
    wrap_angles: bool = True
    record_thetas: bool = False

    def __post_init__(self):
        if not self.c > 0:
            raise OptimizerError(f"c must be positive, got {self.c}")
        if self.iterations < 1:
            raise OptimizerError(f"iterations must be >= 1, got {self.iterations}")
        if not (self.a_exponent > 0 and self.gamma_exponent > 0):
            raise OptimizerError("gain exponents must be positive")
        if self.calibration_samples < 1:
            raise OptimizerError("calibration needs at least one sample")
        if self.a is not None and not self.a > 0:
            raise OptimizerError(f"a must be positive, got {self.a}")

    def gains(self, k, a):
        """(a_k, c_k) for iteration k >= 1"""
        return a / k ** self.a_exponent, self.c / k ** self.gamma_exponent

    def to_dict(self):
        return {
            'A': self.a_exponent,
            'c': self.c,
            'Gamma': self.gamma_exponent,
            'calibration_samples': self.calibration_samples,
            'iterations': self.iterations,
            'seed': self.seed,
            'a': self.a,
            'wrap_angles': self.wrap_angles,
        }


@dataclass
class SpsaTrace:
    """Per-iteration record of one SPSA run; energies[k-1] is E(theta_k)"""

    energies: np.ndarray
    gradient_norms: np.ndarray
    a: float
    final_theta: np.ndarray
    final_energy: float
    objective_calls: int
    thetas: Optional[np.ndarray] = field(default=None)

    @property
    def iterations(self):
        return len(self.energies)

    def to_rows(self, ground_energy=0.0):
        """(iter, energy, energy - ground) rows for the trace CSV"""
        return [
            (k, float(e), float(e - ground_energy))
            for k, e in enumerate(self.energies, start=1)
        ]


def rademacher(dim, rng):
    """Vector of independent +-1 entries with probability 1/2 each"""
    if dim < 1:
        raise OptimizerError(f"perturbation dimension must be >= 1, got {dim}")
    return (rng.integers(0, 2, size=dim) * 2 - 1).astype(float)


def calibrate_a(objective, theta_1, cfg, rng=None):
    """
    a = (2 pi / 5) c / mean |E(theta + c D) - E(theta - c D)|

    The mean runs over cfg.calibration_samples Rademacher draws.

    Raises:
        OptimizerError: mean slope below 1e-12 (flat landscape)
    """
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    theta_1 = np.asarray(theta_1, dtype=float)
    differences = []
    for _ in range(cfg.calibration_samples):
        delta = rademacher(theta_1.size, rng)
        plus = objective(theta_1 + cfg.c * delta)
        minus = objective(theta_1 - cfg.c * delta)
        differences.append(abs(plus - minus))
    mean_slope = float(np.mean(differences))
    if not np.isfinite(mean_slope):
        raise OptimizerError("non-finite energy during calibration")
    if mean_slope < FLAT_TOL:
        raise OptimizerError(
            f"flat landscape: mean calibration slope {mean_slope:.3e} below {FLAT_TOL:.0e}"
        )
    a = (TWO_PI / 5) * cfg.c / mean_slope
    logger.debug("Calibrated a = %.6g from mean slope %.6g", a, mean_slope)
    return a


def _check_finite(value, k, label):
    if not np.isfinite(value):
        raise OptimizerError(f"non-finite {label} energy {value} at iteration {k}")
    return float(value)


def spsa_run(objective, theta_0, cfg, monitor=None, callback=None):
    """
    Minimize ``objective`` with SPSA

    Args:
        objective: callable theta -> energy, evaluated twice per iteration
        theta_0: starting vector, also the calibration point
        cfg: SpsaConfig
        monitor: callable recording E(theta_k) each iteration; defaults to
            ``objective`` and is not counted in objective_calls
        callback: optional callable(progress, k, K) called after each update

    Returns:
        SpsaTrace
    """
    theta = np.array(theta_0, dtype=float)
    if theta.ndim != 1 or theta.size == 0:
        raise OptimizerError(f"theta_0 must be a non-empty vector, got shape {theta.shape}")
    rng = np.random.default_rng(cfg.seed)
    calls = 0

    def counted(x):
        nonlocal calls
        calls += 1
        return objective(x)

    monitor = monitor or objective
    a = cfg.a if cfg.a is not None else calibrate_a(counted, theta, cfg, rng)

    K = cfg.iterations
    energies = np.empty(K)
    gradient_norms = np.empty(K)
    thetas = np.empty((K, theta.size)) if cfg.record_thetas else None

    for k in range(1, K + 1):
        energies[k - 1] = _check_finite(monitor(theta), k, 'recorded')
        if thetas is not None:
            thetas[k - 1] = theta
        a_k, c_k = cfg.gains(k, a)
        delta = rademacher(theta.size, rng)
        plus = _check_finite(counted(theta + c_k * delta), k, 'perturbed')
        minus = _check_finite(counted(theta - c_k * delta), k, 'perturbed')
        gradient = (plus - minus) / (2 * c_k) * delta
        theta = theta - a_k * gradient
        if cfg.wrap_angles:
            theta = np.mod(theta, TWO_PI)
        gradient_norms[k - 1] = np.linalg.norm(gradient)

        if k % LOG_EVERY == 0:
            logger.debug("SPSA iteration %d/%d: E = %.10f", k, K, energies[k - 1])
        if callback:
            callback(k / K, k, K)

    final_energy = _check_finite(monitor(theta), K + 1, 'final')
    return SpsaTrace(energies, gradient_norms, a, theta, final_energy, calls, thetas)
