"""
Experiment sweeps: geometry x seed x entangler x depth VQE runs.

Each geometry is prepared once (integrals -> Jordan-Wigner -> tapering ->
exact ground energy); every run then minimizes the trial-state energy with
SPSA and writes its convergence trace. Traces are reduced to a median over
seeds per geometry and to a geometric mean/std across geometries.
"""

import csv
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Optional

import numpy as np
import yaml
from tqdm import tqdm

from models.exact_solver import ground_energy
from models.fermion import SPIN_CONVENTION, build_qubit_hamiltonian, load_integrals
from models.molecules import MoleculeSweep
from models.optimizer import SpsaConfig, spsa_run
from models.simulator import EntanglerKind, expectation, parameter_count, prepare_trial_state
from models.tapering import (
    SYMMETRY_SOURCES, TAPER_METHODS, build_taper_triple, format_sector,
    select_ground_sector, sector_energies, symmetry_group,
)
from utils.errors import ExperimentError
from utils.run_utils import create_record, format_time, geometry_label, grid_dirname, trace_filename

logger = logging.getLogger(__name__)

DELTA_FLOOR = 1e-12
VARIATIONAL_SLACK = 1e-9
THETA_STREAM = 1

TRACE_HEADER = ('iter', 'energy', 'energy_minus_ground')
AGGREGATE_HEADER = ('iter', 'geo_mean', 'geo_std')
SUMMARY_HEADER = ('entangler', 'depth', 'geo_mean_final', 'geo_std_final', 'median_final')

CONVENTIONS = {
    'qubit_order': 'qubit 1 is the leftmost tensor factor and the most significant basis bit',
    'rotation': 'R(phi) = cos(phi/2) I - i sin(phi/2) sigma for X, Y and Z',
    'ansatz': 'layer 0: X then Z per qubit; layers 1..d: entangler then Z, X, Z per qubit; '
              'qubits in ascending order; D = (3d+2)m',
    'initial_state': 'vacuum |0...0>',
    'jordan_wigner': 'a_j = I^(j-1) (x) (X+iY)/2 (x) Z^(m-j); |1> is occupied',
    'spin_orbitals': SPIN_CONVENTION,
    'entanglers': {
        'cnot_chain': 'CNOT(q, q+1) for q = 1..m-1 in ascending order',
        'cnot_pairs': 'CNOT(i, j) for all i < j in lexicographic order',
        'cm_not': 'qubit 1 controls X on qubits 2..m',
        'pst_m': 'bit reversal with uniform phase i',
        'iswap_2': 'when qubits 1..m-2 are all |1>, swap the last two qubits and multiply by i',
    },
    'tapering': 'U = V_1...V_r . H(q(i), rho(i)=Z) . W, tapered qubits last; '
                'sector signs are generator eigenvalues; lowest-energy sector selected',
    'recorded_energy': 'E(theta_k) before the k-th update',
    'spsa': 'k starts at 1; theta +- c_k Delta_k; a calibrated at theta_0 unless given',
    'aggregation': 'median over seeds per geometry, then geometric mean and population '
                   'geometric std across geometries, Delta E floored at 1e-12',
}


def geometric_mean(values, axis=None):
    """exp(mean(ln v)) with every v floored at 1e-12"""
    logs = _floored_logs(values)
    return np.exp(np.mean(logs, axis=axis))


def geometric_std(values, axis=None):
    """exp(population std(ln v)) with every v floored at 1e-12"""
    logs = _floored_logs(values)
    return np.exp(np.std(logs, axis=axis))


def _floored_logs(values):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ExperimentError("geometric statistics need at least one value")
    return np.log(np.maximum(values, DELTA_FLOOR))


@dataclass(frozen=True)
class RunConfig:
    """A sweep over geometries, entanglers, depths and seeds"""

    geometries: tuple
    entanglers: tuple = (EntanglerKind.CNOT_CHAIN,)
    depths: tuple = (1,)
    iterations: int = 1000
    seeds: tuple = tuple(range(10))
    output_dir: Path = Path('results')
    taper: bool = True
    symmetry: str = 'spin_parity'
    taper_method: str = 'dense'
    spsa_a_exponent: float = 0.602
    spsa_c: float = 0.01
    spsa_gamma_exponent: float = 0.101
    calibration_samples: int = 25
    threads: int = 1
    molecule: Optional[MoleculeSweep] = None

    def __post_init__(self):
        if not self.geometries:
            raise ExperimentError("at least one geometry file is required")
        if not self.entanglers:
            raise ExperimentError("at least one entangler is required")
        if not self.depths or any(d < 0 for d in self.depths):
            raise ExperimentError(f"depths must be non-negative, got {self.depths}")
        if self.iterations < 1:
            raise ExperimentError(f"iterations must be >= 1, got {self.iterations}")
        if not self.seeds:
            raise ExperimentError("at least one seed is required")
        if self.symmetry not in SYMMETRY_SOURCES:
            raise ExperimentError(f"symmetry must be one of {SYMMETRY_SOURCES}, got {self.symmetry!r}")
        if self.taper_method not in TAPER_METHODS:
            raise ExperimentError(f"taper_method must be one of {TAPER_METHODS}")
        if self.threads < 1:
            raise ExperimentError("threads must be >= 1")

    @classmethod
    def from_mapping(cls, data, settings=None, base_dir=None):
        """
        Build a RunConfig from a parsed YAML/JSON mapping

        Args:
            data: mapping with keys mirroring the fields; ``integrals`` (or
                ``geometries``) lists the integrals files, ``entangler`` /
                ``depth`` may replace the list forms
            settings: Config class supplying defaults
            base_dir: directory that relative paths are resolved against
        """
        if not isinstance(data, dict):
            raise ExperimentError("run configuration must be a mapping")
        base_dir = Path(base_dir or '.')

        def default(name, fallback):
            return getattr(settings, name, fallback) if settings else fallback

        files = data.get('integrals', data.get('geometries'))
        if isinstance(files, (str, Path)):
            files = [files]
        geometries = tuple(
            _resolve(f, base_dir, default('INTEGRALS_PATH', None)) for f in files or ()
        )
        molecule = _molecule_sweep(data.get('molecule'), base_dir, default('INTEGRALS_PATH', None))
        if molecule is not None:
            geometries += tuple(molecule.paths())

        entanglers = data.get('entanglers', data.get('entangler', 'cnot_chain'))
        if isinstance(entanglers, str):
            entanglers = [entanglers]
        depths = data.get('depths', data.get('depth', 1))
        if isinstance(depths, (int, str)):
            depths = [depths]
        seeds = data.get('seeds', default('DEFAULT_SEEDS', list(range(10))))
        if isinstance(seeds, int):
            seeds = list(range(seeds))

        output_dir = Path(data.get('output_dir') or default('OUTPUT_FOLDER', 'results'))
        if not output_dir.is_absolute() and 'output_dir' in data:
            output_dir = base_dir / output_dir

        try:
            return cls(
                geometries=geometries,
                entanglers=tuple(EntanglerKind.parse(e) for e in entanglers),
                depths=tuple(int(d) for d in depths),
                iterations=int(data.get('iterations', default('DEFAULT_ITERATIONS', 1000))),
                seeds=tuple(int(s) for s in seeds),
                output_dir=output_dir,
                taper=bool(data.get('taper', True)),
                symmetry=data.get('symmetry', default('DEFAULT_SYMMETRY', 'spin_parity')),
                taper_method=data.get('taper_method', default('TAPER_METHOD', 'dense')),
                spsa_a_exponent=float(data.get('A', default('SPSA_A', 0.602))),
                spsa_c=float(data.get('c', default('SPSA_C', 0.01))),
                spsa_gamma_exponent=float(data.get('Gamma', default('SPSA_GAMMA', 0.101))),
                calibration_samples=int(
                    data.get('calibration_samples', default('CALIBRATION_SAMPLES', 25))
                ),
                threads=_bounded_threads(data.get('threads', default('THREADS', 1)), settings),
                molecule=molecule,
            )
        except (TypeError, ValueError) as e:
            if isinstance(e, ExperimentError):
                raise
            raise ExperimentError(f"invalid run configuration: {e}") from e

    @property
    def grid(self):
        return [(kind, depth) for kind in self.entanglers for depth in self.depths]

    def spsa_config(self, seed):
        return SpsaConfig(
            a_exponent=self.spsa_a_exponent,
            c=self.spsa_c,
            gamma_exponent=self.spsa_gamma_exponent,
            calibration_samples=self.calibration_samples,
            iterations=self.iterations,
            seed=seed,
        )

    def to_dict(self):
        return {
            'geometries': [str(g) for g in self.geometries],
            'entanglers': [k.value for k in self.entanglers],
            'depths': list(self.depths),
            'iterations': self.iterations,
            'seeds': list(self.seeds),
            'output_dir': str(self.output_dir),
            'taper': self.taper,
            'symmetry': self.symmetry,
            'taper_method': self.taper_method,
            'spsa': {
                'A': self.spsa_a_exponent,
                'c': self.spsa_c,
                'Gamma': self.spsa_gamma_exponent,
                'calibration_samples': self.calibration_samples,
            },
            'threads': self.threads,
            'molecule': self.molecule.to_dict() if self.molecule else None,
        }


def _molecule_sweep(block, base_dir, integrals_dir):
    """The optional ``molecule`` block; generated files default to the integrals folder"""
    if block is None:
        return None
    if not isinstance(block, dict):
        raise ExperimentError("molecule block must be a mapping")
    directory = block.get('directory')
    directory = base_dir / directory if directory else Path(integrals_dir or base_dir)
    try:
        return MoleculeSweep.from_mapping(block, directory)
    except (TypeError, ValueError) as e:
        raise ExperimentError(f"invalid molecule block: {e}") from e


def _bounded_threads(value, settings):
    """Thread count capped at the configured THREADS"""
    threads = int(value)
    if settings is not None:
        threads = min(threads, getattr(settings, 'THREADS', threads))
    return threads


def _resolve(path, base_dir, fallback_dir):
    path = Path(path)
    if path.is_absolute():
        return path
    candidate = base_dir / path
    if not candidate.exists() and fallback_dir is not None and (Path(fallback_dir) / path).exists():
        return Path(fallback_dir) / path
    return candidate


def load_run_config(path, settings=None):
    """Read a RunConfig from a .yaml/.yml or .json file"""
    path = Path(path)
    if not path.is_file():
        raise ExperimentError(f"run configuration not found: {path}")
    text = path.read_text()
    try:
        if path.suffix.lower() in ('.yaml', '.yml'):
            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except (yaml.YAMLError, json.JSONDecodeError) as e:
        raise ExperimentError(f"{path}: cannot parse run configuration ({e})") from e
    return RunConfig.from_mapping(data, settings, base_dir=path.parent)


@dataclass
class GeometryProblem:
    """The qubit Hamiltonian a geometry's runs minimize, with its exact ground energy"""

    label: str
    path: Path
    hamiltonian: object
    ground_energy: float
    full_qubits: int
    sector: tuple = ()
    generators: tuple = ()
    triple: Optional[dict] = None
    sector_energies: list = field(default_factory=list)

    @property
    def num_qubits(self):
        return self.hamiltonian.num_qubits

    def to_dict(self):
        return {
            'label': self.label,
            'file': str(self.path),
            'full_qubits': self.full_qubits,
            'qubits': self.num_qubits,
            'r': len(self.generators),
            'generators': list(self.generators),
            'triple': self.triple,
            'sector': format_sector(self.sector),
            'sector_energies': {format_sector(s): e for s, e in self.sector_energies},
            'ground_energy': self.ground_energy,
            'terms': len(self.hamiltonian),
        }


def prepare_geometry(path, cfg, label=None):
    """Load, map and (optionally) taper one geometry"""
    path = Path(path)
    label = label or geometry_label(path)
    if cfg.molecule is not None:
        cfg.molecule.ensure(path)
    mi = load_integrals(path)
    h = build_qubit_hamiltonian(mi)
    problem = GeometryProblem(label, path, h, 0.0, h.num_qubits)

    if cfg.taper:
        group = symmetry_group(h, cfg.symmetry)
        if group.rank:
            triple = build_taper_triple(group)
            sector, tapered = select_ground_sector(h, triple, cfg.taper_method)
            problem.hamiltonian = tapered.hamiltonian
            problem.sector = sector
            problem.generators = tuple(group.labels())
            problem.triple = triple.to_dict()
            problem.sector_energies = sector_energies(h, triple, cfg.taper_method)
        else:
            logger.warning("No symmetries found for %s; running untapered", label)

    if problem.num_qubits < 1:
        raise ExperimentError(f"{label}: tapering removed every qubit, nothing to optimize")
    if problem.num_qubits < 2 and any(cfg.depths):
        raise ExperimentError(
            f"{label}: {problem.num_qubits} qubit left after tapering; "
            "entangling layers (depth >= 1) need at least 2"
        )
    problem.ground_energy = ground_energy(problem.hamiltonian).ground_energy
    if mi.reference_ground_energy is not None:
        drift = abs(problem.ground_energy - mi.reference_ground_energy)
        if drift > 1e-8:
            logger.warning("%s: exact ground energy differs from the recorded reference by %.3e",
                           label, drift)
    logger.info("Prepared %s: %d -> %d qubits, E_g = %.10f",
                label, problem.full_qubits, problem.num_qubits, problem.ground_energy)
    return problem


def initial_parameters(seed, count):
    """theta_0 uniform in [0, 2 pi)^count from a stream derived from the seed"""
    return np.random.default_rng([seed, THETA_STREAM]).uniform(0.0, 2 * np.pi, count)


def write_trace(path, rows):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(TRACE_HEADER)
        for k, energy, delta in rows:
            writer.writerow((k, repr(energy), repr(delta)))


def read_trace(path):
    with open(path, newline='') as f:
        reader = csv.DictReader(f)
        return np.array([float(row['energy_minus_ground']) for row in reader])


def run_single(problem, kind, depth, seed, cfg, trace_dir):
    """
    One SPSA minimization; returns a run record

    Raises:
        ExperimentError: a recorded energy falls below E_g by more than 1e-9
    """
    m = problem.num_qubits
    h = problem.hamiltonian
    count = parameter_count(m, depth)

    def objective(theta):
        return expectation(prepare_trial_state(theta, depth, kind, m), h)

    start = time.time()
    trace = spsa_run(objective, initial_parameters(seed, count), cfg.spsa_config(seed))
    rows = trace.to_rows(problem.ground_energy)
    deltas = np.array([row[2] for row in rows])
    if deltas.min() < -VARIATIONAL_SLACK:
        raise ExperimentError(
            f"energy below the exact ground energy by {-deltas.min():.3e}"
        )
    path = Path(trace_dir) / trace_filename(problem.label, seed)
    write_trace(path, rows)
    return deltas, {
        'geometry': problem.label,
        'seed': seed,
        'entangler': kind.value,
        'depth': depth,
        'parameters': count,
        'a': trace.a,
        'final_energy': trace.final_energy,
        'final_delta': float(deltas[-1]),
        'objective_calls': trace.objective_calls,
        'trace': path.name,
        'elapsed': format_time(time.time() - start),
    }


def write_aggregate(path, geo_mean, geo_std):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(AGGREGATE_HEADER)
        for k, (mean, std) in enumerate(zip(geo_mean, geo_std), start=1):
            writer.writerow((k, repr(float(mean)), repr(float(std))))


def aggregate_curves(curves_by_geometry):
    """
    Median over seeds per geometry, then geometric mean/std across geometries

    Args:
        curves_by_geometry: {label: [Delta E array per seed]}, sorted by label

    Returns:
        (geo_mean, geo_std) arrays over iterations
    """
    medians = np.array([
        np.median(np.vstack(curves), axis=0)
        for _, curves in sorted(curves_by_geometry.items())
    ])
    return geometric_mean(medians, axis=0), geometric_std(medians, axis=0)


@dataclass
class ExperimentResult:
    output_dir: Path
    records: list
    report: dict

    @property
    def failures(self):
        return [r for r in self.records if not r['success']]

    @property
    def success(self):
        return not self.failures


def _unique_labels(paths):
    labels, seen = [], {}
    for path in paths:
        label = geometry_label(path)
        count = seen.get(label, 0)
        seen[label] = count + 1
        labels.append(label if count == 0 else f"{label}_{count}")
    return labels


def run_experiment(cfg, progress=True):
    """
    Run every geometry x seed x entangler x depth job and write the outputs

    Writes trace_<geometry>_<seed>.csv and aggregate.csv (per entangler/depth
    directory when the grid has more than one pair), depth_summary.csv for
    grids, and report.json. Failed runs are recorded and the sweep continues.

    Returns:
        ExperimentResult
    """
    output_dir = Path(cfg.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    records = []

    problems = {}
    for path, label in zip(cfg.geometries, _unique_labels(cfg.geometries)):
        try:
            problems[label] = prepare_geometry(path, cfg, label)
        except Exception as e:
            logger.error("Geometry %s failed to prepare: %s", label, e)
            logger.debug("Preparation failure for %s", label, exc_info=True)
            records.append(create_record(False, f"preparation failed for {label}",
                                         data={'geometry': label}, error=str(e)))

    grid = cfg.grid
    single_pair = len(grid) == 1
    pair_dirs = {}
    for kind, depth in grid:
        pair_dir = output_dir if single_pair else output_dir / grid_dirname(kind.value, depth)
        pair_dir.mkdir(parents=True, exist_ok=True)
        pair_dirs[(kind, depth)] = pair_dir

    jobs = [
        (label, kind, depth, seed)
        for kind, depth in grid
        for label in sorted(problems)
        for seed in cfg.seeds
    ]
    logger.info("Running %d VQE jobs on %d threads", len(jobs), cfg.threads)

    curves = {}
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool, \
            tqdm(total=len(jobs), desc='VQE runs', unit='run', disable=not progress) as pbar:
        futures = {
            pool.submit(run_single, problems[label], kind, depth, seed, cfg,
                        pair_dirs[(kind, depth)]): (label, kind, depth, seed)
            for label, kind, depth, seed in jobs
        }
        for future in as_completed(futures):
            label, kind, depth, seed = futures[future]
            run_name = f"{label}/{kind.value}/d{depth}/seed {seed}"
            try:
                deltas, data = future.result()
                curves[(label, kind, depth, seed)] = deltas
                records.append(create_record(True, f"{run_name} finished", data=data))
            except Exception as e:
                logger.error("Run %s failed: %s", run_name, e)
                logger.debug("Failure in run %s", run_name, exc_info=True)
                records.append(create_record(
                    False, f"{run_name} failed",
                    data={'geometry': label, 'entangler': kind.value, 'depth': depth, 'seed': seed},
                    error=str(e),
                ))
            pbar.update(1)

    summary = []
    pair_reports = []
    for kind, depth in grid:
        by_geometry = {}
        for (label, k, d, seed), deltas in sorted(curves.items(), key=lambda item: (item[0][0], item[0][3])):
            if k is kind and d == depth:
                by_geometry.setdefault(label, []).append(deltas)
        pair_report = {'entangler': kind.value, 'depth': depth,
                       'directory': str(pair_dirs[(kind, depth)].relative_to(output_dir))}
        if by_geometry:
            geo_mean, geo_std = aggregate_curves(by_geometry)
            write_aggregate(pair_dirs[(kind, depth)] / 'aggregate.csv', geo_mean, geo_std)
            finals = [curve[-1] for label in sorted(by_geometry) for curve in by_geometry[label]]
            row = (kind.value, depth, float(geo_mean[-1]), float(geo_std[-1]), float(np.median(finals)))
            summary.append(row)
            pair_report.update({
                'geo_mean_final': row[2],
                'geo_std_final': row[3],
                'median_final': row[4],
                'parameters': {label: parameter_count(problems[label].num_qubits, depth)
                               for label in sorted(by_geometry)},
            })
        pair_reports.append(pair_report)

    if not single_pair:
        with open(output_dir / 'depth_summary.csv', 'w', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(SUMMARY_HEADER)
            for entangler, depth, mean, std, median in summary:
                writer.writerow((entangler, depth, repr(mean), repr(std), repr(median)))

    report = {
        'config': cfg.to_dict(),
        'conventions': CONVENTIONS,
        'geometries': [problems[label].to_dict() for label in sorted(problems)],
        'grid': pair_reports,
        'seeds': list(cfg.seeds),
        'seed_aggregation': 'median over seeds (default 10 seeds)',
        'runs': sorted(
            (r for r in records if r['success']),
            key=lambda r: (r['data']['entangler'], r['data']['depth'],
                           r['data']['geometry'], r['data']['seed']),
        ),
        'failures': [r for r in records if not r['success']],
        'elapsed': format_time(time.time() - started),
        'timestamp': datetime.now().isoformat(),
    }
    with open(output_dir / 'report.json', 'w') as f:
        json.dump(report, f, indent=2)

    result = ExperimentResult(output_dir, records, report)
    if result.failures:
        logger.warning("%d of %d runs failed", len(result.failures), len(jobs) or len(records))
    else:
        logger.info("All %d runs finished in %s", len(jobs), report['elapsed'])
    return result
