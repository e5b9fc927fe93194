import csv
import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
import yaml

from models.experiment import (
    CONVENTIONS, RunConfig, aggregate_curves, geometric_mean, geometric_std,
    initial_parameters, load_run_config, prepare_geometry, read_trace, run_experiment,
    run_single,
)
from models.simulator import EntanglerKind
from utils.errors import ExperimentError
from utils.run_utils import trace_filename
from tests.helpers import H2_REFERENCE

H2_LABEL = 'h2_sto3g_0.7414'
CONFIGS_DIR = Path(__file__).resolve().parent.parent / 'configs'


def read_csv(path):
    with open(path, newline='') as f:
        return list(csv.DictReader(f))


@pytest.fixture
def small_config(h2_path, tmp_path):
    return RunConfig(
        geometries=(h2_path,),
        depths=(0,),
        iterations=10,
        seeds=(0,),
        output_dir=tmp_path / 'out',
    )


class TestGeometricStatistics:

    def test_mean(self):
        assert geometric_mean([4, 1]) == pytest.approx(2.0)

    def test_singleton(self):
        assert geometric_mean([0.3]) == pytest.approx(0.3)
        assert geometric_std([0.3]) == pytest.approx(1.0)

    def test_floor(self):
        assert geometric_mean([1e-15, 1]) == pytest.approx(1e-6)

    def test_population_std(self):
        assert geometric_std([4, 1]) == pytest.approx(2.0)

    def test_empty(self):
        with pytest.raises(ExperimentError):
            geometric_mean([])

    def test_along_axis(self):
        values = np.array([[4.0, 9.0], [1.0, 1.0]])
        assert np.allclose(geometric_mean(values, axis=0), [2.0, 3.0])

    def test_aggregate_median_then_geometric(self):
        curves = {
            'a': [np.array([4.0, 4.0]), np.array([1.0, 1.0]), np.array([100.0, 100.0])],
            'b': [np.array([1.0, 1.0])],
        }
        geo_mean, geo_std = aggregate_curves(curves)
        assert np.allclose(geo_mean, [2.0, 2.0])
        assert np.allclose(geo_std, [2.0, 2.0])


class TestRunConfig:

    def test_from_mapping(self, h2_path, tmp_path):
        cfg = RunConfig.from_mapping({
            'integrals': str(h2_path),
            'entangler': 'PstM',
            'depth': 2,
            'seeds': 3,
            'iterations': 50,
            'c': 0.02,
            'output_dir': 'runs',
        }, base_dir=tmp_path)
        assert cfg.geometries == (h2_path,)
        assert cfg.entanglers == (EntanglerKind.PST_M,)
        assert cfg.depths == (2,)
        assert cfg.seeds == (0, 1, 2)
        assert cfg.output_dir == tmp_path / 'runs'
        assert cfg.spsa_config(7).c == 0.02
        assert cfg.spsa_config(7).seed == 7

    def test_grid(self, h2_path):
        cfg = RunConfig.from_mapping({
            'integrals': [str(h2_path)],
            'entanglers': ['cnot_chain', 'iswap_2'],
            'depths': [1, 2],
        })
        assert cfg.grid == [
            (EntanglerKind.CNOT_CHAIN, 1), (EntanglerKind.CNOT_CHAIN, 2),
            (EntanglerKind.ISWAP_2, 1), (EntanglerKind.ISWAP_2, 2),
        ]

    @pytest.mark.parametrize('data', [
        {'depth': -1},
        {'iterations': 0},
        {'seeds': []},
        {'entangler': 'toffoli_ladder'},
        {'symmetry': 'point_group'},
        {'taper_method': 'magic'},
    ])
    def test_invalid(self, h2_path, data):
        with pytest.raises(ExperimentError):
            RunConfig.from_mapping({'integrals': [str(h2_path)], **data})

    def test_requires_geometry(self):
        with pytest.raises(ExperimentError):
            RunConfig.from_mapping({'depth': 1})

    def test_requires_mapping(self):
        with pytest.raises(ExperimentError):
            RunConfig.from_mapping(['not', 'a', 'mapping'])

    def test_load_yaml_resolves_relative_paths(self, h2_path, tmp_path):
        path = tmp_path / 'run.yaml'
        path.write_text(yaml.safe_dump({
            'integrals': [str(h2_path)],
            'entangler': 'cnot_pairs',
            'depth': 1,
            'output_dir': 'results',
        }))
        cfg = load_run_config(path)
        assert cfg.output_dir == tmp_path / 'results'
        assert cfg.entanglers == (EntanglerKind.CNOT_PAIRS,)

    def test_load_json(self, h2_path, tmp_path):
        path = tmp_path / 'run.json'
        path.write_text(json.dumps({'integrals': [str(h2_path)], 'seeds': [4, 2]}))
        assert load_run_config(path).seeds == (4, 2)

    def test_load_missing(self, tmp_path):
        with pytest.raises(ExperimentError):
            load_run_config(tmp_path / 'nope.yaml')

    def test_settings_supply_defaults(self, h2_path):
        class Settings:
            DEFAULT_ITERATIONS = 77
            DEFAULT_SEEDS = [5]
            THREADS = 3

        cfg = RunConfig.from_mapping({'integrals': [str(h2_path)]}, settings=Settings)
        assert (cfg.iterations, cfg.seeds, cfg.threads) == (77, (5,), 3)

    def test_threads_capped_by_settings(self, h2_path):
        class Settings:
            THREADS = 3

        cfg = RunConfig.from_mapping({'integrals': [str(h2_path)], 'threads': 8}, settings=Settings)
        assert cfg.threads == 3

    def test_string_depth_is_one_depth(self, h2_path):
        cfg = RunConfig.from_mapping({'integrals': [str(h2_path)], 'depth': '12'})
        assert cfg.depths == (12,)

    def test_non_numeric_depth(self, h2_path):
        with pytest.raises(ExperimentError):
            RunConfig.from_mapping({'integrals': [str(h2_path)], 'depth': 'x'})

    def test_h2_sweep_config(self):
        cfg = load_run_config(CONFIGS_DIR / 'h2_sweep.yaml')
        assert len(cfg.geometries) == 12
        assert cfg.geometries[0].name == 'h2_sto3g_0.392.json'
        assert cfg.geometries[2].name == 'h2_sto3g_0.49.json'
        assert cfg.geometries[-1].name == 'h2_sto3g_0.931.json'
        assert cfg.molecule.unit == 'angstrom'
        assert cfg.molecule.directory.resolve() == (CONFIGS_DIR.parent / 'data' / 'integrals').resolve()
        assert len(cfg.grid) == 30

    def test_molecule_block_reuses_existing_file(self, h2_path, tmp_path):
        cfg = RunConfig.from_mapping({
            'molecule': {'name': 'h2', 'bond_lengths': 0.7414, 'directory': str(h2_path.parent)},
        }, base_dir=tmp_path)
        assert cfg.geometries == (h2_path,)
        assert cfg.to_dict()['molecule']['bond_lengths'] == [0.7414]

    @pytest.mark.parametrize('block', [
        {'name': 'n2', 'bond_lengths': [1.1]},
        {'name': 'h2'},
        {'name': 'h2', 'range': [1.0, 0.5, 0.1]},
        {'name': 'h2', 'bond_lengths': [0.7], 'unit': 'parsec'},
        'h2',
    ])
    def test_invalid_molecule_block(self, block, tmp_path):
        with pytest.raises(ExperimentError):
            RunConfig.from_mapping({'molecule': block}, base_dir=tmp_path)


class TestPreparation:

    def test_spin_parity_tapering(self, h2_path, small_config):
        problem = prepare_geometry(h2_path, small_config)
        assert problem.full_qubits == 4
        assert problem.num_qubits == 2
        assert problem.sector == (-1, -1)
        assert problem.generators == ('ZIZI', 'IZIZ')
        assert problem.ground_energy == pytest.approx(H2_REFERENCE, abs=1e-9)

    def test_maximal_tapering(self, h2_path, small_config):
        problem = prepare_geometry(h2_path, replace(small_config, symmetry='maximal'))
        assert problem.num_qubits == 1
        assert problem.ground_energy == pytest.approx(H2_REFERENCE, abs=1e-9)

    def test_untapered(self, h2_path, small_config):
        problem = prepare_geometry(h2_path, replace(small_config, taper=False))
        assert problem.num_qubits == 4
        assert problem.generators == ()

    def test_initial_parameters(self):
        first = initial_parameters(3, 10)
        assert np.array_equal(first, initial_parameters(3, 10))
        assert np.all((first >= 0) & (first < 2 * np.pi))
        assert not np.array_equal(first, initial_parameters(4, 10))

    def test_variational_violation_is_reported(self, h2_path, small_config, tmp_path):
        problem = prepare_geometry(h2_path, small_config)
        problem.ground_energy = 10.0
        with pytest.raises(ExperimentError, match='below the exact ground energy'):
            run_single(problem, EntanglerKind.CNOT_CHAIN, 0, 0, small_config, tmp_path)

    def test_single_qubit_rejects_entangling_depth(self, h2_path, small_config):
        cfg = replace(small_config, symmetry='maximal', depths=(0, 1))
        with pytest.raises(ExperimentError, match='at least 2'):
            prepare_geometry(h2_path, cfg)


class TestRunExperiment:

    def test_single_run_outputs(self, small_config):
        result = run_experiment(small_config, progress=False)
        assert result.success
        out = small_config.output_dir
        trace = read_csv(out / trace_filename(H2_LABEL, 0))
        assert len(trace) == 10
        assert list(trace[0]) == ['iter', 'energy', 'energy_minus_ground']
        assert [int(row['iter']) for row in trace] == list(range(1, 11))

        aggregate = read_csv(out / 'aggregate.csv')
        deltas = read_trace(out / trace_filename(H2_LABEL, 0))
        assert np.allclose([float(r['geo_mean']) for r in aggregate], deltas, rtol=1e-12)
        assert np.allclose([float(r['geo_std']) for r in aggregate], 1.0)
        assert not (out / 'depth_summary.csv').exists()

    def test_deltas_never_below_ground(self, small_config):
        run_experiment(small_config, progress=False)
        deltas = read_trace(small_config.output_dir / trace_filename(H2_LABEL, 0))
        assert deltas.min() >= -1e-9

    def test_report(self, small_config):
        result = run_experiment(small_config, progress=False)
        report = json.loads((small_config.output_dir / 'report.json').read_text())
        assert report['conventions'] == CONVENTIONS
        assert report['seeds'] == [0]
        geometry = report['geometries'][0]
        assert (geometry['r'], geometry['sector'], geometry['qubits']) == (2, '--', 2)
        assert report['grid'][0]['parameters'] == {H2_LABEL: 4}
        assert len(report['runs']) == 1
        assert report['failures'] == []
        assert result.report['config']['depths'] == [0]

    def test_byte_identical_traces(self, small_config, tmp_path):
        first = replace(small_config, output_dir=tmp_path / 'first', seeds=(0, 1))
        second = replace(small_config, output_dir=tmp_path / 'second', seeds=(0, 1), threads=2)
        run_experiment(first, progress=False)
        run_experiment(second, progress=False)
        for seed in (0, 1):
            name = trace_filename(H2_LABEL, seed)
            assert (tmp_path / 'first' / name).read_bytes() == (tmp_path / 'second' / name).read_bytes()
        assert (tmp_path / 'first' / 'aggregate.csv').read_bytes() == \
            (tmp_path / 'second' / 'aggregate.csv').read_bytes()

    def test_grid_layout(self, small_config):
        cfg = replace(
            small_config,
            entanglers=(EntanglerKind.CNOT_CHAIN, EntanglerKind.PST_M),
            depths=(0, 1),
            iterations=5,
            threads=2,
        )
        result = run_experiment(cfg, progress=False)
        assert result.success
        out = cfg.output_dir
        for name in ('cnot_chain_d0', 'cnot_chain_d1', 'pst_m_d0', 'pst_m_d1'):
            assert (out / name / 'aggregate.csv').is_file()
            assert (out / name / trace_filename(H2_LABEL, 0)).is_file()
        summary = read_csv(out / 'depth_summary.csv')
        assert [(r['entangler'], r['depth']) for r in summary] == [
            ('cnot_chain', '0'), ('cnot_chain', '1'), ('pst_m', '0'), ('pst_m', '1'),
        ]
        parameters = {(g['entangler'], g['depth']): g['parameters'][H2_LABEL]
                      for g in result.report['grid']}
        assert parameters[('pst_m', 1)] == 10

    def test_failures_are_isolated(self, small_config, tmp_path):
        cfg = replace(small_config, geometries=(tmp_path / 'missing.json', small_config.geometries[0]))
        result = run_experiment(cfg, progress=False)
        assert not result.success
        assert len(result.failures) == 1
        assert 'missing' in result.failures[0]['data']['geometry']
        assert (cfg.output_dir / trace_filename(H2_LABEL, 0)).is_file()
        report = json.loads((cfg.output_dir / 'report.json').read_text())
        assert len(report['failures']) == 1
        assert len(report['runs']) == 1

    def test_multi_geometry_aggregate(self, small_config, h2_path, tmp_path):
        data = json.loads(h2_path.read_text())
        data['h_pqrs'] = (0.8 * np.array(data['h_pqrs'])).tolist()
        data.pop('reference_ground_energy')
        scaled = tmp_path / 'h2_scaled.json'
        scaled.write_text(json.dumps(data))

        cfg = replace(small_config, geometries=(h2_path, scaled), seeds=(0, 1))
        result = run_experiment(cfg, progress=False)
        assert result.success
        out = cfg.output_dir
        report = json.loads((out / 'report.json').read_text())
        assert sorted(g['label'] for g in report['geometries']) == ['h2_scaled', H2_LABEL]

        medians = [
            np.median([read_trace(out / trace_filename(label, seed)) for seed in cfg.seeds], axis=0)
            for label in (H2_LABEL, 'h2_scaled')
        ]
        expected = np.exp(np.mean(np.log(np.maximum(medians, 1e-12)), axis=0))
        aggregate = read_csv(out / 'aggregate.csv')
        assert len(aggregate) == cfg.iterations
        assert np.allclose([float(r['geo_mean']) for r in aggregate], expected, rtol=1e-10)
        assert not np.allclose(medians[0], medians[1])


@pytest.mark.slow
@pytest.mark.parametrize('depth', [1, 2])
def test_h2_vqe_reaches_chemical_scale(h2_path, tmp_path, depth):
    cfg = RunConfig(
        geometries=(h2_path,),
        entanglers=(EntanglerKind.CNOT_CHAIN,),
        depths=(depth,),
        iterations=1000,
        seeds=tuple(range(10)),
        output_dir=tmp_path / f'd{depth}',
        threads=4,
    )
    result = run_experiment(cfg, progress=False)
    assert result.success
    finals = []
    for seed in cfg.seeds:
        deltas = read_trace(cfg.output_dir / trace_filename(H2_LABEL, seed))
        assert deltas.min() >= -1e-9
        finals.append(deltas[-1])
    assert np.median(finals) <= 5e-2
