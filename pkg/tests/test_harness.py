import csv
import json
import os

import numpy as np
import pytest
import yaml  # type: ignore

from screw_glide import __version__
from screw_glide.energy.configuration import Configuration
from screw_glide.errors import ConfigError
from screw_glide.harness.config import RunConfig, config_hash, load_config, parse_config, write_config
from screw_glide.harness.report import mms_rows, write_csv, write_json
from screw_glide.harness.scenarios import build_glide, build_initial, build_model, build_scenario, closed_form_reference
from screw_glide.harness.study import convergence_study, observed_order, sup_distance
from screw_glide.inclusion.integrator import quadratic_well_sliding_solution
from screw_glide.main import EXIT_HALT, EXIT_OK, EXIT_VALIDATION, main
from screw_glide.mms.scheme import piecewise_constant, run_mms

WELL = {'initial': {'positions': [[-2.0, -1.0]]}}


def write_yaml(path, data):
    with open(path, 'w') as f:
        yaml.safe_dump(data, f)
    return str(path)


def test_defaults_fill_missing_fields():
    config = parse_config(WELL)
    assert config.glide == 'square'
    assert config.tau_list == [0.04, 0.02, 0.01, 0.005]
    assert config.initial == {'positions': [[-2.0, -1.0]], 'burgers': [1]}
    assert config.energy == {'name': 'quadratic_well', 'params': {}}


def test_config_round_trip(tmp_path):
    config = parse_config({
        'initial': {'positions': [[0.2, 0.2], [-0.2, -0.2]], 'burgers': [1, 1]},
        'energy': {'name': 'screw', 'params': {'epsilon': 0.05, 'confinement_center': [0.0, 0.0]}},
        'glide': 'hexagonal',
        'tau_list': [0.02, 0.01],
        'mode': 'quadratic-model',
        'seed': 7,
    })
    path = write_config(config, str(tmp_path / 'run.yaml'))
    assert load_config(path).to_dict() == config.to_dict()


def test_numbers_written_as_strings_are_coerced(tmp_path):
    path = tmp_path / 'run.yaml'
    path.write_text("initial:\n  positions: [[-1.0, 0.0]]\nh: 1e-3\ntau_list: [1e-2, 5e-3]\n")
    config = load_config(str(path))
    assert config.h == 0.001
    assert config.tau_list == [0.01, 0.005]


@pytest.mark.parametrize('patch, field', [
    ({'bogus': 1}, 'bogus'),
    ({'tau_list': []}, 'tau_list'),
    ({'tau_list': [0.1, 0.2]}, 'tau_list[1]'),
    ({'tau_list': [0.1, -0.05]}, 'tau_list[1]'),
    ({'energy': {'name': 'screw', 'params': {'epsilon': 0.0}}}, 'energy.params.epsilon'),
    ({'energy': {'name': 'harmonic'}}, 'energy.name'),
    ({'initial': {'positions': [[0.0, 0.0], [1.0, 0.0]], 'burgers': [1, 2]}}, 'initial.burgers[1]'),
    ({'initial': {}}, 'initial.positions'),
    ({'mode': 'implicit'}, 'mode'),
    ({'glide': 'triangular'}, 'glide'),
    ({'workers': 0}, 'workers'),
])
def test_config_errors_name_the_field(patch, field):
    with pytest.raises(ConfigError) as info:
        parse_config({**WELL, **patch})
    assert info.value.field == field
    assert str(info.value).startswith(field)


def test_missing_and_empty_files(tmp_path):
    with pytest.raises(OSError):
        load_config(str(tmp_path / 'absent.yaml'))
    empty = tmp_path / 'empty.yaml'
    empty.write_text('')
    with pytest.raises(ConfigError):
        load_config(str(empty))


def test_config_hash_is_stable():
    a, b = parse_config(WELL), parse_config(dict(WELL))
    assert config_hash(a) == config_hash(b)
    assert len(config_hash(a)) == 64
    assert config_hash(parse_config({**WELL, 'seed': 1})) != config_hash(a)


def test_scenario_builders():
    config = parse_config({**WELL, 'energy': {'name': 'quadratic_well', 'params': {'center': [0.5, 0.0],
                                                                                   'lipschitz': 4.0}}})
    model = build_model(config.energy)
    assert model.lipschitz == 4.0
    assert model.center.tolist() == [0.5, 0.0]
    assert build_glide(config).size == 4
    assert build_initial(config).n == 1
    assert closed_form_reference(config, build_glide(config), model) is not None
    hexagonal = parse_config({**WELL, 'glide': 'hexagonal'})
    assert closed_form_reference(hexagonal, build_glide(hexagonal), model) is None


def test_unknown_energy_parameter_rejected():
    with pytest.raises(ConfigError) as info:
        build_model({'name': 'screw', 'params': {'epsilon': 0.1, 'stiffness': 2.0}})
    assert info.value.field == 'energy.params.stiffness'


CUBIC = {'glide': 'cubic', 'initial': {'positions': [[-1.0, -0.5, 0.2]]}}


def test_well_center_follows_the_dimension():
    config = parse_config({**CUBIC, 'tau_list': [0.1], 'T': 0.3})
    sys, model, Z0 = build_scenario(config)
    assert model.center.tolist() == [0.0, 0.0, 0.0]
    run = run_mms(sys, model, Z0, 0.1, 0.3)
    assert len(run.steps) == 3
    energies = run.energies(model)
    assert all(b <= a for a, b in zip(energies, energies[1:]))
    assert energies[-1] < energies[0]


def test_mismatched_dimensions_rejected():
    config = parse_config({**CUBIC, 'energy': {'name': 'quadratic_well', 'params': {'center': [0.0, 0.0]}}})
    with pytest.raises(ConfigError) as info:
        build_scenario(config)
    assert info.value.field == 'energy.params.center'

    config = parse_config({**CUBIC, 'glide': 'square'})
    with pytest.raises(ConfigError) as info:
        build_scenario(config)
    assert info.value.field == 'initial.positions'

    config = parse_config({**CUBIC, 'energy': {'name': 'saddle'}})
    with pytest.raises(ConfigError) as info:
        build_scenario(config)
    assert info.value.field == 'energy.name'


def test_screw_confinement_center_follows_the_dimension():
    config = parse_config({'glide': 'cubic', 'energy': {'name': 'screw', 'params': {'epsilon': 0.1}},
                           'initial': {'positions': [[0.3, 0.0, 0.1], [-0.3, 0.0, -0.1]]}})
    _, model, Z0 = build_scenario(config)
    assert model.p.confinement_center == (0.0, 0.0, 0.0)
    assert model.gradient(Z0).shape == (2, 3)


def test_sup_distance(square):
    Z = Configuration([[0.0, 0.0]])
    times = [0.0, 0.5, 1.0]
    assert sup_distance(square, lambda t: Z, lambda t: Z, times) == 0.0
    assert sup_distance(square, lambda t: Z, lambda t: Z.translated((1.0, 0.0)), times) == pytest.approx(1.0)


def test_observed_order():
    assert observed_order([0.04, 0.02, 0.01], [0.4, 0.2, 0.1]) == pytest.approx(1.0)
    assert observed_order([0.04, 0.02], [0.0, 0.0]) is None


def test_fine_scheme_tracks_the_closed_form(square, well):
    Z0 = Configuration([[-2.0, -1.0]])
    run = run_mms(square, well, Z0, 1e-3, 1.5)
    exact = quadratic_well_sliding_solution(Z0)
    times = np.linspace(0.0, 1.5, 400)
    assert sup_distance(square, lambda t: piecewise_constant(run, t), exact, times) <= 1e-2


def test_convergence_ladder_against_the_inclusion():
    config = parse_config({**WELL, 'quadrature_points': 2})
    report = convergence_study(config)
    assert report.reference == 'inclusion'
    assert report.taus == [0.04, 0.02, 0.01, 0.005]
    assert report.monotone
    assert report.sup_distances[-1] <= 1e-2
    assert report.observed_order > 0
    assert len(report.edi_reports) == 4
    assert report.to_dict()['monotone']


def test_convergence_requires_a_known_closed_form():
    config = parse_config({**WELL, 'glide': 'hexagonal', 'reference': 'closed-form', 'tau_list': [0.1]})
    with pytest.raises(ConfigError):
        convergence_study(config)


def test_parallel_study_matches_the_serial_one():
    data = {**WELL, 'tau_list': [0.04, 0.02], 'T': 0.5, 'reference': 'closed-form', 'quadrature_points': 2}
    serial = convergence_study(parse_config(data))
    parallel = convergence_study(parse_config({**data, 'workers': 2}))
    assert parallel.sup_distances == serial.sup_distances
    assert [r.residual for r in parallel.edi_reports] == [r.residual for r in serial.edi_reports]


def test_symmetric_pair_rows_stay_symmetric(square, screw):
    Z0 = Configuration([[0.2, 0.2], [-0.2, -0.2]], [1, 1])
    run = run_mms(square, screw, Z0, 0.02, 0.1)
    header, rows = mms_rows(run, screw)
    assert header[:5] == ['k', 't', 'particle', 'x1', 'x2']
    assert len(rows) == 2 * len(run.configurations)
    for first, second in zip(rows[::2], rows[1::2]):
        assert first[0] == second[0]
        assert first[3] == pytest.approx(-second[3], abs=1e-9)
        assert first[4] == pytest.approx(-second[4], abs=1e-9)


def test_writers(tmp_path):
    csv_path = write_csv(str(tmp_path / 'rows.csv'), ['a', 'b'], [[0.1, 'x'], [np.float64(2.5), 3]])
    assert open(csv_path).read() == 'a,b\n0.1,x\n2.5,3\n'

    config = RunConfig(initial={'positions': [[0.0, 0.0]], 'burgers': [1]})
    json_path = write_json(str(tmp_path / 'report.json'), {'values': np.array([1.0, 2.0])}, config)
    document = json.load(open(json_path))
    assert document['version'] == __version__
    assert document['config_hash'] == config_hash(config)
    assert document['values'] == [1.0, 2.0]

    with pytest.raises(OSError):
        write_csv(str(tmp_path / 'missing' / 'rows.csv'), ['a'], [])


@pytest.fixture
def well_config(tmp_path):
    data = {**WELL, 'tau_list': [0.04, 0.02], 'T': 0.5, 'output_dir': str(tmp_path / 'results')}
    return write_yaml(tmp_path / 'well.yaml', data)


def test_simulate_mms_is_deterministic(well_config, tmp_path):
    assert main(['simulate-mms', '--config', well_config, '-q']) == EXIT_OK
    out = tmp_path / 'results'
    names = ['mms_tau_0.04.csv', 'mms_tau_0.02.csv', 'simulate-mms.json', 'simulate-mms.svg']
    first = {name: (out / name).read_bytes() for name in names}
    assert main(['simulate-mms', '--config', well_config, '-q']) == EXIT_OK
    for name in names:
        assert (out / name).read_bytes() == first[name]

    document = json.loads(first['simulate-mms.json'])
    assert document['config_hash'] == config_hash(load_config(well_config))
    assert [run['steps'] for run in document['runs']] == [13, 25]


def test_simulate_mms_single_tau_and_overrides(well_config, tmp_path):
    out = tmp_path / 'override'
    assert main(['simulate-mms', '--config', well_config, '--tau', '0.1', '--out', str(out), '--seed', '3', '-q']) == EXIT_OK
    with open(out / 'mms_tau_0.1.csv') as f:
        rows = list(csv.reader(f))
    assert rows[0][:3] == ['k', 't', 'particle']
    assert len(rows) == 1 + 6
    assert json.load(open(out / 'simulate-mms.json'))['config']['seed'] == 3


def test_simulate_inclusion(well_config, tmp_path):
    assert main(['simulate-inclusion', '--config', well_config, '--h', '0.01', '-q']) == EXIT_OK
    out = tmp_path / 'results'
    document = json.load(open(out / 'simulate-inclusion.json'))
    assert document['halt_reason'] == 'completed'
    assert document['h'] == 0.01
    assert os.path.exists(out / 'inclusion.csv')


def test_edi_check_passes_on_the_well(well_config, tmp_path):
    assert main(['edi-check', '--config', well_config, '-q']) == EXIT_OK
    document = json.load(open(tmp_path / 'results' / 'edi-check.json'))
    assert document['passed']
    assert len(document['reports']) == 2


def test_converge_command(tmp_path):
    path = write_yaml(tmp_path / 'converge.yaml', {**WELL, 'tau_list': [0.04, 0.02], 'T': 0.5,
                                                   'reference': 'closed-form', 'quadrature_points': 2,
                                                   'output_dir': str(tmp_path / 'out')})
    assert main(['converge', '--config', path, '-q']) == EXIT_OK
    document = json.load(open(tmp_path / 'out' / 'converge.json'))
    assert document['reference'] == 'closed-form'
    assert document['monotone']


def test_collapsing_pair_exits_with_halt(tmp_path):
    path = write_yaml(tmp_path / 'collapse.yaml', {
        'initial': {'positions': [[-0.15, 0.0], [0.15, 0.0]], 'burgers': [1, -1]},
        'energy': {'name': 'screw', 'params': {'epsilon': 0.1}},
        'tau_list': [0.5], 'T': 5.0, 'output_dir': str(tmp_path / 'out'),
    })
    assert main(['simulate-mms', '--config', path, '-q']) == EXIT_HALT
    assert json.load(open(tmp_path / 'out' / 'simulate-mms.json'))['halted']


def test_bad_config_exits_with_validation_code(tmp_path, capsys):
    path = write_yaml(tmp_path / 'bad.yaml', {**WELL, 'tau_list': []})
    assert main(['converge', '--config', path]) == EXIT_VALIDATION
    assert 'tau_list' in capsys.readouterr().err
    assert main(['simulate-mms']) == EXIT_VALIDATION


def test_norms_command(capsys):
    assert main(['norms', '--vector', '1', '1', '--to', '0', '0']) == EXIT_OK
    output = capsys.readouterr().out
    assert 'crystalline norm: 2' in output
    assert 'dual norm:        1' in output
    assert 'd(x, y):          inf' in output
    assert main(['norms', '--vector', '1', '1', '1']) == EXIT_VALIDATION


def test_classify_command(tmp_path):
    assert main(['classify', '--out', str(tmp_path), '-q']) == EXIT_OK
    with open(tmp_path / 'classify.csv') as f:
        rows = list(csv.reader(f))
    assert rows[0] == ['angle', 'x1', 'x2', 'kind']
    assert len(rows) == 361
    counts = json.load(open(tmp_path / 'classify.json'))['counts']
    assert sum(counts.values()) == 360


def test_classify_rejects_a_spatial_glide_system(tmp_path):
    path = write_yaml(tmp_path / 'cubic.yaml', {**CUBIC, 'output_dir': str(tmp_path / 'out')})
    assert main(['classify', '--config', path, '-q']) == EXIT_VALIDATION
    assert not os.path.exists(tmp_path / 'out')
