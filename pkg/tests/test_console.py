import os
import json
import pytest
import numpy as np
import pandas as pd

from wearclust import __version__
from wearclust import console
from wearclust.console import main
from wearclust.export import sha256
from wearclust.features import read_matrix
from wearclust.oracle import adjusted_rand_index
from wearclust.som import SomConfig


SUBJECTS = ['S01', 'S02', 'S03']
STRUCTURES = ['diagonal_shared', 'diagonal_unshared', 'full_shared', 'full_unshared']


@pytest.fixture(scope='module')
def corpus(tmpdir_factory):
    path = str(tmpdir_factory.mktemp('corpus'))
    assert main(['synth', '--subjects=3', '--hours=0.2', '--seed=1', '--out=%s' % path]) == 0
    return path


@pytest.fixture(scope='module')
def matrices(corpus, tmpdir_factory):
    path = str(tmpdir_factory.mktemp('matrices'))
    assert main(['ingest', corpus, '--pooled', '--out=%s' % path]) == 0
    return path


### CHECK SYNTH

def test_synth_corpus(corpus):
    for subject in SUBJECTS:
        assert sorted(os.listdir(os.path.join(corpus, subject))) == \
            ['Accelerometer.csv', 'AmbientLight.csv', 'GSR.csv', 'HeartRate.csv']

    manifest = _read_json(corpus, 'manifest.json')
    assert manifest['command'] == 'synth'
    assert manifest['seed'] == 1
    assert len(manifest['outputs']) == 12
    assert manifest['outputs']['S01/HeartRate.csv'] == sha256(os.path.join(corpus, 'S01', 'HeartRate.csv'))


def test_synth_blobs(tmpdir):
    out = str(tmpdir)
    assert main(['synth', '--blobs=3', '--n-per=40', '--seed=2', '--out=%s' % out]) == 0

    m = read_matrix(os.path.join(out, 'blobs.csv'))
    assert m.shape == (120, 2)
    labels = pd.read_csv(os.path.join(out, 'labels.csv'))
    assert list(labels.columns) == ['row_key', 'cluster']
    assert np.bincount(labels['cluster']).tolist() == [40, 40, 40]
    assert _read_json(out, 'mixture.json')['n'] == 120


def test_synth_blobs_clustered(tmpdir):
    out = str(tmpdir)
    assert main(['synth', '--blobs=3', '--seed=3', '--out=%s' % out]) == 0
    assert main(['kmeans', os.path.join(out, 'blobs.csv'), '--k=3', '--standardize=no',
                 '--out=%s' % os.path.join(out, 'kmeans')]) == 0

    truth = pd.read_csv(os.path.join(out, 'labels.csv'))['cluster']
    found = pd.read_csv(os.path.join(out, 'kmeans', 'assignments.csv'))['cluster']
    assert adjusted_rand_index(found, truth) == 1.


### CHECK INGEST

def test_ingest(matrices):
    files = sorted(os.listdir(matrices))
    assert files == ['S01.csv', 'S02.csv', 'S03.csv', 'ingest_report.json',
                     'manifest.json', 'pooled.csv']

    report = _read_json(matrices, 'ingest_report.json')
    assert report['failed'] == {}
    for subject in SUBJECTS:
        assert report['subjects'][subject]['blocks'] == 2
        assert report['subjects'][subject]['rows'] == 360
        assert report['subjects'][subject]['anomalies'] == 0

    m = read_matrix(os.path.join(matrices, 'S02.csv'))
    assert m.column_names == ['heart_rate', 'accel_mag']
    assert m.subjects == ['S02']
    assert read_matrix(os.path.join(matrices, 'pooled.csv')).n == 3 * 360

    manifest = _read_json(matrices, 'manifest.json')
    assert len(manifest['inputs']) == 12
    assert manifest['version'] == __version__


def test_ingest_xyz(corpus, tmpdir):
    out = str(tmpdir)
    assert main(['ingest', corpus, '--recipe=hr_accel_xyz', '--out=%s' % out]) == 0
    m = read_matrix(os.path.join(out, 'S01.csv'))
    assert m.column_names == ['heart_rate', 'accel_x', 'accel_y', 'accel_z']
    assert not os.path.exists(os.path.join(out, 'pooled.csv'))


def test_ingest_malformed_file(corpus, tmpdir):
    path = str(tmpdir.mkdir('corpus'))
    for subject in SUBJECTS:
        os.mkdir(os.path.join(path, subject))
        for name in ('HeartRate', 'Accelerometer'):
            with open(os.path.join(corpus, subject, '%s.csv' % name)) as fp:
                content = fp.read()
            if subject == 'S02' and name == 'HeartRate':
                content += '999999999,abc\n'
            with open(os.path.join(path, subject, '%s.csv' % name), 'w') as fp:
                fp.write(content)

    out = str(tmpdir.join('out'))
    assert main(['ingest', path, '--out=%s' % out]) == 2

    report = _read_json(out, 'ingest_report.json')
    assert list(report['failed']) == ['S02']
    assert os.path.join(path, 'S02', 'HeartRate.csv') in report['failed']['S02']
    assert os.path.exists(os.path.join(out, 'S01.csv'))
    assert os.path.exists(os.path.join(out, 'S03.csv'))
    assert not os.path.exists(os.path.join(out, 'S02.csv'))


def test_ingest_empty_directory(tmpdir):
    path = str(tmpdir.mkdir('empty'))
    assert main(['ingest', path, '--out=%s' % str(tmpdir.join('out'))]) == 2
    assert main(['ingest', str(tmpdir.join('missing')), '--out=%s' % str(tmpdir)]) == 2


def test_ingest_unknown_recipe(corpus, tmpdir):
    assert main(['ingest', corpus, '--recipe=hr_gsr', '--out=%s' % str(tmpdir)]) == 1


### CHECK CORRELATE

def test_correlate(matrices, tmpdir):
    out = str(tmpdir)
    assert main(['correlate', os.path.join(matrices, 'pooled.csv'), '--out=%s' % out]) == 0

    report = _read_json(out, 'correlation.json')
    assert report['variables'] == ['heart_rate', 'accel_mag']
    assert report['r'][0][1] > 0
    assert os.path.exists(os.path.join(out, 'scatter_heart_rate_accel_mag.csv'))


def test_correlate_per_subject(matrices, tmpdir):
    out = str(tmpdir)
    assert main(['correlate', matrices, '--out=%s' % out]) == 0
    for subject in SUBJECTS:
        assert os.path.exists(os.path.join(out, subject, 'correlation.json'))


### CHECK CLUSTERING

def test_kmeans(matrices, tmpdir):
    out = str(tmpdir)
    assert main(['kmeans', os.path.join(matrices, 'pooled.csv'), '--k=3', '--out=%s' % out]) == 0

    model = _read_json(out, 'kmeans.json')
    assert np.asarray(model['centroids']).shape == (3, 2)
    assert model['columns'] == ['heart_rate', 'accel_mag']
    assert len(model['standardization']['mean']) == 2

    assignments = pd.read_csv(os.path.join(out, 'assignments.csv'))
    assert len(assignments) == 3 * 360
    assert set(assignments['cluster']) == {0, 1, 2}


def test_kmeans_pooled_directory(matrices, tmpdir):
    out = str(tmpdir)
    assert main(['kmeans', matrices, '--k=2', '--pooled', '--out=%s' % out]) == 0
    assert len(pd.read_csv(os.path.join(out, 'assignments.csv'))) == 3 * 360


def test_kmeans_rerun_identical(matrices, tmpdir):
    fpath = os.path.join(matrices, 'pooled.csv')
    outs = [str(tmpdir.join('run%d' % i)) for i in range(2)]
    for out in outs:
        assert main(['kmeans', fpath, '--k=3', '--seed=5', '--out=%s' % out]) == 0

    for name in ('kmeans.json', 'assignments.csv'):
        digests = [sha256(os.path.join(out, name)) for out in outs]
        assert digests[0] == digests[1]
    assert _read_json(outs[0], 'manifest.json')['outputs'] == \
        _read_json(outs[1], 'manifest.json')['outputs']


def test_gmm(matrices, tmpdir):
    out = str(tmpdir)
    assert main(['gmm', os.path.join(matrices, 'S01.csv'), '--k=2', '--out=%s' % out]) == 0

    for structure in STRUCTURES:
        model = _read_json(out, 'gmm_%s.json' % structure)
        assert model['structure'] == structure
        assert abs(sum(model['weights']) - 1.) < 1e-12
        responsibilities = pd.read_csv(os.path.join(out, 'gmm_%s_responsibilities.csv' % structure))
        assert list(responsibilities.columns) == ['row_key', 'p0', 'p1']
        assert len(pd.read_csv(os.path.join(out, 'gmm_%s_assignments.csv' % structure))) == 360


def test_gmm_single_structure(matrices, tmpdir):
    out = str(tmpdir)
    assert main(['gmm', os.path.join(matrices, 'S01.csv'), '--k=2', '--structures=diagonal_shared',
                 '--out=%s' % out]) == 0
    assert sorted(f for f in os.listdir(out) if f.endswith('.json')) == \
        ['gmm_diagonal_shared.json', 'manifest.json']


def test_som(matrices, tmpdir):
    out = str(tmpdir)
    assert main(['som', os.path.join(matrices, 'pooled.csv'), '--epochs=20',
                 '--final-radius=0.3', '--out=%s' % out]) == 0

    model = _read_json(out, 'som.json')
    assert np.asarray(model['weights']).shape == (36, 2)
    assert model['quantization_error']['trained'] < model['quantization_error']['initial']

    umatrix = _read_json(out, 'umatrix.json')
    assert len(umatrix['edges']) == 85
    hits = _read_json(out, 'hits.json')
    assert sum(hits['hits']) == 3 * 360


def test_som_default_radius_warning(tmpdir, caplog):
    out = str(tmpdir)
    assert main(['synth', '--blobs=3', '--n-per=50', '--seed=4', '--out=%s' % out]) == 0
    assert main(['som', os.path.join(out, 'blobs.csv'), '--epochs=20', '--standardize=no',
                 '--out=%s' % os.path.join(out, 'som')]) == 0

    qe = _read_json(os.path.join(out, 'som'), 'som.json')['quantization_error']
    warned = any('--final-radius' in r.getMessage() for r in caplog.records)
    assert warned == (qe['trained'] > qe['initial'])


def test_som_help_final_radius():
    assert 'final radius of 0.3' in console.__doc__
    assert '0.3' in SomConfig.__doc__


def test_gmm_rerun_identical(matrices, tmpdir):
    fpath = os.path.join(matrices, 'S01.csv')
    outs = [str(tmpdir.join('run%d' % i)) for i in range(2)]
    for out in outs:
        assert main(['gmm', fpath, '--k=2', '--out=%s' % out]) == 0

    names = sum([['gmm_%s.json' % s, 'gmm_%s_responsibilities.csv' % s,
                  'gmm_%s_assignments.csv' % s] for s in STRUCTURES], [])
    for name in names:
        digests = [sha256(os.path.join(out, name)) for out in outs]
        assert digests[0] == digests[1]
    assert _read_json(outs[0], 'manifest.json')['outputs'] == \
        _read_json(outs[1], 'manifest.json')['outputs']


def test_som_rerun_identical(matrices, tmpdir):
    fpath = os.path.join(matrices, 'pooled.csv')
    outs = [str(tmpdir.join('run%d' % i)) for i in range(2)]
    for out in outs:
        assert main(['som', fpath, '--epochs=10', '--seed=5', '--out=%s' % out]) == 0

    for name in ('som.json', 'umatrix.json', 'hits.json', 'assignments.csv'):
        digests = [sha256(os.path.join(out, name)) for out in outs]
        assert digests[0] == digests[1]
    assert _read_json(outs[0], 'manifest.json')['outputs'] == \
        _read_json(outs[1], 'manifest.json')['outputs']


### CHECK ERRORS

@pytest.mark.parametrize('argv', [
    ['kmeans', 'MATRIX', '--k=2', '--standardize=maybe'],
    ['kmeans', 'MATRIX', '--k=0'],
    ['kmeans', 'MATRIX', '--k=two'],
    ['gmm', 'MATRIX', '--k=2', '--structures=full_tied'],
    ['som', 'MATRIX', '--som-init=pca'],
])
def test_usage_errors(matrices, tmpdir, argv):
    argv = [os.path.join(matrices, 'S01.csv') if a == 'MATRIX' else a for a in argv]
    assert main(argv + ['--out=%s' % str(tmpdir)]) == 1


def test_missing_matrix(tmpdir):
    assert main(['kmeans', str(tmpdir.join('missing.csv')), '--k=2', '--out=%s' % str(tmpdir)]) == 2


def test_docopt_usage():
    with pytest.raises(SystemExit):
        main(['kmeans'])


### STANDARD TEST OBJECTS

def _read_json(path, fname):
    with open(os.path.join(path, fname)) as fp:
        return json.load(fp)
