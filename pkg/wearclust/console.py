'''wearclust: correlation and clustering of wearable sensor recordings

Usage:
    wearclust ingest <input_dir> [--out=DIR] [--recipe=RECIPE] [--pooled] [--on=MS] [--off=MS] [-v...]
    wearclust correlate <matrix> [--out=DIR] [--standardize=WHEN] [--pooled] [--bins=N] [-v...]
    wearclust kmeans <matrix> --k=K [--distance=DIST] [--init=INIT] [--fraction=F] [--replicates=N] [--max-iter=N] [--tol=TOL] [--seed=N] [--out=DIR] [--standardize=WHEN] [--whiten] [--pooled] [-v...]
    wearclust gmm <matrix> --k=K [--structures=LIST] [--regularization=R] [--replicates=N] [--max-iter=N] [--tol=TOL] [--seed=N] [--out=DIR] [--standardize=WHEN] [--whiten] [--pooled] [-v...]
    wearclust som <matrix> [--rows=N] [--cols=N] [--epochs=N] [--initial-radius=R] [--final-radius=R] [--som-init=INIT] [--seed=N] [--out=DIR] [--standardize=WHEN] [--whiten] [--pooled] [-v...]
    wearclust synth [--subjects=N] [--hours=H] [--coupling=C] [--seed=N] [--out=DIR] [-v...]
    wearclust synth --blobs=K [--n-per=N] [--dims=D] [--separation=S] [--seed=N] [--out=DIR] [-v...]
    wearclust -h | --help
    wearclust --version

Positional arguments:
    input_dir            directory with one sub-directory of stream CSV files per subject
    matrix               feature matrix CSV file or directory of matrix files

Options:
    -h, --help           show this help message and exit
    --version            show the version and exit
    -v, --verbose        log progress, twice for debug output
    --out=DIR            output directory [default: .]
    --seed=N             base random seed [default: 0]
    --recipe=RECIPE      feature recipe, hr_accel_mag or hr_accel_xyz [default: hr_accel_mag]
    --pooled             pool all subjects into one matrix
    --on=MS              recording on-period in milliseconds [default: 180000]
    --off=MS             recording off-period in milliseconds [default: 180000]
    --standardize=WHEN   standardize columns: auto, yes or no [default: auto]
    --whiten             decorrelate columns before clustering
    --bins=N             number of histogram bins [default: 10]
    --k=K                number of clusters
    --distance=DIST      squared_euclidean or cosine [default: squared_euclidean]
    --init=INIT          kmeanspp or preliminary_subsample [default: kmeanspp]
    --fraction=F         subsample fraction of the preliminary phase [default: 0.1]
    --replicates=N       number of seeded restarts [default: 5]
    --max-iter=N         maximum number of iterations [default: 100]
    --tol=TOL            relative convergence tolerance [default: 1e-9]
    --structures=LIST    comma separated covariance structures shape_sharing, or all [default: all]
    --regularization=R   covariance ridge [default: 1e-6]
    --rows=N             map rows [default: 6]
    --cols=N             map columns [default: 6]
    --epochs=N           training epochs [default: 200]
    --initial-radius=R   initial neighborhood radius, half the largest grid dimension if omitted
    --final-radius=R     final neighborhood radius [default: 1.0]; at 1.0 neighboring
                         neurons stay pulled together and on tight clusters the
                         trained quantization error can exceed the initial one,
                         a final radius of 0.3 lets the map refine
    --som-init=INIT      random_sample or linear_span [default: random_sample]
    --subjects=N         number of simulated subjects [default: 10]
    --hours=H            simulated hours per subject [default: 1]
    --coupling=C         heart rate coupling to activity [default: 0.8]
    --blobs=K            write a labelled matrix of K Gaussian blobs instead of streams
    --n-per=N            rows per blob [default: 100]
    --dims=D             blob dimensions [default: 2]
    --separation=S       distance of adjacent blob means in standard deviations [default: 10]

'''

import os
import sys
import logging
import itertools
import docopt

from . import __version__
from .errors import WearclustError, UsageError, DataError
from .streams import MODALITIES, HEART_RATE, ACCELEROMETER, read_stream, segment_blocks
from .features import RECIPES, FeatureMatrix, read_matrix, align_blocks, standardize, whiten
from .stats import correlation_report
from .assignment import Assignment
from .kmeans import KMeansConfig, kmeans_fit, kmeans_predict
from .gmm import GmmConfig, COVARIANCE_STRUCTURES, gmm_fit, gmm_cluster
from .som import SomConfig, som_init, som_train, u_matrix, sample_hits, \
    quantization_error, som_assign
from .synth import simulate_corpus, write_corpus, blobs, gen_mixture
from .export import RunWriter


POOLED = 'pooled'

# initialize logger
logger = logging.getLogger(__name__)


def _get(args, key, dtype):

    try:
        return dtype(args[key])
    except (TypeError, ValueError):
        raise UsageError('Invalid value for %s: %s' % (key, args[key]))


def _standardize(args, default):

    when = args['--standardize']
    if when not in ('auto', 'yes', 'no'):
        raise UsageError('--standardize must be auto, yes or no, got %s' % when)
    return default if when == 'auto' else when == 'yes'


def _config_echo(args):

    return {k: v for k, v in sorted(args.items()) if k != '--verbose'}


def _matrix_files(path):

    if os.path.isdir(path):
        fpaths = sorted(os.path.join(path, f) for f in os.listdir(path)
                        if f.endswith('.csv') and f != '%s.csv' % POOLED)
        if not fpaths:
            raise DataError('No feature matrix files in %s' % path)
        return fpaths
    if os.path.isfile(path):
        return [path]
    raise DataError('Feature matrix not found: %s' % path)


def _load_matrices(args):
    '''Feature matrices to process as (name, matrix) pairs'''

    fpaths = _matrix_files(args['<matrix>'])
    matrices = [(os.path.splitext(os.path.basename(f))[0], read_matrix(f)) for f in fpaths]

    if args['--pooled'] and len(matrices) > 1:
        return fpaths, [(POOLED, FeatureMatrix.concat(m for _, m in matrices))]
    return fpaths, matrices


def _prepare(m, args, default_standardize=True):

    if _standardize(args, default_standardize):
        m = standardize(m)
    if args.get('--whiten'):
        m = whiten(m)
    return m


def _prefix(name, matrices):

    return '' if len(matrices) == 1 else name + '/'


def _model_export(model, m):

    settings = model.to_dict()
    settings['columns'] = m.column_names
    if m.standardization is not None:
        settings['standardization'] = dict(mean=m.standardization[0].tolist(),
                                           std=m.standardization[1].tolist())
    settings['whitened'] = bool(m.attrs.get('whitened', False))
    return settings


def cmd_ingest(args):
    '''Read stream CSV files per subject and write aligned feature matrices'''

    input_dir = args['<input_dir>']
    recipe = args['--recipe']
    schedule = (_get(args, '--on', int), _get(args, '--off', int))

    if recipe not in RECIPES:
        raise UsageError('Unknown feature recipe: %s' % recipe)

    if not os.path.isdir(input_dir):
        raise DataError('Input directory not found: %s' % input_dir)

    subjects = sorted(d for d in os.listdir(input_dir)
                      if os.path.isdir(os.path.join(input_dir, d)))
    if not subjects:
        raise DataError('No subject directories in %s' % input_dir)

    files = {s: {name: os.path.join(input_dir, s, '%s.csv' % name) for name in MODALITIES
                 if os.path.isfile(os.path.join(input_dir, s, '%s.csv' % name))}
             for s in subjects}

    writer = RunWriter(args['--out'], 'ingest', _config_echo(args),
                       inputs=[f for s in subjects for f in files[s].values()])

    report = dict(recipe=recipe, schedule=list(schedule), subjects={}, failed={})
    matrices = []
    for subject in subjects:
        try:
            for modality in (HEART_RATE, ACCELEROMETER):
                if modality.name not in files[subject]:
                    raise DataError('%s: missing %s.csv' % (os.path.join(input_dir, subject),
                                                            modality.name))

            streams = []
            for name, fpath in sorted(files[subject].items()):
                try:
                    streams.append(read_stream(fpath, MODALITIES[name]))
                except DataError as e:
                    raise DataError('%s: %s' % (fpath, e))

            segmentation = segment_blocks(streams, schedule=schedule, subject_id=subject)
            m = align_blocks(segmentation, recipe=recipe)

        except DataError as e:
            logger.error('Subject %s failed: %s', subject, e)
            report['failed'][subject] = str(e)
            continue

        report['subjects'][subject] = dict(
            blocks=len(segmentation),
            aligned_blocks=m.attrs['blocks'],
            anomalies=segmentation.n_anomalies,
            samples={s.name: len(s) for s in streams},
            rows=m.n,
            dropped_seconds=m.attrs['dropped_seconds'])

        writer.write('%s.csv' % subject, m.to_csv())
        matrices.append(m)

    if args['--pooled'] and matrices:
        pooled = FeatureMatrix.concat(matrices)
        report['pooled'] = dict(rows=pooled.n, dropped_seconds=pooled.attrs['dropped_seconds'])
        writer.write('%s.csv' % POOLED, pooled.to_csv())

    writer.write_json('ingest_report.json', report)
    writer.finish()

    if report['failed']:
        return DataError.exit_code
    return 0


def cmd_correlate(args):
    '''Pearson correlations, histograms and scatter pairs per matrix'''

    bins = _get(args, '--bins', int)
    if bins < 1:
        raise UsageError('--bins must be positive')

    fpaths, matrices = _load_matrices(args)
    writer = RunWriter(args['--out'], 'correlate', _config_echo(args), inputs=fpaths)

    for name, m in matrices:
        m = _prepare(m, args, default_standardize=False)
        report = correlation_report(m, bins=bins)

        prefix = _prefix(name, matrices)
        writer.write(prefix + 'correlation.json', report.to_json() + '\n')
        for pair in report.pairs:
            writer.write(prefix + 'scatter_%s_%s.csv' % (pair.x, pair.y), pair.to_csv())

        for a, b in itertools.combinations(report.variables, 2):
            logger.info('%s: r(%s, %s) = %.4f', name, a, b, report.coefficient(a, b))

    writer.finish()
    return 0


def cmd_kmeans(args):
    '''k-means clustering per matrix'''

    seed = _get(args, '--seed', int)
    cfg = KMeansConfig(k=_get(args, '--k', int),
                       distance=args['--distance'],
                       replicates=_get(args, '--replicates', int),
                       max_iter=_get(args, '--max-iter', int),
                       tol=_get(args, '--tol', float),
                       init=args['--init'],
                       subsample_fraction=_get(args, '--fraction', float),
                       seed=seed)
    if cfg.init == 'explicit':
        raise UsageError('Explicit initialization is not available on the command line')
    cfg.validate()

    fpaths, matrices = _load_matrices(args)
    writer = RunWriter(args['--out'], 'kmeans', _config_echo(args), seed=seed, inputs=fpaths)

    for name, m in matrices:
        m = _prepare(m, args)
        model = kmeans_fit(m, cfg)
        assignment = kmeans_predict(model, m)

        prefix = _prefix(name, matrices)
        writer.write_json(prefix + 'kmeans.json', _model_export(model, m))
        writer.write(prefix + 'assignments.csv', assignment.to_csv())

    writer.finish()
    return 0


def _structures(value):

    if value == 'all':
        return list(COVARIANCE_STRUCTURES)

    structures = []
    for item in value.split(','):
        structure = tuple(item.strip().split('_'))
        if structure not in COVARIANCE_STRUCTURES:
            raise UsageError('Unknown covariance structure: %s' % item)
        structures.append(structure)
    return structures


def cmd_gmm(args):
    '''Gaussian mixture clustering per matrix and covariance structure'''

    seed = _get(args, '--seed', int)
    cfgs = [GmmConfig(k=_get(args, '--k', int),
                      covariance_shape=shape,
                      covariance_sharing=sharing,
                      tol=_get(args, '--tol', float),
                      max_iter=_get(args, '--max-iter', int),
                      regularization=_get(args, '--regularization', float),
                      replicates=_get(args, '--replicates', int),
                      seed=seed)
            for shape, sharing in _structures(args['--structures'])]
    for cfg in cfgs:
        cfg.validate()

    fpaths, matrices = _load_matrices(args)
    writer = RunWriter(args['--out'], 'gmm', _config_echo(args), seed=seed, inputs=fpaths)

    for name, m in matrices:
        m = _prepare(m, args)
        prefix = _prefix(name, matrices)
        for cfg in cfgs:
            model = gmm_fit(m, cfg)
            assignment = gmm_cluster(model, m)

            label = 'gmm_%s' % cfg.structure
            writer.write_json(prefix + label + '.json', _model_export(model, m))
            writer.write(prefix + label + '_assignments.csv', assignment.to_csv())
            writer.write(prefix + label + '_responsibilities.csv',
                         assignment.responsibilities_to_csv())

    writer.finish()
    return 0


def cmd_som(args):
    '''Self-organizing map training per matrix'''

    seed = _get(args, '--seed', int)
    cfg = SomConfig(rows=_get(args, '--rows', int),
                    cols=_get(args, '--cols', int),
                    epochs=_get(args, '--epochs', int),
                    initial_radius=_get(args, '--initial-radius', float)
                    if args['--initial-radius'] is not None else None,
                    final_radius=_get(args, '--final-radius', float),
                    init=args['--som-init'],
                    seed=seed)
    cfg.validate()

    fpaths, matrices = _load_matrices(args)
    writer = RunWriter(args['--out'], 'som', _config_echo(args), seed=seed, inputs=fpaths)

    for name, m in matrices:
        m = _prepare(m, args)
        initial = som_init(m, cfg)
        model = som_train(initial, m, cfg)

        settings = _model_export(model, m)
        settings['quantization_error'] = dict(initial=quantization_error(initial, m),
                                              trained=quantization_error(model, m))
        if settings['quantization_error']['trained'] > settings['quantization_error']['initial']:
            logger.warning('%s: trained quantization error %.4g exceeds the initial %.4g, '
                           'consider a smaller --final-radius', name,
                           settings['quantization_error']['trained'],
                           settings['quantization_error']['initial'])

        umatrix = u_matrix(model).to_dict()
        umatrix.update(seed=seed, config=cfg.to_dict())

        hits = dict(hits=sample_hits(model, m).tolist(),
                    positions=model.grid.positions.tolist(),
                    seed=seed, config=cfg.to_dict())

        prefix = _prefix(name, matrices)
        writer.write_json(prefix + 'som.json', settings)
        writer.write_json(prefix + 'umatrix.json', umatrix)
        writer.write_json(prefix + 'hits.json', hits)
        writer.write(prefix + 'assignments.csv',
                     Assignment(som_assign(model, m), m.row_keys).to_csv())

    writer.finish()
    return 0


def cmd_synth(args):
    '''Simulated stream corpus or labelled blob matrix'''

    seed = _get(args, '--seed', int)
    writer = RunWriter(args['--out'], 'synth', _config_echo(args), seed=seed)

    if args['--blobs'] is not None:
        spec = blobs(_get(args, '--blobs', int),
                     d=_get(args, '--dims', int),
                     separation=_get(args, '--separation', float),
                     n_per=_get(args, '--n-per', int),
                     seed=seed)
        m, labels = gen_mixture(spec)
        writer.write('blobs.csv', m.to_csv())
        writer.write('labels.csv', Assignment(labels, m.row_keys).to_csv())
        writer.write_json('mixture.json', spec.to_dict())

    else:
        corpus = simulate_corpus(subjects=_get(args, '--subjects', int),
                                 hours=_get(args, '--hours', float),
                                 coupling=_get(args, '--coupling', float),
                                 seed=seed)
        write_corpus(args['--out'], corpus, writer=writer)

    writer.finish()
    return 0


COMMANDS = dict(ingest=cmd_ingest, correlate=cmd_correlate, kmeans=cmd_kmeans,
                gmm=cmd_gmm, som=cmd_som, synth=cmd_synth)


def main(argv=None):
    '''Command-line entry point returning the exit code'''

    args = docopt.docopt(__doc__, argv=argv, version=__version__)

    level = {0: logging.WARNING, 1: logging.INFO}.get(args['--verbose'], logging.DEBUG)
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')

    command = next(c for c in COMMANDS if args[c])
    try:
        return COMMANDS[command](args)
    except WearclustError as e:
        logger.error('%s: %s', command, e)
        return e.exit_code


if __name__ == '__main__':
    sys.exit(main())
