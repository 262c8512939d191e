'''Atomic result files and run manifests'''

import os
import json
import hashlib
import logging
import tempfile

from . import __version__
from .errors import DataError


MANIFEST_FILE = 'manifest.json'

# initialize logger
logger = logging.getLogger(__name__)


def dumps(obj):
    '''Format JSON with sorted keys and a trailing newline'''

    return json.dumps(obj, indent=2, sort_keys=True) + '\n'


def sha256(fpath):

    h = hashlib.sha256()
    with open(fpath, 'rb') as fp:
        for chunk in iter(lambda: fp.read(1 << 16), b''):
            h.update(chunk)
    return h.hexdigest()


def atomic_write(fpath, content):
    '''Write text through a temporary file in the target directory

    The target is replaced in one step so readers never see a partial
    file.

    Returns
    -------
    str
        SHA-256 digest of the written bytes

    '''

    data = content.encode('utf-8')
    path = os.path.dirname(os.path.abspath(fpath))
    os.makedirs(path, exist_ok=True)

    fd, tmp = tempfile.mkstemp(dir=path, prefix='.%s.' % os.path.basename(fpath))
    try:
        with os.fdopen(fd, 'wb') as fp:
            fp.write(data)
        os.replace(tmp, fpath)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise

    return hashlib.sha256(data).hexdigest()


class RunWriter:
    '''Writer of the result files of one command run

    Every file is written atomically and its digest recorded.
    :meth:`finish` re-hashes the files and writes the manifest.

    Parameters
    ----------
    out : str
        Output directory
    command : str
        Command name
    config : dict
        Configuration echo
    seed : int, optional
        Seed of the run
    inputs : iterable of str, optional
        Input files to hash into the manifest

    '''


    def __init__(self, out, command, config, seed=None, inputs=()):

        self.out = out
        self.command = command
        self.config = config
        self.seed = seed
        self.inputs = {fpath: sha256(fpath) for fpath in sorted(inputs)}
        self.outputs = {}


    def __call__(self, name, content):

        return self.write(name, content)


    def write(self, name, content):
        '''Write text content to a file relative to the output directory'''

        fpath = os.path.join(self.out, name)
        self.outputs[name.replace(os.sep, '/')] = atomic_write(fpath, content)
        logger.debug('Wrote %s', fpath)
        return fpath


    def write_json(self, name, obj):

        return self.write(name, dumps(obj))


    def manifest(self):

        return dict(command=self.command,
                    version=__version__,
                    config=self.config,
                    seed=self.seed,
                    inputs=self.inputs,
                    outputs=dict(sorted(self.outputs.items())))


    def finish(self):
        '''Validate the written files and write the manifest

        Raises
        ------
        DataError
            If a written file no longer matches its digest

        '''

        for name, digest in self.outputs.items():
            fpath = os.path.join(self.out, name)
            if not os.path.exists(fpath) or sha256(fpath) != digest:
                raise DataError('Output file %s failed validation' % fpath)

        fpath = os.path.join(self.out, MANIFEST_FILE)
        atomic_write(fpath, dumps(self.manifest()))
        logger.info('Wrote %d files and manifest to %s', len(self.outputs), self.out)

        return fpath
