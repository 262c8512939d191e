'''Cluster memberships of feature matrix rows'''

import io
import numpy as np
import pandas as pd

from .errors import DataError


class Assignment:
    '''Hard cluster labels with optional soft responsibilities

    Parameters
    ----------
    labels : array-like
        Cluster index per row
    row_keys : iterable of 2-tuples, optional
        Subject identifier and second timestamp per row
    responsibilities : array-like, optional
        Posterior membership probabilities, n x K

    '''


    def __init__(self, labels, row_keys=None, responsibilities=None):

        self.labels = np.asarray(labels, dtype=int).reshape(-1)
        self.row_keys = list(row_keys) if row_keys is not None \
            else [('', i) for i in range(len(self.labels))]
        self.responsibilities = None
        if responsibilities is not None:
            self.responsibilities = np.asarray(responsibilities, dtype=float)
            if self.responsibilities.shape[0] != len(self.labels):
                raise DataError('Responsibilities do not match the number of labels')

        if len(self.row_keys) != len(self.labels):
            raise DataError('Got %d row keys for %d labels' % (len(self.row_keys), len(self.labels)))


    def __len__(self):

        return len(self.labels)


    def counts(self, k):

        return np.bincount(self.labels, minlength=k)


    @property
    def keys(self):

        return ['%s:%d' % (s, t) for s, t in self.row_keys]


    def to_csv(self):
        '''Format labels as ``row_key,cluster`` CSV'''

        fp = io.StringIO()
        pd.DataFrame(dict(row_key=self.keys, cluster=self.labels)).to_csv(fp, index=False)
        return fp.getvalue()


    def responsibilities_to_csv(self):
        '''Format responsibilities as ``row_key,p0,p1,...`` CSV'''

        if self.responsibilities is None:
            raise DataError('Assignment has no responsibilities')

        df = pd.DataFrame(self.responsibilities,
                          columns=['p%d' % j for j in range(self.responsibilities.shape[1])])
        df.insert(0, 'row_key', self.keys)

        fp = io.StringIO()
        df.to_csv(fp, index=False, float_format='%.17g')
        return fp.getvalue()
