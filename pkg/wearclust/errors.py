'''Exceptions raised by wearclust

All exceptions derive from :class:`ValueError` and carry the process
exit code the command line interface maps them to.

'''


class WearclustError(ValueError):
    '''Base class of all wearclust errors'''

    exit_code = 1


class UsageError(WearclustError):
    '''Invalid configuration or command line usage'''

    exit_code = 1


class DataError(WearclustError):
    '''Malformed, missing or inconsistent input data'''

    exit_code = 2


class NumericalError(WearclustError):
    '''Numerical failure, like a non-positive-definite covariance'''

    exit_code = 3


class ComponentCollapseError(NumericalError):
    '''Mixture component without responsibility mass'''


    def __init__(self, component, mass):

        self.component = component
        self.mass = mass
        super(ComponentCollapseError, self).__init__(
            'Mixture component %d collapsed (total responsibility %g)' % (component, mass))
