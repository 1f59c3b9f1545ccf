"""Exception and warning types raised across the package."""

import numpy as np


class InvalidArgumentError(ValueError):
    """A parameter lies outside the domain an operation accepts."""


class SingularMatrixError(np.linalg.LinAlgError):
    """A detector Gram matrix is (numerically) singular.

    Parameters
    ----------
    message : str
        Human readable description.
    users : tuple of int
        Indices of the users whose LOS columns collide.
    """

    def __init__(self, message, users=()):
        super().__init__(message)
        self.users = tuple(users)


class DegenerateAngleWarning(RuntimeWarning):
    """Two users see (numerically) the same spatial frequency."""
