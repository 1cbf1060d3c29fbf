"""CPPN activation functions.

Every function accepts scalars or numpy arrays and maps finite input to finite output.
Arguments of the squaring functions are clipped so their result cannot overflow.
"""

from enum import Enum
from typing import Callable, Dict, Tuple

import numpy as np
from scipy.special import expit

# square(_SQUARE_LIMIT) stays far below the float64 maximum
_SQUARE_LIMIT = 1e150


class ActivationFunction(str, Enum):
    SINE = "sine"
    NEGATIVE_SINE = "negative-sine"
    ABSOLUTE = "absolute"
    NEGATIVE_ABSOLUTE = "negative-absolute"
    SQUARE = "square"
    NEGATIVE_SQUARE = "negative-square"
    SQRT_ABSOLUTE = "sqrt-of-absolute"
    NEGATIVE_SQRT_ABSOLUTE = "negative-sqrt-of-absolute"
    SIGMOID = "sigmoid"
    RELU = "relu"

    def __call__(self, value):
        return ACTIVATIONS[self](value)


def _square(v):
    c = np.clip(v, -_SQUARE_LIMIT, _SQUARE_LIMIT)
    return c * c


def _sqrt_abs(v):
    return np.sqrt(np.abs(v))


ACTIVATIONS: Dict[ActivationFunction, Callable] = {
    ActivationFunction.SINE: np.sin,
    ActivationFunction.NEGATIVE_SINE: lambda v: -np.sin(v),
    ActivationFunction.ABSOLUTE: np.abs,
    ActivationFunction.NEGATIVE_ABSOLUTE: lambda v: -np.abs(v),
    ActivationFunction.SQUARE: _square,
    ActivationFunction.NEGATIVE_SQUARE: lambda v: -_square(v),
    ActivationFunction.SQRT_ABSOLUTE: _sqrt_abs,
    ActivationFunction.NEGATIVE_SQRT_ABSOLUTE: lambda v: -_sqrt_abs(v),
    ActivationFunction.SIGMOID: expit,
    ActivationFunction.RELU: lambda v: np.maximum(v, 0.0),
}

# The CPPN set; relu is reserved for the HyperNEAT substrate.
CPPN_ACTIVATIONS: Tuple[ActivationFunction, ...] = tuple(
    fn for fn in ActivationFunction if fn is not ActivationFunction.RELU
)
