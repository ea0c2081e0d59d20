"""Complex-valued valuations on discretized L^p spaces.

Build a functional from four real generators, evaluate it on simple
functions, box grids or sphere quadratures, and check its identities with
the seeded scenario runners in :mod:`cvaluations.harness`.
"""

from .generators import (Envelope, Generator, GeneratorQuadruple, affine_const, check_zero,
                         eval_generator, make_generator, piecewise_linear, polynomial, power,
                         quadruple, sine, validate_envelope, zero)
from .lattice import (MeasuredPartition, SimpleFunction, characteristic, constant, four_set_partition,
                      from_parts, im_part, join, lp_norm, make_partition, meet, re_part, times_i)
from .valuation import (Divergence, ValuationFunctional, decompose_re_im, evaluate,
                        evaluate_on_characteristic, rotate_to_imaginary)

__version__ = "0.1.0"
