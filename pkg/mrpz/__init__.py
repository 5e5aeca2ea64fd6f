"""
API Reference
##############

The mrpz module documentation!

.. automodule:: mrpz.statespace

.. automodule:: mrpz.sylvester

.. automodule:: mrpz.moments

.. automodule:: mrpz.constraints

.. automodule:: mrpz.loewner

.. automodule:: mrpz.baselines

.. automodule:: mrpz.metrics

.. automodule:: mrpz.compare

.. automodule:: mrpz.io

.. automodule:: mrpz.systems

.. automodule:: mrpz.config

.. automodule:: mrpz.errors

"""
import logging

from .baselines import IrkaResult, balanced_truncation, hankel_singular_values, hermite_residual, irka
from .compare import ComparisonRow, MethodConfig, compare, format_rows
from .config import Tolerances, get_tolerances
from .constraints import (
    ConstraintReport,
    ConstraintSpec,
    ReducedModel,
    ReductionResult,
    assemble,
    build_reduced,
    deriv_rows,
    pole_rows_diagonal,
    pole_rows_general,
    reduce_with_constraints,
    solve_G,
    verify_constraints,
    zero_rows,
)
from .errors import MRPZError, MRPZWarning
from .loewner import (
    LoewnerData,
    LoewnerPair,
    build_loewner_from_data,
    build_loewner_from_realization,
    eval_loewner_tf,
    reduce_from_loewner,
    transform_loewner,
)
from .metrics import dc_gain, h2_error, h2_norm, hinf_error, hinf_norm, max_real_pole
from .moments import InterpolationSpec, MomentTable, annihilating_row, build_upsilon_blocks, moment
from .statespace import (
    StateSpace,
    TransferSample,
    ValidSystemType,
    dominant_poles,
    eval_tf,
    eval_tf_deriv,
    invariant_zeros,
    realify,
    spectrum,
)
from .sylvester import SylvesterProblem, solve_lyapunov, solve_pi, solve_sylvester, solve_upsilon

logging.getLogger(__name__).addHandler(logging.NullHandler())

__version__ = "1.0.0"
