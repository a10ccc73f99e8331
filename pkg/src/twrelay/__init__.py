"""Max-min fair relay precoding for the multi-pair two-way relay channel.

The pipeline is: draw channels (`channel`), build quadratic SINR forms
(`forms`), compute the minimax bound (`bound`), and balance the SINRs
with a Levenberg-Marquardt solver inside a bisection over the target
(`lm`, `balance`).  `bench` runs Monte-Carlo sweeps.
"""
from .balance import BisectionConfig, SolveReport, balance, delta_scale, min_rate
from .bound import BoundResult, WhitenedProblem, max_generalized_eig, upper_bound, whiten
from .channel import (ChannelSet, SystemConfig, correlation_matrix, generate_channels,
                      psd_sqrt)
from .errors import (IllConditionedError, InvalidParameterError, NotPSDError,
                     NumericalError, RelayError, StructuralError)
from .forms import (QuadraticProblem, UserIndexMap, build_quadratic_problem, relay_power,
                    sinr_direct, sinr_quadratic, unvec, vec)
from .lm import LMConfig, ArmijoParams, finalize_precoder, solve_at_gamma

__version__ = '0.1.0'

__all__ = [
    'ArmijoParams', 'BisectionConfig', 'BoundResult', 'ChannelSet', 'IllConditionedError',
    'InvalidParameterError', 'LMConfig', 'NotPSDError', 'NumericalError', 'QuadraticProblem',
    'RelayError', 'SolveReport', 'StructuralError', 'SystemConfig', 'UserIndexMap',
    'WhitenedProblem', 'balance', 'build_quadratic_problem', 'correlation_matrix',
    'delta_scale', 'finalize_precoder', 'generate_channels', 'max_generalized_eig',
    'min_rate', 'psd_sqrt', 'relay_power', 'sinr_direct', 'sinr_quadratic', 'solve_at_gamma',
    'unvec', 'upper_bound', 'vec', 'whiten',
]
