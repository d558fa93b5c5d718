"""Numerics for the Dirichlet divisor problem: Delta(x), its power moments,
the truncated Voronoi series, singular-series constants and the counting
bounds behind them."""
from ._kernels import BACKEND
from .divisor_core import (DeltaSample, DivisorTable, delta_at, delta_stream, divisor_count,
                           load_table, save_table, sieve_divisor_table, summatory_D)
from .dio_count import (CountReport, DyadicBox, count_solutions, fractional_count,
                        min_nonzero_gap, naive_count)
from .errors import ChecksumError, InvalidArgument, ResourceError
from .expsum_smoothing import (Bump, BumpConfig, build_bump, eval_S, mean_square_S,
                               seventh_moment_S)
from .moments import MomentResult, main_term, moment_integral, moment_report, oscillatory_check
from .radical_arith import (Enclosure, KernelTerm, RadicalSum, is_zero, numeric_value,
                            radical_sum)
from .singular_series import (BalancedTuple, SeriesValue, coefficient_Ck, enumerate_balanced,
                              series_partial, tsang_c1_partial)
from .voronoi_series import TruncationConfig, eval_R1, eval_R2, mean_square_R2

__version__ = "0.1.0"
