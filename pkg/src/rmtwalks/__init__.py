"""Patterned random matrices whose entries are continuous-time random walks.

Simulation of matrix-valued processes, exact circuit counting and the closed
forms their spectra are checked against.
"""
from .clocks import FppPath, InversePath, fpp_pmf, inverse_values, sample_fpp, sample_stable
from .combinat import (count_circuits, enumerate_pair_matched, is_noncrossing,
                       is_odd_even_matched, limit_moment_combinatorial)
from .empirics import PathSample, fdd_stats, sample_Y, sample_Y_alpha, sample_Z
from .ensemble import (MatrixSnapshot, ProcessConfig, ProcessSample, build_ctrw_process,
                       build_elliptic, build_iid_copies_sum, build_process, build_stopped_process)
from .errors import (CapacityError, ContractError, NoClosedFormError, NumericError, RmtWalksError,
                     SeriesError, ValidationError)
from .patterns import LinkKind, beta_n, delta_L, link_index, link_table, matched_set_size
from .specfn import (catalan, inverse_subordinator_moment, limit_moment_closed, mittag_leffler_3p,
                     reference_cdf, tc_semicircle_mgf, wright)
from .spectra import (ComplexSpectrum, Esd, MomentEstimate, eig_circulant_family, eig_symmetric,
                      empirical_moment, ks_distance, moment_estimate, spectrum, trace_of_monomial)
from .walks import StepLaw, TimeGrid, gaussian_fastpath, random_stream, step_counts, walk_increments

__version__ = "0.1.0"
