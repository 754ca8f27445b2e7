"""Signed free Levy-Khintchine toolkit: transforms, triplets, deconvolutions."""

from .errors import *  # noqa: F401,F403
from .measures import (FreeCharPair, FreeTriplet, SignedMeasure, hahn_jordan, moment,
                       pair_to_triplet, total_variation, triplet_to_pair)
from .transforms import (ConeSpec, DensityGrid, invert_k, pick_check, r_from_phi,
                         r_from_triplet, stieltjes_density)
from .families import Cauchy, FreeMeixner, MP, Semicircle, fm_atoms
from .deconvolve import (fm_quasi_levy_density, gamma_as, multi_mp_weights, r_series,
                         r_t_family, rho_acl)
from .cumulants import (bernoulli_qid_triplet, free_cumulants_to_moments, hankel_det,
                        moments_to_free_cumulants)
from .bpx import PhiPair, classify, extended_bp, h_threshold, polya_A

__version__ = "0.1.0"
