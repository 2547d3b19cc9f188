"""Signed integer-valued AR(1) modelling with Pegram-mixed extended binomial thinning.

The package is organised bottom-up:

``specfun``
    log-space modified Bessel functions and the regularized 0F1 series.
``dist``
    Skellam, extended binomial and Bessel distributions plus the thinning operator.
``model``
    the MESINAR(1) transition kernel, simulator and moments, and the PDINAR(1) comparator.
``estimate``
    conditional maximum likelihood, Yule-Walker, information criteria.
``mcstudy``
    Monte Carlo replication engine.
``cli``
    command-line front end.
"""

from mesinar.dist import BesselParams, EBParams, SkellamParams
from mesinar.estimate import FitOptions, FitResult, fit_cml, fit_yw, info_criteria
from mesinar.model import ModelParams, simulate, transition_pmf

__all__ = [
    "BesselParams",
    "EBParams",
    "FitOptions",
    "FitResult",
    "ModelParams",
    "SkellamParams",
    "fit_cml",
    "fit_yw",
    "info_criteria",
    "simulate",
    "transition_pmf",
]

__version__ = "0.1.0"
