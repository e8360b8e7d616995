"""Positive solutions of ``Delta u = lam |x|**alpha / u**p`` in the punctured plane.

Solutions of the form ``u = r**beta w(theta)`` reduce to the angular equation

    w'' + beta**2 w - lam / w**p = 0 on the circle,  beta = (alpha + 2) / (p + 1).

Modules
-------
params      parameter triple, generalised logarithm, closed-form scalars
quadrature  tanh-sinh rule for endpoint singularities, AGM and K(k**2)
period      half-period of the orbit with amplitude ratio tau, and its inverse
classify    structure of the solution set on the circle
profile     sampled periodic solutions
energy      energy functional, F, F1, H and monotonicity sweeps
cylinder    boundary-value problems on a truncated cylinder and the energy flux
cli         command-line front end
"""

from .classify import Kind, StructureDescriptor, admissible_connection, classify, in_M_explicit
from .params import OrbitSpec, ProblemParams, make_orbit
from .period import half_period, tau_for_period
from .profile import OrbitProfile, build_profile, p3_family, residual, trivial_profile

__all__ = [
    "Kind",
    "OrbitProfile",
    "OrbitSpec",
    "ProblemParams",
    "StructureDescriptor",
    "admissible_connection",
    "build_profile",
    "classify",
    "half_period",
    "in_M_explicit",
    "make_orbit",
    "p3_family",
    "residual",
    "tau_for_period",
    "trivial_profile",
]

__version__ = "0.1.0"
