"""
hypgjms
=======

Numerical toolkit for conformally invariant GJMS equations P_k u = f(u) on
hyperbolic space H^n, checked against closed forms wherever they exist.

Main Components:
- Geometry of the ball and hyperboloid models (hgeom)
- Gauss hypergeometric 2F1 and log-Gamma ratios (specfun)
- Hyperbolic Kelvin transform across geodesic spheres (kelvin)
- GJMS operators, Green's function and kernel convolution (gjms)
- Radial polyharmonic shooting and the separatrix (shoot)
- Residual checks of the explicit solution family (classify)
- Sharp Hardy-Littlewood-Sobolev constant (hls)
- Moving-sphere scans (msphere)
- Command-line experiments with run manifests (cli)

Usage:
    from hypgjms import Dimensions, FamilyParams, residual_Q

    fp = FamilyParams(alpha=1.0, beta=-0.5, dims=Dimensions(6, 2))
    result = residual_Q(fp)
    print(result.c_hat, result.c_exact)

Version: 1.0.0
"""

__version__ = "1.0.0"
__author__ = "hypgjms developers"

from .hgeom import BallPoint, Dimensions, ball_distance, law_of_cosines, volume_ball
from .specfun import hyp2f1, log_gamma
from .kelvin import KelvinSphere, RadialProfile, kelvin_transform, phi_lambda
from .gjms import GreenParams, apply_Pk, euclid_pullback_Pk, green_convolve_radial, green_pk
from .shoot import ShootParams, ivp_integrate, separatrix_bisect
from .classify import FamilyParams, family_profile, infer_power, residual_Q
from .hls import HlsParams, hls_constant
from .msphere import SphereScan, critical_lambda

__all__ = [
    "BallPoint",
    "Dimensions",
    "FamilyParams",
    "GreenParams",
    "HlsParams",
    "KelvinSphere",
    "RadialProfile",
    "ShootParams",
    "SphereScan",
    "apply_Pk",
    "ball_distance",
    "critical_lambda",
    "euclid_pullback_Pk",
    "family_profile",
    "green_convolve_radial",
    "green_pk",
    "hls_constant",
    "hyp2f1",
    "infer_power",
    "ivp_integrate",
    "kelvin_transform",
    "law_of_cosines",
    "log_gamma",
    "phi_lambda",
    "residual_Q",
    "separatrix_bisect",
    "volume_ball",
    "__version__",
]
