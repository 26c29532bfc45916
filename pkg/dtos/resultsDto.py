from typing import List, Optional

from pydantic import BaseModel


# Shooting DTOs
class ShootResult(BaseModel):
    n: int
    k: int
    alpha: float
    betas: List[float]
    p_exp: Optional[float] = None
    outcome: str
    radius: float
    steps: int


class SeparatrixResult(BaseModel):
    n: int
    k: int
    alpha: float
    beta1_hat: float
    width: float
    iterations: int
    beta1_exact: float


# Classification DTOs
class FamilyResult(BaseModel):
    n: int
    k: int
    alpha: float
    beta: float
    c_hat: float
    c_hat_euclid: float
    c_exact: float
    constancy: float
    two_route: float
    q_hat: float
    p_hat: Optional[float] = None     # None when beta = 0 leaves nothing to fit
    p_expected: float
    sign_mixed: bool = False


# Green's function DTOs
class GreenResult(BaseModel):
    n: int
    k: int
    cosh_power: float
    decay_rate: float
    expected_decay: float
    decreasing: bool
    gamma_calibrated: float
    gamma_min: float
    bound_holds: bool


# HLS DTOs
class HlsResult(BaseModel):
    n: int
    lam: float
    C: float
    C_direct: float
    max_ratio: float
    profiles: int


# Moving sphere DTOs
class MsphereResult(BaseModel):
    n: int
    k: int
    alpha: float
    beta: float
    offset: float
    verdict: str
    lambda0: Optional[float] = None
    width: Optional[float] = None
    lambda0_exact: Optional[float] = None
    charge: float
    charge_converged: bool
    kelvin_charge: Optional[float] = None
