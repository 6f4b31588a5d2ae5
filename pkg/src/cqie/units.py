"""Unit conversions between bath temperature and energy scales.

Energies are quoted in GHz (frequency units, i.e. E/h).  Temperatures are
in millikelvin.  The conversion constant is h/k_B expressed in mK per GHz.
"""

MK_PER_GHZ = 47.9924


def beta_from_mk(temperature_mk: float) -> float:
    """Inverse temperature in 1/GHz for a bath temperature in mK."""
    if temperature_mk <= 0:
        raise ValueError(f"temperature must be positive, got {temperature_mk}")
    return MK_PER_GHZ / temperature_mk


def mk_from_beta(beta: float) -> float:
    """Bath temperature in mK for an inverse temperature in 1/GHz."""
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    return MK_PER_GHZ / beta
