"""Link channel models for the three-layer low-altitude MEC network.

Covers the four link classes between users and servers (ground-to-ground,
ground-to-HAP, air-to-ground, air-to-HAP) and the Shannon rate of a link.
All functions are pure scalar functions; elevation angles are in degrees
and dB-to-linear conversions are base 10 throughout.
"""

import math
from dataclasses import dataclass
from enum import Enum

SPEED_OF_LIGHT = 3.0e8  # m/s


class LinkKind(Enum):
    """Link class, fully determined by the (user, server) node types."""

    G2G = "g2g"  # ground user -> ground server
    G2H = "g2h"  # ground user -> HAP
    A2G = "a2g"  # aerial user -> ground server
    A2H = "a2h"  # aerial user -> HAP


def link_kind(user_is_aerial: bool, server_is_hap: bool) -> LinkKind:
    if user_is_aerial:
        return LinkKind.A2H if server_is_hap else LinkKind.A2G
    return LinkKind.G2H if server_is_hap else LinkKind.G2G


@dataclass(frozen=True)
class Position3D:
    """Cartesian position in meters; z is the altitude above ground."""

    x: float
    y: float
    z: float = 0.0

    def __post_init__(self):
        if self.z < 0:
            raise ValueError(f"altitude must be nonnegative, got {self.z}")


@dataclass(frozen=True)
class ChannelParams:
    """Radio parameters shared by all links.

    ``g0`` is the linear reference gain at 1 m.  ``eta_los``/``eta_nlos``
    are the excess LoS/NLoS losses in dB, ``kappa1``/``kappa2`` the
    sigmoid parameters of the LoS probability (kappa2 per degree).
    ``noise_power`` is the total noise power over ``bandwidth`` in watts.
    """

    g0: float = 1e-3
    fc: float = 1e8            # carrier frequency [Hz]
    c: float = SPEED_OF_LIGHT  # propagation speed [m/s]
    eta_los: float = 0.1       # [dB]
    eta_nlos: float = 21.0     # [dB]
    kappa1: float = 10.0
    kappa2: float = 0.6        # [1/deg]
    bandwidth: float = 1e7     # [Hz]
    noise_power: float = 7.96159e-13  # [W]

    def __post_init__(self):
        for name in ("g0", "fc", "c", "kappa1", "kappa2", "bandwidth",
                     "noise_power"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (-x_db / 10.0)


def link_geometry(a: Position3D, b: Position3D) -> tuple[float, float]:
    """Euclidean distance [m] and elevation angle [deg] of the a-b link.

    The elevation is measured from the horizontal plane, so a vertical
    link has elevation 90 and a coplanar link 0.
    """
    dx, dy, dz = b.x - a.x, b.y - a.y, b.z - a.z
    distance = math.sqrt(dx * dx + dy * dy + dz * dz)
    if distance == 0.0:
        raise ValueError("coincident positions give a degenerate link")
    elevation = math.degrees(math.asin(min(1.0, abs(dz) / distance)))
    return distance, elevation


def g2g_gain(distance: float, g0: float) -> float:
    """Inverse-square channel gain of a ground-to-ground link."""
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    return g0 / (distance * distance)


def los_probability(elevation: float, kappa1: float, kappa2: float) -> float:
    """Line-of-sight probability as a sigmoid of the elevation angle."""
    # 1/(1 + k1*exp(-k2*(phi-k1))), evaluated in log space so extreme
    # parameters cannot overflow exp
    t = math.log(kappa1) - kappa2 * (elevation - kappa1)
    if t > 500.0:
        return math.exp(-t)
    return 1.0 / (1.0 + math.exp(t))


def _fspl_db(distance: float, fc: float, c: float) -> float:
    return 20.0 * math.log10(4.0 * math.pi * fc * distance / c)


def g2h_gain(distance: float, elevation: float,
             params: ChannelParams) -> float:
    """Ground-user-to-HAP gain: free space plus LoS/NLoS excess mixed
    by the LoS probability inside the dB loss."""
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    rho = los_probability(elevation, params.kappa1, params.kappa2)
    loss = (_fspl_db(distance, params.fc, params.c)
            + rho * params.eta_los + (1.0 - rho) * params.eta_nlos)
    return db_to_linear(loss)


def a2g_gain(distance: float, elevation: float,
             params: ChannelParams) -> float:
    """Aerial-user-to-ground-server gain: probabilistic mixture of the
    LoS and NLoS path losses, mixed in dB."""
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    rho = los_probability(elevation, params.kappa1, params.kappa2)
    fspl = _fspl_db(distance, params.fc, params.c)
    loss = (rho * (fspl + params.eta_los)
            + (1.0 - rho) * (fspl + params.eta_nlos))
    return db_to_linear(loss)


def a2h_gain(distance: float, params: ChannelParams) -> float:
    """Aerial-user-to-HAP gain from the free-space path loss model.

    The 32.45 constant fixes the units to MHz and km, so the carrier
    frequency and distance are converted internally.
    """
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    fc_mhz = params.fc / 1e6
    d_km = distance / 1e3
    loss = 32.45 + 20.0 * math.log10(fc_mhz) + 20.0 * math.log10(d_km)
    return db_to_linear(loss)


def link_gain(kind: LinkKind, distance: float, elevation: float,
              params: ChannelParams) -> float:
    """Channel gain of a link of the given class."""
    if kind is LinkKind.G2G:
        return g2g_gain(distance, params.g0)
    if kind is LinkKind.G2H:
        return g2h_gain(distance, elevation, params)
    if kind is LinkKind.A2G:
        return a2g_gain(distance, elevation, params)
    return a2h_gain(distance, params)


def link_rate(params: ChannelParams, tx_power: float, gain: float) -> float:
    """Shannon rate B*log2(1 + P*g/sigma^2) in bit/s."""
    if tx_power <= 0 or gain <= 0:
        raise ValueError("tx_power and gain must be strictly positive")
    snr = tx_power * gain / params.noise_power
    # log1p keeps the rate strictly positive for vanishing SNR
    return params.bandwidth * math.log1p(snr) / math.log(2.0)
