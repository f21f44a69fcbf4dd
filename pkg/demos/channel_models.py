"""Walk through the four link channel models.

Sweeps distance and elevation for each link class, prints the resulting
gains and Shannon rates, and shows how the LoS probability shapes the
mixed path-loss models.
"""

import numpy as np

from laemec.channel import (ChannelParams, LinkKind, link_gain, link_rate,
                            los_probability)


def main():
    params = ChannelParams()
    print("=" * 70)
    print("Link channel models (fc = %.0f MHz, B = %.0f MHz)"
          % (params.fc / 1e6, params.bandwidth / 1e6))
    print("=" * 70)

    print("\nLoS probability vs elevation (kappa1=%.0f, kappa2=%.1f):"
          % (params.kappa1, params.kappa2))
    for phi in (0, 10, 20, 30, 45, 60, 90):
        rho = los_probability(phi, params.kappa1, params.kappa2)
        bar = "#" * int(50 * rho)
        print(f"  {phi:>3} deg  rho={rho:0.6f}  {bar}")

    print("\nGain and uplink rate vs distance (elevation 35 deg, P=0.2 W):")
    header = f"{'distance':>10} " + " ".join(f"{k.value:>12}"
                                             for k in LinkKind)
    print(header)
    for d in (50, 100, 250, 500, 1000, 5000, 20000):
        row = f"{d:>9}m "
        for kind in LinkKind:
            g = link_gain(kind, float(d), 35.0, params)
            row += f" {g:>12.3e}"
        print(row)

    print("\nRates on a 300 m ground link vs a 20 km HAP link:")
    g_gs = link_gain(LinkKind.G2G, 300.0, 0.0, params)
    g_hap = link_gain(LinkKind.G2H, 20001.0, 89.0, params)
    for name, g in (("GU->GS 300 m", g_gs), ("GU->HAP 20 km", g_hap)):
        r = link_rate(params, 0.2, g)
        print(f"  {name:<15} gain={g:.3e}  rate={r/1e6:8.2f} Mbit/s")

    print("\nElevation effect on the air-to-ground model (300 m slant):")
    for phi in (5, 15, 30, 45, 60, 85):
        g = link_gain(LinkKind.A2G, 300.0, float(phi), params)
        print(f"  {phi:>3} deg  gain={g:.4e}")


if __name__ == "__main__":
    main()
