"""Tour of the air-to-ground channel: sight probability, path loss, coverage.

The link budget allows 100 dB of mean path loss (30 dBm transmit power,
-70 dBm sensitivity). Flying higher steepens elevation angles, which favors
line-of-sight, but also stretches the free-space distance; the coverage
radius peaks at an interior altitude.
"""

import numpy as np

from uavcover import (ChannelParams, LinkBudget, UavPosition, coverage_radius,
                      mean_path_loss, optimal_altitude, prob_los)

link = LinkBudget()
params = ChannelParams()
print(f"link budget: {link.pt_dbm} dBm - ({link.pmin_dbm}) dBm "
      f"= {link.threshold_db} dB of tolerable path loss\n")

print("sight probability rises with elevation angle:")
for theta in (5, 15, 30, 45, 60, 90):
    print(f"  {theta:3d} deg -> {prob_los(theta, params):.3f}")

print("\nmean path loss from a UAV at 200 m altitude:")
for r in (0, 100, 200, 400, 800):
    pl = mean_path_loss(UavPosition(0, 0, 200.0), (float(r), 0.0), params)
    mark = "covered" if pl <= link.threshold_db else "too far"
    print(f"  horizontal {r:4d} m -> {pl:6.1f} dB  ({mark})")

print("\ncoverage radius vs altitude (the altitude-radius tradeoff):")
for z in (25, 50, 100, 200, 400, 646, 800, 1200):
    disk = coverage_radius(float(z), link, params)
    bar = "#" * int(disk.radius_m / 20)
    print(f"  z={z:5d} m  radius={disk.radius_m:6.1f} m  {bar}")

best = optimal_altitude(link, params)
print(f"\nbest altitude {best.altitude_m:.0f} m covers a disk of radius "
      f"{best.radius_m:.0f} m")
ratio = np.pi * best.radius_m ** 2 / (3000.0 * 3000.0)
print(f"that is {ratio:.0%} of the default 3 x 3 km service area")
