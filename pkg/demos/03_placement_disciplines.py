"""One clustered world, three deployment disciplines, side by side.

The free UAV flies to the best altitude and 2D center. The tethered UAV is
stuck inside one anchor's hovering region (tether 150 m, anchor height
50 m). The intermittently tethered UAV picks the best of several anchors.
Coverage can only shrink along that chain, but the gap between the anchored
disciplines narrows as anchors multiply.
"""

import numpy as np

from uavcover import (Area, ChannelParams, LinkBudget, ThomasParams,
                      place_free, place_itethered, place_multi,
                      place_tethered, sample_anchors, sample_thomas)

area, link, params = Area(), LinkBudget(), ChannelParams()
rng = np.random.default_rng(21)
ues = sample_thomas(ThomasParams(4, 150.0, 200), area, rng)
anchors = sample_anchors(10, area, 50.0, rng)

free = place_free(ues, link, params)
print(f"free UAV         covers {len(free.covered):3d}/200 at "
      f"({free.pos.x_m:.0f}, {free.pos.y_m:.0f}, {free.pos.z_m:.0f}) m")

tuav = place_tethered(ues, anchors[0], 150.0, 0.0, link, params)
print(f"tethered UAV     covers {len(tuav.covered):3d}/200 at anchor "
      f"{tuav.anchor_id} (one random anchor, no choice)")

for n in (3, 5, 10):
    ituav = place_itethered(ues, anchors[:n], 150.0, 0.0, link, params)
    print(f"iTUAV, {n:2d} anchors covers {len(ituav.covered):3d}/200 "
          f"using anchor {ituav.anchor_id}")

print("\ngreedy fleets (disjoint covered sets):")
for k, mode, pool in ((2, "uav", None), (2, "tuav", anchors[:2]),
                      (2, "ituav", anchors[:4])):
    plcs = place_multi(ues, k, mode, pool, 150.0, 0.0, link, params)
    counts = [len(p.covered) for p in plcs]
    print(f"  {k} x {mode:5s} -> per-UAV {counts}, total {sum(counts)}")
