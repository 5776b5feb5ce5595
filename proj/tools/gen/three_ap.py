"""Writes a 3-AP scenario: APs on a 60 m triangle, one UE group per AP pulled
toward the centroid by --edge (0 = at the AP, 1 = at the centroid).

--flexible switches to flexible association; --extra-groups adds groups placed
uniformly at random inside the triangle."""
import argparse
import json
import random

p = argparse.ArgumentParser()
p.add_argument("--edge", type=float, default=0.5)
p.add_argument("--lambda-pps", type=float, default=10.0)
p.add_argument("--flexible", action="store_true")
p.add_argument("--extra-groups", type=int, default=0)
p.add_argument("--seed", type=int, default=1)
args = p.parse_args()

aps = [(0.0, 0.0), (60.0, 0.0), (30.0, 52.0)]
cx, cy = 30.0, 17.3
ues = [(round(x + (cx - x) * args.edge, 2), round(y + (cy - y) * args.edge, 2)) for x, y in aps]
rng = random.Random(args.seed)
for _ in range(args.extra_groups):
    a, b = rng.random(), rng.random()
    if a + b > 1:
        a, b = 1 - a, 1 - b
    x = aps[0][0] + a * (aps[1][0] - aps[0][0]) + b * (aps[2][0] - aps[0][0])
    y = aps[0][1] + a * (aps[1][1] - aps[0][1]) + b * (aps[2][1] - aps[0][1])
    ues.append((round(x, 2), round(y, 2)))

if args.flexible:
    assoc = "flexible"
else:
    assert not args.extra_groups, "fixed association needs one group per AP"
    assoc = {"type": "fixed", "map": [{"ue": i + 1, "ap": i + 1} for i in range(3)]}
doc = {
    "aps": [{"id": i + 1, "x": x, "y": y, "psd_w_per_hz": 1e-14} for i, (x, y) in enumerate(aps)],
    "ue_groups": [{"id": i + 1, "x": x, "y": y, "lambda_pps": args.lambda_pps, "noise_psd_w_per_hz": 4e-21}
                  for i, (x, y) in enumerate(ues)],
    "bandwidth_hz": 1e6,
    "mean_packet_bits": 1e5,
    "pathloss_exponent": 3.0,
    "neighbors": [[1, 2], [1, 3], [2, 3]],
    "association": assoc,
}
print(json.dumps(doc, indent=2))
