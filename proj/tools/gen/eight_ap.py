"""Writes the 8-AP fixed-association scenario: a 2 x 4 AP grid and, for each AP,
one UE group placed uniformly at random over the whole deployment area (so a
group may sit closer to another AP than to its own). Neighbors: APs within
1.5 spacings."""
import argparse
import json
import math
import random

p = argparse.ArgumentParser()
p.add_argument("--seed", type=int, default=1)
p.add_argument("--spacing", type=float, default=40.0)
p.add_argument("--lambda-pps", type=float, default=1.0)
p.add_argument("--bandwidth", type=float, default=1e6)
p.add_argument("--packet-bits", type=float, default=2e5)
args = p.parse_args()

rng = random.Random(args.seed)
aps = [(c * args.spacing, r * args.spacing) for r in range(2) for c in range(4)]
h = args.spacing / 2
ues = [(round(rng.uniform(-h, 3 * args.spacing + h), 2), round(rng.uniform(-h, args.spacing + h), 2)) for _ in aps]
nbrs = [[i + 1, l + 1] for i in range(8) for l in range(i + 1, 8)
        if math.dist(aps[i], aps[l]) <= 1.5 * args.spacing]
doc = {
    "aps": [{"id": i + 1, "x": x, "y": y, "psd_w_per_hz": 1e-14} for i, (x, y) in enumerate(aps)],
    "ue_groups": [{"id": i + 1, "x": x, "y": y, "lambda_pps": args.lambda_pps, "noise_psd_w_per_hz": 4e-21}
                  for i, (x, y) in enumerate(ues)],
    "bandwidth_hz": args.bandwidth,
    "mean_packet_bits": args.packet_bits,
    "pathloss_exponent": 3.0,
    "neighbors": nbrs,
    "association": {"type": "fixed", "map": [{"ue": i + 1, "ap": i + 1} for i in range(8)]},
}
print(json.dumps(doc, indent=2))
