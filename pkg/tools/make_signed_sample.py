"""Regenerate ``src/sglhn/data/signed_sample_50.txt``.

A synthetic stand-in for a real signed network: two factions of 25 users,
mostly positive ties inside a faction, mostly negative ties across, and a
small share of sign "defections".  Node ids are opaque strings, as in
public vote/trust dumps.
"""

from pathlib import Path

import numpy as np

N, FACTION = 50, 25
P_IN, P_OUT, P_FLIP = 0.25, 0.12, 0.05


def main(path=Path(__file__).resolve().parents[1] / "src/sglhn/data/signed_sample_50.txt"):
    rng = np.random.default_rng(20240501)
    ids = [f"user{v:04d}" for v in rng.choice(10000, size=N, replace=False)]
    side = np.arange(N) >= FACTION
    lines = ["# synthetic two-faction signed network, 50 nodes (src dst sign)"]
    for i in range(N):
        for j in range(i + 1, N):
            same = side[i] == side[j]
            if rng.random() >= (P_IN if same else P_OUT):
                continue
            sign = 1 if same else -1
            if rng.random() < P_FLIP:
                sign = -sign
            a, b = (ids[i], ids[j]) if rng.random() < 0.5 else (ids[j], ids[i])
            lines.append(f"{a} {b} {sign:+d}")
    path.write_text("\n".join(lines) + "\n")
    return path


if __name__ == "__main__":
    print(main())
