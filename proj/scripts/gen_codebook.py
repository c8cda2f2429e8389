#!/usr/bin/env python3
"""Generate the bundled 6-user, 4-resource, 4-ary codebook file.

Two 2-dimensional mother constellations (power-balanced across dimensions,
min squared distance 2 at unit energy) are placed on each user's two occupied
resources. Users sharing a resource are separated by per-user phase rotations
so that no two users present identical point sets on a shared resource.
Every codeword is scaled to exactly unit energy in double precision.
"""
import json
import math

# mother constellation A: dimension values per symbol m = 0..3
A1 = [complex(-0.1815, -0.1318), complex(-0.6351, -0.4615),
      complex(0.6351, 0.4615), complex(0.1815, 0.1318)]
A2 = [complex(0.7851, 0.0), complex(-0.2243, 0.0),
      complex(0.2243, 0.0), complex(-0.7851, 0.0)]
# mother constellation B
B1 = [complex(-0.6351, 0.4615), complex(0.1815, -0.1318),
      complex(-0.1815, 0.1318), complex(0.6351, -0.4615)]
B2 = [complex(0.1392, -0.1759), complex(0.4873, -0.6156),
      complex(-0.4873, 0.6156), complex(-0.1392, 0.1759)]

J, K, M = 6, 4, 4
# resource pair occupied by each user (0-based); every 2-subset of {0..3} once
SUPPORT = [(1, 3), (0, 2), (0, 1), (2, 3), (0, 3), (1, 2)]
MOTHER = [(A1, A2), (A1, A2), (B1, B2), (A1, A2), (A1, A2), (B1, B2)]
PHASE = [j * math.pi / 6.0 for j in range(J)]


def main():
    users = []
    for j in range(J):
        rot = complex(math.cos(PHASE[j]), math.sin(PHASE[j]))
        d1, d2 = MOTHER[j]
        k1, k2 = SUPPORT[j]
        codewords = []
        for m in range(M):
            vec = [complex(0.0, 0.0)] * K
            vec[k1] = d1[m] * rot
            vec[k2] = d2[m] * rot
            norm = math.sqrt(sum(abs(v) ** 2 for v in vec))
            vec = [v / norm for v in vec]
            codewords.append([[v.real, v.imag] for v in vec])
        users.append(codewords)
    doc = {"name": "bundled-6x4x4", "J": J, "K": K, "M": M, "codewords": users}
    print(json.dumps(doc, indent=1))


if __name__ == "__main__":
    main()
