#!/usr/bin/env python3
"""Print orthonormal Daubechies lowpass filters (extremal phase) to 20 digits.

The filter h satisfies sum(h) = sqrt(2) and sum_k h_k h_{k+2m} = delta_m.
Usage: gen_daubechies.py N [N ...]
"""
import sys
import mpmath as mp

mp.mp.dps = 60


def daubechies(n):
    # P(y) = sum_{k<n} C(n-1+k, k) y^k with y = sin^2(w/2)
    coeffs = [mp.binomial(n - 1 + k, k) for k in range(n)]
    roots = mp.polyroots(list(reversed(coeffs)), maxsteps=500, extraprec=200) if n > 1 else []
    zs = []
    for y in roots:
        b = 1 - 2 * y
        d = mp.sqrt(b * b - 1)
        z = b + d
        if abs(z) > 1:
            z = b - d
        zs.append(z)
    poly = [mp.mpc(1)]
    for _ in range(n):
        poly = [a + b for a, b in zip(poly + [0], [0] + poly)]
    for z in zs:
        poly = [a - z * b for a, b in zip(poly + [0], [0] + poly)]
    h = [mp.re(c) for c in poly]
    s = mp.fsum(h)
    return [c * mp.sqrt(2) / s for c in h]


for arg in sys.argv[1:]:
    n = int(arg)
    h = daubechies(n)
    print(f"// genus {n}")
    for c in h:
        print(f"    {mp.nstr(c, 20, min_fixed=-100, max_fixed=100)},")
    ortho = max(abs(mp.fsum(h[k] * h[k + 2 * m] for k in range(len(h) - 2 * m)) - (1 if m == 0 else 0))
                for m in range(n))
    print(f"// max orthonormality defect {mp.nstr(ortho, 3)}")
