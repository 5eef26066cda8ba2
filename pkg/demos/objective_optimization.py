"""Choosing the boundary under a mean-minus-variance target.

Three parameter sets show the three shapes the smoothed objective takes:
a single maximum at k = 0 (smooth as hard as allowed), two separated local
maxima with a clear winner, and a tuned volatility where both maxima have
equal value and the tie is resolved by the transfer-only objective's slope.
"""

import numpy as np

from corridor_pension import CorridorPolicy, GbmParams, m2, maximize_m2

cases = [
    ("tight market, heavy penalty", GbmParams(0.045, 0.06), CorridorPolicy(alpha=4.0)),
    ("wider market", GbmParams(0.06, 0.092367), CorridorPolicy(alpha=2.0)),
    ("tuned to an exact tie", GbmParams(0.06, 0.09328707495450515), CorridorPolicy(alpha=2.0)),
]

for label, params, policy in cases:
    res = maximize_m2(params, policy)
    print(f"--- {label}: mu={params.mu}, sigma={params.sigma}, alpha={policy.alpha}")
    for k in np.linspace(0.0, 0.3, 7):
        bar = "#" * int(4000 * max(m2(params, policy, float(k)) - 0.02, 0.0))
        print(f"  M2({k:4.2f}) = {m2(params, policy, float(k)):.7f} {bar}")
    print(f"  maximizer k* = {res.k_star:.6f}, value {res.value:.8f}")
    print(f"  candidates: {[(round(k, 4), round(v, 8)) for k, v in res.candidates]}")
    if res.tie_flag:
        print("  tie: equal-value maxima; slope of the transfer-only objective picks", res.k_star)
    print()

print("a tie needs two separated local maxima with matching values; a flat")
print("plateau is reported as a single candidate, never as a tie")
