"""How a shared buffer disciplines individual claim boundaries.

Three acts.  First the coverage threshold z* for a small heterogeneous pool,
showing how one member's boundary choice moves everyone's protection level.
Then the common-boundary fixed point: members anticipate the threshold their
own choices produce.  Finally the no-deviation story: one member's best
unilateral improvement, measured against the analytic bound that shrinks as
the pool grows.
"""

from corridor_pension import (
    CorridorPolicy,
    GbmParams,
    admissible_min_k,
    best_response_gain,
    fixed_point_barriers,
    improvement_bound,
    z_star,
)

params = GbmParams(mu=0.06, sigma=0.092367)
policy = CorridorPolicy(k=0.1, alpha=2.0)

print("act 1: the coverage threshold")
etas = [1.0, 1.0, 1.0]
theta = 0.05
for ks in ([0.05, 0.05, 0.05], [0.05, 0.10, 0.30], [0.05, 0.10, 0.90]):
    z = z_star(ks, etas, theta, policy.help_frac)
    print(f"  boundaries {ks}: claims covered exactly when net return > {z:+.5f}")
print("  a member who tolerates more loss before claiming stretches the same")
print("  buffer deeper for everyone (-8.1% -> -11.9%); past a point the widest")
print("  boundary sits below where coverage fails, that member leaves the")
print("  active set, and the threshold stops responding to them")
print()

print("act 2: the self-consistent common boundary")
print(f"  (profitability floor k_min = {admissible_min_k(params, policy)})")
for n in (2, 10, 50):
    res = fixed_point_barriers(params, policy, [1.0] * n, theta=0.02 * n)
    print(f"  n={n:3d}: common k={res.k_bar:.6f}  threshold c={res.c:+.6f}  "
          f"iterations={res.iterations}  converged={res.converged}")
print("  the boundary everyone picks is the best response to the threshold that")
print("  boundary itself generates; scaling buffer and membership together")
print("  leaves the fixed point alone")
print()

print("act 3: is unilateral deviation worth it?")
print(f"  {'n':>4} {'bound':>12} {'actual gain':>12}")
for n in (2, 5, 10, 25, 50, 100):
    eta_vec = [1.0] * n
    th = 0.02 * n
    res = fixed_point_barriers(params, policy, eta_vec, theta=th)
    bound = improvement_bound(0, eta_vec, th, policy, params)
    gain = best_response_gain(params, policy, eta_vec, th, 0, res.k_bar)
    print(f"  {n:4d} {bound:12.6f} {max(gain, 0.0):12.2e}")
print("  at an interior fixed point the common boundary already is each")
print("  member's best response, so the achievable gain is zero to grid")
print("  precision, and the bound's 1/n decay closes even the theoretical room")
print()

# contrast: not every parameter set admits a self-enforcing boundary.  Here
# the best response to the threshold generated by k=0.096 is k=0, and the
# best response to the threshold generated by k=0 is k=0.096: a 2-cycle.
cyc_params = GbmParams(mu=0.045, sigma=0.06)
cyc_policy = CorridorPolicy(k=0.1, alpha=4.0)
n = 100
res = fixed_point_barriers(cyc_params, cyc_policy, [1.0] * n, theta=0.02 * n)
gain = best_response_gain(cyc_params, cyc_policy, [1.0] * n, 0.02 * n, 0, res.k_bar)
bound = improvement_bound(0, [1.0] * n, 0.02 * n, cyc_policy, cyc_params)
print(f"contrast (mu=4.5%, sigma=6%, alpha=4, n={n}): cycle_flag={res.cycle_flag}")
print(f"  reported k={res.k_bar:.4f} is the better cycle iterate; a deviator")
print(f"  facing that crowd still prefers k=0 and keeps the cycle gap")
print(f"  {gain:.2e} (bound {bound:.2e}), which no pool size erases")
