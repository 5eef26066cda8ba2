"""Settling five simultaneous claims against a pool that cannot pay them all.

Walks the round structure by hand: claims that fit inside their weighted slice
settle in full, survivors' weights renormalize, and the terminal round splits
what is left pro rata.  Fraction inputs keep every number exact, so the
conservation identity prints as a literal equality.
"""

from fractions import Fraction as F

from corridor_pension import ClaimBatch, settle

claims = (F(4), F(6), F(20), F(35), F(80))
indices = (F(1, 5),) * 5
pool = F(100)

print("five claimants, equal weights 1/5, pool of 100 shares")
print(f"claims: {[str(c) for c in claims]}  (total {sum(claims)} > pool {pool})")
print()

# replay the rounds manually so each decision is visible
active = list(range(5))
remaining = pool
alloc = [F(0)] * 5
rnd = 0
while active:
    rnd += 1
    total_w = sum(indices[j] for j in active)
    slices = {j: indices[j] * remaining / total_w for j in active}
    print(f"round {rnd}: pool {remaining}, slices "
          + ", ".join(f"#{j + 1}={slices[j]}" for j in active))
    fits = [j for j in active if claims[j] <= slices[j]]
    if fits:
        for j in fits:
            alloc[j] = claims[j]
            remaining -= claims[j]
            print(f"  claim #{j + 1} ({claims[j]}) fits inside its slice "
                  f"{slices[j]}: paid in full")
        active = [j for j in active if j not in fits]
    else:
        print("  no claim fits its slice any more: terminal pro-rata round")
        for j in active:
            pay = min(claims[j], slices[j])
            alloc[j] = pay
            remaining -= pay
            print(f"  claim #{j + 1} ({claims[j]}) gets min(claim, slice) = {pay}")
        active = []
print()

result = settle(ClaimBatch(claims, indices, pool))
assert tuple(alloc) == result.allocations and remaining == result.remaining
print(f"settle() agrees: allocations {[str(a) for a in result.allocations]}, "
      f"remaining {result.remaining}, rounds {result.rounds}")
paid = sum(result.allocations)
print(f"conservation: {' + '.join(str(a) for a in result.allocations)} "
      f"+ {result.remaining} = {paid + result.remaining} = pool")
print()

# same batch with lopsided weights: the big claim's weight starves the small ones
skew = (F(1, 20), F(1, 20), F(1, 10), F(2, 10), F(6, 10))
res2 = settle(ClaimBatch(claims, skew, pool))
print("same claims, weights (1/20, 1/20, 1/10, 2/10, 6/10):")
print(f"  allocations {[str(a) for a in res2.allocations]}, rounds {res2.rounds}")
print("  the heavyweight claimant now absorbs most of the pool; the waterfall")
print("  ranks by claim-to-slice ratio, not by claim size alone")
