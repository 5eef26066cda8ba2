"""Who owns the buffer after the market moves?

Two contributors pay into a shared pot at different times with a 25% drop in
between.  The proportional rule prices the latecomer's euro at the post-drop
pot and lets them overtake; the monotone rule locks in order of cumulative
contributions at the cost of the euro-for-euro accounting identity.  Five
executable checkers make the trade-off explicit.
"""

from fractions import Fraction as F

from corridor_pension import (
    Ledger,
    check_add,
    check_cont,
    check_fix,
    check_lin,
    check_mon,
)

print("event 1: contributor 1 pays 100 into an empty pot")
print("the pot drops 25% (100 -> 75)")
print("event 2: contributor 2 pays 80")
print()

prop = Ledger(mode="proportional")
prop.record(1, {1: F(100), 2: F(0)}, F(0))
prop.record(2, {1: F(0), 2: F(80)}, F(75))

mono = Ledger(mode="monotone")
mono.record(1, {1: F(100), 2: F(0)}, F(0))
mono.record(2, {1: F(0), 2: F(80)}, a=F(0), c_pre=F(75))

for name, led in (("proportional", prop), ("monotone (a=0)", mono)):
    shares = {j: f"{float(s):.4f} ({s})" for j, s in led.shares.items()}
    print(f"{name:16} shares: {shares}")
print()

print("contributor 1 paid 100, contributor 2 only 80, yet proportionally 2 owns more:")
checks = {
    "cont (euros in = share value out)": check_cont,
    "fix  (pure revaluation moves no shares)": check_fix,
    "mon  (paying more never means owning less)": check_mon,
    "lin  (same-event increments scale with amounts)": check_lin,
}
for name, led in (("proportional", prop), ("monotone", mono)):
    print(f"  {name}:")
    for label, fn in checks.items():
        res = fn(led)
        suffix = "" if res.ok else f"  witness {res.witness}"
        print(f"    {label:45} {'holds' if res.ok else 'FAILS'}{suffix}")
    add = check_add(led, 0, 3, F(40))
    print(f"    {'add  (a newcomer leaves incumbent ratios)':45} "
          f"{'holds' if add.ok else 'FAILS'}")
print()
print("no rule satisfies all five at once; pick which failure you can live with")
