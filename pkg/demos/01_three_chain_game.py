"""Width 2 is already enough to force a third chain.

Two incomparable elements arrive, then one above both.  Whichever chain the
third element joins, a fourth element above only the other chain-mate cannot
share any existing chain.
"""
from onlinechains.harness import FirstFitPlayer, adversary_fig1, adversary_regular
from onlinechains.poset import brute_force_width

res = adversary_fig1(FirstFitPlayer)
for line in res.log:
    print("  ", line)
print(f"First-Fit: {res.chains_used} chains for {res.elements} elements, width {brute_force_width(res.poset)}")

# The regular-poset partitioner only accepts whole maximum antichains, so the
# game is replayed in that format.  The complete 2x2 start already splits into
# three colors because each top element takes its smallest incident root edge.
alg, events, used = adversary_regular()
for v in sorted(alg.named):
    print(f"   element {v}: {alg.named[v]}")
print(f"regular partitioner: {used} chains, width {brute_force_width(alg.p)}")
