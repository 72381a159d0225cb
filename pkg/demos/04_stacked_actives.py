"""Equal nodes stacked under a complete layer become a chain of active nodes.

The edges of such a chain form an order of bounded width, which First-Fit
then splits into few edge chains.
"""
from onlinechains.harness import run_events, stacked_presentation
from onlinechains.node_tree import edge_poset
from onlinechains.poset import width

for w in (4, 6, 9):
    alg, _ = run_events(stacked_presentation(w, 12, seed=0), audit=True)
    reg = alg.instances[0].registry
    for chars, cls in reg.classes.items():
        for L, ff in cls.edge_ff.items():
            members = [n for n in cls.members if cls.chain_of[n] == L]
            if len(members) < 2:
                continue
            edges = [e for n in members for e in alg.tree[n].edges()]
            wd = width(edge_poset(alg.p, edges))
            print(f"w={w} class {tuple(chars)} chain {L}: {len(members)} actives, "
                  f"{len(edges)} edges, width {wd} (cap {w ** 3}), {len(ff)} edge chains")
    print(f"   alarms: {alg.all_alarms() or 'none'}")
