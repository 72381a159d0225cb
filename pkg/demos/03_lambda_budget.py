"""The color budget grows like w^O(log log w), with a large constant."""
from math import isqrt

from onlinechains.coloring import lambda_budget

print(f"{'w':>4} {'lambda(w)':>12} {'lambda1':>10} {'lambda2':>10} {'lambda3':>10}  ratio")
for w in (1, 2, 3, 4, 9, 16, 64, 256, 300, 1024):
    b = lambda_budget(w)
    sub = lambda_budget(isqrt(w)).lam
    # ratio of lambda(w) to w^24 * lambda(floor(sqrt w))^2; it only drops below 1 past w = 256
    ratio = b.lam / (w ** 24 * sub ** 2) if w > 1 else 1.0
    print(f"{w:>4} {b.lam:>12.3e} {b.lam1:>10.2e} {b.lam2:>10.2e} {b.lam3:>10.2e}  {ratio:.3f}")
