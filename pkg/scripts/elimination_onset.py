"""Earliest round at which a suboptimal arm with gap DELTA_GAP can be eliminated.

Elimination needs an estimated gap above 5 r(leader) + 3 r(arm). With both
estimates exact and both radii at their smallest possible value (no
exploration penalty: a single dominating arm and full exploration, so the
sum of 1/gamma_s equals t), the condition reduces to 8 r_min(t) < gap.
This lower-bounds the onset for every graph and schedule.

    python3 scripts/elimination_onset.py --gaps 0.1 0.3 0.5 0.8
"""
import argparse

from graphbobw.bobw import radius_value, gamma_schedule


def onset(gap, delta, dom_size=1, gamma=lambda t: 1.0, inv_sum=lambda t: float(t)):
    lo, hi = 1, 2
    while 8 * radius_value(inv_sum(hi), hi, None, gamma(hi), dom_size, delta) >= gap:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if 8 * radius_value(inv_sum(mid), mid, None, gamma(mid), dom_size, delta) < gap:
            hi = mid
        else:
            lo = mid + 1
    return lo


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gaps", type=float, nargs="+", default=[0.1, 0.2, 0.3, 0.5, 0.8])
    ap.add_argument("--delta", type=float, default=0.05)
    ap.add_argument("--K", type=int, default=5, help="arms, for the default exploration schedule")
    ap.add_argument("--dom-size", type=int, default=4, help="|D|, for the default exploration schedule")
    args = ap.parse_args()

    d, K = args.dom_size, args.K
    c = (K * K * d) ** (1.0 / 3.0)
    t0 = int(c ** 3)  # gamma_s = 1 up to here

    def inv_sum(t):
        # sum of 1/gamma_s = max(1, s^(1/3) / c); the tail sum uses the midpoint integral rule
        if t <= t0:
            return float(t)
        return t0 + 0.75 * ((t + 0.5) ** (4 / 3) - (t0 + 0.5) ** (4 / 3)) / c

    print(f"{'gap':>6} {'ideal onset':>12} {'default schedule':>17}")
    for gap in args.gaps:
        ideal = onset(gap, args.delta)
        real = onset(gap, args.delta, d, lambda t: gamma_schedule(t, K, d), inv_sum)
        print(f"{gap:>6.2f} {ideal:>12} {real:>17}")


if __name__ == "__main__":
    main()
