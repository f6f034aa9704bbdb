"""Fit Monte Carlo outage slopes and compare them with the closed-form diversity.

    python3 scripts/slope_campaigns.py [--trials 1e7] [--workers 4]

Prints one line per scenario: error counts per SNR point, fitted diversity
with its 95% interval, the analytic value and the acceptance band
[d - 0.35, d + 0.15].
"""
import argparse
import time

from arqddf.cli import analytic_diversity
from arqddf.mc_simulator import (Campaign, InsufficientEventsError, ProtocolConfig,
                                 estimate_slope, run_campaign)

CASES = [("relay", 2, 0.5), ("relay", 1, 0.25), ("mar", 1, 0.5), ("cvma", 2, 0.5)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=float, default=1e7)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--snr", type=float, nargs="+", default=[20, 24, 28, 32, 36, 40])
    args = ap.parse_args()
    for scenario, L, r1 in CASES:
        camp = Campaign(scenario, ProtocolConfig(L, r1), tuple(args.snr), seed=args.seed)
        t0 = time.perf_counter()
        est = run_campaign(camp, int(args.trials), workers=args.workers)
        secs = time.perf_counter() - t0
        d = analytic_diversity(scenario, L, r1)
        errors = [e.counts.errors for e in est]
        try:
            s = estimate_slope([(e.snr_db, e.counts.errors, e.counts.n_trials) for e in est])
            fit = f"d_hat={s.diversity:.3f}+-{s.ci95:.3f}"
            verdict = "in band" if d - 0.35 <= s.diversity <= d + 0.15 else "OUT OF BAND"
        except InsufficientEventsError as exc:
            fit, verdict = "no fit", str(exc)
        print(f"{scenario:5s} L={L} r1={r1:<4} errors={errors} {fit} d={d:.3f} {verdict} ({secs:.0f} s)")


if __name__ == "__main__":
    main()
