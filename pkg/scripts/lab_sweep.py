"""Undetected-error decay with block length in the codebook lab.

    python3 scripts/lab_sweep.py [--snr 0] [--trials 20000] [--T 8 16 32 64]

Columns: wrong accepts in total, those with a correct or silent relay
(noise driven), relay decoding errors, and the Chernoff factor
((1 + delta) e^-delta)^T for comparison.
"""
import argparse

from arqddf.codebook_lab import LabConfig, chernoff_factor, run_arq_lab


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--snr", type=float, default=0.0)
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--T", type=int, nargs="+", default=[8, 16, 32, 64])
    ap.add_argument("--M", type=int, default=16)
    ap.add_argument("--delta", type=float, default=0.2)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    print("T,undetected,noise_driven,relay_errors,final_errors,chernoff")
    for T in args.T:
        cfg = LabConfig(T=T, M=args.M, delta=args.delta, snr_db=args.snr)
        r = run_arq_lab(cfg, args.trials, seed=args.seed)
        print(f"{T},{r.undetected},{r.undetected_relay_ok},{r.relay_errors},{r.final_errors},"
              f"{chernoff_factor(args.delta, T):.3e}")


if __name__ == "__main__":
    main()
