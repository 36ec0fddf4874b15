#!/usr/bin/env python3
"""Fit the free constants of the three-part chunk popularity law.

Head ranks [1, N/16000] follow n^-0.6, the body up to N/16 follows n^-0.8 and
the tail is split into 8 log-spaced pieces whose exponents rise from 1 to 15
as 1 + 14 (k/7)^p. Three constants are fitted:

    hb  head->body junction factor, in (0, 1]
    bt  body->tail junction factor, in (0, 1]
    p   tail exponent shape

Objective: squared error of the head/body/tail traffic shares against
(0.10, 0.59, 0.31) plus squared error of the hit rate at c = 0.1 (target 0.70)
and at C = 2e8 chunks of N = 1.6e9 (target 0.80).

The law is treated as continuous in rank (midpoint rule on a log grid), which
is accurate to a few 1e-4 at N = 1.6e9. Results feed the constants in
include/icn/popularity.hpp (namespace empirical).

    calibrate_empirical.py [--points 4000]
"""

import argparse

import numpy as np
from scipy.optimize import brentq, minimize

N = 1.6e9
HEAD_END = N / 16000
BODY_END = N / 16
TAIL_PIECES = 8
SHARE_TARGETS = np.array([0.10, 0.59, 0.31])
HIT_TARGETS = ((0.1, 0.70), (2e8 / N, 0.80))


def segments(hb, bt, p):
    """(lo, hi, amplitude, exponent) pieces of the continuous law."""
    segs = [(1.0, HEAD_END, HEAD_END ** (-0.8) / HEAD_END ** (-0.6), 0.6),
            (HEAD_END, BODY_END, hb, 0.8)]
    bounds = np.geomspace(BODY_END, N, TAIL_PIECES + 1)
    exps = 1 + 14 * (np.arange(TAIL_PIECES) / (TAIL_PIECES - 1)) ** p
    q = hb * BODY_END ** -0.8 * bt
    for lo, hi, a in zip(bounds[:-1], bounds[1:], exps):
        amp = q * lo ** a
        segs.append((lo, hi, amp, a))
        q = amp * hi ** -a
    return segs


def discretize(segs, m):
    qs, ws = [], []
    for lo, hi, amp, a in segs:
        u = np.linspace(np.log(lo), np.log(hi), m + 1)
        mid = np.exp(0.5 * (u[1:] + u[:-1]))
        qs.append(amp * mid ** -a)
        ws.append(mid * (u[1] - u[0]))
    return qs, ws


def shares(qs, ws):
    mass = [float((q * w).sum()) for q, w in zip(qs, ws)]
    total = sum(mass)
    return np.array([mass[0], mass[1], sum(mass[2:])]) / total


def hit_rate(q, w, c):
    cache = c * N
    total = float((q * w).sum())

    def occupancy(log_t):
        return float((w * -np.expm1(-q * np.exp(log_t))).sum()) - cache

    log_t = brentq(occupancy, -20.0, 120.0, xtol=1e-12)
    return float((q * w * -np.expm1(-q * np.exp(log_t))).sum()) / total


def objective(x, m):
    qs, ws = discretize(segments(*x), m)
    q, w = np.concatenate(qs), np.concatenate(ws)
    err = float(((shares(qs, ws) - SHARE_TARGETS) ** 2).sum())
    for c, target in HIT_TARGETS:
        err += (hit_rate(q, w, c) - target) ** 2
    return err


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=4000, help="grid points per piece")
    args = ap.parse_args()

    fit = minimize(objective, [1.0, 1.0, 3.5], args=(args.points,),
                   bounds=[(0.5, 1.0), (0.5, 1.0), (1.0, 8.0)], method="L-BFGS-B")
    hb, bt, p = fit.x
    qs, ws = discretize(segments(hb, bt, p), args.points)
    q, w = np.concatenate(qs), np.concatenate(ws)
    print(f"kHeadBodyJunction  = {hb:.4f}")
    print(f"kBodyTailJunction  = {bt:.4f}")
    print(f"kTailExponentShape = {p:.3f}")
    print(f"objective          = {fit.fun:.3e}")
    print("shares head/body/tail = " + "/".join(f"{s:.4f}" for s in shares(qs, ws)))
    for c, target in HIT_TARGETS:
        print(f"theta(c={c:.4g}) = {hit_rate(q, w, c):.4f} (target {target})")


if __name__ == "__main__":
    main()
