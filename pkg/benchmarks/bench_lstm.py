#!/usr/bin/env python3
"""Benchmark the compiled LSTM kernel against the pure-numpy fallback.

Times forward and forward+backward passes over identical random batches and
reports per-batch latency plus throughput. Shapes default to the production
configuration (hidden 100) and the synthetic-corpus configuration used by
the acceptance suite (hidden 32).
"""

import argparse
import time

import numpy as np

from hatebootstrap.neuralnet import _lstm_np

try:
    from hatebootstrap.neuralnet import _lstm_cy
except ImportError:
    _lstm_cy = None


def make_batch(rng, B, T, d, H):
    X = rng.normal(size=(B, T, d))
    lengths = rng.integers(max(1, T // 2), T + 1, size=B).astype(np.int64)
    in_mask = np.ones((B, d))
    rec_mask = np.ones((B, H))
    W = rng.uniform(-0.08, 0.08, size=(4 * H, d))
    U = rng.uniform(-0.08, 0.08, size=(4 * H, H))
    b = rng.uniform(-0.08, 0.08, size=4 * H)
    wo = rng.uniform(-0.08, 0.08, size=H)
    dl = rng.normal(size=B) / B
    return X, lengths, in_mask, rec_mask, W, U, b, wo, dl


def time_backend(kernel, args_fwd, dlogits, W, U, wo, repeats, with_backward):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        probs, logits, cache = kernel.forward_batch(*args_fwd)
        if with_backward:
            kernel.backward_batch(cache, W, U, wo, dlogits)
        best = min(best, time.perf_counter() - t0)
    return best


def run_shape(B, T, d, H, repeats):
    rng = np.random.default_rng(0)
    X, lengths, in_mask, rec_mask, W, U, b, wo, dl = make_batch(rng, B, T, d, H)
    args_fwd = (X, lengths, in_mask, rec_mask, W, U, b, wo, 0.1)

    print(f"\nbatch={B} seq={T} input={d} hidden={H} ({repeats} repeats, best time)")
    rows = []
    for名 in ():
        pass
    backends = [("numpy", _lstm_np)]
    if _lstm_cy is not None:
        backends.append(("cython", _lstm_cy))
    results = {}
    for name, kernel in backends:
        fwd = time_backend(kernel, args_fwd, dl, W, U, wo, repeats, False)
        both = time_backend(kernel, args_fwd, dl, W, U, wo, repeats, True)
        results[name] = (fwd, both)
        print(f"  {name:7s} forward {fwd * 1e3:8.2f} ms   fwd+bwd {both * 1e3:8.2f} ms   "
              f"({B / both:,.0f} seq/s train)")
    if len(results) == 2:
        f_np, b_np = results["numpy"]
        f_cy, b_cy = results["cython"]
        print(f"  speedup forward {f_np / f_cy:5.2f}x   fwd+bwd {b_np / b_cy:5.2f}x")

    p_np = _lstm_np.forward_batch(*args_fwd)[0]
    if _lstm_cy is not None:
        p_cy = _lstm_cy.forward_batch(*args_fwd)[0]
        print(f"  max |prob diff| {np.abs(p_np - p_cy).max():.2e}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--batch", type=int)
    parser.add_argument("--seq-len", type=int)
    parser.add_argument("--input-dim", type=int)
    parser.add_argument("--hidden", type=int)
    args = parser.parse_args()

    if args.batch:
        shapes = [(args.batch, args.seq_len or 20, args.input_dim or 16,
                   args.hidden or 32)]
    else:
        shapes = [
            (32, 20, 16, 32),    # synthetic acceptance configuration
            (32, 50, 300, 100),  # production configuration
            (256, 20, 16, 32),   # bulk prediction, synthetic
            (256, 50, 300, 100), # bulk prediction, production
        ]
    for B, T, d, H in shapes:
        run_shape(B, T, d, H, args.repeats)


if __name__ == "__main__":
    main()
