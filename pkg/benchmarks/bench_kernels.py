#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy reference backend.

Times each hot kernel on training-shaped inputs, then times a full
training run under each backend (the backend is chosen at import, so the
end-to-end comparison runs in subprocesses with PRIORFIT_PURE_PYTHON
toggled).

    python3 benchmarks/bench_kernels.py [--no-train]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from priorfit.kernels import reference

try:
    from priorfit.kernels import _core
except ImportError:
    _core = None


def _time(fn, *args, repeat=200):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_kernels():
    rng = np.random.default_rng(0)
    batch, hidden, classes = 128, 256, 10
    pre = rng.normal(size=(batch, hidden))
    grad = rng.normal(size=(batch, hidden))
    logits = rng.normal(size=(batch, classes))
    probs = reference.softmax_rows(logits)
    grad_probs = rng.normal(size=(batch, classes))
    a = np.sort(rng.normal(size=batch))
    b = np.sort(rng.normal(size=batch))
    w = rng.normal(size=(hidden, classes))
    gw = rng.normal(size=(hidden, classes))
    rows = rng.normal(size=(2000, 512))

    cases = [
        ("relu 128x256", lambda impl: impl.relu(pre)),
        ("relu_grad 128x256", lambda impl: impl.relu_grad(pre, grad)),
        ("softmax 128x10", lambda impl: impl.softmax_rows(logits)),
        ("softmax_grad 128x10", lambda impl: impl.softmax_grad_rows(probs, grad_probs)),
        ("sorted_l1 128", lambda impl: impl.sorted_pairwise_l1(a, b)),
        ("adam 256x10", lambda impl: impl.adam_update(
            w.copy(), gw, np.zeros_like(w), np.zeros_like(w),
            1, 1e-3, 0.9, 0.999, 1e-8, 1e-4)),
        ("normalize 2000x512", lambda impl: impl.l2_normalize_rows(rows)),
    ]

    print(f"{'kernel':<22} {'reference':>12} {'compiled':>12} {'speedup':>9}")
    for name, runner in cases:
        ref_t = _time(runner, reference)
        if _core is None:
            print(f"{name:<22} {ref_t * 1e6:>10.1f}us {'n/a':>12} {'n/a':>9}")
            continue
        core_t = _time(runner, _core)
        print(f"{name:<22} {ref_t * 1e6:>10.1f}us {core_t * 1e6:>10.1f}us "
              f"{ref_t / core_t:>8.1f}x")


_TRAIN_SNIPPET = """
import time
from priorfit import synth, trainer, zeroshot
from priorfit.kernels import BACKEND
spec = synth.default_regression_spec()
dataset, captions, prior = synth.generate(spec)
zs = zeroshot.assign(dataset, captions)
config = trainer.TrainConfig(task="regression", seed=0)
start = time.perf_counter()
trainer.train(dataset, captions, prior, zs, config)
print(f"{BACKEND}: {time.perf_counter() - start:.2f}s")
"""


def bench_training():
    print("\nfull training run (default regression fixture, 70 epochs):")
    for pure in ("0", "1"):
        env = dict(os.environ, PRIORFIT_PURE_PYTHON=pure)
        out = subprocess.run(
            [sys.executable, "-c", _TRAIN_SNIPPET], env=env,
            capture_output=True, text=True, check=True,
        )
        print(" ", out.stdout.strip())


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--no-train", action="store_true",
                        help="skip the end-to-end training comparison")
    args = parser.parse_args()
    bench_kernels()
    if not args.no_train:
        bench_training()
