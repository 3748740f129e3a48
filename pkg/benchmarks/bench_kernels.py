#!/usr/bin/env python3
"""Benchmark the coupling-matrix kernel: numba fast path vs numpy fallback.

The pairwise coupling matrix is the package's hot kernel (M^2 complex
evaluations per geometry; M=2048 is the full-scale default). Also times one
batched forward pass for context, which is BLAS-bound and shares no code
with the jitted kernel.

Usage: python benchmarks/bench_kernels.py [--sizes 256,1024,2048] [--repeats 3]
"""

import argparse
import os
import time

import numpy as np

os.environ.setdefault("SIMD2NN_KERNELS", "auto")

from simd2nn import kernels
from simd2nn.channel import ChannelConfig, realize_channel
from simd2nn.geometry import GeometryConfig, build_geometry, layer_positions
from simd2nn.network import forward_batch, init_params
from simd2nn.propagation import build_propagation
from simd2nn.seeding import CHANNEL, PARAM_INIT, stream


def grid_for(m):
    rows = 1 << (m.bit_length() // 2)
    while m % rows:
        rows //= 2
    if rows > m // rows:
        rows = m // rows
    return rows, m // rows


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="256,1024,2048")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    print(f"numba available: {kernels.HAVE_NUMBA}")
    print(f"{'M':>6} {'numpy (s)':>12} {'numba (s)':>12} {'speedup':>9}")
    for m in sizes:
        rows, cols = grid_for(m)
        geom = build_geometry(GeometryConfig(atoms_rows=rows, atoms_cols=cols))
        src = layer_positions(geom, 0)
        dst = layer_positions(geom, 1)
        call = lambda: kernels.coupling_matrix(
            src, dst, geom.atom_pitch_x, geom.atom_pitch_y, geom.wavelength
        )
        os.environ["SIMD2NN_KERNELS"] = "numpy"
        t_numpy = time_call(call, args.repeats)
        if kernels.HAVE_NUMBA:
            os.environ["SIMD2NN_KERNELS"] = "numba"
            call()  # jit warmup outside the timed region
            t_numba = time_call(call, args.repeats)
            print(f"{m:>6} {t_numpy:>12.4f} {t_numba:>12.4f} {t_numpy / t_numba:>8.1f}x")
        else:
            print(f"{m:>6} {t_numpy:>12.4f} {'-':>12} {'-':>9}")
    os.environ["SIMD2NN_KERNELS"] = "auto"

    # context: one 64-patch forward pass at full scale (BLAS matmul bound)
    m = sizes[-1]
    rows, cols = grid_for(m)
    geom = build_geometry(GeometryConfig(atoms_rows=rows, atoms_cols=cols))
    prop = build_propagation(geom)
    channel = realize_channel(ChannelConfig(), m, stream(0, CHANNEL))
    params = init_params(geom, "sim", stream(0, PARAM_INIT))
    rng = np.random.default_rng(0)
    feats = np.exp(1j * rng.uniform(0, 2 * np.pi, (m, 64))) * rng.uniform(0.1, 1, (m, 64))
    t_fwd = time_call(
        lambda: forward_batch(params, feats, prop, channel.realization, channel.tx_amplitude),
        args.repeats,
    )
    print(f"\nforward_batch M={m}, L={geom.num_layers}, batch=64: {t_fwd:.4f} s (numpy matmul)")


if __name__ == "__main__":
    main()
