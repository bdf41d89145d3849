"""Analytical FLOP/byte cost model and a CPU microbenchmark harness.

The structured layer's forward pass costs about ``4N + 5N*log2(N)``
floating point operations per example.  Uncached, it moves at least 24N
bytes per example in 32-bit arithmetic (8 per element for each diagonal,
4 for the input, 4 for the output); with the diagonals cached across a
batch, 8N bytes remain, giving an arithmetic intensity of
``(4 + 5*log2(N)) / 8`` FLOPs per byte.  For layer sizes between 128 and
16384 that is 4.875 to 9.25, so large batched layers are expected to be
memory-bound on hardware whose compute/bandwidth ratio exceeds ~9.

The harness measures wall time on CPU with a monotonic clock, median of
repeated calls after warmup.  Model columns ride along in the CSV so
roofline-style plots can be reproduced downstream; they are the 32-bit
model above, not a model of this host's cache hierarchy.  Dense rows
carry the standard dense model (2*N^2*batch FLOPs, weights cached).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .layers import AcdcLayer, DenseLayer
from .tensor import Rng

__all__ = ["LayerCostModel", "BenchResult", "cost_model", "bench", "write_bench_csv", "BENCH_CSV_HEADER"]

VARIANTS = ("acdc_fast_dct", "acdc_naive_dct", "dense")
DIRECTIONS = ("forward", "backward")

# context-only GPU reference figures quoted in the analysis this model
# follows; never asserted against
REFERENCE_GPU_GFLOPS = 6605.0
REFERENCE_GPU_GBS = 336.5


@dataclass
class LayerCostModel:
    """Per-example closed-form costs for one structured layer of size N."""

    n: int
    batch: int
    flops: float
    bytes_uncached: int
    bytes_cached: int
    arithmetic_intensity: float
    power_of_two: bool


def cost_model(n, batch=1):
    """Closed-form per-example FLOPs, bytes, and arithmetic intensity.

    ``flops`` is integral when N is a power of two; otherwise log2 is
    real-valued and the model is flagged via ``power_of_two=False``.
    """
    if n <= 0:
        raise ValueError(f"layer size must be positive, got {n}")
    log2n = math.log2(n)
    pow2 = n & (n - 1) == 0
    if pow2:
        flops = 4 * n + 5 * n * int(log2n)
    else:
        flops = 4 * n + 5 * n * log2n
    return LayerCostModel(
        n=n,
        batch=batch,
        flops=flops,
        bytes_uncached=24 * n,
        bytes_cached=8 * n,
        arithmetic_intensity=(4 + 5 * log2n) / 8.0,
        power_of_two=pow2,
    )


@dataclass
class BenchResult:
    variant: str
    direction: str
    n: int
    batch: int
    median_ns: float
    iterations: int
    model_flops: float
    model_bytes_cached: int
    model_ai: float
    threads: int
    backend: str

    def gflops(self):
        """Achieved GFLOP/s under the model (not a hardware measurement)."""
        return self.model_flops / self.median_ns if self.median_ns > 0 else float("nan")


def _iterations_for(n, batch):
    # fixed, size-derived iteration count keeps the protocol deterministic
    return max(1, (1 << 22) // max(1, n * batch))


def _make_layer(variant, n, backend, rng):
    if variant == "dense":
        layer = DenseLayer(n, n, rng=rng)
    elif variant == "acdc_fast_dct":
        layer = AcdcLayer(n, dct_mode="fast", backend=backend)
    elif variant == "acdc_naive_dct":
        layer = AcdcLayer(n, dct_mode="naive")
    else:
        raise ValueError(f"unknown bench variant {variant!r}")
    if variant != "dense":
        layer.a[:] = rng.gaussian(1, n, 1.0, 0.1)[0]
        layer.d[:] = rng.gaussian(1, n, 1.0, 0.1)[0]
    return layer


def _time_call(fn, iterations, repeats, warmup):
    for _ in range(warmup):
        fn()
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        for _ in range(iterations):
            fn()
        samples.append((time.perf_counter_ns() - t0) / iterations)
    return float(np.median(samples)), samples


def bench(
    sizes,
    batch=128,
    variants=VARIANTS,
    directions=DIRECTIONS,
    repeats=20,
    warmup=3,
    backend="auto",
    seed=99,
):
    """Time layer forward/backward calls; returns a list of BenchResult.

    Median over ``repeats`` timed repetitions after ``warmup`` untimed
    calls, single-threaded harness.  Dense matmul may still use BLAS
    internal threading; the threads column records harness threads.
    """
    rng = Rng(seed)
    results = []
    for n in sizes:
        model = cost_model(n, batch)
        x = rng.uniform(batch, n)
        for variant in variants:
            layer = _make_layer(variant, n, backend, rng)
            layer_backend = getattr(layer, "dct_plan", None)
            backend_name = layer_backend.backend if layer_backend is not None else "blas"
            for direction in directions:
                iterations = _iterations_for(n, batch)
                if direction == "forward":
                    fn = lambda: layer.forward(x)
                else:
                    layer.forward(x)
                    grad = rng.uniform(batch, n)
                    fn = lambda: layer.backward(grad, retain_cache=True)
                median_ns, _ = _time_call(fn, iterations, repeats, warmup)
                if variant == "dense":
                    model_flops = 2.0 * n * n * batch
                    model_bytes = 8 * n * batch
                    model_ai = n / 4.0
                else:
                    model_flops = float(model.flops) * batch
                    model_bytes = model.bytes_cached * batch
                    model_ai = model.arithmetic_intensity
                results.append(
                    BenchResult(
                        variant=variant,
                        direction=direction,
                        n=n,
                        batch=batch,
                        median_ns=median_ns,
                        iterations=iterations,
                        model_flops=model_flops,
                        model_bytes_cached=model_bytes,
                        model_ai=model_ai,
                        threads=1,
                        backend=backend_name,
                    )
                )
    return results


BENCH_CSV_HEADER = "variant,direction,N,batch,median_ns,model_flops,model_bytes_cached,model_AI,threads"


def write_bench_csv(results, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(BENCH_CSV_HEADER + "\n")
        for r in results:
            fh.write(
                f"{r.variant},{r.direction},{r.n},{r.batch},{r.median_ns:.17g},"
                f"{r.model_flops:.17g},{r.model_bytes_cached},{r.model_ai:.17g},{r.threads}\n"
            )
