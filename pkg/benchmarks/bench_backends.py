"""Compare the compiled Monte Carlo kernel against the pure-numpy fallback.

Both backends consume identical pre-generated randomness and must return
bitwise-identical outcome sequences; this script reports throughput only.

Usage: python benchmarks/bench_backends.py [--samples N] [--repeat R]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qndtradeoff import _backend, available_backends
from qndtradeoff.rng import batch_substream_uniforms, gaussian_pairs
from qndtradeoff.tradeoff import _compile, imperfect_protocol, perfect_protocol
from qndtradeoff.channel import qubit_pointer_spec


def _inputs(protocol, n, seed):
    comp = _compile(protocol)
    d = protocol.dim
    per_state = 2 * d
    per_twirl = 2 * d * d if protocol.twirl else 0
    count = per_state + per_twirl + 1
    u = batch_substream_uniforms(seed, 0, 0, n, count)
    psi_gauss = np.ascontiguousarray(gaussian_pairs(u[:, :per_state]))
    twirl_gauss = (
        np.ascontiguousarray(gaussian_pairs(u[:, per_state : per_state + per_twirl]))
        if protocol.twirl
        else None
    )
    u_out = u[:, -1].copy()
    return comp, psi_gauss, twirl_gauss, u_out


def _run(backend, protocol, comp, psi_gauss, twirl_gauss, u_out):
    mod = _backend._BACKENDS[backend]
    est_idx = comp.est_idx
    if backend == "cython":
        est_idx = est_idx.astype(np.int32)
    return mod.simulate_batch(
        protocol.dim,
        psi_gauss,
        None,
        twirl_gauss,
        u_out,
        comp.adjoint,
        comp.w,
        comp.q,
        comp.phase,
        est_idx,
    )


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=20_240_601)
    args = ap.parse_args()

    backends = available_backends()
    if "cython" not in backends:
        print("compiled backend unavailable; timing numpy only")

    cases = [
        ("d=2 ideal, twirl", perfect_protocol(2, 0.5, twirl=True)),
        ("d=2 ideal, no twirl", perfect_protocol(2, 0.5, twirl=False)),
        ("d=5 ideal, twirl", perfect_protocol(5, 0.3, twirl=True)),
        ("d=8 ideal, twirl", perfect_protocol(8, 0.7, twirl=True)),
        (
            "d=2 unambiguous, twirl",
            imperfect_protocol(qubit_pointer_spec(0.7), strategy="unambiguous"),
        ),
    ]

    print(f"{args.samples} samples per case, best of {args.repeat}\n")
    header = f"{'case':26s}" + "".join(f"{b:>14s}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    for label, protocol in cases:
        comp, psi_gauss, twirl_gauss, u_out = _inputs(protocol, args.samples, args.seed)
        times = {}
        outputs = {}
        for backend in backends:
            best = np.inf
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                out = _run(backend, protocol, comp, psi_gauss, twirl_gauss, u_out)
                best = min(best, time.perf_counter() - t0)
            times[backend] = best
            outputs[backend] = out
        if len(backends) == 2:
            a, b = (outputs[k] for k in backends)
            assert np.array_equal(a[2], b[2]), "backends disagree on outcomes"
        row = f"{label:26s}"
        for backend in backends:
            row += f"{times[backend] / args.samples * 1e6:>11.2f} us"
        if len(backends) == 2:
            row += f"{times['numpy'] / times['cython']:>9.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
