"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N] [--size S]

Each kernel runs on identical inputs under every available backend; the
table lists the best wall time, the speed-up over the numpy version and the
largest absolute difference between the two outputs.
"""
import argparse
import timeit

import numpy as np

from qdcoupling import capnet, geometry, kernels


def cases(size):
    rng = np.random.default_rng(0)
    el = rng.uniform(-500, 500, (size, size))
    er = rng.uniform(-500, 500, (size, size))
    pol = ("polarization", lambda b: kernels.polarization_grid(el, er, 24.0, 29.0, 86.0, 13.36, backend=b))

    net = capnet.CapacitanceNetwork((45.0,) * 4, (9.0, 2.25, 9.0), c_gate=(5.0,) * 4)
    k = capnet.inverse_matrix(net)
    v = rng.uniform(0, 110, (size * size // 4, 4))
    lin = capnet.gate_linear_terms(net, capnet.gate_lever_arms(net), v)
    occ = ("occupation n_max=4", lambda b: kernels.occupation_grid(k, capnet.E0, lin, 4, 13.36, backend=b))

    x1, y1, r1 = geometry.disc_panels(40.0, geometry.ring_count_for(600), -65.0)
    x2, y2, r2 = geometry.disc_panels(40.0, geometry.ring_count_for(600), 65.0)
    x, y, r = np.r_[x1, x2], np.r_[y1, y2], np.r_[r1, r2]
    bem = ("BEM matrix 2x600", lambda b: kernels.bem_potential(x, y, r, 35.0, True, backend=b))
    return [pol, occ, bem]


def max_diff(a, b):
    if isinstance(a, tuple):
        return max(max_diff(p, q) for p, q in zip(a, b))
    return float(np.max(np.abs(np.asarray(a, float) - np.asarray(b, float))))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=200, help="side of the square detuning grid")
    args = ap.parse_args()
    backends = kernels.available_backends()
    print(f"selected at import: {kernels.BACKEND}; available: {', '.join(backends)}")
    print(f"{'kernel':<22}{'backend':<10}{'best [ms]':>12}{'speed-up':>10}{'max |diff|':>13}")
    for name, run in cases(args.size):
        ref = run("python")
        base = None
        for b in backends:
            t = min(timeit.repeat(lambda: run(b), number=1, repeat=args.repeat))
            base = t if b == "python" else base
            diff = max_diff(run(b), ref)
            print(f"{name:<22}{b:<10}{t * 1e3:>12.2f}{base / t:>10.1f}{diff:>13.2e}")


if __name__ == "__main__":
    main()
