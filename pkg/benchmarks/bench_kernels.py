"""Compare the compiled and numpy time-stepping kernels.

    python benchmarks/bench_kernels.py [--sizes 3 5 7] [--repeat 5]

Times a batch of Liouvillian mat-vecs and one adaptive propagation of the
squeeze model from |0,0,e> over gt/pi = 1, and checks the two backends agree.
"""

import argparse
import math
import timeit

import numpy as np

from trilind import kernels
from trilind.fock import HilbertSpace, basis_state
from trilind.lindblad import CollapseSet, build_liouvillian
from trilind.model import EffectiveParams, build_squeeze_hamiltonian

G = 40.0


def setup(n_max):
    space = HilbertSpace(n_max, n_max)
    h = build_squeeze_hamiltonian(EffectiveParams(g=G, omega_pump=0.2), space)
    l = build_liouvillian(h, CollapseSet.default(space, 1.0, 10.0, 1.0))
    y0 = basis_state(space, 0, 0, "e").density().matrix.reshape(-1, order="F")
    return l, y0


def bench(backend, l, y0, repeat):
    gen = l.prepared(backend)
    t_end = math.pi / G
    matvec = min(timeit.repeat(lambda: backend.matvec(gen, y0), number=200, repeat=repeat)) / 200
    prop = min(
        timeit.repeat(lambda: backend.dopri5_advance(gen, y0, 0.0, t_end, 1e-4, 1e-8, 1e-10, math.inf), number=1, repeat=repeat)
    )
    y, _, n_acc, n_rej = backend.dopri5_advance(gen, y0, 0.0, t_end, 1e-4, 1e-8, 1e-10, math.inf)
    return matvec, prop, y, n_acc + n_rej


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[3, 5, 7])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    names = kernels.available_backends()
    if "cython" not in names:
        print("compiled extension not built; only the numpy backend is available")
    print(f"{'n_max':>5} {'dim^2':>7} {'nnz':>8} {'backend':>8} {'matvec us':>10} {'propagate ms':>13} {'steps':>6} {'speedup':>8}")
    for n_max in args.sizes:
        l, y0 = setup(n_max)
        results = {name: bench(kernels.get_backend(name), l, y0, args.repeat) for name in names}
        base = results["python"][1]
        for name, (mv, prop, _, steps) in results.items():
            print(f"{n_max:>5} {y0.size:>7} {l.nnz:>8} {name:>8} {mv * 1e6:>10.1f} {prop * 1e3:>13.2f} {steps:>6} {base / prop:>7.2f}x")
        if len(results) == 2:
            diff = np.max(np.abs(results["cython"][2] - results["python"][2]))
            print(f"{'':>5} max |cython - python| = {diff:.2e}")


if __name__ == "__main__":
    main()
