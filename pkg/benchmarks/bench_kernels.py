"""Compare the numba and numpy kernels of the discrete Pucci operator.

Usage: python3 benchmarks/bench_kernels.py [--h 0.0078125] [--repeat 5]
"""

import argparse
import time

import numpy as np

from pucci_lab import kernels
from pucci_lab.geometry import DomainSpec, rasterize
from pucci_lab.pucci import EllipticityPair
from pucci_lab.solver import boundary_values


def _best_of(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, default=1.0 / 128)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sweeps", type=int, default=50)
    args = ap.parse_args(argv)

    mask = rasterize(DomainSpec.half_ball(), args.h)
    ell = EllipticityPair(1.0, 2.0)
    bval = boundary_values(mask, lambda x1, x2, p: np.where(p == 3, 1.0, 0.0))
    rng = np.random.default_rng(0)
    u = rng.random(mask.n_interior)
    f = np.zeros(mask.n_interior)
    frames = mask.stencil.frames
    tau = 0.9 / kernels.diag_bound(mask.t, frames, ell.Lam)
    print(f"h = {args.h:g}, {mask.n_interior} interior nodes, "
          f"{mask.stencil.n_directions} directions, numba available: {kernels.HAVE_NUMBA}")

    cases = {
        "operator_values": (
            lambda: kernels.operator_values_np(u, mask.nbr, bval, mask.t, frames, ell.lam, ell.Lam, 1),
            lambda: kernels.operator_values(u, mask.nbr, bval, mask.t, frames, ell.lam, ell.Lam, 1),
        ),
        f"jacobi x{args.sweeps}": (
            lambda: kernels.jacobi_sweeps_np(u, f, tau, mask.nbr, bval, mask.t, frames,
                                             ell.lam, ell.Lam, 1, args.sweeps),
            lambda: kernels.jacobi_sweeps(u, f, tau, mask.nbr, bval, mask.t, frames,
                                          ell.lam, ell.Lam, 1, args.sweeps),
        ),
    }
    print(f"{'kernel':<18}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}{'max |diff|':>14}")
    for name, (np_fn, nb_fn) in cases.items():
        nb_fn()  # compile / load cache
        t_np, r_np = _best_of(np_fn, args.repeat)
        t_nb, r_nb = _best_of(nb_fn, args.repeat)
        diff = float(np.max(np.abs(r_np[0] - r_nb[0])))
        print(f"{name:<18}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.1f}{diff:>14.3g}")


if __name__ == "__main__":
    main()
