"""Time the compiled and numpy sinusoid-bank kernels.

Usage::

    python benchmarks/bench_kernels.py [--n 1024] [--units 1024] [--repeat 20]

Reports the best-of-``repeat`` time of the bank forward pass, the bank
backward pass and one full loss/gradient evaluation for each available
backend, and the largest output difference between them.
"""

import argparse
import timeit

import numpy as np

from nmd import kernels
from nmd.fnn import init_model, loss_and_gradients
from nmd.signal import normalize, synthesize


def bench(name, n, units, repeat):
    k = kernels.get_backend(name)
    rng = np.random.default_rng(0)
    t = np.arange(n) / (n - 1)
    amp = rng.normal(size=(n, units))
    omega = 2 * np.pi * rng.uniform(1, n / 2, units)
    phi = rng.uniform(0, 2 * np.pi, units)
    g = rng.normal(size=n)
    s, c, y = np.empty((n, units)), np.empty((n, units)), np.empty(n)
    d_amp, d_omega, d_phi = np.empty((n, units)), np.empty(units), np.empty(units)

    def fwd():
        k.bank_forward(t, amp, omega, phi, s, c, y)

    def bwd():
        k.bank_backward(t, g, amp, s, c, d_amp, d_omega, d_phi)

    sig, _ = normalize(synthesize("xlambda", n, 0.1, seed=0))
    model = init_model(n, unit_cap=units, seed=0)

    def epoch():
        loss_and_gradients(model, sig, 1e-3, backend=name)

    fwd()
    times = {label: min(timeit.repeat(fn, number=1, repeat=repeat))
             for label, fn in (("forward", fwd), ("backward", bwd), ("loss+grad", epoch))}
    return times, y.copy(), d_omega.copy()


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--units", type=int, default=1024)
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args()

    results = {name: bench(name, args.n, args.units, args.repeat) for name in sorted(kernels.BACKENDS)}
    print(f"N={args.n}, units={args.units}, best of {args.repeat}")
    print(f"{'backend':<10}{'forward ms':>12}{'backward ms':>13}{'loss+grad ms':>14}")
    for name, (times, _, _) in results.items():
        print(f"{name:<10}{1e3 * times['forward']:>12.2f}{1e3 * times['backward']:>13.2f}"
              f"{1e3 * times['loss+grad']:>14.2f}")
    if len(results) == 2:
        (ta, ya, oa), (tb, yb, ob) = results["cython"], results["python"]
        print(f"speedup   {tb['forward'] / ta['forward']:>12.2f}x{tb['backward'] / ta['backward']:>12.2f}x"
              f"{tb['loss+grad'] / ta['loss+grad']:>13.2f}x")
        print(f"max |diff|: output {np.max(np.abs(ya - yb)):.1e}, d_omega "
              f"{np.max(np.abs(oa - ob)) / max(1.0, np.max(np.abs(ob))):.1e} (relative)")
    else:
        print("compiled extension not available; only the numpy backend was timed")


if __name__ == "__main__":
    main()
