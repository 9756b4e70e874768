"""Compiled kernels vs the numpy fallback.

Times each hot kernel in isolation, then the whole pipeline per phase,
on synthetic 640x512 frames. Outputs are checked for bit-identity first.

    python benchmarks/compare_backends.py [--frames 20] [--repeats 3]
"""
import argparse
import timeit

import numpy as np

from thermofield import FieldscaleParams, _backend, bench
from thermofield.synthetic import thermal_scene


def kernel_cases(frame):
    k = _backend.get("python")
    gmin, gmax = k.pool_minmax(frame, 8, 8)
    lo, hi = k.field_pair(gmin, gmax, *frame.shape)
    img = k.rescale(frame, lo, hi)
    return {
        "pool_minmax": lambda m: m.pool_minmax(frame, 8, 8),
        "les": lambda m: m.les(gmax, 100.0, 2),
        "mp x7": lambda m: m.mp(gmax, 7, True),
        "field_pair": lambda m: m.field_pair(gmin, gmax, *frame.shape),
        "rescale": lambda m: m.rescale(frame, lo, hi),
        "clahe": lambda m: m.clahe(img, 2.0, 8, 8),
    }


def same(a, b):
    if isinstance(a, tuple):
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--frames", type=int, default=20)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    names = _backend.available()
    if "compiled" not in names:
        print("compiled extension not built; only the numpy fallback is available")
    rng = np.random.default_rng(0)
    frames = [thermal_scene(rng) for _ in range(args.frames)]

    print(f"{'kernel':<12}" + "".join(f"{n:>12}" for n in names) + "   identical")
    for label, fn in kernel_cases(frames[0]).items():
        outs, cells = [], []
        for n in names:
            mod = _backend.get(n)
            outs.append(fn(mod))
            best = min(timeit.repeat(lambda: fn(mod), number=10, repeat=5)) / 10
            cells.append(f"{best * 1e3:10.3f}ms")
        ident = all(same(outs[0], o) for o in outs[1:])
        print(f"{label:<12}" + "".join(f"{c:>12}" for c in cells) + f"   {ident}")

    print()
    for p in (FieldscaleParams(), FieldscaleParams.fast()):
        for n in names:
            rec = bench.bench_pipeline(frames, p, repeats=args.repeats, warmup=3, backend=n)
            print(f"{rec.setting.value:<8} {n:<9} fields {rec.field_construction.mean_ms:7.3f} ms   "
                  f"rescale {rec.rescaling.mean_ms:7.3f} ms   total {rec.total.mean_ms:7.3f}"
                  f" ± {rec.total.std_ms:.3f} ms")


if __name__ == "__main__":
    main()
