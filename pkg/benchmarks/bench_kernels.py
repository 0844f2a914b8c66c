"""Compare the compiled and pure-Python kernel backends.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``. Reports the best
of N timings per case, for the raw kernels and for library calls that spend
most of their time in them.
"""

from __future__ import annotations

import argparse
import random
import timeit
from contextlib import contextmanager

from egosign import _pykernels, kernels
from egosign.datagen import gen_scene
from egosign.geometry import localize
from egosign.grammar import parse_description
from egosign.matching import best_scores
from egosign.textmetrics import Vocabulary, tokenize

try:
    from egosign import _ckernels
except ImportError:
    _ckernels = None

KERNELS = ("fit_line", "nearest_labels", "lcs_length", "ngram_matches")


@contextmanager
def backend(impl):
    saved = {name: getattr(kernels, name) for name in KERNELS}
    for name in KERNELS:
        setattr(kernels, name, getattr(impl, name))
    try:
        yield
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)


def cases():
    rng = random.Random(0)
    ys = [400.0, 600.0, 800.0, 1000.0]
    xs = [700.0 - 0.3 * y + rng.uniform(-1, 1) for y in ys]
    mids = [rng.uniform(0, 1920) for _ in range(8)]
    vocab = Vocabulary()
    gt = parse_description(
        "this road heading to [Beijing, Tianjin, Xi'an], restricted to [car, bus], allows driving [exit]."
    )
    pred = "this road heading to [Tianjin, Beijing], allows driving [exit], restricted to [bus]."
    a = vocab.encode(tokenize(pred))
    b = vocab.encode(tokenize("this road restricted to [bus, car], heading to [Xi'an, Beijing, Tianjin], allows driving [exit]."))
    scenes = [gen_scene(i)[0] for i in range(50)]

    def run_localize():
        for s in scenes:
            localize(s)

    return {
        "fit_line (4 points)": lambda impl: impl.fit_line(xs, ys),
        "nearest_labels (8 boxes)": lambda impl: impl.nearest_labels(mids, 500.0, 900.0, 1300.0),
        f"lcs_length ({len(a)}x{len(b)} tokens)": lambda impl: impl.lcs_length(a, b),
        "ngram_matches (n = 1..4)": lambda impl: [impl.ngram_matches(a, b, n) for n in (1, 2, 3, 4)],
        "best_scores (72 arrangements)": lambda impl: best_scores(pred, gt),
        "localize (50 scenes)": lambda impl: run_localize(),
    }


def measure(fn, impl, repeat):
    with backend(impl):
        timer = timeit.Timer(lambda: fn(impl))
        number, _ = timer.autorange()
        return min(timer.repeat(repeat, number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels are not built; only the pure-Python backend is available")
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'case':<32}{'python':>12}{'cython':>12}{'speedup':>10}")
    for name, fn in cases().items():
        py = measure(fn, _pykernels, args.repeat)
        if _ckernels is None:
            print(f"{name:<32}{py * 1e6:>10.1f}us{'-':>12}{'-':>10}")
            continue
        c = measure(fn, _ckernels, args.repeat)
        print(f"{name:<32}{py * 1e6:>10.1f}us{c * 1e6:>10.1f}us{py / c:>9.1f}x")


if __name__ == "__main__":
    main()
