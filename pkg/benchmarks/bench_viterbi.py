"""Compare the compiled and numpy Viterbi kernels.

    python3 benchmarks/bench_viterbi.py [--M 100] [--batch 10] [--repeat 20]

Both backends are timed on identical inputs and checked for identical output.
"""

import argparse
import importlib
import sys
import timeit

import numpy as np

from tcqfeedback import _backend, _kernels_py
from tcqfeedback.constellation import initial_scale, psk_points
from tcqfeedback.trellis import build_8psk_trellis, build_qpsk_trellis


def load_compiled():
    try:
        return importlib.import_module("tcqfeedback._kernels")
    except ImportError:
        return None


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--M", type=int, default=100)
    p.add_argument("--batch", type=int, default=10)
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args(argv)

    compiled = load_compiled()
    impls = {"python": _kernels_py}
    if compiled is None:
        print("compiled kernels not built; timing the numpy backend only", file=sys.stderr)
    else:
        impls["cython"] = compiled

    rng = np.random.default_rng(0)
    print(f"{'trellis':8} {'backend':8} {'ms/call':>10} {'vectors/s':>12}")
    for trellis in (build_qpsk_trellis(), build_8psk_trellis()):
        h = rng.standard_normal((args.batch, args.M)) + 1j * rng.standard_normal((args.batch, args.M))
        h /= np.linalg.norm(h, axis=1, keepdims=True)
        pts = np.broadcast_to(initial_scale(args.M) * psk_points(trellis.alphabet_size),
                              (args.M, trellis.alphabet_size))
        call_args = (h, pts, trellis.next_state, trellis.out_symbol, trellis.incoming)
        results = {}
        for name, impl in impls.items():
            results[name] = _backend.viterbi(*call_args, impl=impl)
            t = min(timeit.repeat(lambda: _backend.viterbi(*call_args, impl=impl),
                                  number=1, repeat=args.repeat))
            print(f"{trellis.name:8} {name:8} {1e3 * t:10.3f} {args.batch / t:12.0f}")
        if len(results) == 2:
            same = all(np.array_equal(a, b) for a, b in zip(*results.values()))
            print(f"{trellis.name:8} outputs identical: {same}")


if __name__ == "__main__":
    main()
