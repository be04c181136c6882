"""Smoke test for the freqlens Python extension.

Build and install the extension first:

    pip install maturin
    maturin develop --release -m crates/python/Cargo.toml

then run `python python/smoke_test.py`.
"""

import math

import freqlens


def main():
    slow = freqlens.synth_target("sin:k=1", 201)
    fast = freqlens.synth_target("sin:k=5", 201)
    assert len(slow) == 201 and slow.input_dim == 1 and slow.output_dim == 1

    widths, slow_lfr = freqlens.lfr_sweep(slow)
    _, fast_lfr = freqlens.lfr_sweep(fast)
    assert len(widths) == 40
    assert all(0.0 <= v <= 1.0 + 1e-12 for v in slow_lfr)
    peaks = []
    for values in (slow_lfr, fast_lfr):
        mids, slopes = freqlens.rdf_from_lfr(widths, values)
        peaks.append(freqlens.rdf_peak(mids, slopes))
    assert peaks[0] < peaks[1], peaks

    constant = freqlens.Dataset([[0.0], [1.0], [2.0]], [[3.0], [3.0], [3.0]])
    assert abs(freqlens.lfr(constant, 0.5) - 1.0) < 1e-12

    n = 128
    samples = [math.sin(2 * math.pi * i / n) for i in range(n)]
    assert freqlens.exact_lfr(samples, 0.0, 1.0, math.pi) < 1e-20
    assert freqlens.compare_filter_vs_spectral(samples, 0.0, 1.0, 0.01) < 1e-3

    net = freqlens.Network([1, 16, 16, 1], activation="tanh", seed=3)
    before = net.loss(slow)
    history = net.train(slow, 200, lr=1e-2, batch_size=64)
    assert len(history) == 200 and net.epochs_trained == 200
    assert net.loss(slow) < before
    s1 = net.effective_target(slow, freqlens.layer_by_negative_index(-2, 3))
    assert s1.input_dim == 16 and len(s1) == 201
    assert len(net.forward([[0.0], [0.5]])) == 2

    assert freqlens.spearman([1, 2, 3], [3, 2, 1]) == -1.0

    try:
        freqlens.synth_target("square", 4)
    except ValueError as e:
        print("rejected unknown target:", e)
    else:
        raise AssertionError("unknown target accepted")

    print("peaks", peaks, "loss", before, "->", net.loss(slow))
    print("smoke test passed")


if __name__ == "__main__":
    main()
