"""Pre-build oracle for the experiment acceptance thresholds.

Straight-line script, independent of the C++ library: draws grid paths of
each benchmark process with numpy, reads the level-n interpolant at the probe
times, and estimates the Prokhorov distance between that probe law (2000
draws) and a fresh reference sample of the true process at the same times
(10^4 draws), using scipy maximum_flow on a quantized transport graph.

The printed values were frozen (times a 1.5 safety factor plus 0.01) into
tests/acceptance.cpp before the experiment harness acceptance was written.
Run: python3 tests/oracles/probe_threshold_oracle.py
"""

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

rng = np.random.default_rng(20260818)
UNITS = 1 << 24
OFF = 2.0 ** -20

for name in ("brownian_c01_level8", "poisson_d01_level8", "compound_dinf_level6"):
    # --- candidate: 2000 draws of the level-n interpolant at the probe times
    # --- reference: 10^4 exact draws of the process at the probe times
    if name == "brownian_c01_level8":
        level = 8
        probes = np.array([0.3, 0.7])
        d = 1 << level
        inc = rng.normal(0.0, np.sqrt(1.0 / d), size=(2000, d))
        path = np.concatenate([np.zeros((2000, 1)), np.cumsum(inc, axis=1)], axis=1)
        td = probes * d
        k = np.floor(td).astype(int)
        b = td - k
        cand = path[:, k] * (1.0 - b) + path[:, k + 1] * b
        x1 = rng.normal(0.0, np.sqrt(probes[0]), size=10000)
        x2 = x1 + rng.normal(0.0, np.sqrt(probes[1] - probes[0]), size=10000)
        ref = np.stack([x1, x2], axis=1)
    elif name == "poisson_d01_level8":
        level = 8
        probes = np.array([0.3 + OFF, 0.7 + OFF])
        d = 1 << level
        inc = rng.poisson(2.0 / d, size=(2000, d))
        path = np.concatenate(
            [np.zeros((2000, 1), dtype=np.int64), np.cumsum(inc, axis=1)], axis=1)
        k = np.floor(probes * d).astype(int)
        cand = path[:, k].astype(float)
        n1 = rng.poisson(2.0 * probes[0], size=10000)
        n2 = n1 + rng.poisson(2.0 * (probes[1] - probes[0]), size=10000)
        ref = np.stack([n1, n2], axis=1).astype(float)
    else:
        level = 6
        probes = np.array([0.3 + OFF, 0.7 + OFF])
        d = 1 << level
        cells = level * d
        counts = rng.poisson(2.0 / d, size=(2000, cells))
        inc = rng.normal(0.0, 1.0, size=(2000, cells)) * np.sqrt(counts)
        path = np.concatenate([np.zeros((2000, 1)), np.cumsum(inc, axis=1)], axis=1)
        k = np.floor(probes * d).astype(int)
        cand = path[:, k]
        k1 = rng.poisson(2.0 * probes[0], size=10000)
        v1 = rng.normal(0.0, 1.0, size=10000) * np.sqrt(k1)
        k2 = rng.poisson(2.0 * (probes[1] - probes[0]), size=10000)
        v2 = v1 + rng.normal(0.0, 1.0, size=10000) * np.sqrt(k2)
        ref = np.stack([v1, v2], axis=1)

    # --- dedupe rows and quantize masses to integer units (largest remainder)
    cand_atoms, cand_counts = np.unique(cand, axis=0, return_counts=True)
    ref_atoms, ref_counts = np.unique(ref, axis=0, return_counts=True)
    cand_units = cand_counts * UNITS // len(cand)
    rem = cand_counts * UNITS % len(cand)
    order = np.lexsort((np.arange(len(rem)), -rem))
    cand_units[order[: UNITS - cand_units.sum()]] += 1
    ref_units = ref_counts * UNITS // len(ref)
    rem = ref_counts * UNITS % len(ref)
    order = np.lexsort((np.arange(len(rem)), -rem))
    ref_units[order[: UNITS - ref_units.sum()]] += 1

    dist = np.max(
        np.abs(cand_atoms[:, None, :].astype(np.float32) -
               ref_atoms[None, :, :].astype(np.float32)),
        axis=2)
    na, nb = len(cand_atoms), len(ref_atoms)
    src, snk = 0, na + nb + 1

    # --- feasibility bisection: rho = least eps moving >= 1 - eps within eps
    hi = 1.0 / 64.0
    lo = 0.0
    for _ in range(200):
        ii, jj = np.nonzero(dist <= hi)
        rows = np.concatenate(
            [np.zeros(na, dtype=np.int64), 1 + ii, 1 + na + np.arange(nb)])
        cols = np.concatenate([1 + np.arange(na), 1 + na + jj, np.full(nb, snk)])
        caps = np.concatenate([cand_units, np.full(len(ii), UNITS, dtype=np.int64),
                               ref_units]).astype(np.int32)
        # scipy wants one entry per (row, col); pair edges are unique, and the
        # source/sink edges never collide with them.
        g = csr_matrix((caps, (rows, cols)), shape=(snk + 1, snk + 1))
        flow = maximum_flow(g, src, snk).flow_value
        need = UNITS - int(np.floor(hi * UNITS))
        if flow >= need:
            break
        lo, hi = hi, min(1.0, hi * 2.0)
        if lo == 1.0:
            break
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        ii, jj = np.nonzero(dist <= mid)
        rows = np.concatenate(
            [np.zeros(na, dtype=np.int64), 1 + ii, 1 + na + np.arange(nb)])
        cols = np.concatenate([1 + np.arange(na), 1 + na + jj, np.full(nb, snk)])
        caps = np.concatenate([cand_units, np.full(len(ii), UNITS, dtype=np.int64),
                               ref_units]).astype(np.int32)
        g = csr_matrix((caps, (rows, cols)), shape=(snk + 1, snk + 1))
        flow = maximum_flow(g, src, snk).flow_value
        need = UNITS - int(np.floor(mid * UNITS))
        if flow >= need:
            hi = mid
        else:
            lo = mid
    print(f"{name}: rho_hat = {hi:.6f}")
