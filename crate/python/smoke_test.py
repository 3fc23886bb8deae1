"""Smoke test of the Python bindings.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`,
or copy `target/release/libdischarge.so` next to this file as `discharge.so`
after `cargo build -p discharge-py --release --features extension-module`.
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import discharge  # noqa: E402


def main() -> None:
    spec = discharge.DischargeSpec(delta=0.125)
    assert spec.rate(0.5) == 0.0 and spec.rate(1.0) == 8.0, spec

    sol = discharge.solve(spec, n_cells=256, tau=4e-3)
    assert abs(sol.mass[-1] - 1.0) < 0.05, sol.mass[-1]
    assert sol.min_density >= 0.0
    assert len(sol.density) == len(sol.x)
    firing_integral = sum(
        0.5 * (t1 - t0) * (n0 + n1)
        for t0, t1, n0, n1 in zip(sol.times, sol.times[1:], sol.firing, sol.firing[1:])
    )

    paths = discharge.simulate("discharge", spec, 20_000, seed=1, start=None)
    mean_jumps = sum(p.jump_count_at(1.0) for p in paths) / len(paths)
    # Gaussian vs point start and a coarse grid: loose agreement only
    assert abs(mean_jumps - firing_integral) < 0.1, (mean_jumps, firing_integral)

    coupled = discharge.coupled_first_jumps(spec, 2_000, seed=2)
    assert all(s is None or (h is not None and h <= s) for h, s, _ in coupled)

    deltas = [0.5**k for k in range(8)]
    r, a, res = discharge.fit_power_law(deltas, [d**0.5 for d in deltas], 4, 8)
    assert abs(r - 0.5) < 1e-9 and abs(a - 1.0) < 1e-9, (r, a)

    try:
        discharge.normalize_config("t_max = -1")
    except ValueError as e:
        assert "t_max" in str(e)
    else:
        raise AssertionError("negative t_max accepted")

    rows = discharge.run_convergence("n_cells = 128\ntau = 0.004\nk_range = 0..3\nfit_k = 1..3\nb_values = 0")
    rate = dict(((q, b), r) for q, b, r, _, _ in rows)[("f", 0.0)]
    assert math.isfinite(rate) and rate > 0, rows
    print("python smoke test passed:", spec, f"R^f(coarse) = {rate:.3f}")


if __name__ == "__main__":
    main()
