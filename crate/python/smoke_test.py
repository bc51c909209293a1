#!/usr/bin/env python3
"""Smoke test for the ampsamp_py extension module.

Builds the module if needed (cargo build -p ampsamp-python --features
extension-module), imports it straight from the cargo target directory, and
exercises the main types and operations end to end. Exits nonzero on the
first failure.
"""

import json
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def locate_or_build_module() -> Path:
    candidates = [
        REPO / "target" / profile / "libampsamp_py.so"
        for profile in ("debug", "release")
    ]
    for c in candidates:
        if c.exists():
            return c
    print("module not built yet; running cargo build ...")
    subprocess.run(
        ["cargo", "build", "-p", "ampsamp-python", "--features", "extension-module"],
        cwd=REPO,
        check=True,
    )
    for c in candidates:
        if c.exists():
            return c
    raise FileNotFoundError("libampsamp_py.so not found after build")


def import_module(so_path: Path):
    stage = Path(tempfile.mkdtemp(prefix="ampsamp_py_"))
    shutil.copy2(so_path, stage / "ampsamp_py.so")
    sys.path.insert(0, str(stage))
    import ampsamp_py  # noqa: E402

    return ampsamp_py


PASSED = 0


def check(name: str, condition: bool, detail: str = "") -> None:
    global PASSED
    tail = f" ({detail})" if detail else ""
    if condition:
        PASSED += 1
        print(f"ok: {name}{tail}")
    else:
        print(f"FAIL: {name}{tail}")
        sys.exit(1)


def main() -> None:
    m = import_module(locate_or_build_module())

    sigma = 2.0 * math.pi * 8.0  # 8 harmonics over a 1 s period
    f = m.Signal.synth_noise(seed=42, sigma=sigma, period=1.0, amp=1.0)
    check(
        "synthesis respects its certificates",
        abs(f.period() - 1.0) < 1e-15 and f.sigma() <= sigma + 1e-9 and f.harmonics() == 8,
        repr(f),
    )

    f2 = m.Signal.synth_noise(seed=42, sigma=sigma, period=1.0, amp=1.0)
    check(
        "synthesis is deterministic in the seed",
        f.samples(64) == f2.samples(64),
    )

    g = m.Signal.from_json(f.to_json())
    check(
        "signal JSON round trip is exact",
        all(a == b for a, b in zip(f.samples(128), g.samples(128))),
    )

    alpha = 3.0 * f.amp_bound() * f.sigma()
    delta = alpha / 24.0  # 24 crossings per 1 s period
    seq = m.encode(f, alpha, delta)
    check("encoder emits one period of crossings", len(seq) == 24, repr(seq))

    worst_level = max(
        abs(alpha * t + f.eval(t) - n * delta) for n, t in enumerate(seq.times())
    )
    check(
        "crossing times solve g(t_n) = n*delta",
        worst_level < 1e-10 * alpha,
        f"worst residual {worst_level:.3e}",
    )

    b = f.deriv_bound()
    lo, hi = delta / (alpha + b) - 1e-11, delta / (alpha - b) + 1e-11
    check(
        "crossing gaps satisfy the spacing bounds",
        all(lo <= gap <= hi for gap in seq.gaps()),
        f"gaps in [{min(seq.gaps()):.5f}, {max(seq.gaps()):.5f}]",
    )
    check("density sufficient condition holds", seq.check_density(f.sigma()))

    h = m.forward_transform(f, alpha)
    recovered = m.recover(h, n_points=512, tol=1e-13)
    sup_err = max(
        abs(v - f.eval(j / 512.0)) for j, v in enumerate(recovered)
    )
    check(
        "ramp transform round trip",
        sup_err < 1e-9,
        f"sup |recovered - f| = {sup_err:.3e}",
    )

    h_json = m.AmplitudeTime.from_json(h.to_json())
    check(
        "amplitude-time JSON round trip is exact",
        h_json.values() == h.values() and h_json.slope() == h.slope(),
    )

    const = m.Signal.constant(1.0, 1.0)
    h_const = m.forward_transform(const, 40.0, n_grid=256)
    check(
        "constant signal maps to h = -A/alpha exactly",
        max(abs(v + 1.0 / 40.0) for v in h_const.values()) < 1e-15,
    )

    bia = m.reconstruct(seq, f, method="bia", rec_len=1024)
    iasr = m.reconstruct(seq, f, method="iasr", iterations=5, rec_len=1024)
    vor = m.reconstruct(seq, f, method="voronoi", iterations=5, rec_len=1024)
    check(
        "IASR iteration 1 equals BIA",
        iasr.ser_per_iteration()[0] == bia.ser_per_iteration()[0],
        f"{bia.ser_per_iteration()[0]:.2f} dB",
    )
    check(
        "IASR improves over its first iteration",
        iasr.ser_per_iteration()[-1] > iasr.ser_per_iteration()[0] + 10.0,
        f"{iasr.ser_per_iteration()[0]:.2f} -> {iasr.ser_per_iteration()[-1]:.2f} dB",
    )
    check(
        "IASR beats Voronoi at iteration 1",
        iasr.ser_per_iteration()[0] > vor.ser_per_iteration()[0],
        f"{iasr.ser_per_iteration()[0]:.2f} vs {vor.ser_per_iteration()[0]:.2f} dB",
    )
    check("reports carry ok status", iasr.status() == "ok" and vor.status() == "ok")

    ser_self = m.ser(f.samples(256), f.samples(256))
    check("SER of an exact estimate saturates", math.isinf(ser_self))

    norm_h = m.lp_norm(h.values(), h.grid()[1], 1.0)
    t_step = f.period() / 4096
    norm_f = m.lp_norm(f.samples(4096), t_step, 1.0)
    check(
        "L1 isometry between h and f",
        abs(norm_h - norm_f) / norm_f < 1e-3,
        f"{norm_h:.6f} vs {norm_f:.6f}",
    )

    fit = m.fit_decay(h, f.amp_bound(), f.sigma())
    check(
        "spectral tail decays exponentially",
        fit["fitted_b"] > 0.0 and fit["a"] > 0.0,
        f"a={fit['a']:.4f}, fitted_b={fit['fitted_b']:.4f}",
    )
    check(
        "h is non-bandlimited for a non-constant signal",
        m.check_nonbandlimited(h, f.sigma() / alpha),
    )
    check(
        "h is bandlimited for a constant signal",
        not m.check_nonbandlimited(h_const, 1.0),
    )

    cfg = {
        "name": "py-smoke",
        "experiment_kind": "sweep_delta",
        "seeds": [1, 2],
        "signal": {"sigma_rad_s": sigma, "period_s": 1.0, "amp": 1.0},
        "encoder": {"alpha_per_s": alpha, "crossings_per_period": [20, 32]},
        "iterations": 2,
        "grids": {"reconstruction_len": 256},
    }
    r1 = m.run_experiment(json.dumps(cfg), workers=2)
    r2 = m.run_experiment(json.dumps(cfg), workers=1)
    check(
        "experiment reruns are byte-identical",
        r1["results_csv"] == r2["results_csv"]
        and r1["summary_csv"] == r2["summary_csv"]
        and r1["bundle_json"] == r2["bundle_json"],
    )
    bundle = json.loads(r1["bundle_json"])
    check(
        "experiment bundle embeds the config and all traces",
        bundle["config"]["name"] == "py-smoke" and len(bundle["runs"]) == 2 * 2 * 3,
        f"{len(bundle['runs'])} runs",
    )
    check(
        "results CSV has the documented header",
        r1["results_csv"].startswith(
            "experiment,seed,alpha,delta,sigma,decoder,iteration,ser_db,wall_time_s"
        ),
    )

    try:
        m.encode(f, 0.5 * f.amp_bound() * f.sigma(), delta)
        check("shallow slopes are rejected", False)
    except ValueError as e:
        check("shallow slopes are rejected", True, str(e)[:60])

    print(f"\nsmoke test passed: {PASSED} checks")


if __name__ == "__main__":
    main()
