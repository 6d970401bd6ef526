#!/usr/bin/env python3
"""Smoke test for the spincorr_py extension module.

Builds nothing itself: run `cargo build --release -p spincorr-py` first.
The script copies the cdylib next to itself under an importable name,
imports it, and checks a handful of known values end to end.
"""

import math
import pathlib
import shutil
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        ROOT / "target" / "release" / "libspincorr_py.so",
        ROOT / "target" / "debug" / "libspincorr_py.so",
        ROOT / "target" / "release" / "libspincorr_py.dylib",
    ]
    src = next((p for p in candidates if p.exists()), None)
    if src is None:
        sys.exit(
            "libspincorr_py not found; run `cargo build --release -p spincorr-py` first"
        )
    build_dir = ROOT / "python" / "_build"
    build_dir.mkdir(exist_ok=True)
    dst = build_dir / ("spincorr_py" + (".so" if src.suffix == ".so" else ".so"))
    shutil.copyfile(src, dst)
    sys.path.insert(0, str(build_dir))
    import spincorr_py

    return spincorr_py


checks = 0


def check(name, ok, detail=""):
    global checks
    checks += 1
    status = "PASS" if ok else "FAIL"
    print(f"{status}  {name}  {detail}")
    if not ok:
        sys.exit(1)


def main():
    sp = load_module()

    # spin-1/2 rotation matrix is the classic 2x2 half-angle form
    theta = 0.83
    d = sp.little_d(0.5, theta)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    err = max(
        abs(d[0][0] - c), abs(d[0][1] + s), abs(d[1][0] - s), abs(d[1][1] - c)
    )
    check("little_d(1/2)", err < 1e-14, f"max err {err:.2e}")

    # recursion agrees with the direct formula
    a = sp.little_d(9.0, 1.3)
    b = sp.little_d_direct(9.0, 1.3)
    diff = max(abs(x - y) for ra, rb in zip(a, b) for x, y in zip(ra, rb))
    check("little_d vs direct (j=9)", diff < 1e-10, f"max diff {diff:.2e}")

    # invalid spin is rejected
    try:
        sp.little_d(0.3, 1.0)
        check("domain error for j=0.3", False)
    except ValueError:
        check("domain error for j=0.3", True)

    # coherent-state identities through the simulator class
    sim = sp.KickedSpinSim(10, 11, 5.0, 2.835)
    sim.prepare(0.0, 0.0, 1.1, 0.4)
    _, l_vec, _ = sim.expectations()
    check(
        "coherent <L_z> = l cos(theta)",
        abs(l_vec[2] - 11 * math.cos(1.1)) < 1e-9,
        f"<L_z> = {l_vec[2]:.6f}",
    )
    check(
        "coherent variance = 1/(l+1)",
        abs(sim.variance_l() - 1 / 12) < 1e-10,
    )

    # unitarity and distribution normalization after kicks
    sim.kick(30)
    check("norm after 30 kicks", abs(sim.norm() - 1) < 1e-11)
    check("dist_lz sums to 1", abs(sum(sim.dist_lz()) - 1) < 1e-11)
    check("dist_jz sums to 1", abs(sum(sim.dist_jz()) - 1) < 1e-11)

    # microcanonical entropy at the production quantum numbers
    h = sp.microcanonical_entropy_jz(140, 154)
    check("H_mc[J_z](140,154) ~ 6.2", abs(h - 6.2) < 0.05, f"H = {h:.4f}")

    # entropy relaxes towards the microcanonical ceiling
    check("H[J_z] after mixing < ceiling", sim.entropy_jz() < h)

    # classical map: parallel pole is a fixed point
    s3, l3 = sp.map_step([0.0, 0.0, 1.0], [0.0, 0.0, 1.0], 5.0, 2.835, 1.1)
    check(
        "polar fixed point",
        max(abs(s3[0]), abs(s3[1]), abs(s3[2] - 1), abs(l3[2] - 1)) < 1e-14,
    )

    # Lyapunov exponent of the globally chaotic regime
    lam = sp.lyapunov(
        5.0,
        2.835,
        1.1,
        [math.radians(20), math.radians(40), math.radians(160), math.radians(130)],
        10_000,
    )
    check("lambda(2.835) ~ 0.45", abs(lam - 0.45) < 0.05, f"lambda = {lam:.4f}")

    # parallel fixed points: stable below the threshold, unstable above
    stable = max(sp.fixed_point_eig_moduli(5.0, 1.0, 1.1, "parallel"))
    unstable = max(sp.fixed_point_eig_moduli(5.0, 1.5, 1.1, "parallel"))
    check(
        "stability window edge",
        stable <= 1 + 1e-9 and unstable > 1 + 1e-6,
        f"max|xi| = {stable:.6f} then {unstable:.4f}",
    )

    # matched sampling is deterministic in (seed, index)
    p1 = sp.sample_matched_point(22, 0.5, 1.0, 42, 7)
    p2 = sp.sample_matched_point(22, 0.5, 1.0, 42, 7)
    check("sampler determinism", p1 == p2)

    # classical ensemble mean tracks the quantum expectation
    sim2 = sp.KickedSpinSim(20, 22, 5.0, 2.835)
    angles = [
        math.radians(45),
        math.radians(70),
        math.radians(135),
        math.radians(70),
    ]
    sim2.prepare(*angles)
    qs = []
    for _ in range(6):
        _, l_vec, _ = sim2.expectations()
        qs.append(l_vec[2] / math.sqrt(22 * 23))
        sim2.kick(1)
    cs = sp.ensemble_mean_lz_series(20, 22, 5.0, 2.835, angles, 5, 200_000, 3)
    worst = max(abs(q - c) for q, c in zip(qs, cs))
    # genuine quantum-classical differences reach ~1 in absolute units at
    # this size, i.e. ~1/|L| ~ 0.045 normalized; 0.06 leaves MC headroom
    check(
        "quantum vs classical <L~_z> over 5 kicks",
        worst < 0.06,
        f"max |q - c| = {worst:.4f}",
    )

    print(f"all {checks} smoke checks passed")


if __name__ == "__main__":
    main()
