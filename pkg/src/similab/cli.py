"""Command-line entry point.

Subcommands: evolve, spectrum, stability, norms, selftest.  Common
flags --config/--out/--dim/--seed; config files are flat 'key = value'
lines (see driver.ExperimentConfig for the keys).  Exit codes: 0
success, 2 configuration error, 3 divergence, 4 extraction failure,
5 solver error.
"""

import argparse
import sys

from . import driver
from .errors import SimilabError


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="similab",
        description="similarity-variable blowup laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_txt in (
        ("evolve", "single evolution at the nominal blowup time"),
        ("spectrum", "eigenvalue scan of the mode-stability problem"),
        ("stability", "full stability experiment with T-extraction"),
        ("norms", "transform fidelity and inequality harnesses"),
        ("selftest", "fast internal cross-checks"),
    ):
        p = sub.add_parser(name, help=help_txt)
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--dim", type=int, help="spatial dimension d (>= 3)")
        p.add_argument("--seed", type=int, help="RNG seed for random families")
    return parser


def _load_config(args):
    overrides = {}
    if args.dim is not None:
        overrides["dim"] = args.dim
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.config:
        return driver.parse_config(args.config, overrides)
    from dataclasses import replace

    return replace(driver.ExperimentConfig(), **overrides)


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        if args.command == "evolve":
            traj = driver.run_evolve(cfg)
            print(f"evolved to tau={traj.taus[-1]:.3f}; "
                  f"{len(traj)} snapshots -> {cfg.out_dir}/trajectory.csv")
        elif args.command == "spectrum":
            roots = driver.run_spectrum(cfg)
            for r in roots:
                print(f"n={cfg.n}: lambda = {r.lam.real:.9f} + {r.lam.imag:.2e}i"
                      f"  |mismatch| = {r.mismatch_abs:.2e}")
            print(f"wrote {cfg.out_dir}/spectrum.csv (strip is empirically "
                  "eigenvalue-free; essential spectrum not certified)")
        elif args.command == "stability":
            rep = driver.run_stability(cfg)
            print(f"extracted T = {rep.extracted_T:.8f}")
            print(f"omega_fit = {rep.omega_fit:.4f} "
                  f"(rms {rep.fit_residual:.2e}, 95% band {rep.fit_band95:.2e})")
            print(f"origin value -> {rep.origin_value_final:.6f} "
                  f"(target {rep.origin_target:.6f})")
            print(f"wrote {rep.trajectory_file}, {rep.snapshot_file}")
        elif args.command == "norms":
            rows = driver.run_norms(cfg)
            for key, val in rows.items():
                print(f"{key} = {val}")
        elif args.command == "selftest":
            driver.selftest(verbose=True)
    except SimilabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return getattr(exc, "exit_code", 5)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
