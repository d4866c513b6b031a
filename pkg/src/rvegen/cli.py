"""Command-line front end: ``rvegen generate|validate|voxelize|bench``.

Exit codes: 0 success, 1 contacts found by ``validate``, 2 configuration
error, 3 stagnation, 4 non-convergence, 5 file or format error.
"""

from __future__ import annotations

import argparse
import collections
import os
import sys
import warnings
from pathlib import Path

EXIT_OK, EXIT_CONTACTS, EXIT_CONFIG, EXIT_STAGNATION, EXIT_NONCONVERGENCE, EXIT_IO = range(6)
THREADS_ENV = "RVEGEN_THREADS"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: config error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    # SUPPRESS keeps a subcommand from resetting a value given before it
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                   help=f"worker threads for jitted kernels (default: ${THREADS_ENV} or all)")
    p.add_argument("--deterministic", action="store_true", default=argparse.SUPPRESS,
                   help="fixed-order reductions; repeated runs give identical files")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="rvegen", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", parents=[common], help="generate a sample")
    g.add_argument("--method", choices=["rsa", "md"], default="rsa")
    g.add_argument("--fs", type=float, default=0.0, help="sphere volume fraction")
    g.add_argument("--fc", type=float, default=0.0, help="cylinder volume fraction")
    g.add_argument("--ns", type=int, default=0, help="number of spheres")
    g.add_argument("--nc", type=int, default=0, help="number of cylinders")
    g.add_argument("--aspect", type=float, default=3.0, help="cylinder half-length / radius")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--strategy", default="cylinders-first",
                   choices=["cylinders-first", "spheres-first", "interleaved"])
    g.add_argument("--time-budget", type=float, default=50.0, help="seconds")
    g.add_argument("--max-attempts", type=int, default=1_000_000,
                   help="RSA candidates per inclusion before giving up")
    g.add_argument("--out", required=True, help="sample JSON path")
    md = g.add_argument_group("relaxation (--method md)")
    md.add_argument("--dt", type=float, default=None)
    md.add_argument("--beta", type=float, default=None, help="viscous damping")
    md.add_argument("--alpha-ber", type=float, default=None)
    md.add_argument("--alpha-nh", type=float, default=None)
    md.add_argument("--e-stop", type=float, default=None)
    md.add_argument("--max-steps", type=int, default=None)
    md.add_argument("--no-rescale", action="store_true", help="keep the force scale at 1")
    md.add_argument("--integrator", choices=["velocity-verlet", "trapezoid"], default=None)
    md.add_argument("--trace", default=None,
                    help="energy trace CSV; a PNG plot is written next to it")

    v = sub.add_parser("validate", parents=[common], help="check a sample for contacts")
    v.add_argument("--in", dest="input", required=True)
    v.add_argument("--mc-points", type=int, default=0,
                   help="Monte-Carlo points per candidate pair for the overlap estimate")

    x = sub.add_parser("voxelize", parents=[common], help="render a sample to a RAW grid")
    x.add_argument("--in", dest="input", required=True)
    x.add_argument("--res", type=int, default=256)
    x.add_argument("--out", required=True, help="RAW path; header goes to <out>.json")

    b = sub.add_parser("bench", parents=[common], help="run a timing scenario")
    b.add_argument("--scenario", required=True)
    b.add_argument("--out", required=True, help="CSV path; a PNG figure is written next to it")
    return parser


def configure_threads(threads: int | None) -> int | None:
    """Applies ``threads`` (or ``$RVEGEN_THREADS``) to numba; returns the
    count set, or None when neither is given."""
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    if threads is None:
        return None
    if threads < 1:
        raise ValueError(f"--threads must be >= 1, got {threads}")
    import numba

    threads = min(threads, numba.config.NUMBA_NUM_THREADS)
    with warnings.catch_warnings():
        # numba probes optional threading layers and warns about unusable ones
        warnings.simplefilter("ignore", numba.NumbaWarning)
        numba.set_num_threads(threads)
    return threads


def _cmd_generate(args) -> int:
    from .md import Integrator, MdParams, init_overlapping, relax, write_trace
    from .rsa import RsaConfig, generate

    cfg = RsaConfig(
        f_s=args.fs, f_c=args.fc, n_s=args.ns, n_c=args.nc, aspect_ratio=args.aspect,
        strategy=args.strategy, seed=args.seed, time_budget=args.time_budget,
        max_attempts_per_object=args.max_attempts,
    )
    if args.method == "rsa":
        sample = generate(cfg)
    else:
        overrides = {
            "dt": args.dt, "beta": args.beta, "alpha_ber": args.alpha_ber,
            "alpha_nh": args.alpha_nh, "e_stop": args.e_stop, "max_steps": args.max_steps,
        }
        params = MdParams(**{k: v for k, v in overrides.items() if v is not None})
        if args.no_rescale:
            params.rescale = False
        if args.integrator:
            params.integrator = Integrator(args.integrator)
        state = init_overlapping(cfg)
        try:
            sample = relax(state, params, time_budget=args.time_budget)
        finally:
            if args.trace:
                _write_trace(state, args.trace, write_trace)
        print(f"relaxed in {state.step_count} steps")
    sample.write(args.out)
    print(f"wrote {len(sample.spheres)} spheres and {len(sample.cylinders)} cylinders "
          f"to {args.out}")
    return EXIT_OK


def _write_trace(state, path, write_trace) -> None:
    from .plots import plot_energy_trace

    write_trace(state, path)
    plot_energy_trace(state.energy_trace, Path(path).with_suffix(".png"))


def _cmd_validate(args) -> int:
    from .periodic import all_contacts
    from .sample import RveSample
    from .voxel import total_overlap_mc

    sample = RveSample.read(args.input)
    found = all_contacts(sample.shapes)
    print(f"contacts: {len(found)}")
    for kind, n in sorted(collections.Counter(c.kind.name for c in found).items()):
        print(f"  {kind}: {n}")
    if args.mc_points > 0:
        est, err = total_overlap_mc(sample, args.mc_points, seed=0)
        print(f"overlap volume (Monte-Carlo): {est:.6g} +- {err:.2g}")
    return EXIT_OK if not found else EXIT_CONTACTS


def _cmd_voxelize(args) -> int:
    from .sample import RveSample
    from .voxel import voxelize, write_fractions_csv, write_raw

    sample = RveSample.read(args.input)
    if args.res < 1:
        raise ValueError(f"--res must be >= 1, got {args.res}")
    grid = voxelize(sample, args.res)
    header = write_raw(grid, args.out)
    write_fractions_csv(grid, Path(args.out).with_suffix(".fractions.csv"))
    for name, f in grid.fractions().items():
        print(f"{name}: {f:.6f}")
    print(f"wrote {args.out} and {header}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    from .bench import BenchResult, run_scenario_file
    from .plots import plot_crossover, plot_time_grid

    def progress(item):
        print(item, flush=True)

    result = run_scenario_file(args.scenario, args.out, progress=progress)
    png = Path(args.out).with_suffix(".png")
    if isinstance(result, BenchResult):
        if result.cells:
            plot_time_grid(result, png)
    else:
        plot_crossover(result, png)
    print(f"wrote {args.out} and {png}")
    return EXIT_OK


COMMANDS = {
    "generate": _cmd_generate,
    "validate": _cmd_validate,
    "voxelize": _cmd_voxelize,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    from .errors import ConfigError, IntegrationError, NonConvergence, Stagnation
    from .sample import SampleFormatError

    args = build_parser().parse_args(argv)
    try:
        configure_threads(getattr(args, "threads", None))
        return COMMANDS[args.command](args)
    except Stagnation as e:
        print(f"stagnation: {e}", file=sys.stderr)
        return EXIT_STAGNATION
    except (NonConvergence, IntegrationError) as e:
        print(f"non-convergence: {e}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (SampleFormatError, OSError) as e:
        print(f"file error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
