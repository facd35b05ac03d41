"""qscatter command line.

Exit codes: 0 success, 1 computation/physics error, 2 argument or config
error, 3 output I/O error.
"""
import argparse
import math
import os
import sys
import time
from pathlib import Path

from . import __version__
from .errors import ComputationError, InputError, QScatterError
from .experiments import (
    DK_E_EXC,
    COUPLING_E_EXC,
    SweepSpec,
    VerifyGrid,
    locate_features,
    run_sweep,
    run_verify,
)
from .scattering import (
    ChannelAmplitudes,
    ScattererParams,
    amplitudes,
    excited_momentum,
    find_pole,
    total_reflection_momentum,
)
from .serialize import (
    atomic_write,
    envelope,
    fmt,
    fmt_complex,
    load_config,
    parse_complex,
    read_csv_table,
    sweep_payload,
    sweep_to_csv,
    to_json,
)
from .twobody import TwoParticleInput, concurrence_report

CONFIG_ENV = "QSCATTER_CONFIG"
EXIT_OK, EXIT_COMPUTE, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
# namespace entries that are not run parameters
_META = {"config", "handler", "command", "output", "figure"}
_BOOL_KEYS = {"inject_fault"}


class OutputError(Exception):
    pass


def _finite(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return x


def _float_list(text):
    if isinstance(text, (list, tuple)):
        return list(text)
    items = [s for s in str(text).replace(" ", "").strip("[]").split(",") if s]
    if not items:
        raise argparse.ArgumentTypeError("empty list")
    return [_finite(s) for s in items]


def _complex_list(text):
    try:
        return [parse_complex(s) for s in str(text).split(",") if s.strip()]
    except InputError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _bool(text):
    if isinstance(text, bool):
        return text
    return str(text).strip().lower() in ("1", "true", "yes", "on")


def _positive_int(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return n


# --- parser -------------------------------------------------------------------

def _base_parent():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help=f"key = value config file (default: ${CONFIG_ENV})")
    p.add_argument("-o", "--output", help="output file (default: standard output)")
    return p


def _physics_parent(list_e=False):
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--u0", type=_finite, default=1.0, help="delta strength (momentum units)")
    p.add_argument("--g", type=_finite, default=0.0, help="inelastic coupling ratio u1/u0")
    if list_e:
        p.add_argument("--e-exc", type=_float_list, default=None,
                       help="comma-separated excitation energies, one curve each")
    else:
        p.add_argument("--e-exc", type=_finite, default=0.0,
                       help="excitation energy in units of 4 E_bind = u0^2")
    return p


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qscatter",
        description="Inelastic delta scattering amplitudes and two-fermion concurrence.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    base = _base_parent()
    phys = _physics_parent()
    phys_list = _physics_parent(list_e=True)
    scalar_fmt = argparse.ArgumentParser(add_help=False)
    scalar_fmt.add_argument("--format", choices=("text", "json", "csv"), default="text")

    p = sub.add_parser("amp", parents=[base, phys, scalar_fmt],
                       help="one-particle amplitudes r, t at momentum k")
    p.add_argument("--k", type=_finite, help="incident momentum")
    p.set_defaults(handler=cmd_amp)

    p = sub.add_parser("conc", parents=[base, phys, scalar_fmt],
                       help="full, post-selected and sector concurrences for (k1, k2)")
    p.add_argument("--k1", type=_finite)
    p.add_argument("--k2", type=_finite)
    p.set_defaults(handler=cmd_conc)

    p = sub.add_parser("poles", parents=[base, phys, scalar_fmt],
                       help="S-matrix poles by Newton iteration in complex k")
    p.add_argument("--guess", type=_complex_list, default=None,
                   help="comma-separated starting points, e.g. 0+0.4i (default 0.4i*u0)")
    p.set_defaults(handler=cmd_poles)

    p = sub.add_parser("verify", parents=[base, scalar_fmt], help="run the invariant suite")
    p.add_argument("--u0", type=_finite, default=1.0)
    p.add_argument("--g-values", type=_float_list, default=list(VerifyGrid.g_values))
    p.add_argument("--e-values", type=_float_list, default=list(VerifyGrid.e_values))
    p.add_argument("--k-min", type=_finite, default=0.05)
    p.add_argument("--k-max", type=_finite, default=4.0)
    p.add_argument("--k-points", type=_positive_int, default=32)
    p.add_argument("--tol", type=_finite, default=None, help="override every tolerance")
    p.add_argument("--inject-fault", type=_bool, nargs="?", const=True, default=False,
                   help="perturb t at one grid point (negative control)")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("plot", parents=[base], help="re-render a sweep CSV as a chart")
    p.add_argument("input", help="CSV written by 'sweep --format csv'")
    p.add_argument("--title")
    p.set_defaults(handler=cmd_plot)

    sweep = sub.add_parser("sweep", help="parameter sweeps behind the figures")
    modes = sweep.add_subparsers(dest="mode", required=True, metavar="MODE")
    sweep_common = argparse.ArgumentParser(add_help=False)
    sweep_common.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    sweep_common.add_argument("--steps", type=_positive_int, default=None)
    sweep_common.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1)
    sweep_common.add_argument("--figure", help="also render a matplotlib figure (png/pdf/svg)")
    parents = [base, phys_list, sweep_common]

    p = modes.add_parser("k", parents=parents, help="|r|^2, |t|^2 against k")
    p.add_argument("--k-min", type=_finite, default=0.05)
    p.add_argument("--k-max", type=_finite, default=3.0)
    p.set_defaults(handler=cmd_sweep, steps_default=256)

    p = modes.add_parser("dk", parents=parents, help="concurrence against dk = k2 - k1")
    p.add_argument("--k1", type=_finite, default=None, help="fixed momentum (default u0/2)")
    p.add_argument("--dk-min", type=_finite, default=None, help="default: dk_max/steps")
    p.add_argument("--dk-max", type=_finite, default=2.0)
    p.set_defaults(handler=cmd_sweep, steps_default=400)

    p = modes.add_parser("g", parents=parents, help="concurrence against g = u1/u0")
    p.add_argument("--k1", type=_finite, default=None, help="default u0/2")
    p.add_argument("--k2", type=_finite, default=None, help="default 3 u0/2")
    p.add_argument("--g-min", type=_finite, default=0.0)
    p.add_argument("--g-max", type=_finite, default=3.0)
    p.set_defaults(handler=cmd_sweep, steps_default=300)
    return parser


def _leaf_parser(parser, args):
    """The subparser that produced ``args`` (walks sweep modes too)."""
    action = next(a for a in parser._subparsers._group_actions
                  if isinstance(a, argparse._SubParsersAction))
    leaf = action.choices[args.command]
    if args.command == "sweep":
        modes = next(a for a in leaf._subparsers._group_actions
                     if isinstance(a, argparse._SubParsersAction))
        leaf = modes.choices[args.mode]
    return leaf


def parse_args(argv=None):
    """Parse ``argv``; config-file values fill in anything not given as a flag."""
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg_path = args.config or os.environ.get(CONFIG_ENV)
    if not cfg_path:
        return args
    cfg = load_config(cfg_path)
    known = set(vars(args)) - _META - {"mode", "steps_default"}
    unknown = sorted(set(cfg) - known - _META - {"mode"})
    if unknown:
        print(f"qscatter: ignoring config keys not used by this command: {', '.join(unknown)}",
              file=sys.stderr)
    defaults = {k: v for k, v in cfg.items() if k in known}
    for key in _BOOL_KEYS & set(defaults):
        defaults[key] = _bool(defaults[key])
    # argparse runs string defaults through each option's type
    _leaf_parser(parser, args).set_defaults(**defaults)
    return parser.parse_args(argv)


# --- helpers --------------------------------------------------------------------

def _echo_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, complex):
        return fmt_complex(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_echo_value(x) for x in v)
    return str(v)


def input_echo(args):
    """Every resolved parameter as text that parses back to the same value."""
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in _META or key == "steps_default" or value is None:
            continue
        out[key] = _echo_value(value)
    return out


def _command_name(args):
    return f"sweep {args.mode}" if args.command == "sweep" else args.command


def _emit(args, text):
    if args.output:
        try:
            atomic_write(args.output, text)
        except OSError as exc:
            raise OutputError(f"cannot write {args.output}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _params(args, e_exc=None):
    return ScattererParams(args.u0, args.g, args.e_exc if e_exc is None else e_exc)


def _scalar_output(args, result, started):
    if args.format == "json":
        timing = {"wall_seconds": time.perf_counter() - started}
        return to_json(envelope(_command_name(args), input_echo(args), timing, result=result))
    if args.format == "csv":
        keys = list(result)
        return ",".join(keys) + "\n" + ",".join(_csv_cell(result[k]) for k in keys) + "\n"
    return "".join(f"{k} = {_csv_cell(v)}\n" for k, v in result.items())


def _csv_cell(v):
    if isinstance(v, float):
        return fmt(v)
    return str(v)


def _require(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise InputError(f"missing required option(s): {', '.join(missing)}")


# --- commands ---------------------------------------------------------------------

def cmd_amp(args):
    started = time.perf_counter()
    _require(args, "k")
    p = _params(args)
    a: ChannelAmplitudes = amplitudes(p, args.k)
    ke = excited_momentum(p, args.k)
    r2, t2 = abs(a.r) ** 2, abs(a.t) ** 2
    result = {
        "k": float(args.k),
        "k_e_re": ke.real, "k_e_im": ke.imag,
        "r_re": a.r.real, "r_im": a.r.imag,
        "t_re": a.t.real, "t_im": a.t.imag,
        "r2": r2, "t2": t2, "sum": r2 + t2,
    }
    _emit(args, _scalar_output(args, result, started))
    return EXIT_OK


def cmd_conc(args):
    started = time.perf_counter()
    _require(args, "k1", "k2")
    rep = concurrence_report(TwoParticleInput(_params(args), args.k1, args.k2))
    result = {
        "k1": float(args.k1), "k2": float(args.k2),
        "eta_full": rep.eta_full,
        "eta_postselected": rep.eta_postselected,
        "sector_LL": rep.sector_LL,
        "sector_RR": rep.sector_RR,
        "sector_LR": rep.sector_LR,
        "gamma_norm": rep.gamma_norm,
    }
    _emit(args, _scalar_output(args, result, started))
    return EXIT_OK


def cmd_poles(args):
    started = time.perf_counter()
    p = _params(args)
    guesses = args.guess or [0.4j * args.u0]
    roots = [find_pole(p, g) for g in guesses]
    if args.format == "json":
        payload = [{"guess": fmt_complex(g), "k_re": r.k.real, "k_im": r.k.imag,
                    "abs_k": abs(r.k), "residual": r.residual, "iterations": r.iterations}
                   for g, r in zip(guesses, roots)]
        timing = {"wall_seconds": time.perf_counter() - started}
        text = to_json(envelope("poles", input_echo(args), timing, result=payload))
    else:
        lines = ["guess,k_re,k_im,abs_k,residual,iterations"] if args.format == "csv" else []
        for g, r in zip(guesses, roots):
            cells = [fmt_complex(g), fmt(r.k.real), fmt(r.k.imag), fmt(abs(r.k)),
                     fmt(r.residual), str(r.iterations)]
            if args.format == "csv":
                lines.append(",".join(cells))
            else:
                lines.append(f"guess {cells[0]}: k = {fmt_complex(r.k)}  |k| = {cells[3]}  "
                             f"residual = {cells[4]}  iterations = {cells[5]}")
        text = "\n".join(lines) + "\n"
    _emit(args, text)
    return EXIT_OK


def _verify_fault():
    hit = []

    def fault(p, k, a):
        if not hit:
            hit.append(k)
            return ChannelAmplitudes(r=a.r, t=a.t + 1e-9, k=a.k)
        return a

    return fault


def cmd_verify(args):
    import numpy as np

    started = time.perf_counter()
    if not (0 < args.k_min < args.k_max):
        raise InputError("verify needs 0 < k_min < k_max")
    grid = VerifyGrid(
        u0=args.u0,
        g_values=tuple(args.g_values),
        e_values=tuple(args.e_values),
        k_values=tuple(np.geomspace(args.k_min, args.k_max, args.k_points).tolist()),
    )
    for g in grid.params():  # validates every grid point up front
        pass
    report = run_verify(grid, tol=args.tol, fault=_verify_fault() if args.inject_fault else None)
    if args.format == "json":
        timing = {"wall_seconds": time.perf_counter() - started}
        payload = {
            "passed": report.passed,
            "grid": report.grid,
            "invariants": [{"name": r.name, "passed": r.passed, "worst": r.worst,
                            "tol": r.tol, "checked": r.checked, "errors": r.errors[:5]}
                           for r in report.results],
        }
        text = to_json(envelope("verify", input_echo(args), timing, result=payload))
    elif args.format == "csv":
        lines = ["name,passed,worst,tol,checked"]
        lines += [f"{r.name},{r.passed},{fmt(r.worst)},{fmt(r.tol)},{r.checked}"
                  for r in report.results]
        text = "\n".join(lines) + "\n"
    else:
        lines = [f"grid: {report.grid}"]
        for r in report.results:
            status = "PASS" if r.passed else "FAIL"
            lines.append(f"{status} {r.name:<24} worst={r.worst:.3e} tol={r.tol:.1e} n={r.checked}")
            lines.extend(f"     {e}" for e in r.errors[:3])
        lines.append(f"{'ALL PASS' if report.passed else 'FAILED'} in {report.wall_time:.2f}s")
        text = "\n".join(lines) + "\n"
    _emit(args, text)
    return EXIT_OK if report.passed else EXIT_COMPUTE


def resolve_sweep_defaults(args):
    """Fill mode-dependent defaults in place so the input echo is complete."""
    u0 = args.u0
    args.steps = args.steps or args.steps_default
    if args.mode == "k":
        args.e_exc = args.e_exc or [0.0]
        if len(args.e_exc) != 1:
            raise InputError("sweep k takes a single --e-exc value")
        return
    args.k1 = u0 / 2 if args.k1 is None else args.k1
    if args.mode == "dk":
        args.e_exc = args.e_exc or list(DK_E_EXC)
        if args.dk_min is None:
            args.dk_min = args.dk_max / args.steps
    else:
        args.e_exc = args.e_exc or list(COUPLING_E_EXC)
        args.k2 = 1.5 * u0 if args.k2 is None else args.k2


def build_sweep_spec(args):
    resolve_sweep_defaults(args)
    es = args.e_exc
    if args.mode == "k":
        return SweepSpec("transmission_vs_k", _params(args, e_exc=es[0]),
                         args.k_min, args.k_max, args.steps)
    if args.mode == "dk":
        return SweepSpec("concurrence_vs_dk", _params(args, e_exc=es[0]),
                         args.dk_min, args.dk_max, args.steps, fixed=(args.k1,), extra=tuple(es))
    return SweepSpec("concurrence_vs_g", _params(args, e_exc=es[0]),
                     args.g_min, args.g_max, args.steps, fixed=(args.k1, args.k2), extra=tuple(es))


X_LABELS = {"k": "k / u0", "dk": "dk / u0", "g": "g = u1 / u0"}


def _figure_markers(spec):
    p = spec.params
    if spec.kind == "transmission_vs_k":
        out = []
        if p.k_threshold > 0:
            out.append((p.k_threshold, "threshold"))
        k0 = total_reflection_momentum(p)
        if k0 is not None:
            out.append((k0, "t = 0"))
        for f in locate_features(p, spec.lo):
            if f.name == "reflection_zero":
                out.append((f.k, "r = 0"))
        return [(x, s) for x, s in out if spec.lo <= x <= spec.hi]
    if spec.kind == "concurrence_vs_dk":
        (k1,) = spec.fixed
        out = []
        for e in spec.curve_values():
            dk = p.u0 * math.sqrt(e) - k1
            if spec.lo <= dk <= spec.hi:
                out.append((dk, f"k_th(E={e:g})"))
        return out
    return []


def cmd_sweep(args):
    started = time.perf_counter()
    spec = build_sweep_spec(args)
    result = run_sweep(spec, threads=args.threads)
    if args.format == "csv":
        text = sweep_to_csv(result)
    elif args.format == "json":
        timing = {"wall_seconds": time.perf_counter() - started, "threads": args.threads}
        text = to_json(envelope(_command_name(args), input_echo(args), timing,
                                **sweep_payload(result)))
    else:
        from .svgchart import line_chart

        curves = {name: result.column(name) for name in result.names}
        text = line_chart(result.column(result.x_name), curves,
                          x_label=X_LABELS[args.mode], y_label="eta" if args.mode != "k" else "")
    _emit(args, text)
    if args.figure:
        from .plotting import render_sweep

        try:
            render_sweep(args.figure, result, markers=_figure_markers(spec))
        except OSError as exc:
            raise OutputError(f"cannot write {args.figure}: {exc}") from exc
    return EXIT_OK


def cmd_plot(args):
    try:
        text = Path(args.input).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc}") from None
    x_name, names, xs, columns, _ = read_csv_table(text)
    curves = dict(zip(names, columns))
    out = args.output
    if out and Path(out).suffix.lower() in (".png", ".pdf"):
        from .plotting import render

        try:
            render(out, x_name, xs, curves, title=args.title)
        except OSError as exc:
            raise OutputError(f"cannot write {out}: {exc}") from exc
        return EXIT_OK
    from .svgchart import line_chart

    _emit(args, line_chart(xs, curves, x_label=X_LABELS.get(x_name, x_name),
                           y_label="", title=args.title))
    return EXIT_OK


def main(argv=None):
    try:
        args = parse_args(argv)
    except SystemExit as exc:  # argparse usage errors / --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except InputError as exc:
        print(f"qscatter: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.handler(args)
    except OutputError as exc:
        print(f"qscatter: {exc}", file=sys.stderr)
        return EXIT_IO
    except InputError as exc:
        print(f"qscatter: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ComputationError as exc:
        print(f"qscatter: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except QScatterError as exc:
        print(f"qscatter: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
