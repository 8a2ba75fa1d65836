"""Command-line front end.

Every command writes CSV: ``#``-prefixed metadata lines (command line,
version, seed), a fixed header row, then one row per evaluation.  Floats are
printed with 17 significant digits.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 numerical
non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import os
import shlex
import sys

import numpy as np

from . import __version__
from .errors import Gl3KuzError, NotConverged

THREADS_ENV = "GL3KUZ_THREADS"

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_NOT_CONVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- formatting ---------------------------------------------------------------------

def fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


class CsvOut:
    def __init__(self, stream, argv, seed, header):
        self.stream = stream
        stream.write("# command: gl3kuz " + " ".join(shlex.quote(a) for a in argv) + "\n")
        stream.write(f"# version: {__version__}\n")
        stream.write(f"# seed: {seed}\n")
        self.writer = csv.writer(stream, lineterminator="\n")
        self.writer.writerow(header)
        self.width = len(header)

    def row(self, values):
        assert len(values) == self.width
        self.writer.writerow([fmt(v) for v in values])


# -- argument helpers ----------------------------------------------------------------

def int_list(text):
    """'5', '1,2,7' or '2:6' (inclusive) -> list of ints."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if ":" in part:
            lo, hi = (int(v) for v in part.split(":"))
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty integer list {text!r}")
    return out


def float_list(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def complex_list(text):
    return [complex(v.replace(" ", "")) for v in str(text).split(",") if v.strip()]


def read_config(path):
    """Plain ``key = value`` lines; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected 'key = value'")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("_", "-")] = v
    return out


def _config_tokens(cfg, sub):
    """Turn config entries into flags understood by the chosen subcommand."""
    known = {}
    for action in sub._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                known[opt[2:]] = action
    tokens = []
    for key, val in cfg.items():
        action = known.get(key)
        if action is None:
            continue  # keys for other commands are ignored
        if action.nargs == 0:
            if val.lower() in ("1", "true", "yes", "on"):
                tokens.append("--" + key)
        else:
            tokens += ["--" + key, val]
    return tokens


def _add_common(p):
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default: ${THREADS_ENV} or 1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", default=None, help="write CSV here instead of stdout")
    p.add_argument("--config", default=None, help="key = value file; flags override it")


def _threads(args):
    if args.threads is not None:
        return max(1, args.threads)
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        raise UsageError(f"${THREADS_ENV} must be an integer")


# -- sum -------------------------------------------------------------------------------

def cmd_sum(args, out):
    from .kloosterman import classical_kloosterman, s_gl3, s_tilde

    exact = not args.float
    header = ["kind", "level", "m1", "m2", "n1", "n2", "d1", "d2", "value_re", "value_im", "abs_error", "value"]
    w = out(header)
    if args.kind == "classical":
        for m, n, c in itertools.product(args.m or [None], args.n or [None], args.c or [None]):
            if None in (m, n, c):
                raise UsageError("classical sums need --m, --n and --c")
            if c < 1:
                raise UsageError("--c must be positive")
            _sum_row(w, "classical", 1, m, "", n, "", c, "", classical_kloosterman(m, n, c, exact=exact))
        return EXIT_OK
    need = ["d1", "d2", "m1", "n1", "n2"] + (["m2"] if args.kind == "gl3" else [])
    for k in need:
        if getattr(args, k) is None:
            raise UsageError(f"--kind {args.kind} needs --{k}")
    if args.kind == "tilde":
        for D1, D2, m1, n1, n2 in itertools.product(args.d1, args.d2, args.m1, args.n1, args.n2):
            if D1 < 1 or D2 % D1:
                if _single(args, need):
                    raise UsageError(f"~S needs D1 | D2, got ({D1}, {D2})")
                continue
            _sum_row(w, "tilde", 1, m1, "", n1, n2, D1, D2, s_tilde(m1, n1, n2, D1, D2, exact=exact))
        return EXIT_OK
    for N, D1, D2, m1, m2, n1, n2 in itertools.product(args.level, args.d1, args.d2, args.m1, args.m2,
                                                        args.n1, args.n2):
        if N < 1 or D1 < 1 or D2 < 1 or D1 % N or D2 % N:
            if _single(args, need + ["level"]):
                raise UsageError(f"need positive moduli divisible by the level, got N={N}, D=({D1}, {D2})")
            continue
        v = s_gl3(m1, m2, n1, n2, D1, D2, level=N, exact=exact, threads=_threads(args))
        _sum_row(w, "gl3", N, m1, m2, n1, n2, D1, D2, v)
    return EXIT_OK


def _single(args, keys):
    return all(len(getattr(args, k)) == 1 for k in keys)


def _sum_row(w, kind, N, m1, m2, n1, n2, D1, D2, v):
    value = v.exact_int() if v.is_exact else None
    w.row([kind, N, m1, m2, n1, n2, D1, D2, v.real, v.imag, v.abs_error, value])


# -- fourier ------------------------------------------------------------------------------

def _twist(args):
    from .fourier import DirichletCharacter

    if args.twist_order is None:
        return None
    if args.p is None:
        raise UsageError("--twist-order needs --p")
    chi = DirichletCharacter(args.p, args.twist_order, args.twist_index)
    if chi.order != args.twist_order:
        raise UsageError(f"index {args.twist_index} does not give a character of order {args.twist_order}")
    return chi


def _moduli(args):
    if args.alpha1 is not None or args.alpha2 is not None:
        if args.p is None or args.alpha1 is None or args.alpha2 is None:
            raise UsageError("--alpha1/--alpha2 need --p and both exponents")
        return args.p ** args.alpha1, args.p ** args.alpha2
    if args.d1 is None or args.d2 is None:
        raise UsageError("give --d1 and --d2 (or --p with --alpha1/--alpha2)")
    return args.d1, args.d2


def _prime_power(n):
    from .modcore import factorize

    f = factorize(n)
    return f[0] if len(f) == 1 else (None if n > 1 else (1, 0))


def _bound(spec, freq):
    """The applicable explicit bound, or None."""
    from .fourier import bound_coro, bound_peter1, bound_twist

    if not any(freq):
        return None
    chi = spec.twist
    if chi is None:
        q1, q2 = _prime_power(spec.D1), _prime_power(spec.D2)
        if q1 is None or q2 is None:
            return None
        qs = {q for q, e in (q1, q2) if e > 0}
        if len(qs) > 1:
            return None
        q = qs.pop() if qs else 2
        a1 = q1[1] if q1[0] == q else 0
        a2 = q2[1] if q2[0] == q else 0
        return bound_peter1(q, a1, a2, freq, spec.d).bound_value
    p = chi.prime
    q1, q2 = _prime_power(spec.D1), _prime_power(spec.D2)
    if q1 and q2 and q1[0] == p and q2[0] == p:
        return bound_twist(p, q1[1], q2[1], freq).bound_value
    return bound_coro(p, spec.D1, spec.D2, freq, spec.d).bound_value


def cmd_fourier(args, out):
    from .fourier import TransformSpec, s_hat_fast, s_hat_naive, s_hat_semifast

    D1, D2 = _moduli(args)
    chi = _twist(args)
    spec = TransformSpec(D1, D2, a=args.a, b=args.b, d=args.d, twist=chi)
    if args.random:
        rng = np.random.default_rng(args.seed)
        freqs = [tuple(int(v) for v in f) for f in rng.integers(0, max(D1, D2), (args.random, 6))]
    else:
        freq = int_list(args.freq)
        if len(freq) != 6:
            raise UsageError("--freq needs six integers x1,x2,y1,y2,z1,z2")
        freqs = [tuple(freq)]
    tiers = {"fast": s_hat_fast, "naive": s_hat_naive, "semifast": s_hat_semifast}
    mode = args.mode or "fast"
    header = ["d1", "d2", "a", "b", "d", "twist", "x1", "x2", "y1", "y2", "z1", "z2", "tier",
              "value_re", "value_im", "abs_error", "deviation", "bound", "ratio"]
    w = out(header)
    tag = "" if chi is None else f"p{chi.prime}o{chi.order}i{chi.index}/{chi.order_divisor}"
    for f in freqs:
        s = spec.with_freq(f)
        if mode == "both":
            v = s_hat_fast(s)
            ref = s_hat_naive(s) if chi is None else s_hat_semifast(s)
            dev = abs(v.approx - ref.approx)
            tier = "fast/naive" if chi is None else "fast/semifast"
        else:
            v, dev, tier = tiers[mode](s), None, mode
        bound = _bound(spec, f)
        ratio = abs(v.approx) / bound if bound else None
        w.row([D1, D2, spec.a, spec.b, spec.d, tag, *f, tier, v.real, v.imag, v.abs_error, dev, bound, ratio])
    return EXIT_OK


# -- whittaker / jtransform / rhs -------------------------------------------------------------

def _mu(args):
    from .archimedean import SpectralParameter

    given = [args.mu is not None, args.tempered is not None, args.exceptional is not None]
    if sum(given) != 1:
        raise UsageError("give exactly one of --mu, --tempered, --exceptional")
    if args.mu is not None:
        return SpectralParameter(tuple(complex_list(args.mu)))
    if args.tempered is not None:
        b = float_list(args.tempered)
        if len(b) != 2:
            raise UsageError("--tempered takes b1,b2")
        return SpectralParameter.tempered(*b)
    r = float_list(args.exceptional)
    if len(r) != 2:
        raise UsageError("--exceptional takes rho,gamma")
    return SpectralParameter.exceptional(*r)


def _cfg(args):
    from .archimedean import QuadratureConfig

    kw = dict(threads=_threads(args))
    if getattr(args, "sigma", None):
        s = float_list(args.sigma)
        kw["sigma"] = (s[0], s[-1])
    for k in ("T", "tol", "j_tol"):
        v = getattr(args, k, None)
        if v is not None:
            kw[k] = v
    return QuadratureConfig(**kw)


def _test_function(args):
    from .archimedean import TestFunction

    kw = {}
    if args.box:
        box = float_list(args.box)
        if len(box) != 4:
            raise UsageError("--box takes a1,b1,a2,b2")
        kw["box"] = tuple(box)
    F = TestFunction(**kw)
    if args.dilate:
        X = float_list(args.dilate)
        F = F.dilate(X[0], X[-1])
    return F


def cmd_whittaker(args, out):
    from .archimedean import whittaker_tilde

    mu = _mu(args)
    cfg = _cfg(args)
    w = out(["mu1_re", "mu1_im", "mu2_re", "mu2_im", "mu3_re", "mu3_im", "y1", "y2",
             "value_re", "value_im", "abs_error"])
    parts = [c for m in mu.mu for c in (m.real, m.imag)]
    for y1 in float_list(args.y1):
        for y2 in float_list(args.y2):
            v, err = whittaker_tilde(mu, y1, y2, cfg, with_error=True)
            w.row([*parts, y1, y2, complex(v).real, complex(v).imag, err])
    return EXIT_OK


def cmd_jtransform(args, out):
    from .archimedean import j_big, j_tilde

    F = _test_function(args)
    cfg = _cfg(args)
    w = out(["kind", "eps1", "eps2", "A1", "A2", "value_re", "value_im", "abs_error"])
    if args.kind == "tilde":
        if args.A is None:
            raise UsageError("--kind tilde needs --A")
        for A in float_list(args.A):
            v, err = j_tilde(args.eps1, F, A, cfg, force=args.force)
            w.row(["tilde", args.eps1, "", A, "", v.real, v.imag, err])
    else:
        if args.A1 is None or args.A2 is None:
            raise UsageError("--kind big needs --A1 and --A2")
        for A1 in float_list(args.A1):
            for A2 in float_list(args.A2):
                v, err = j_big((args.eps1, args.eps2), F, A1, A2, cfg, force=args.force)
                w.row(["big", args.eps1, args.eps2, A1, A2, v.real, v.imag, err])
    return EXIT_OK


def cmd_rhs(args, out):
    from .geometric import KuznetsovRHSSpec, assemble_rhs

    spec = KuznetsovRHSSpec(args.level, args.n1, args.n2, args.m1, args.m2, F=_test_function(args), cfg=_cfg(args))
    rhs = assemble_rhs(spec, threads=_threads(args))
    w = out(["term", "d1", "d2", "value_re", "value_im"])
    w.row(["delta", "", "", rhs.delta_term, 0.0])
    for name in ("sigma4", "sigma5", "sigma6"):
        if args.ledger:
            for D1, D2, v in rhs.ledgers[name]:
                w.row([name, D1, D2, complex(v).real, complex(v).imag])
        total = getattr(rhs, name)
        w.row([name + "_total", "", "", total.real, total.imag])
    w.row(["total", "", "", complex(rhs.total).real, complex(rhs.total).imag])
    return EXIT_OK


# -- verify / bench -------------------------------------------------------------------------

def cmd_verify(args, out):
    from .verify import SUITES, run_suite

    names = list(SUITES) if args.suite == "all" else [args.suite]
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from: all, {', '.join(SUITES)}")
    w = out(["suite", "property", "cases", "max_dev", "metric", "passed", "note"])
    ok = True
    for name in names:
        for r in run_suite(name, seed=args.seed):
            w.row([name, r.name, r.cases, r.max_dev, r.metric, r.passed, r.note])
            ok &= r.passed
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_bench(args, out):
    from .fourier import primitive_characters, s_hat_semifast
    from .verify import bench_tiers

    rng = np.random.default_rng(args.seed)
    w = out(["d1", "d2", "twist", "slow_tier", "slow_s", "fast_s", "speedup"])
    for D in range(1, args.d_max + 1):
        tn, tf = bench_tiers(D, D, rng, reps=args.reps)
        w.row([D, D, "", "naive", tn, tf, tn / max(tf, 1e-12)])
    if args.twisted:
        chi = [c for c in primitive_characters(5) if c.order > 2][0]
        tn, tf = bench_tiers(125, 125, rng, reps=max(1, args.reps // 50), twist=chi, naive=s_hat_semifast)
        w.row([125, 125, f"p5o{chi.order}", "semifast", tn, tf, tn / max(tf, 1e-12)])
    return EXIT_OK


# -- parser ----------------------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="gl3kuz", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("sum", help="Kloosterman sums")
    s.add_argument("--kind", choices=["gl3", "tilde", "classical"], default="gl3")
    for k in ("level",):
        s.add_argument("--" + k, type=int_list, default=[1])
    for k in ("d1", "d2", "m1", "m2", "n1", "n2", "m", "n", "c"):
        s.add_argument("--" + k, type=int_list, default=None)
    s.add_argument("--float", action="store_true", help="double precision only (no exact histogram)")
    _add_common(s)

    f = sub.add_parser("fourier", help="six-fold finite Fourier transforms")
    f.add_argument("--d1", type=int)
    f.add_argument("--d2", type=int)
    f.add_argument("--p", type=int)
    f.add_argument("--alpha1", type=int)
    f.add_argument("--alpha2", type=int)
    f.add_argument("--a", type=int, default=1)
    f.add_argument("--b", type=int, default=1)
    f.add_argument("--d", type=int, default=1)
    f.add_argument("--freq", default="0,0,0,0,0,0", help="x1,x2,y1,y2,z1,z2")
    f.add_argument("--random", type=int, default=0, help="evaluate this many seeded random frequency rows")
    f.add_argument("--twist-order", type=int)
    f.add_argument("--twist-index", type=int, default=1)
    g = f.add_mutually_exclusive_group()
    for m in ("fast", "naive", "semifast", "both"):
        g.add_argument("--" + m, dest="mode", action="store_const", const=m)
    _add_common(f)

    wh = sub.add_parser("whittaker", help="Whittaker function by Mellin-Barnes quadrature")
    wh.add_argument("--mu", help="mu1,mu2,mu3 (complex, summing to 0)")
    wh.add_argument("--tempered", help="b1,b2 for mu = i(b1, b2, -b1-b2)")
    wh.add_argument("--exceptional", help="rho,gamma")
    wh.add_argument("--y1", default="1")
    wh.add_argument("--y2", default="1")
    wh.add_argument("--sigma")
    wh.add_argument("--T", type=float)
    wh.add_argument("--tol", type=float)
    _add_common(wh)

    j = sub.add_parser("jtransform", help="J~ and J integral transforms")
    j.add_argument("--kind", choices=["tilde", "big"], default="tilde")
    j.add_argument("--eps1", type=int, choices=[1, -1], default=1)
    j.add_argument("--eps2", type=int, choices=[1, -1], default=1)
    j.add_argument("--A")
    j.add_argument("--A1")
    j.add_argument("--A2")
    j.add_argument("--force", action="store_true", help="integrate even where the support rules it out")
    j.add_argument("--box", help="support box a1,b1,a2,b2 of the test function")
    j.add_argument("--dilate", help="X1,X2")
    j.add_argument("--j-tol", dest="j_tol", type=float)
    _add_common(j)

    r = sub.add_parser("rhs", help="geometric side of the Kuznetsov formula")
    r.add_argument("--level", type=int, default=1)
    for k in ("n1", "n2", "m1", "m2"):
        r.add_argument("--" + k, type=int, default=1)
    r.add_argument("--box")
    r.add_argument("--dilate")
    r.add_argument("--ledger", action="store_true", help="one row per modulus pair")
    r.add_argument("--j-tol", dest="j_tol", type=float)
    _add_common(r)

    v = sub.add_parser("verify", help="run a property suite")
    v.add_argument("suite")
    _add_common(v)

    b = sub.add_parser("bench", help="naive vs fast transform timings")
    b.add_argument("--d-max", type=int, default=8)
    b.add_argument("--reps", type=int, default=200)
    b.add_argument("--twisted", action="store_true", help="add the p=5, alpha=3 twisted row")
    _add_common(b)
    return p, sub


COMMANDS = {"sum": cmd_sum, "fourier": cmd_fourier, "whittaker": cmd_whittaker, "jtransform": cmd_jtransform,
            "rhs": cmd_rhs, "verify": cmd_verify, "bench": cmd_bench}


def _parse(argv):
    parser, sub = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("a command is required: " + ", ".join(COMMANDS))
    if args.config:
        subparser = sub.choices[args.command]
        tokens = _config_tokens(read_config(args.config), subparser)
        # config first, explicit flags after it win
        i = argv.index(args.command)
        args = parser.parse_args(argv[: i + 1] + tokens + argv[i + 1:])
    return args


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
        buf = io.StringIO()  # nothing is written unless the command finishes
        code = COMMANDS[args.command](args, lambda header: CsvOut(buf, argv, args.seed, header))
        if args.output:
            with open(args.output, "w", newline="") as fh:
                fh.write(buf.getvalue())
        else:
            sys.stdout.write(buf.getvalue())
        return code
    except UsageError as exc:
        print(f"gl3kuz: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotConverged as exc:
        print(f"gl3kuz: not converged: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (Gl3KuzError, OSError) as exc:
        print(f"gl3kuz: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
