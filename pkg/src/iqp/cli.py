"""Command-line entry point: ``iqp <command> [options]``.

Exit codes: 0 success, 2 usage or input error, 3 resource limit exceeded,
4 an experiment's bound check failed.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from fractions import Fraction

from . import core
from .amplitude import (ResourceLimitError, amplitude_direct, amplitude_statevector, gap_gray,
                        gap_naive, ising_partition, output_distribution)
from .compile import compile_ising, compile_poly, gadgetize
from .core import IqpCircuit, IsingInstance, MixedCircuit, Polynomial3, as_bits, bits_str
from .experiments import (PipelineConfig, RecoveryConfig, RecoveryError, lemma9_sum, moment4,
                          pipeline, pz_fraction, recover_gap, sample_normalized)
from .rng import ALGORITHM, gen_ising, gen_poly3, gen_xmask
from .sampling import SamplerModel, estimate_prob, realize, sample, write_rows_csv

EXIT_USAGE, EXIT_RESOURCE, EXIT_BOUND = 2, 3, 4


class BoundFailure(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: all)")
    p.add_argument("-o", "--out", default="-", help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=None,
                   help="output format where both exist")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="iqp", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a random instance")
    g.add_argument("--kind", choices=("poly3", "ising", "xmask"), required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--substream", type=int, default=0)
    g.add_argument("--edge-range", type=int, choices=(4, 8), default=8)

    a = sub.add_parser("amp", parents=[common], help="amplitude <y|C|0> of an instance file")
    a.add_argument("file")
    a.add_argument("--backend", choices=("gap", "naive", "direct", "statevector", "partition"))
    a.add_argument("--y", default=None, help="output bit string (default all zeros)")
    a.add_argument("--mode", choices=("exact", "float"), default="exact",
                   help="partition backend mode")

    d = sub.add_parser("dist", parents=[common], help="full output distribution",
                       description="CSV columns: y,p (17 significant digits).")
    d.add_argument("file")

    s = sub.add_parser("sample", parents=[common], help="sample outputs; optionally from a perturbed sampler",
                       description="JSON: counts per outcome. CSV columns: y,p,q,estimate,abs_err "
                                   "(estimate = q_y times a seeded factor in [1-rho, 1+rho]).")
    s.add_argument("file")
    s.add_argument("--shots", type=int, default=1000)
    s.add_argument("--model", choices=("exact", "uniform_mix", "adversarial_shift"), default="exact")
    s.add_argument("--budget", type=float, default=0.0, help="l1 distance of the sampler from p")
    s.add_argument("--rho", type=float, default=0.0)
    s.add_argument("--substream", type=int, default=0)

    c = sub.add_parser("compile", parents=[common], help="compile poly3/ising into an IQP circuit")
    c.add_argument("file")
    c.add_argument("--emit-repeated", action="store_true", help="spell out gate powers as unit gates")

    h = sub.add_parser("gadget", parents=[common], help="replace intermediate Hadamards by gadgets")
    h.add_argument("file")

    e = sub.add_parser("exp", help="experiments")
    esub = e.add_subparsers(dest="experiment", required=True)
    m4 = esub.add_parser("moment4", parents=[common], help="normalized fourth moment vs 3")
    pz = esub.add_parser("pz", parents=[common], help="anticoncentration fraction vs (1-alpha)^2/3")
    for x in (m4, pz):
        x.add_argument("--kind", choices=("poly3", "ising"), default="poly3")
        x.add_argument("--n", type=int, required=True)
        x.add_argument("--mode", choices=("exact", "mc"), default="exact")
        x.add_argument("--trials", type=int, default=10_000)
        x.add_argument("--edge-range", type=int, choices=(4, 8), default=8)
    pz.add_argument("--alpha", type=float, default=0.5)

    l9 = esub.add_parser("lemma9", parents=[common], help="exact count of non-vanishing terms vs 3*4^n")
    l9.add_argument("--r", type=int, required=True)
    l9.add_argument("--s", type=int, required=True)
    l9.add_argument("--n", type=int, required=True)

    pl = esub.add_parser("pipeline", parents=[common], help="additive-to-multiplicative pipeline",
                         description="CSV columns: trial,seed,substream,y,p,q,estimate,abs_err,l1,"
                                     "declared_l1,add_bound,add_ok,anticoncentrated,rel_err,mult_ok.")
    pl.add_argument("--family", choices=("poly3", "ising"), default="poly3")
    pl.add_argument("--n", type=int, required=True)
    pl.add_argument("--model", choices=("exact", "uniform_mix", "adversarial_shift"), default="uniform_mix")
    pl.add_argument("--budget", type=float, default=None, help="l1 budget (default alpha*p/8)")
    pl.add_argument("--trials", type=int, default=2000)
    pl.add_argument("--alpha", type=float, default=0.5)
    pl.add_argument("--p", type=float, default=1 / 12)
    pl.add_argument("--delta", type=float, default=None)
    pl.add_argument("--rho", type=float, default=None)
    pl.add_argument("--edge-range", type=int, choices=(4, 8), default=8)

    rc = esub.add_parser("recover", parents=[common], help="recover signed ngap(f) from a noisy oracle",
                         description="CSV columns: c,d,c_plus,c_minus,d_plus,d_minus,chosen (grid units).")
    rc.add_argument("file", nargs="?", help="poly3 file (default: random f from --seed)")
    rc.add_argument("--n", type=int, default=12)
    rc.add_argument("--eps", type=float, default=0.4)
    rc.add_argument("--noise", choices=("zero", "random", "adversarial", "squared"), default="random")
    rc.add_argument("--grid-m", type=int, default=None)
    rc.add_argument("--max-iters", type=int, default=None)
    return ap


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "out"}


def _emit(args, text: str) -> None:
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _header(args) -> str:
    return "# config: " + json.dumps(_config(args), sort_keys=True) + "\n"


def _fmt_complex(z: complex) -> str:
    if z.imag == 0:
        return repr(float(z.real))
    return repr(complex(z))


def _load_circuit(obj) -> IqpCircuit:
    if isinstance(obj, Polynomial3):
        return compile_poly(obj)
    if isinstance(obj, IsingInstance):
        return compile_ising(obj)
    if isinstance(obj, IqpCircuit):
        return obj
    raise ValueError(f"expected a poly3, ising or circuit file, got {type(obj).__name__}")


# ---------------------------------------------------------------------------

def cmd_gen(args) -> None:
    meta = {"seed": args.seed, "substream": args.substream, "rng": ALGORITHM}
    if args.kind == "poly3":
        text = core.dumps(gen_poly3(args.n, args.seed, args.substream), meta)
    elif args.kind == "ising":
        text = core.dumps(gen_ising(args.n, args.seed, args.substream, args.edge_range), meta)
    else:
        text = json.dumps({"kind": "xmask", "n": args.n,
                           "x_mask": bits_str(gen_xmask(args.n, args.seed, args.substream), args.n),
                           "meta": meta}, separators=(",", ":")) + "\n"
    _emit(args, text)


def cmd_amp(args) -> None:
    obj = core.load(args.file)
    n = obj.n
    y = as_bits(args.y, n) if args.y is not None else 0
    backend = args.backend or {Polynomial3: "gap", IsingInstance: "partition"}.get(type(obj), "direct")
    exact = None
    if backend in ("gap", "naive"):
        if not isinstance(obj, Polynomial3):
            raise ValueError("gap backends need a poly3 file")
        f = obj
        if y:
            f = Polynomial3(n, f.cubic, f.quadratic, f.linear ^ {i for i in range(n) if (y >> i) & 1})
        g = (gap_gray if backend == "gap" else gap_naive)(f)
        value, exact = complex(g / 2 ** n), f"{g}/{2 ** n}"
    elif backend == "partition":
        if not isinstance(obj, IsingInstance):
            raise ValueError("partition backend needs an ising file")
        if y:
            raise ValueError("partition backend computes <0|C|0> only")
        z = ising_partition(obj, args.mode)
        value = z.value / 2 ** n
        if z.exact is not None:
            exact = f"{list(z.exact.coeffs)}/{2 ** n}"
    elif backend == "direct":
        a = amplitude_direct(_load_circuit(obj), y)
        value = a.value
        exact = (f"{a.numerator}/{2 ** n}" if a.exact.is_integer()
                 else f"{list(a.exact.coeffs)}/{2 ** n}")
    else:
        c = obj if isinstance(obj, (IqpCircuit, MixedCircuit)) else _load_circuit(obj)
        value = amplitude_statevector(c, y)
    if args.format == "json":
        _emit(args, json.dumps({"config": _config(args), "value": [value.real, value.imag],
                                "exact": exact}, sort_keys=True) + "\n")
    else:
        _emit(args, _header(args) + _fmt_complex(value) + "\n"
              + (f"exact={exact}\n" if exact is not None else ""))


def cmd_dist(args) -> None:
    c = _load_circuit(core.load(args.file))
    d = output_distribution(c)
    if args.format == "json":
        _emit(args, json.dumps({"config": _config(args), "n": c.n,
                                "probs": [float(x) for x in d.probs]}) + "\n")
        return
    buf = io.StringIO()
    buf.write(_header(args) + "y,p\n")
    for y, p in enumerate(d.probs):
        buf.write(f"{bits_str(y, c.n)},{p:.17g}\n")
    _emit(args, buf.getvalue())


def cmd_sample(args) -> None:
    c = _load_circuit(core.load(args.file))
    p = output_distribution(c)
    q = realize(SamplerModel.with_budget(args.model, c, args.budget, p), p)
    if args.format == "csv":
        est = {y: estimate_prob(q, y, "oracle", args.rho, seed=args.seed, substream=y + 1).value
               for y in range(1 << c.n)}
        buf = io.StringIO()
        buf.write(_header(args))
        write_rows_csv(buf, c.n, p, q, est)
        _emit(args, buf.getvalue())
        return
    counts = sample(q, args.shots, args.seed, args.substream)
    _emit(args, json.dumps({"config": _config(args),
                            "counts": {bits_str(y, c.n): k for y, k in counts.items()}},
                           sort_keys=True) + "\n")


def cmd_compile(args) -> None:
    obj = core.load(args.file)
    if isinstance(obj, IsingInstance):
        circ = compile_ising(obj, repeated=args.emit_repeated)
    elif isinstance(obj, Polynomial3):
        circ = compile_poly(obj)
    else:
        raise ValueError("compile expects a poly3 or ising file")
    _emit(args, core.dumps(circ, {"config": _config(args)}))


def cmd_gadget(args) -> None:
    u = core.load(args.file)
    if not isinstance(u, MixedCircuit):
        raise ValueError("gadget expects a mixed-circuit file")
    r = gadgetize(u)
    out = {"config": _config(args), "circuit": core.to_dict(r.circuit), "m": r.m,
           "scale_log2": str(r.scale_log2), "postselect": bits_str(r.postselect_mask, r.circuit.n)}
    _emit(args, json.dumps(out) + "\n")


def _stat_out(args, res, extra: dict) -> None:
    if args.format == "json":
        _emit(args, json.dumps({"config": _config(args), "value": str(res.value) if isinstance(res.value, Fraction)
                                else res.value, "stderr": res.stderr, "samples": res.samples,
                                "check": res.check.line(), "passed": res.check.passed, **extra},
                               sort_keys=True) + "\n")
    else:
        _emit(args, _header(args) + res.check.line() + "\n")
    if not res.check.passed:
        raise BoundFailure(res.check.line())


def cmd_exp(args) -> None:
    x = args.experiment
    if x in ("moment4", "pz"):
        samples = (sample_normalized(args.kind, args.n, args.trials, args.seed, args.edge_range)
                   if args.mode == "mc" else None)
        if x == "moment4":
            res = moment4(args.kind, args.n, args.mode, args.trials, args.seed, args.edge_range, samples)
        else:
            res = pz_fraction(args.kind, args.n, args.alpha, args.mode, args.trials, args.seed,
                              args.edge_range, samples)
        _stat_out(args, res, {})
    elif x == "lemma9":
        r = lemma9_sum(args.r, args.s, args.n)
        line = f"count={r.count} bound={r.bound} {'PASS' if r.passed else 'FAIL'}"
        if args.format == "json":
            _emit(args, json.dumps({"config": _config(args), "count": r.count, "bound": r.bound,
                                    "passed": r.passed}, sort_keys=True) + "\n")
        else:
            _emit(args, _header(args) + line + "\n")
        if not r.passed:
            raise BoundFailure(line)
    elif x == "pipeline":
        cfg = PipelineConfig(alpha=args.alpha, p=args.p, delta=args.delta, rho=args.rho,
                             trials=args.trials, seed=args.seed, edge_range=args.edge_range)
        budget = args.budget if args.budget is not None else cfg.resolved(args.n).eps
        cfg.eps = budget
        rep = pipeline(args.family, args.n, args.model, budget, cfg)
        rep.config["cli"] = _config(args)
        _emit(args, rep.to_csv() if args.format == "csv" else rep.to_json())
        for b in rep.bounds:
            sys.stderr.write(b.line() + "\n")
        if not rep.passed:
            raise BoundFailure("pipeline bound check failed")
    elif x == "recover":
        f = core.load(args.file) if args.file else gen_poly3(args.n, args.seed)
        if not isinstance(f, Polynomial3):
            raise ValueError("recover expects a poly3 file")
        cfg = RecoveryConfig(args.eps, args.noise, args.grid_m, args.max_iters)
        try:
            r = recover_gap(f, cfg, args.seed)
        except RecoveryError as err:
            raise BoundFailure(str(err)) from err
        truth = Fraction(gap_gray(f), 2 ** f.n)
        ok = r.ngap == truth
        if args.format == "csv":
            buf = io.StringIO()
            buf.write(_header(args) + "c,d,c_plus,c_minus,d_plus,d_minus,chosen\n")
            for t in r.trace:
                buf.write(",".join(f"{t[k]:.17g}" if isinstance(t[k], float) else str(t[k])
                                   for k in ("c", "d", "c_plus", "c_minus", "d_plus", "d_minus", "chosen")) + "\n")
            _emit(args, buf.getvalue())
        else:
            _emit(args, json.dumps({"config": _config(args), "recovered": str(r.ngap), "truth": str(truth),
                                    "iterations": r.iterations, "oracle_calls": r.oracle_calls,
                                    "passed": ok}, sort_keys=True) + "\n")
        if not ok:
            raise BoundFailure("recovered value differs from ngap(f)")


COMMANDS = {"gen": cmd_gen, "amp": cmd_amp, "dist": cmd_dist, "sample": cmd_sample,
            "compile": cmd_compile, "gadget": cmd_gadget, "exp": cmd_exp}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", None):
        import numba

        numba.set_num_threads(max(1, min(args.threads, numba.config.NUMBA_NUM_THREADS)))
    try:
        COMMANDS[args.command](args)
    except ResourceLimitError as err:
        sys.stderr.write(f"iqp: resource limit: {err}\n")
        return EXIT_RESOURCE
    except BoundFailure as err:
        sys.stderr.write(f"iqp: bound check failed: {err}\n")
        return EXIT_BOUND
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as err:
        sys.stderr.write(f"iqp: error: {err}\n")
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
