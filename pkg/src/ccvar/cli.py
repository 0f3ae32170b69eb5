"""Command-line front end: ``ccvar <subcommand> [options]``.

Results go to standard output (or ``--out``); progress, logs and the run
manifest go to standard error.  Exit codes: 0 success, 1 input error,
2 numerical non-stabilization.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import CCVarError

EXIT_OK, EXIT_INPUT, EXIT_UNSTABLE = 0, 1, 2
log = logging.getLogger("ccvar")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


class _InputError(Exception):
    pass


class _Unstable(Exception):
    def __init__(self, payload):
        super().__init__("monodromy did not stabilize")
        self.payload = payload


# ---- argument helpers -------------------------------------------------------

def _sigma(text: str) -> tuple:
    try:
        vals = tuple(sorted({int(s) for s in text.split(",") if s.strip()}))
    except ValueError:
        raise argparse.ArgumentTypeError(f"sigma must be a comma list of integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("sigma must not be empty")
    return vals


def _global_options(parser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    g = parser.add_argument_group("global options")
    g.add_argument("--out", default=default, help="write the result here instead of standard output")
    g.add_argument("--seed", type=int, default=default, help="random seed (recorded in the manifest)")
    g.add_argument("--threads", type=int, default=argparse.SUPPRESS if suppress else 1,
                   help="tracker threads; 1 is the reproducible mode")
    g.add_argument("--format", choices=("json", "csv", "text"), default=argparse.SUPPRESS if suppress else "json")
    g.add_argument("--manifest", default=default, help="also write the run manifest to this file")
    g.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS if suppress else False,
                   help="no progress output")


def _dims(p, sigma: bool = True, sigma_required: bool = True) -> None:
    p.add_argument("--d", type=int, required=True, help="number of electrons")
    p.add_argument("--n", type=int, required=True, help="number of spin orbitals")
    if sigma:
        p.add_argument("--sigma", type=_sigma, required=sigma_required, help="excitation levels, e.g. 1,2")


def _monodromy_opts(p) -> None:
    p.add_argument("--max-loops", type=int, default=500)
    p.add_argument("--quiet-loops", type=int, default=10)


def _ham_source(p, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--hamiltonian", help="Hamiltonian file (binary or JSON)")
    g.add_argument("--integrals", help="integral file; the Hamiltonian is assembled from it")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ccvar", description="Truncation varieties and coupled cluster equations.")
    parser.add_argument("--version", action="version", version=f"ccvar {__version__}")
    _global_options(parser, suppress=False)
    common = _Parser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("masterpoly", parents=[common], help="master polynomial of degree d")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--direction", choices=("forward", "backward"), default="forward")

    for name, what in (("forward", "amplitudes x -> state psi"), ("backward", "state psi -> amplitudes x")):
        p = sub.add_parser(name, parents=[common], help=what)
        _dims(p, sigma=False)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--input", help="CoefficientVector JSON file ('-' for standard input)")
        src.add_argument("--random", action="store_true", help="use a seeded random complex input")
        if name == "backward":
            p.add_argument("--normalize", action="store_true", help="divide by psi_[d] first")

    p = sub.add_parser("variety", parents=[common], help="describe V_sigma")
    _dims(p)
    p.add_argument("--degree", action="store_true", help="also compute deg V_sigma numerically")
    _monodromy_opts(p)

    p = sub.add_parser("degree", parents=[common], help="numerical degree of V_sigma")
    _dims(p)
    p.add_argument("--attempts", type=int, default=1, help="independent slices; the maximum count wins")
    _monodromy_opts(p)

    p = sub.add_parser("ccdegree", parents=[common], help="CC degree by monodromy")
    _dims(p)
    p.add_argument("--formulation", choices=("new", "traditional"), default="new")
    p.add_argument("--no-closed-form", action="store_true", help="do not stop early at a known count")
    p.add_argument("--start-cache", help="save the generic start set here (.npz)")
    _monodromy_opts(p)

    p = sub.add_parser("solve", parents=[common], help="all CC solutions for a given Hamiltonian")
    _dims(p)
    _ham_source(p)
    p.add_argument("--formulation", choices=("new", "traditional"), default="new")
    p.add_argument("--start-cache", help="reuse (or create) a generic start set (.npz)")
    _monodromy_opts(p)

    p = sub.add_parser("hamiltonian", parents=[common], help="assemble or generate a Hamiltonian")
    _dims(p, sigma=False)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--integrals", help="integral file")
    g.add_argument("--random", metavar="KIND",
                   help="generic-complex-symmetric, real-symmetric or low-rank(r)")

    p = sub.add_parser("spectrum", parents=[common], help="compare CC energies with the FCI spectrum")
    _dims(p, sigma_required=False)
    _ham_source(p)
    p.add_argument("--solutions", help="SolutionSet JSON; otherwise solve with --sigma")
    p.add_argument("--start-cache", help="generic start set (.npz) used when solving")
    _monodromy_opts(p)

    sub.add_parser("selftest", parents=[common], help="run the desk-scale invariant checks")
    return parser


# ---- output -----------------------------------------------------------------

def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(args, payload: dict, csv_text: str | None = None, text: str | None = None, manifest=None) -> None:
    fmt = args.format
    if fmt == "csv":
        if csv_text is None:
            raise _InputError(f"--format csv is not available for {args.command}")
        body = csv_text
    elif fmt == "text":
        body = text if text is not None else json.dumps(payload, indent=2) + "\n"
    else:
        body = json.dumps(payload) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(body)
        if manifest is not None:
            manifest.add_output(args.out)
    else:
        sys.stdout.write(body)


def _progress(args):
    if args.quiet:
        return None
    start = time.perf_counter()

    def report(loops, count):
        print(f"[ccvar] loop {loops}: {count} solutions ({time.perf_counter() - start:.1f}s)",
              file=sys.stderr, flush=True)
    return report


def _trunc(args):
    from .indexing import TruncationSet
    if args.sigma is None:
        raise _InputError("--sigma is required")
    return TruncationSet(args.sigma, args.d, args.n)


def _cfg(args):
    from .homotopy import TrackerConfig
    return TrackerConfig(threads=max(1, args.threads))


def _stop(args, target=None):
    from .homotopy import StoppingRule
    return StoppingRule(quiet_loops=args.quiet_loops, target=target, max_loops=args.max_loops)


def _load_hamiltonian(args, manifest):
    from .ccsystem import Hamiltonian
    from .chemio import assemble_hamiltonian, parse_integrals
    if getattr(args, "hamiltonian", None):
        manifest.add_input(args.hamiltonian)
        H = Hamiltonian.load(args.hamiltonian)
    else:
        manifest.add_input(args.integrals)
        H = assemble_hamiltonian(parse_integrals(args.integrals), args.d)
    if (H.d, H.n) != (args.d, args.n):
        raise _InputError(f"Hamiltonian is for (d,n)=({H.d},{H.n}), not ({args.d},{args.n})")
    return H


def _closed_form(trunc, formulation: str):
    from .varieties import grassmannian_cc_degree, hypersurface_cc_degree, is_linear
    if formulation != "new":
        return None
    d, n, s = trunc.d, trunc.n, tuple(trunc.sigma)
    if is_linear(trunc):
        return len(trunc) + 1
    if d == 2 and s == (1,) and n >= 4:
        return grassmannian_cc_degree(n)
    if n == 2 * d and s == tuple(range(1, d)):
        return hypersurface_cc_degree(d)
    return None


def _generic_start(args, trunc, formulation, manifest, use_closed_form=True):
    from .homotopy import GenericStart, monodromy_solve
    cache = getattr(args, "start_cache", None)
    if cache and os.path.exists(cache):
        g = GenericStart.load(cache)
        if (g.trunc.d, g.trunc.n, tuple(g.trunc.sigma), g.formulation) != (
                trunc.d, trunc.n, tuple(trunc.sigma), formulation):
            raise _InputError(f"start cache {cache} is for a different system")
        manifest.add_input(cache)
        log.info("loaded %d start solutions from %s", g.count, cache)
        return g
    target = _closed_form(trunc, formulation) if use_closed_form else None
    g = monodromy_solve(trunc, args.seed, _cfg(args), _stop(args, target), formulation, _progress(args))
    if cache:
        g.save(cache)
        if not cache.endswith(".npz"):
            os.replace(cache + ".npz", cache)
        manifest.add_output(cache)
    return g


def _vector_csv(vec, d, n) -> str:
    from .indexing import orbital_basis
    rows = [[" ".join(map(str, I)), repr(float(c.real)), repr(float(c.imag))]
            for I, c in zip(orbital_basis(d, n).sets, vec)]
    return _csv(rows, ["index", "re", "im"])


# ---- subcommands ------------------------------------------------------------

def cmd_masterpoly(args, manifest):
    from .ubp import master_backward, master_forward
    poly = (master_forward if args.direction == "forward" else master_backward)(args.d)
    name = "x" if args.direction == "forward" else "psi"
    recs = [{"monomial": r["monomial"], "coefficient": r["coefficient"]} for r in poly.to_records(name)]
    payload = {"d": args.d, "direction": args.direction, "n_terms": len(recs),
               "text": poly.to_text(name), "terms": recs}
    rows = [[";".join(" ".join(map(str, f)) for f in r["monomial"]), r["coefficient"]] for r in recs]
    _emit(args, payload, _csv(rows, ["monomial", "coefficient"]), poly.to_text(name) + "\n", manifest)
    return {"n_terms": len(recs)}


def _read_vector(args, manifest, reference):
    from .serialize import vector_from_json
    if args.random:
        rng = np.random.default_rng(args.seed)
        from .indexing import orbital_basis
        N = orbital_basis(args.d, args.n).size
        v = (rng.normal(size=N) + 1j * rng.normal(size=N)) / np.sqrt(2)
        v[0] = 1
        return v
    if args.input == "-":
        obj = json.load(sys.stdin)
    else:
        manifest.add_input(args.input)
        with open(args.input) as fh:
            obj = json.load(fh)
    return vector_from_json(obj, args.d, args.n, reference=reference)


def cmd_forward(args, manifest):
    from .expparam import forward
    from .serialize import vector_to_json
    x = _read_vector(args, manifest, reference=1.0)
    psi = forward(x, args.d, args.n)
    _emit(args, vector_to_json(psi, args.d, args.n), _vector_csv(psi, args.d, args.n), manifest=manifest)
    return {"length": int(psi.size)}


def cmd_backward(args, manifest):
    from .expparam import backward
    from .serialize import vector_to_json
    psi = _read_vector(args, manifest, reference=None)
    x = backward(psi, args.d, args.n, normalize=args.normalize)
    _emit(args, vector_to_json(x, args.d, args.n), _vector_csv(x, args.d, args.n), manifest=manifest)
    return {"length": int(x.size)}


def cmd_variety(args, manifest):
    from .varieties import cc_degree_bound, describe, numerical_degree
    trunc = _trunc(args)
    out = describe(trunc).to_dict()
    unstable = False
    if args.degree:
        res = numerical_degree(trunc, args.seed, _cfg(args), _stop(args), _progress(args))
        out["degree"] = res.degree
        out["cc_degree_bound"] = cc_degree_bound(trunc, res.degree)
        out["stabilized"] = res.stabilized
        out["evidence"] = res.evidence
        unstable = not res.stabilized
    rows = [[k, json.dumps(v)] for k, v in out.items()]
    _emit(args, out, _csv(rows, ["key", "value"]), manifest=manifest)
    if unstable:
        raise _Unstable(out)
    return {k: out[k] for k in ("dim", "is_linear") + (("degree",) if args.degree else ())}


def cmd_degree(args, manifest):
    from .varieties import numerical_degree
    trunc = _trunc(args)
    rng = np.random.default_rng(args.seed)
    best = None
    for _ in range(max(1, args.attempts)):
        res = numerical_degree(trunc, rng, _cfg(args), _stop(args), _progress(args))
        if best is None or res.degree > best.degree:
            best = res
    out = {"d": trunc.d, "n": trunc.n, "sigma": list(trunc.sigma), "degree": best.degree,
           "stabilized": best.stabilized, "evidence": best.evidence}
    _emit(args, out, _csv([[best.degree, best.stabilized]], ["degree", "stabilized"]),
          f"deg V_sigma = {best.degree}\n", manifest)
    if not best.stabilized:
        raise _Unstable(out)
    return {"degree": best.degree}


def cmd_ccdegree(args, manifest):
    trunc = _trunc(args)
    g = _generic_start(args, trunc, args.formulation, manifest, not args.no_closed_form)
    from .ccsystem import CCFamily
    fam = CCFamily(trunc, args.formulation)
    lams = np.array([fam.split(y)[1] if fam.split(y)[1] is not None else fam.energy(fam.split(y)[0], g.H)[0]
                     for y in g.Y], dtype=complex)
    stabilized = bool(g.evidence.get("stabilized", False))
    out = {"d": trunc.d, "n": trunc.n, "sigma": list(trunc.sigma), "formulation": args.formulation,
           "count": g.count, "stabilized": stabilized,
           "closed_form": _closed_form(trunc, args.formulation), "evidence": g.evidence,
           "lambdas": [[float(l.real), float(l.imag)] for l in lams]}
    rows = [[repr(float(l.real)), repr(float(l.imag))] for l in lams]
    _emit(args, out, _csv(rows, ["lambda_re", "lambda_im"]), f"CC degree: {g.count}\n", manifest)
    if not stabilized:
        raise _Unstable(out)
    return {"count": g.count, "stabilized": stabilized}


def _solutions_csv(S) -> str:
    rows = []
    for s in S:
        lam = s.lam if s.lam is not None else complex("nan")
        rows.append([s.cls, s.real, repr(float(np.real(lam))), repr(float(np.imag(lam))),
                     repr(float(s.residual)), repr(float(s.condition))])
    return _csv(rows, ["class", "real", "lambda_re", "lambda_im", "residual", "condition"])


def _solve(args, trunc, H, manifest, formulation="new"):
    from .homotopy import solve_target
    g = _generic_start(args, trunc, formulation, manifest)
    if not g.evidence.get("stabilized", False):
        raise _Unstable({"count": g.count, "evidence": g.evidence})
    S = solve_target(g, H, _cfg(args), args.seed)
    S.meta.update({"loops": int(g.evidence.get("loops", 0)), "stabilized": True})
    return S


def cmd_solve(args, manifest):
    trunc = _trunc(args)
    H = _load_hamiltonian(args, manifest)
    S = _solve(args, trunc, H, manifest, args.formulation)
    payload = S.to_dict()
    payload["summary"] = S.summary()
    _emit(args, payload, _solutions_csv(S), json.dumps(S.summary()) + "\n", manifest)
    return S.summary()


def cmd_hamiltonian(args, manifest):
    from .ccsystem import Hamiltonian
    from .chemio import assemble_hamiltonian, parse_integrals, parse_kind, random_hamiltonian
    if args.integrals:
        manifest.add_input(args.integrals)
        H = assemble_hamiltonian(parse_integrals(args.integrals), args.d)
        if H.n != args.n:
            raise _InputError(f"integral file has n={H.n}, not {args.n}")
    else:
        kind, rank = parse_kind(args.random)
        H = random_hamiltonian(args.d, args.n, kind, args.seed, rank)
    summary = {"d": H.d, "n": H.n, "N": H.N, "provenance": H.provenance, "real": H.is_real}
    if args.out and not args.out.endswith(".json") and args.format == "json":
        H.save(args.out)
        manifest.add_output(args.out)
        sys.stdout.write(json.dumps(summary) + "\n")
    else:
        M = H.matrix
        rows = [[repr(float(np.real(v))) for v in row] for row in M]
        _emit(args, H.to_dict(), _csv(rows, [str(j) for j in range(H.N)]), manifest=manifest)
    return summary


def cmd_spectrum(args, manifest):
    from .chemio import spectrum_report
    from .homotopy import SolutionSet
    H = _load_hamiltonian(args, manifest)
    if args.solutions:
        manifest.add_input(args.solutions)
        with open(args.solutions) as fh:
            S = SolutionSet.from_json(fh.read())
    else:
        S = _solve(args, _trunc(args), H, manifest)
    rep = spectrum_report(H, S)
    text = "\n".join(f"{k}: {v}" for k, v in rep.counts.items()) + "\n"
    _emit(args, rep.to_dict(), rep.to_csv(), text, manifest)
    return rep.counts


def cmd_selftest(args, manifest):
    from .selftest import run_checks
    checks = run_checks(progress=None if args.quiet else
                        (lambda name, ok: print(f"[ccvar] {'ok  ' if ok else 'FAIL'} {name}",
                                                file=sys.stderr, flush=True)))
    passed = all(c["passed"] for c in checks)
    out = {"passed": passed, "checks": checks}
    text = "".join(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']} ({c['seconds']:.2f}s)\n" for c in checks)
    _emit(args, out, _csv([[c["name"], c["passed"], c["seconds"]] for c in checks],
                          ["name", "passed", "seconds"]), text, manifest)
    if not passed:
        raise _InputError("self-test failed")
    return {"passed": passed, "checks": len(checks)}


COMMANDS = {"masterpoly": cmd_masterpoly, "forward": cmd_forward, "backward": cmd_backward,
            "variety": cmd_variety, "degree": cmd_degree, "ccdegree": cmd_ccdegree,
            "solve": cmd_solve, "hamiltonian": cmd_hamiltonian, "spectrum": cmd_spectrum,
            "selftest": cmd_selftest}


def main(argv=None) -> int:
    from .serialize import RunManifest
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, stream=sys.stderr,
                        format="[ccvar] %(message)s")
    if args.seed is None:
        args.seed = int(np.random.SeedSequence().generate_state(1)[0] >> 1)
    params = {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(args).items()
              if k not in ("command",)}
    manifest = RunManifest(args.command, params, args.seed, __version__)
    code = EXIT_OK
    summary = {}
    try:
        summary = COMMANDS[args.command](args, manifest) or {}
    except _Unstable as exc:
        code = EXIT_UNSTABLE
        summary = {"error": "not stabilized"}
        print("[ccvar] monodromy did not stabilize; counts are lower bounds", file=sys.stderr)
    except (_InputError, CCVarError, ValueError, OSError, json.JSONDecodeError) as exc:
        code = EXIT_INPUT
        summary = {"error": str(exc)}
        print(f"[ccvar] error: {exc}", file=sys.stderr)
    manifest.finish(code, summary)
    text = manifest.to_json()
    print(f"[ccvar] manifest {text}", file=sys.stderr)
    if args.manifest:
        with open(args.manifest, "w") as fh:
            fh.write(text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
