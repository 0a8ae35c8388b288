"""``povm-lab`` command-line front end.

Every subcommand reads one JSON document (``--input`` or stdin), writes one
JSON document (``--output`` or stdout) and reports problems on stderr.

Exit codes: 0 success, 1 input or validation error, 2 numerical
verification failure, 3 undetermined verdict.
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter
from typing import Sequence

from . import io
from .convex import (
    classical_combination,
    cstar_combination,
    extremal_decomposition,
    is_cstar_extreme,
    sharp_coarsening,
    unitarily_equivalent,
    verify_coarsening,
    weakly_independent,
)
from .errors import DepthExceeded, InvariantViolation, PovmLabError, VerificationError
from .integral import gamma, gamma_c, integrate, natural_extension, omega0, verify_ucp
from .jensen import hp_jensen_gap, jensen_gap, min_eigenvalue, operator_convex
from .linalg import Tolerance, default_tolerance
from .measure import (
    DENSITY_CATALOG,
    catalog_density,
    discretize_density,
    non_principal_rn,
    principal_rn_derivative,
)
from .model import FinitePovm, is_sharp, maximally_mixed, outcome_probability
from .randomness import RngStream, sample_outcomes

EXIT_OK, EXIT_INPUT, EXIT_VERIFY, EXIT_UNDETERMINED = 0, 1, 2, 3

# human-readable names of the results each verdict relies on (see the README glossary)
TRACE = {
    "extreme": "extremality <=> weak independence of effect ranges",
    "cstar": "C*-extreme points are exactly the sharp measurements",
    "sharp": "sharp measurement: pairwise-orthogonal projections",
    "gamma": "Gamma-transform yields a unital completely positive map",
    "omega": "Omega0 is a left inverse of Gamma",
    "choi": "Choi block positivity certifies complete positivity",
    "rn": "principal Radon-Nikodym derivative against the induced measure",
    "rn2": "non-principal Radon-Nikodym derivative and its reconstruction",
    "integral": "quantum integral of a quantum random variable",
    "discretize": "finitely supported POVMs are dense",
    "probability": "outcome probability tr(rho nu(E))",
    "cstar_comb": "C*-convex combination of POVMs",
    "coarsening": "coarsening as a proper C*-convex combination",
    "km": "decomposition into extreme points via perturbation",
    "sharp_coarsening": "every POVM is a C*-convex combination of sharp POVMs",
    "equivalence": "unitary equivalence u* nu u",
    "jensen": "operator Jensen inequality for POVM integrals",
    "hp": "Hansen-Pedersen-Jensen inequality",
}


class _Parser(argparse.ArgumentParser):
    """Argument parser that maps usage errors to the input-error exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


class Failure(Exception):
    """Abort a subcommand with a given exit code after writing its output."""

    def __init__(self, code: int, message: str, output: dict | None = None):
        super().__init__(message)
        self.code = code
        self.output = output


# helpers ------------------------------------------------------------------

def _read(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load(path, kind: str, cfg: Tolerance, strict: bool = True):
    return io.parse_as(_read(path), kind, cfg, strict)


def _input(args, kind: str, strict: bool = True):
    return _load(args.input, kind, args.cfg, strict)


def _report(name: str, data: dict, *trace_keys) -> dict:
    return io.report_payload(name, data, [TRACE[k] for k in trace_keys])


def _labels_arg(text: str | None) -> list[str] | None:
    if text is None:
        return None
    return [x for x in (s.strip() for s in text.split(",")) if x]


def _floats_arg(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise InvariantViolation(f"cannot parse numbers from {text!r}") from None


# subcommands --------------------------------------------------------------

def cmd_validate(args):
    text = _read(args.input)
    payload = io.loads_document(text)["payload"]
    obj = io.decode_payload(payload, args.cfg)
    data = {"valid": True, "kind": payload["kind"]}
    if isinstance(obj, FinitePovm):
        data.update(dim=obj.dim, outcomes=len(obj))
    elif hasattr(obj, "dim"):
        data["dim"] = obj.dim
    return _report("validate", data)


def cmd_classify(args):
    nu = _input(args, "povm")
    independence = weakly_independent(nu.effects, args.cfg)
    data = {
        "sharp": is_sharp(nu, args.cfg),
        "extreme": independence.independent,
        "cstar_extreme": is_cstar_extreme(nu, args.cfg),
    }
    if independence.witness is not None:
        data["witness"] = {x: io.encode_matrix(t) for x, t in zip(nu.labels, independence.witness)}
    return _report("classify", data, "sharp", "extreme", "cstar")


def cmd_integrate(args):
    nu = _input(args, "povm")
    f = _load(args.qrv, "qrv", args.cfg)
    return _report("integrate", {"integral": io.encode_matrix(integrate(f, nu, args.cfg))}, "integral")


def _state(args, dim):
    if args.state is None:
        return maximally_mixed(dim)
    return _load(args.state, "state", args.cfg)


def cmd_probabilities(args):
    nu = _input(args, "povm")
    rho = _state(args, nu.dim)
    data = {"outcomes": {x: outcome_probability(rho, nu, [x], args.cfg) for x in nu.labels}}
    event = _labels_arg(args.event)
    if event is not None:
        data["event"] = {"labels": event, "probability": outcome_probability(rho, nu, event, args.cfg)}
    return _report("probabilities", data, "probability")


def cmd_sample(args):
    nu = _input(args, "povm")
    rho = _state(args, nu.dim)
    if args.shots < 1:
        raise InvariantViolation("--shots must be positive")
    outcomes = sample_outcomes(rho, nu, args.shots, RngStream(args.seed))
    counts = Counter(p.label for p in outcomes)
    data = {"shots": args.shots, "seed": args.seed, "counts": {x: counts.get(x, 0) for x in nu.labels}}
    return _report("sample", data, "probability")


def cmd_rn(args):
    nu = _input(args, "povm")
    if args.mode == "principal":
        return io.encode_payload(principal_rn_derivative(nu))
    if args.base is None:
        raise InvariantViolation("non-principal derivative needs --base")
    base = _load(args.base, "povm", args.cfg)
    return io.encode_payload(non_principal_rn(nu, base, args.cfg))


def cmd_discretize(args):
    if args.catalog is not None:
        grid = catalog_density(args.catalog, args.samples, args.dim, cfg=args.cfg)
    else:
        grid = _input(args, "density_grid")
    return io.encode_payload(discretize_density(grid, args.bins, args.cfg))


def cmd_transform(args):
    cfg = args.cfg
    if args.mode == "gamma":
        return io.encode_payload(gamma(_input(args, "povm"), cfg))
    if args.mode == "omega":
        return io.encode_payload(omega0(_input(args, "ucp"), cfg))
    if args.mode == "gamma-c":
        nu = _input(args, "povm")
        sigma = gamma_c(nu)
        back = omega0(natural_extension(sigma, cfg), cfg)
        data = {
            "restriction": [
                {"label": p.label, "effect": io.encode_matrix(b)} for p, b in zip(sigma.points, sigma.effects)
            ],
            "natural_extension": io.encode_payload(natural_extension(sigma, cfg)),
            "round_trip_residual": nu.distance(back),
        }
        return _report("gamma-c", data, "gamma", "omega")
    phi = _input(args, "ucp", strict=False)
    report = verify_ucp(phi, cfg)
    out = _report("verify-ucp", report.as_dict(), "choi")
    if not (report.unital and report.cp):
        raise Failure(EXIT_VERIFY, "map is not unital completely positive", out)
    return out


def _povm_list(args) -> list[FinitePovm]:
    if not args.povm:
        raise InvariantViolation("give the component POVMs with --povm (repeatable)")
    return [_load(p, "povm", args.cfg) for p in args.povm]


def _coefficients(args):
    if args.coeffs is None:
        raise InvariantViolation("give the coefficients as a channel document with --coeffs")
    return io.coefficients_from_channel(_load(args.coeffs, "channel", args.cfg), args.cfg)


def cmd_combine(args):
    povms = _povm_list(args)
    if args.mode == "cstar":
        return io.encode_payload(cstar_combination(_coefficients(args), povms, args.cfg))
    if args.weights is None:
        raise InvariantViolation("classical combination needs --weights")
    return io.encode_payload(classical_combination(_floats_arg(args.weights), povms, args.cfg))


def cmd_decompose(args):
    nu = _input(args, "povm")
    if args.mode == "sharp-coarsening":
        coeffs, diracs = sharp_coarsening(nu, args.cfg)
        data = {
            "coefficients": io.encode_payload(coeffs),
            "proper": coeffs.proper,
            "components": [io.encode_payload(d) for d in diracs],
            "residual": nu.distance(cstar_combination(coeffs, diracs, args.cfg)),
        }
        return _report("sharp-coarsening", data, "sharp_coarsening", "cstar_comb")

    def encode(dec):
        return {
            "components": [{"weight": w, "povm": io.encode_payload(c)} for w, c in dec],
            "depth": dec.depth,
            "residual": dec.residual(nu),
        }

    try:
        dec = extremal_decomposition(nu, args.cfg, args.max_depth)
    except DepthExceeded as exc:
        raise Failure(EXIT_VERIFY, str(exc), _report("decompose-extremal", encode(exc.partial), "km")) from None
    return _report("decompose-extremal", encode(dec), "km", "extreme")


def cmd_equivalent(args):
    nu = _input(args, "povm")
    if args.other is None:
        raise InvariantViolation("equivalence needs --other")
    other = _load(args.other, "povm", args.cfg)
    verdict = unitarily_equivalent(nu, other, RngStream(args.seed), args.cfg, args.trials)
    data = {"verdict": verdict.verdict, "reason": verdict.reason}
    if verdict.unitary is not None:
        data["unitary"] = io.encode_matrix(verdict.unitary)
        data["residual"] = verdict.residual
    out = _report("equivalent", data, "equivalence")
    if verdict.verdict == "undetermined":
        raise Failure(EXIT_UNDETERMINED, verdict.reason, out)
    return out


def cmd_coarsen_verify(args):
    nu = _input(args, "povm")
    coeffs = _coefficients(args)
    ok = verify_coarsening(nu, coeffs, _povm_list(args), args.cfg)
    out = _report("coarsen-verify", {"coarsening": ok, "proper": coeffs.proper}, "coarsening")
    if not ok:
        raise Failure(EXIT_VERIFY, "input is not a proper C*-convex combination of the given POVMs", out)
    return out


def cmd_jensen(args):
    theta = operator_convex(args.function, args.power)
    if args.mode == "povm":
        nu = _input(args, "povm")
        if args.qrv is None:
            raise InvariantViolation("jensen povm needs --qrv")
        gap = jensen_gap(_load(args.qrv, "qrv", args.cfg), nu, theta, args.cfg)
        keys = ("jensen",)
    else:
        if args.ys is None:
            raise InvariantViolation("jensen hansen-pedersen needs --ys (a qrv document, values in order)")
        ys = _load(args.ys, "qrv", args.cfg)
        gap = hp_jensen_gap(_coefficients(args), list(ys.values()), theta, args.cfg)
        keys = ("hp",)
    lam = min_eigenvalue(gap)
    holds = lam >= -args.cfg.identity_tol
    out = _report(
        "jensen",
        {"function": theta.name, "gap": io.encode_matrix(gap), "min_eigenvalue": lam, "holds": holds},
        *keys,
    )
    if not holds:
        raise Failure(EXIT_VERIFY, f"Jensen gap has negative eigenvalue {lam:.3g}", out)
    return out


# parser -------------------------------------------------------------------

def _seed(text: str) -> int:
    value = int(text, 10)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", metavar="PATH", help="input document (default: stdin)")
    common.add_argument("--output", metavar="PATH", help="output document (default: stdout)")
    common.add_argument("--tol", type=float, help="identity tolerance; eigenvalue tolerance is tol/10 "
                        "(default: $POVM_LAB_TOL or 1e-9)")
    common.add_argument("--seed", type=_seed, default=0, help="random seed (unsigned 64-bit, default 0)")
    common.add_argument("--pretty", action="store_true", help="indent the output JSON")

    parser = _Parser(prog="povm-lab", description="Numerics for finitely supported POVMs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "validate any document")
    add("classify", cmd_classify, "sharp / extreme / C*-extreme verdicts for a POVM")
    p = add("integrate", cmd_integrate, "integral of a quantum random variable against a POVM")
    p.add_argument("--qrv", metavar="PATH", required=True)
    p = add("probabilities", cmd_probabilities, "outcome probabilities tr(rho nu(E))")
    p.add_argument("--state", metavar="PATH", help="state document (default: maximally mixed)")
    p.add_argument("--event", metavar="LABELS", help="comma-separated labels of an event")
    p = add("sample", cmd_sample, "sample measurement outcomes")
    p.add_argument("--state", metavar="PATH")
    p.add_argument("--shots", type=int, default=1000)
    p = add("rn", cmd_rn, "Radon-Nikodym derivatives")
    p.add_argument("mode", choices=["principal", "non-principal"])
    p.add_argument("--base", metavar="PATH", help="base POVM for the non-principal derivative")
    p = add("discretize", cmd_discretize, "finite POVM from a matrix density on [0, 1]")
    p.add_argument("--catalog", choices=sorted(DENSITY_CATALOG), help="use a built-in density instead of --input")
    p.add_argument("--samples", type=int, default=1025, help="grid size for --catalog")
    p.add_argument("--dim", type=int, default=None, help="dimension for --catalog densities")
    p.add_argument("--bins", type=int, default=16)
    p = add("transform", cmd_transform, "POVM <-> ucp map transforms")
    p.add_argument("mode", choices=["gamma", "omega", "gamma-c", "verify-ucp"])
    p = add("combine", cmd_combine, "C*-convex or classical combination of POVMs")
    p.add_argument("mode", choices=["cstar", "classical"])
    p.add_argument("--coeffs", metavar="PATH", help="channel document holding the coefficients")
    p.add_argument("--povm", metavar="PATH", action="append", help="component POVM (repeatable)")
    p.add_argument("--weights", metavar="W1,W2,...")
    p = add("decompose", cmd_decompose, "extremal or sharp-coarsening decomposition")
    p.add_argument("mode", choices=["extremal", "sharp-coarsening"])
    p.add_argument("--max-depth", type=int, default=None)
    p = add("equivalent", cmd_equivalent, "unitary equivalence test")
    p.add_argument("--other", metavar="PATH", required=True)
    p.add_argument("--trials", type=int, default=8)
    p = add("coarsen-verify", cmd_coarsen_verify, "check a proper C*-convex combination")
    p.add_argument("--coeffs", metavar="PATH", required=True)
    p.add_argument("--povm", metavar="PATH", action="append")
    p = add("jensen", cmd_jensen, "operator Jensen gap")
    p.add_argument("mode", choices=["povm", "hansen-pedersen"])
    p.add_argument("--function", choices=["square", "inverse", "neg_log", "xlogx", "power"], required=True)
    p.add_argument("--power", type=float, default=None)
    p.add_argument("--qrv", metavar="PATH")
    p.add_argument("--ys", metavar="PATH")
    p.add_argument("--coeffs", metavar="PATH")
    return parser


def _emit(args, payload: dict):
    text = io.dumps(io.document(payload), args.pretty)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _describe(exc: Exception) -> str:
    if isinstance(exc, InvariantViolation):
        detail = ", ".join(f"{k} {v:.3g}" if isinstance(v, float) else f"{k} {v}" for k, v in exc.details.items())
        return f"{exc.name}: {exc}" + (f" ({detail})" if detail else "")
    return f"{type(exc).__name__}: {exc}"


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        args.cfg = Tolerance.from_identity_tol(args.tol) if args.tol is not None else default_tolerance()
        payload = args.func(args)
    except Failure as exc:
        if exc.output is not None:
            _emit(args, exc.output)
        print(f"povm-lab: {exc}", file=sys.stderr)
        return exc.code
    except VerificationError as exc:
        print(f"povm-lab: verification failed: {_describe(exc)}", file=sys.stderr)
        return EXIT_VERIFY
    except (PovmLabError, OSError, ValueError) as exc:
        print(f"povm-lab: error: {_describe(exc)}", file=sys.stderr)
        return EXIT_INPUT
    _emit(args, payload)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
