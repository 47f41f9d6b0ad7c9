"""Command-line front end.

Exit codes: 0 success, 2 validation failure, 3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .correlations import (
    FULL_RANK_GATE,
    ContinuitySchedule,
    GHZSpec,
    analyze_state,
    ghz_state,
    spectrum_continuity,
    theorem3_spectrum,
)
from .errors import ConvergenceError, IrrcorrError, ValidationError
from .io import load_density_matrix
from .maxent import DEFAULT_MAX_ITER, DEFAULT_TOL, OPTIMIZERS
from .qstate import DEFAULT_DENSE_LIMIT
from .spectrum import CorrelationSpectrum
from .stabilizer import StabilizerGroup, rank_profile, theorem2_spectrum, to_density_matrix

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_UNCONVERGED = 3

VERIFY_MAX_QUBITS = 4

log = logging.getLogger("irrcorr")


def _emit(payload: dict, spectrum: CorrelationSpectrum | None, fmt: str, out) -> None:
    if fmt == "csv":
        if spectrum is not None:
            out.write(spectrum.to_csv())
        else:
            out.write("k,C_k,uncertainty\n")
    else:
        out.write(json.dumps(payload, indent=2) + "\n")


def _schedule(args) -> ContinuitySchedule | None:
    if args.eps_schedule is None:
        return None
    return ContinuitySchedule.parse(args.eps_schedule)


def _solver_kwargs(args) -> dict:
    return {"tol": args.tol, "max_iter": args.max_iter, "optimizer": args.optimizer}


def _verify(rho, exact: CorrelationSpectrum, args) -> dict | None:
    if rho.n_qubits > VERIFY_MAX_QUBITS:
        print(f"--verify skipped: only supported for n <= {VERIFY_MAX_QUBITS}", file=sys.stderr)
        return None
    numeric = spectrum_continuity(rho, _schedule(args), **_solver_kwargs(args))
    dev = exact.max_deviation(numeric)
    print(f"max deviation from continuity pipeline: {dev:.3e}", file=sys.stderr)
    return {"spectrum": numeric.to_json(), "max_deviation": dev}


def cmd_analyze(args, out) -> int:
    rho = load_density_matrix(args.input, dense_limit=args.dense_limit)
    if args.max_order is not None and not 2 <= args.max_order <= rho.n_qubits:
        raise ValidationError(f"--max-order must lie in 2..{rho.n_qubits}")
    if args.method == "numeric" and rho.min_eigval() < FULL_RANK_GATE:
        raise ValidationError(
            f"method 'numeric' needs a full-rank state (smallest eigenvalue >= {FULL_RANK_GATE:g}); "
            "use --method continuity or auto"
        )
    try:
        spec = analyze_state(rho, args.method, schedule=_schedule(args),
                             max_order=args.max_order, **_solver_kwargs(args))
    except ConvergenceError as exc:
        best = exc.best.diagnostics() if exc.best is not None else None
        _emit({"n": rho.n_qubits, "converged": False, "error": str(exc), "best_fit": best},
              None, args.format, out)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNCONVERGED
    payload = spec.to_json()
    payload["diagnostics"] = list(spec.diagnostics)
    _emit(payload, spec, args.format, out)
    return EXIT_OK


def cmd_stabilizer(args, out) -> int:
    group = StabilizerGroup.from_text(args.generators)
    spec = theorem2_spectrum(group)
    payload = {"spectrum": spec.to_json(), "rank_profile": rank_profile(group).to_json()}
    if args.verify:
        rho = to_density_matrix(group, dense_limit=args.dense_limit)
        payload["verification"] = _verify(rho, spec, args)
    _emit(payload, spec, args.format, out)
    return EXIT_OK


def cmd_ghz(args, out) -> int:
    ghz = GHZSpec(args.n, args.alpha_sq, args.phi)
    spec = theorem3_spectrum(ghz)
    payload = {"spectrum": spec.to_json()}
    if args.verify:
        rho = ghz_state(ghz, dense_limit=args.dense_limit).density_matrix()
        payload["verification"] = _verify(rho, spec, args)
    _emit(payload, spec, args.format, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL,
                        help="max constraint violation of each maxent fit")
    common.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    common.add_argument("--eps-schedule", default=None,
                        help="comma-separated decreasing depolarization strengths")
    common.add_argument("--dense-limit", type=int, default=DEFAULT_DENSE_LIMIT)
    common.add_argument("--optimizer", choices=OPTIMIZERS, default="newton")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="irrcorr", description="Irreducible multi-particle correlations of qubit states."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="spectrum of a state file")
    p.add_argument("--input", required=True, help="density-matrix or state-vector JSON file")
    p.add_argument("--method", choices=("auto", "numeric", "continuity"), default="auto")
    p.add_argument("--max-order", type=int, default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("stabilizer", parents=[common], help="exact spectrum of a stabilizer state")
    p.add_argument("generators", help='comma-separated generators, e.g. "+XXX,+ZZI,+IZZ"')
    p.add_argument("--verify", action="store_true", help="cross-check numerically (n <= 4)")
    p.set_defaults(func=cmd_stabilizer)

    p = sub.add_parser("ghz", parents=[common], help="closed-form spectrum of a generalized GHZ state")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha-sq", type=float, required=True)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--verify", action="store_true", help="cross-check numerically (n <= 4)")
    p.set_defaults(func=cmd_ghz)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, out)
    except (IrrcorrError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
