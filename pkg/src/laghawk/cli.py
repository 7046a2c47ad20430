"""Command-line front end: simulate, estimate, asymptotics.

Results go to standard output or ``--out`` files (JSON for structured
results, CSV for sweep tables, plain text for event streams); diagnostics go
to standard error, with verbosity controlled by ``HAWKES_LOG=debug|info``.

Exit codes: 0 success, 2 validation error, 3 numerical degeneracy, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .asymptotics import (
    DEFAULT_QUAD_TOL,
    COND_CAP,
    SpectralModel,
    closed_loop_check,
    conditioning_study,
    pseudo_true,
    study_csv,
)
from .basis import KernelBasis
from .errors import DegenerateGramError, ParameterError, StreamFormatError
from .estimate import estimate_document, estimate_from_stream
from .simulate import read_stream, simulate_exponential, simulate_laguerre, stream_text
from .statespace import build_state_space

__all__ = ["main", "main_entry"]

_LOG_LEVELS = {"debug": logging.DEBUG, "info": logging.INFO}


def _configure_logging() -> None:
    level = _LOG_LEVELS.get(os.environ.get("HAWKES_LOG", "").lower(), logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")


def _parse_alpha(text: str) -> np.ndarray:
    try:
        values = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ParameterError(f"could not parse --alpha {text!r}: {exc}") from exc
    if not values:
        raise ParameterError("--alpha must contain at least one value")
    return np.asarray(values)


def _parse_orders(text: str) -> list[int]:
    try:
        if ":" in text:
            lo, hi = text.split(":")
            lo_i, hi_i = int(lo), int(hi)
            if lo_i > hi_i:
                raise ValueError("empty range")
            return list(range(lo_i, hi_i + 1))
        return [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise ParameterError(f"could not parse --P {text!r} (use N, N:M, or N,M,...)") from exc


def _parse_terms(text: str) -> tuple[np.ndarray, np.ndarray]:
    amplitudes, rates = [], []
    try:
        for chunk in text.split(","):
            a, b = chunk.split(":")
            amplitudes.append(float(a))
            rates.append(float(b))
    except ValueError as exc:
        raise ParameterError(f"could not parse --terms {text!r} (use a:b,a:b,...)") from exc
    return np.asarray(amplitudes), np.asarray(rates)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="ascii") as fh:
            fh.write(text)


def _json_text(document: dict) -> str:
    return json.dumps(document, indent=2) + "\n"


def cmd_simulate(args: argparse.Namespace) -> None:
    if args.kernel == "exp":
        if args.gamma is None:
            raise ParameterError("--gamma is required for --kernel exp")
        stream = simulate_exponential(args.c0, args.gamma, args.beta, args.T, args.seed)
        params = {
            "kernel": "exp",
            "c0": args.c0,
            "gamma": args.gamma,
            "beta": args.beta,
            "T": args.T,
            "seed": args.seed,
        }
    else:
        if args.alpha is None:
            raise ParameterError("--alpha is required for --kernel laguerre")
        alpha = _parse_alpha(args.alpha)
        basis = KernelBasis.laguerre(args.beta, alpha.size)
        stream = simulate_laguerre(args.c0, alpha, basis, args.T, args.seed)
        params = {
            "kernel": "laguerre",
            "c0": args.c0,
            "alpha": [float(a) for a in alpha],
            "beta": args.beta,
            "P": int(alpha.size),
            "T": args.T,
            "seed": args.seed,
        }
    params["n_events"] = len(stream)
    text = stream_text(stream)
    if args.out is None:
        sys.stdout.write(text)
    else:
        _emit(text, args.out)
        _emit(_json_text(params), args.out + ".json")
        sys.stdout.write(_json_text(params))


def cmd_estimate(args: argparse.Namespace) -> None:
    stream = read_stream(args.stream)
    basis = KernelBasis(args.basis, args.beta, args.P)
    est = estimate_from_stream(stream, basis)
    _emit(_json_text(estimate_document(est)), args.out)


def _asymptotics_document(args: argparse.Namespace, spec: SpectralModel, P: int) -> dict:
    basis = KernelBasis(args.basis, args.beta, P)
    result = pseudo_true(spec, basis, tol=args.tol)
    model = build_state_space(basis)
    loop = closed_loop_check(result, model)
    return {
        "basis": {"family": basis.family, "beta": basis.beta, "P": basis.order_P},
        "lambda": spec.Lambda,
        "gamma": spec.Gamma,
        "quad_tol": args.tol,
        "R_star": [[float(v) for v in row] for row in result.R_star],
        "R_star_cross": [float(v) for v in result.R_star_cross],
        "alpha_star": [float(v) for v in result.alpha_star],
        "c_star": result.c_star,
        "gamma_star": result.gamma_star,
        "eig_min": result.eig_min,
        "eig_max": result.eig_max,
        "cond": result.cond,
        "closed_loop": {
            "eigenvalues_real": [float(v) for v in loop.eigenvalues.real],
            "eigenvalues_imag": [float(v) for v in loop.eigenvalues.imag],
            "is_hurwitz": loop.is_hurwitz,
            "lyapunov_residual": loop.lyapunov_residual,
        },
    }


def cmd_asymptotics(args: argparse.Namespace) -> None:
    if (args.gamma is None) == (args.terms is None):
        raise ParameterError("provide exactly one of --gamma (exponential truth) or --terms")
    orders = _parse_orders(args.P)
    if args.terms is not None:
        amplitudes, rates = _parse_terms(args.terms)
        spec = SpectralModel.exponential_mixture(args.lam, amplitudes, rates)
    else:
        spec = SpectralModel.exponential(args.lam, args.gamma, args.beta)
    if args.study:
        rows = conditioning_study(spec.Gamma, args.beta, args.lam, orders, tol=args.tol)
        metadata = {
            "gamma": spec.Gamma,
            "beta": args.beta,
            "lambda": args.lam,
            "quad_tol": args.tol,
            "cond_cap": COND_CAP,
        }
        _emit(study_csv(rows, metadata), args.out)
        return
    if len(orders) != 1:
        raise ParameterError("--P must be a single order unless --study is given")
    _emit(_json_text(_asymptotics_document(args, spec, orders[0])), args.out)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laghawk",
        description="Hawkes excitation-kernel identification in an orthonormal Laguerre basis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a stationary Hawkes event stream")
    sim.add_argument("--kernel", choices=("exp", "laguerre"), default="exp")
    sim.add_argument("--c0", type=float, required=True, help="background rate")
    sim.add_argument("--gamma", type=float, help="branching ratio (exp kernel)")
    sim.add_argument("--alpha", type=str, help="comma-separated basis weights (laguerre kernel)")
    sim.add_argument("--beta", type=float, required=True, help="kernel decay rate")
    sim.add_argument("--T", type=float, required=True, help="observation horizon")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", type=str, default=None, help="stream file (JSON sidecar at <out>.json)")
    sim.set_defaults(handler=cmd_simulate)

    est = sub.add_parser("estimate", help="fit the excitation kernel from a stream file")
    est.add_argument("stream", type=str, help="event-stream file")
    est.add_argument("--basis", choices=("laguerre", "erlang"), default="laguerre")
    est.add_argument("--P", type=int, required=True, help="basis order")
    est.add_argument("--beta", type=float, required=True, help="basis decay rate")
    est.add_argument("--out", type=str, default=None)
    est.set_defaults(handler=cmd_estimate)

    asy = sub.add_parser("asymptotics", help="population quantities and the conditioning study")
    asy.add_argument("--gamma", type=float, help="branching ratio of the exponential truth")
    asy.add_argument("--terms", type=str, help="exponential-mixture truth, a:b,a:b,... for sum a*exp(-b t)")
    asy.add_argument("--beta", type=float, required=True, help="basis decay rate")
    asy.add_argument("--lambda", dest="lam", type=float, required=True, help="stationary event rate")
    asy.add_argument("--P", type=str, required=True, help="basis order (N), or N:M / N,M,... with --study")
    asy.add_argument("--basis", choices=("laguerre", "erlang"), default="laguerre")
    asy.add_argument("--study", action="store_true", help="emit the Laguerre-vs-Erlang conditioning table")
    asy.add_argument("--tol", type=float, default=DEFAULT_QUAD_TOL, help="quadrature tolerance")
    asy.add_argument("--out", type=str, default=None)
    asy.set_defaults(handler=cmd_asymptotics)
    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        args.handler(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegenerateGramError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (StreamFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 0


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
