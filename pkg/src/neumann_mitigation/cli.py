"""Command-line experiment harness.

Subcommands reproduce the reference experiments at configurable scale and
emit machine-readable CSV/JSON.  Every run is fully determined by its
config; rerunning writes byte-identical files.  Output files embed the tool
version, the config, the master seed, and the computed plan as ``# key=value``
comment lines ahead of the CSV header.

Exit codes: 0 success, 2 validation error, 3 budget/cap error,
4 property failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import BudgetExceededError, PropertyViolation, ValidationError
from .mitigation import DEFAULT_CAP, plan_mitigation, run_mitigation
from .noise import (
    TensorProductNoise,
    induced_one_norm,
    load_noise_model,
    noise_resistance,
    noise_strength,
    random_noise_matrix,
    reduce_qubits,
)
from .oracle import invert_histogram, verify_truncation_bound
from .sampling import sequential_measure_batch
from .series import coefficients, optimal_truncation
from .states import (
    DiagonalState,
    Observable,
    exact_expectation,
    pauli_z_observable,
    uniform_state,
)

OUTDIR_ENV = "NEUMANN_MITIGATION_OUTDIR"


# ---------------------------------------------------------------------------
# shared helpers


def parse_noise_spec(spec: str, qubits: int | None, seed: int):
    """Build a noise model from ``tensor:<rates>``, ``file:<path>`` or ``random:<xi>``.

    Tensor rates are ``a1,..,an[/b1,..,bn]``; omitted betas copy the alphas.
    """
    if spec.startswith("file:"):
        return load_noise_model(spec[len("file:") :])
    if spec.startswith("random:"):
        try:
            xi = float(spec[len("random:") :])
        except ValueError as exc:
            raise ValidationError(f"bad random noise spec {spec!r}") from exc
        if qubits is None:
            raise ValidationError("--noise random:<xi> needs --qubits")
        return random_noise_matrix(qubits, xi, seed)
    if spec.startswith("tensor:"):
        body = spec[len("tensor:") :]
        try:
            if "/" in body:
                a_str, b_str = body.split("/", 1)
                alphas = tuple(float(x) for x in a_str.split(","))
                betas = tuple(float(x) for x in b_str.split(","))
            else:
                alphas = tuple(float(x) for x in body.split(","))
                betas = alphas
        except ValueError as exc:
            raise ValidationError(f"bad tensor noise spec {spec!r}") from exc
        return TensorProductNoise(alphas, betas)
    raise ValidationError(
        f"noise spec {spec!r} must start with 'tensor:', 'file:' or 'random:'"
    )


def _resolve_out(out: str | None, default_name: str) -> Path:
    path = Path(out if out else default_name)
    if not path.is_absolute():
        base = os.environ.get(OUTDIR_ENV, "")
        if base:
            path = Path(base) / path
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _write_csv(path, schema, config, seed, header, rows, plan=None, extra=None):
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema={schema}\n")
        fh.write(f"# tool=neumann-mitigation {__version__}\n")
        fh.write(f"# config={json.dumps(config, sort_keys=True)}\n")
        fh.write(f"# seed={seed}\n")
        if plan is not None:
            fh.write(f"# plan={json.dumps(plan)}\n")
        for key, value in (extra or {}).items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _run_trials(fn, trials: int, threads: int):
    if threads <= 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(trials)))


def _stderr(values: list[float]) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / np.sqrt(len(values)))


# ---------------------------------------------------------------------------
# subcommands


def cmd_resistance(args) -> int:
    model = parse_noise_spec(args.noise, args.qubits, args.seed)
    xi = noise_resistance(model)
    report = {"qubits": model.n, "resistance": xi, "min_diagonal": 1.0 - xi / 2.0}
    if isinstance(model, TensorProductNoise):
        report["strength"] = noise_strength(model)
    if args.epsilon is not None:
        if xi == 0.0:
            report["order"] = 0
        elif xi < 1.0:
            report["order"] = optimal_truncation(args.epsilon, xi)
        else:
            report["order"] = None
        report["epsilon"] = args.epsilon
    for key, value in report.items():
        print(f"{key}={value}")
    if report.get("order", 0) is None:
        print("warning: resistance >= 1, no truncation order reaches the precision")
    if args.out:
        path = _resolve_out(args.out, "resistance.json")
        path.write_text(json.dumps(report, sort_keys=True))
        print(f"wrote {path}")
    return 0


def cmd_fig3(args) -> int:
    if not (0.0 < args.xi_min <= args.xi_max < 1.0):
        raise ValidationError("need 0 < --xi-min <= --xi-max < 1")
    if args.xi_step <= 0.0:
        raise ValidationError("--xi-step must be positive")
    count = int((args.xi_max - args.xi_min) / args.xi_step + 1e-9) + 1
    rows = []
    for i in range(count):
        xi = args.xi_min + i * args.xi_step
        rows.append((xi, optimal_truncation(args.epsilon, xi)))
    config = {
        "subcommand": "fig3",
        "epsilon": args.epsilon,
        "xi_min": args.xi_min,
        "xi_max": args.xi_max,
        "xi_step": args.xi_step,
    }
    path = _resolve_out(args.out, "fig3.csv")
    _write_csv(path, "fig3", config, seed="-", header=["xi", "order"], rows=rows)
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def _scatter_config(args) -> dict:
    return {
        "subcommand": "scatter",
        "qubits": args.qubits,
        "noise": args.noise,
        "xi": args.xi,
        "epsilon": args.epsilon,
        "delta": args.delta,
        "trials": args.trials,
        "seed": args.seed,
        "mode": args.mode,
        "cap": args.cap,
    }


def cmd_scatter(args) -> int:
    spec = args.noise or f"random:{args.xi if args.xi is not None else 0.657}"
    model = parse_noise_spec(spec, args.qubits, args.seed)
    xi = args.xi if args.xi is not None else noise_resistance(model)
    state = uniform_state(model.n)
    observable = pauli_z_observable(model.n)
    true_value = exact_expectation(observable, state)
    plan = plan_mitigation(args.epsilon, args.delta, xi)

    def one_trial(t):
        return run_mitigation(
            state,
            model,
            observable,
            xi,
            args.delta,
            args.epsilon,
            seed=args.seed + t,
            mode=args.mode,
            cap=args.cap,
        )

    results = _run_trials(one_trial, args.trials, args.threads)
    rows = [
        (t, r.per_order[0], r.estimate, args.seed + t) for t, r in enumerate(results)
    ]
    noisy = [r.per_order[0] for r in results]
    mitigated = [r.estimate for r in results]
    bias = float(np.mean(noisy) - true_value)
    within = float(np.mean([abs(e - true_value) <= 2 * args.epsilon for e in mitigated]))
    path = _resolve_out(args.out, "scatter.csv")
    _write_csv(
        path,
        "scatter",
        _scatter_config(args),
        seed=args.seed,
        header=["trial", "noisy", "mitigated", "seed"],
        rows=rows,
        plan=plan.to_dict(),
        extra={
            "true_value": true_value,
            "epsilon": args.epsilon,
            "noisy_bias": bias,
            "fraction_within_2eps": within,
        },
    )
    print(f"true_value={true_value}")
    print(f"noisy_bias={bias}")
    print(f"fraction_within_2eps={within}")
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def cmd_scaling(args) -> int:
    spec = args.noise or f"random:{args.xi}"
    base = parse_noise_spec(spec, args.max_qubits, args.seed)
    if isinstance(base, TensorProductNoise):
        base = base.expand()
    if base.n != args.max_qubits:
        raise ValidationError(
            f"base noise acts on {base.n} qubits but --max-qubits is {args.max_qubits}"
        )
    rows = []
    plans = []
    for n in range(1, args.max_qubits + 1):
        model = reduce_qubits(base, n)
        xi = noise_resistance(model)
        state = uniform_state(n)
        observable = pauli_z_observable(n)
        plan = plan_mitigation(args.epsilon, args.delta, xi)
        plans.append({"qubits": n, **plan.to_dict()})

        def one_trial(t, model=model, xi=xi, state=state, observable=observable):
            return run_mitigation(
                state,
                model,
                observable,
                xi,
                args.delta,
                args.epsilon,
                seed=args.seed + t,
                mode=args.mode,
                cap=args.cap,
            )

        trials = 1 if args.mode == "exact" else args.trials
        results = _run_trials(one_trial, trials, args.threads)
        noisy = [r.per_order[0] for r in results]
        mitigated = [r.estimate for r in results]
        rows.append(
            (
                n,
                float(np.mean(noisy)),
                _stderr(noisy),
                float(np.mean(mitigated)),
                _stderr(mitigated),
                0.0,
            )
        )
    config = {
        "subcommand": "scaling",
        "max_qubits": args.max_qubits,
        "noise": args.noise,
        "xi": args.xi,
        "epsilon": args.epsilon,
        "delta": args.delta,
        "trials": args.trials,
        "seed": args.seed,
        "mode": args.mode,
        "cap": args.cap,
    }
    path = _resolve_out(args.out, "scaling.csv")
    _write_csv(
        path,
        "scaling",
        config,
        seed=args.seed,
        header=[
            "qubits",
            "noisy_mean",
            "noisy_stderr",
            "mitigated_mean",
            "mitigated_stderr",
            "true_value",
        ],
        rows=rows,
        extra={"plans": json.dumps(plans)},
    )
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def _random_probs(gen, d):
    p = gen.random(d)
    return p / p.sum()


def cmd_verify(args) -> int:
    checks = []
    reports = []
    gen = np.random.default_rng(args.seed)

    if args.noise:
        models = [parse_noise_spec(args.noise, args.qubits, args.seed)]
        models = [m.expand() if isinstance(m, TensorProductNoise) else m for m in models]
    else:
        models = []
        for _ in range(args.instances):
            xi = 0.05 + 0.9 * gen.random()
            models.append(random_noise_matrix(args.qubits, xi, int(gen.integers(2**63))))

    # identity between the off-diagonal column mass and the resistance
    worst = 0.0
    for a in models:
        eye = np.eye(a.dim)
        worst = max(worst, abs(induced_one_norm(eye - a.entries) - noise_resistance(a)))
    checks.append(("column-norm-identity", worst <= 1e-12, f"max deviation {worst:.3e}"))

    # regrouped series weights reproduce the partial geometric sum
    worst = 0.0
    for a in models:
        eye = np.eye(a.dim)
        coeffs = coefficients(args.truncation)
        lhs = sum(c * np.linalg.matrix_power(a.entries, k) for k, c in enumerate(coeffs))
        rhs = sum(
            np.linalg.matrix_power(eye - a.entries, k) for k in range(args.truncation + 1)
        )
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    checks.append(("partial-sum-identity", worst <= 1e-10, f"max deviation {worst:.3e}"))

    # series-tail bound on exact per-order expectations
    failures = 0
    worst_margin = 0.0
    for a in models:
        if args.noise:
            observable = pauli_z_observable(a.n)
            state = uniform_state(a.n)
        else:
            observable = Observable.from_table(1.0 - 2.0 * gen.random(a.dim))
            state = DiagonalState(a.n, _random_probs(gen, a.dim))
        try:
            report = verify_truncation_bound(
                observable, a, state, args.truncation, check_inverse=a.n <= 8
            )
            reports.append(report)
            if report.bound > 0:
                worst_margin = max(worst_margin, report.residual / report.bound)
        except PropertyViolation:
            failures += 1
    checks.append(
        (
            "truncation-bound",
            failures == 0,
            f"{len(models) - failures}/{len(models)} instances, "
            f"worst residual/bound {worst_margin:.3e}",
        )
    )

    # informative only: direct inversion of a sampled histogram can go negative
    a = models[0]
    draws = 4096
    outcomes = sequential_measure_batch(
        a, 1, uniform_state(a.n), args.seed, np.arange(draws, dtype=np.uint64)
    )
    hist = np.bincount(outcomes, minlength=a.dim) / draws
    recovered = invert_histogram(a, hist)
    negatives = int((recovered < 0).sum())
    print(
        f"info direct-inversion: {negatives} negative entries in the recovered "
        f"histogram (min {recovered.min():.3e})"
    )

    ok = True
    for name, passed, detail in checks:
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
        ok = ok and passed
    if args.out:
        path = _resolve_out(args.out, "verify.jsonl")
        with open(path, "w") as fh:
            for report in reports:
                fh.write(report.to_json() + "\n")
        print(f"wrote {path} ({len(reports)} reports)")
    if not ok:
        raise PropertyViolation("one or more verification properties failed")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(sub):
    sub.add_argument("--seed", type=int, default=0, help="master seed (trial t uses seed+t)")
    sub.add_argument("--out", help=f"output path (relative paths join ${OUTDIR_ENV})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neumann-mitigation",
        description="Readout-error mitigation experiments via truncated-series combination "
        "of sequential measurements.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    p = subs.add_parser("resistance", help="report a noise model's resistance and implied order")
    p.add_argument("--noise", required=True, help="tensor:<rates> | file:<path> | random:<xi>")
    p.add_argument("--qubits", type=int, help="qubit count (random noise specs)")
    p.add_argument("--epsilon", type=float, help="also report the implied truncation order")
    _add_common(p)
    p.set_defaults(func=cmd_resistance)

    p = subs.add_parser("fig3", help="truncation order as a function of the resistance")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--xi-min", type=float, default=0.05)
    p.add_argument("--xi-max", type=float, default=0.95)
    p.add_argument("--xi-step", type=float, default=0.005)
    _add_common(p)
    p.set_defaults(func=cmd_fig3)

    p = subs.add_parser("scatter", help="per-trial noisy vs mitigated estimates")
    p.add_argument("--qubits", type=int, default=8)
    p.add_argument("--xi", type=float, default=None, help="planning resistance override")
    p.add_argument("--noise", help="noise spec; default random:<xi> (xi defaults to 0.657)")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--threads", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_scatter)

    p = subs.add_parser("scaling", help="noisy vs mitigated averages per qubit count")
    p.add_argument("--max-qubits", type=int, default=8)
    p.add_argument("--xi", type=float, default=0.657)
    p.add_argument("--noise", help="dense base noise on max-qubits; default random:<xi>")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--threads", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_scaling)

    p = subs.add_parser("verify", help="run the oracle property sweeps")
    p.add_argument("--noise", help="verify one model instead of a random sweep")
    p.add_argument("--qubits", type=int, default=4)
    p.add_argument("--truncation", type=int, default=6)
    p.add_argument("--instances", type=int, default=50)
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.plan is not None:
            print(f"plan: {exc.plan.to_json()}", file=sys.stderr)
        return 3
    except PropertyViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
