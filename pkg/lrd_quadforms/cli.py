"""Command-line interface"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

from .condition_h import check_condition_h
from .config import load_settings, use_settings
from .covariance import covariance_table
from .data_io import write_field, write_limit_law
from .errors import InvalidConfigError, QuadformsError
from .harness import ExperimentConfig, run_experiment
from .limit_laws import LimitLawEstimate, gaussian_variance, sample_double_ito, sigma2_one_direction
from .models import OneDirection, SpectralModel, model_from_dict
from .quadratic_forms import QuadraticFormSpec
from .reporting import generate_report, print_summary
from .rng import RngStream
from .simulator import simulate_exact, simulate_spectral


def _load_json_arg(value: str, what: str) -> Dict:
    """Inline JSON or a path to a JSON file"""
    text = value
    if not value.lstrip().startswith("{"):
        try:
            text = Path(value).read_text(encoding="utf-8")
        except OSError as e:
            raise InvalidConfigError(f"cannot read {what} file {value}: {e}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidConfigError(f"invalid {what} JSON: {e}") from e


def _model(args) -> SpectralModel:
    return model_from_dict(_load_json_arg(args.model, "model"))


def _form(args, model: SpectralModel) -> QuadraticFormSpec:
    if args.spec:
        return QuadraticFormSpec.from_dict(_load_json_arg(args.spec, "spec"))
    if args.lag is not None:
        return QuadraticFormSpec.delta(args.lag)
    return QuadraticFormSpec.delta((0,) * model.dimension)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> None:
    model = _model(args)
    rng = RngStream(args.seed)
    print(f"🎲 Simulating {model.model_id} on n = {args.n}, margin {args.margin} ({args.sampler})")
    if args.sampler == "exact":
        field = simulate_exact(model, args.n, args.margin, rng)
    else:
        field = simulate_spectral(model, args.n, args.margin, args.oversample, rng)
    fmt = "binary" if args.binary else "csv"
    path, sidecar = write_field(str(_out_dir(args) / ("field.bin" if args.binary else "field.csv")), field, fmt)
    print(f"✓ Field saved to {path} (metadata {sidecar})")


def cmd_covariance(args) -> None:
    model = _model(args)
    print(f"📐 Covariances of {model.model_id} up to |h| = {args.radius}")
    table = covariance_table(model, args.radius, n_jobs=args.threads)
    out = _out_dir(args)
    if args.format == "csv":
        path = out / "covariance.csv"
        table.write_csv(str(path))
    else:
        path = out / "covariance.json"
        rows = [{"h": list(row[:-1]), "r": row[-1]} for row in table.to_rows()]
        path.write_text(json.dumps({"model": model.to_dict(), "error": table.error, "rows": rows}, indent=2))
    print(f"✓ Table saved to {path} (error estimate {table.error:.2e})")


def cmd_check_h(args) -> None:
    model = _model(args)
    form = _form(args, model)
    verdict = check_condition_h(model, form, args.method, RngStream(args.seed), args.power_count)
    payload = {"model": model.to_dict(), "spec": form.to_dict(), **verdict.to_dict()}
    text = json.dumps(payload, sort_keys=True, indent=2)
    print(text)
    path = _out_dir(args) / "verdict.json"
    path.write_text(text + "\n", encoding="utf-8")
    mark = "✓" if verdict.holds else "✗"
    print(f"{mark} {payload['verdict']} (saved to {path})")


def cmd_limit(args) -> None:
    model = _model(args)
    out = _out_dir(args)
    if args.law == "clt":
        estimate = gaussian_variance(model, _form(args, model))
        print(f"📐 CLT variance: {estimate.value:.10g}")
    elif args.law == "sigma2":
        if not isinstance(model, OneDirection):
            raise InvalidConfigError("sigma2 needs a one_direction model")
        lag = args.lag or [1, 0]
        result = sigma2_one_direction(model.alpha, int(model.p), model.l1.at_zero**2, lag)
        estimate = LimitLawEstimate("Sigma2", value=result.value, metadata=result.to_dict())
        print(f"📐 σ² = {result.value:.6g} (spread {100 * result.spread:.1f}%)")
    else:
        form = _form(args, model)
        print(f"🎲 Sampling the double Itô limit of {model.model_id} ({args.count} draws)")
        estimate = sample_double_ito(
            model, form, args.resolution, args.radius, args.count, RngStream(args.seed), args.threads, args.kernel
        )
        print(
            f"✓ sample variance {estimate.sample_variance():.6g}, grid second moment "
            f"{estimate.second_moment:.6g}, tail bound {estimate.tail_bound:.2g}"
        )
    written = write_limit_law(str(out), estimate, stem=args.law, fmt=args.format)
    print(f"✓ Saved {', '.join(str(p) for p in written.values())}")


def cmd_experiment(args) -> None:
    if not args.config:
        raise InvalidConfigError("experiment needs --config PATH")
    config = ExperimentConfig.from_json(args.config)
    if args.seed_given:
        config = ExperimentConfig.from_dict(dict(config.to_dict(), seed=args.seed))
    print(f"📖 Loaded experiment {args.config} ({config.digest()[:12]})")
    report = run_experiment(config, n_jobs=args.threads, verbose=True)
    out = args.out if args.out_given or not config.output else config.output
    generate_report(report, out)
    print_summary(report)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Long-memory quadratic forms - simulation, covariances, condition (H) and limit laws"
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Experiment file (JSON mirroring ExperimentConfig)")
    common.add_argument("--settings", help="Numerical settings file (default: configuration.json)")
    common.add_argument("--seed", type=int, default=None, help="Master seed, unsigned 64-bit (default: 0)")
    common.add_argument("--threads", type=int, default=1, help="Worker threads; affects speed only (default: 1)")
    common.add_argument("--out", default=None, help="Output directory (default: results)")
    common.add_argument("--format", choices=["csv", "json"], default="csv", help="Table format (default: csv)")
    common.add_argument("--verbose", action="store_true", help="Log numerical diagnostics")

    model_args = argparse.ArgumentParser(add_help=False)
    model_args.add_argument("--model", required=True, help="Model JSON, inline or a file path")

    form_args = argparse.ArgumentParser(add_help=False)
    form_args.add_argument("--spec", help="Quadratic form JSON, inline or a file path")
    form_args.add_argument("--lag", type=int, nargs="+", help="Use g = δ_h for this lag")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common, model_args], help="Simulate one field to a file")
    p.add_argument("--n", type=int, required=True, help="Window side n")
    p.add_argument("--margin", type=int, default=0, help="Margin m around the window (default: 0)")
    p.add_argument("--oversample", type=int, default=None, help="Frequency oversampling κ")
    p.add_argument("--sampler", choices=["spectral", "exact"], default="spectral")
    p.add_argument("--binary", action="store_true", help="Write flat float64 instead of CSV")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("covariance", parents=[common, model_args], help="Covariance table to CSV")
    p.add_argument("--radius", type=int, required=True, help="Largest |h|_inf")
    p.set_defaults(handler=cmd_covariance)

    p = sub.add_parser("check-h", parents=[common, model_args, form_args], help="Condition (H) verdict")
    p.add_argument("--method", choices=["auto", "analytic", "numeric"], default="auto")
    p.add_argument("--power-count", action="store_true", help="Report the worst d_inf over padded flats")
    p.set_defaults(handler=cmd_check_h)

    p = sub.add_parser("limit", parents=[common, model_args, form_args], help="Limit-law variance or samples")
    p.add_argument("--law", choices=["clt", "double-ito", "sigma2"], default="double-ito")
    p.add_argument("--resolution", type=int, default=None, help="Grid points per axis M")
    p.add_argument("--radius", type=float, default=None, help="Grid half-width R")
    p.add_argument("--count", type=int, default=10000, help="Number of draws (default: 10000)")
    p.add_argument("--kernel", choices=["auto", "closed-form", "quadrature"], default="auto")
    p.set_defaults(handler=cmd_limit)

    p = sub.add_parser("experiment", parents=[common], help="Run an experiment config to a report")
    p.set_defaults(handler=cmd_experiment)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    args.seed_given = args.seed is not None
    args.seed = args.seed if args.seed is not None else 0
    args.out_given = args.out is not None
    args.out = args.out or "results"

    try:
        use_settings(load_settings(args.settings))
        args.handler(args)
    except QuadformsError as e:
        print(f"❌ {e}")
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
