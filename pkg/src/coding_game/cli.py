"""Command-line front end.

Subcommands ``curve``, ``equilibrium``, ``noise`` and ``verify``. Everything
is computed and validated before the first file is written. Exit codes: 0
success, 1 verification failure, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import config as cfg
from .errors import ConfigurationError, DegenerateInputError, DomainError
from .frontier import c_eta, characteristic_curve, curve_rows, write_curve_csv
from .game import best_response, build_noise, dumps_sig, optimal_eta, worst_case_dc_value
from .verify import run_suite

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

# A pending write: (path, callable that writes it)
Output = tuple[Path, Callable[[Path], None]]


def _eta_tag(eta: float) -> str:
    return f"{eta:.4f}".rstrip("0").rstrip(".")


def _text_writer(text: str) -> Callable[[Path], None]:
    def write(path: Path) -> None:
        path.write_text(text)

    return write


def _load(args) -> cfg.RunConfig:
    conf = cfg.load(args.config)
    conf = cfg.apply_overrides(conf, eta=args.eta, grid=args.grid, seed=args.seed, samples=args.samples, out=args.out)
    return conf.validate()


def _curve_outputs(conf: cfg.RunConfig, out: Path) -> list[Output]:
    curves = [characteristic_curve(conf.params(eta), conf.grid_size, conf.alpha_min) for eta in conf.etas]
    outputs: list[Output] = []
    for curve in curves:
        path = out / f"curve_n{conf.n}_eta{_eta_tag(curve.params.eta)}.csv"
        outputs.append((path, lambda p, c=curve: write_curve_csv(p, [c])))
    outputs.append((out / f"curves_n{conf.n}.csv", lambda p: write_curve_csv(p, curves)))
    if conf.adversary is not None:
        rows = []
        for curve in curves:
            resp = best_response(curve, conf.adversary)
            if conf.dc is not None:
                alpha, _ = worst_case_dc_value(curve, resp.alphas, conf.dc)
            else:
                alpha = resp.alphas[0]
            rows.append((repr(curve.params.eta), repr(alpha), repr(c_eta(curve, alpha))))

        def write_best(path: Path) -> None:
            with path.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(("eta", "alpha", "c_eta"))
                w.writerows(rows)

        outputs.append((out / f"best_response_n{conf.n}.csv", write_best))
    return outputs


def _require_utilities(conf: cfg.RunConfig) -> None:
    if conf.adversary is None or conf.dc is None:
        raise ConfigurationError("utilities.adversary and utilities.dc are required for this command")


def _equilibrium(conf: cfg.RunConfig):
    _require_utilities(conf)
    return optimal_eta(conf.n, conf.delta, conf.etas, conf.adversary, conf.dc, conf.grid_size, conf.alpha_min)


def _noise_outputs(conf: cfg.RunConfig, args, out: Path) -> list[Output]:
    if args.from_equilibrium:
        if args.alpha is not None:
            raise ConfigurationError("--alpha and --from-equilibrium are mutually exclusive")
        report = _equilibrium(conf)
        eta, alpha, noise = report.eta_star, report.alpha_star, report.noise
    else:
        if args.alpha is None:
            raise ConfigurationError("noise needs --alpha or --from-equilibrium")
        if len(conf.etas) != 1:
            raise ConfigurationError("noise with --alpha needs a single eta (use --eta)")
        eta, alpha = conf.etas[0], float(args.alpha)
        curve = characteristic_curve(conf.params(eta), conf.grid_size, conf.alpha_min)
        noise = build_noise(curve, alpha)
    doc = {"n": conf.n, "delta": conf.delta, "eta": eta, "alpha": alpha, "noise": noise.to_dict()}
    return [(out / "noise.json", _text_writer(dumps_sig(doc)))]


def _verify_outputs(conf: cfg.RunConfig, out: Path) -> tuple[list[Output], bool]:
    s = conf.sim
    reports = [run_suite(conf.params(eta), s.samples, s.seed, s.chunk_size, conf.grid_size) for eta in conf.etas]
    doc = reports[0] if len(reports) == 1 else {"passed": all(r["passed"] for r in reports), "reports": reports}
    return [(out / "verify.json", _text_writer(dumps_sig(doc)))], bool(doc["passed"])


def _write_all(outputs: Sequence[Output]) -> None:
    for path, write in outputs:
        path.parent.mkdir(parents=True, exist_ok=True)
        write(path)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file or bundled manifest name (" + ", ".join(cfg.MANIFESTS) + ")")
    common.add_argument("--out", help="output directory (overrides output.dir)")
    common.add_argument("--eta", type=float, help="single threshold instead of the configured grid")
    common.add_argument("--grid", type=int, help="sweep grid size")
    common.add_argument("--seed", type=int, help="simulation seed")
    common.add_argument("--samples", type=int, help="Monte-Carlo samples per check")

    parser = argparse.ArgumentParser(prog="coding-game", description="Leader-follower equilibria for threshold-verified vector computations.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("curve", parents=[common], help="write characteristic curves as CSV")
    sub.add_parser("equilibrium", parents=[common], help="solve for the optimal threshold")
    noise = sub.add_parser("noise", parents=[common], help="construct the adversarial noise distribution")
    noise.add_argument("--alpha", type=float, help="target acceptance probability")
    noise.add_argument("--from-equilibrium", action="store_true", help="use the equilibrium alpha and eta")
    sub.add_parser("verify", parents=[common], help="run Monte-Carlo and oracle checks")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "alpha"):
        args.alpha, args.from_equilibrium = None, False
    code = EXIT_OK
    try:
        conf = _load(args)
        out = Path(conf.out_dir)
        if args.command == "curve":
            outputs = _curve_outputs(conf, out)
            summary = f"wrote {len(outputs)} files to {out}"
        elif args.command == "equilibrium":
            report = _equilibrium(conf)
            outputs = [(out / "equilibrium.json", _text_writer(report.to_json()))]
            summary = (
                f"eta*={report.eta_star:g} alpha*={report.alpha_star:.6f} mse*={report.mse_star:.6f} "
                f"u_dc*={report.u_dc:.6f} noise={report.noise.to_dict()}"
            )
        elif args.command == "noise":
            outputs = _noise_outputs(conf, args, out)
            summary = f"wrote {outputs[0][0]}"
        else:
            outputs, ok = _verify_outputs(conf, out)
            code = EXIT_OK if ok else EXIT_VERIFY
            summary = "all checks passed" if ok else "verification FAILED"
    except (ConfigurationError, DomainError, DegenerateInputError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _write_all(outputs)
    except OSError as exc:
        print(f"I/O error: {exc.filename or out}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    print(summary)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
