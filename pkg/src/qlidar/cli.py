"""Command-line front end.

Six subcommands: benchmark (metric sweep over transmissivity), heatmap
(score map over transmissivity and squeezing fraction), parametric
(optimal-fraction curves for several power/noise scenarios), fading
(Monte-Carlo fading ensemble), metrics (single state-pair report) and
threshold (quantum-advantage threshold evaluation).

Every run resolves its parameters as flags > config file > built-in
defaults, writes UTF-8 CSV files with LF line endings and 12 significant
digits, and leaves a flat key = value manifest next to them, also on
failure.  Exit codes: 0 success, 2 parameter error, 3 I/O error,
4 numerical error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, allocation, fading, metrics
from .channel import ChannelParams, apply_loss, effective_noise
from .errors import InvalidParameterError, NumericalError
from .states import GaussianState, ProbeBudget, probe_from_budget, thermal_state

EXIT_OK = 0
EXIT_PARAMETER = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4

PARAMETRIC_SCENARIOS = ((5.0, 0.1), (5.0, 2.0), (10.0, 0.1), (20.0, 0.1), (20.0, 2.0))


def _fmt(x) -> str:
    return format(float(x), ".12g")


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_manifest(path: Path, entries: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in entries.items():
            fh.write(f"{key} = {value}\n")


def _read_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidParameterError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidParameterError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


class _Resolver:
    """Flags > config file > defaults, with typed access."""

    def __init__(self, args: argparse.Namespace, defaults: dict):
        self.args = vars(args)
        self.config = _read_config(args.config) if getattr(args, "config", None) else {}
        self.defaults = defaults
        self.resolved: dict = {}

    def get(self, key: str, cast=float):
        flag = self.args.get(key)
        if flag is not None:
            value = flag
        elif key in self.config:
            try:
                value = cast(self.config[key])
            except ValueError as exc:
                raise InvalidParameterError(f"config key {key}: {exc}") from exc
        else:
            value = self.defaults[key]
        self.resolved[key] = value
        return value


def _parse_state(text: str, name: str) -> GaussianState:
    fields = ("mu_q", "mu_p", "sigma_qq", "sigma_qp", "sigma_pp")
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 5:
        raise InvalidParameterError(
            f"{name} must have 5 comma-separated values {fields}, got {len(parts)}"
        )
    values = []
    for field, part in zip(fields, parts):
        try:
            values.append(float(part))
        except ValueError:
            raise InvalidParameterError(f"{name}: invalid value for {field}: {part!r}") from None
    mu_q, mu_p, s_qq, s_qp, s_pp = values
    return GaussianState([mu_q, mu_p], [[s_qq, s_qp], [s_qp, s_pp]])


def _noise_for(eta: float, n_th: float, eta_det: float, v_el: float) -> float:
    """Background occupation, with electronic noise folded in when present."""
    if v_el == 0.0:
        return n_th
    return effective_noise(ChannelParams(eta=eta, n_th=n_th, eta_det=eta_det, v_el=v_el))


def _pair_for(eta, n_th, eta_det, v_el, n_tot, lam):
    n_eff = _noise_for(eta, n_th, eta_det, v_el)
    params = ChannelParams(eta=eta, n_th=n_eff, eta_det=eta_det)
    probe = probe_from_budget(ProbeBudget(n_tot, lam, lam_max=1.0))
    return apply_loss(probe, params), thermal_state(n_eff)


def cmd_benchmark(args, out_dir: Path, manifest: dict) -> list[Path]:
    res = _Resolver(args, {"n_tot": 5.0, "n_th": 2.0, "lam": 0.5,
                           "eta_det": 1.0, "v_el": 0.0, "eta": None})
    n_tot = res.get("n_tot")
    n_th = res.get("n_th")
    lam = res.get("lam")
    eta_det = res.get("eta_det")
    v_el = res.get("v_el")
    eta_single = res.get("eta", cast=float)
    etas = [eta_single] if eta_single is not None else np.linspace(0.001, 1.0, 200)
    manifest.update({k: v for k, v in res.resolved.items() if v is not None})
    manifest["eta_sweep"] = "single" if eta_single is not None else "0.001:1:200"

    rows = []
    for eta in etas:
        out, env = _pair_for(float(eta), n_th, eta_det, v_el, n_tot, lam)
        rep = metrics.metric_report(out, env)
        rows.append((eta, rep.w2_sq, rep.xi_qbb, rep.xi_qbb_proxy, rep.xi_qcb, rep.snr_sq_opt))
    path = out_dir / "benchmark.csv"
    _write_csv(path, ["eta", "w2_sq", "xi_qbb_overlap", "xi_qbb_proxy", "xi_qcb", "snr_sq_opt"], rows)
    return [path]


def _grids(step: float):
    return allocation.default_eta_grid(step), allocation.default_lambda_grid(step)


def cmd_heatmap(args, out_dir: Path, manifest: dict) -> list[Path]:
    res = _Resolver(args, {"n_tot": 10.0, "n_th": 0.1, "eta_det": 1.0,
                           "grid_step": 0.01, "workers": 1})
    n_tot = res.get("n_tot")
    n_th = res.get("n_th")
    eta_det = res.get("eta_det")
    step = res.get("grid_step")
    workers = res.get("workers", cast=int)
    manifest.update(res.resolved)

    eta_grid, lambda_grid = _grids(step)
    grid = allocation.allocation_grid(n_tot, n_th, eta_grid, lambda_grid,
                                      eta_det=eta_det, workers=workers)
    score_rows = [
        (eta, lam, grid.scores[i, j])
        for i, eta in enumerate(grid.eta_grid)
        for j, lam in enumerate(grid.lambda_grid)
    ]
    opt_rows = list(zip(grid.eta_grid, grid.lambda_opt))
    scores_path = out_dir / "heatmap_scores.csv"
    opt_path = out_dir / "heatmap_lambda_opt.csv"
    _write_csv(scores_path, ["eta", "lambda", "w2_sq"], score_rows)
    _write_csv(opt_path, ["eta", "lambda_opt"], opt_rows)

    found = allocation.transition_eta(grid)
    eta_c = allocation.eta_critical(n_tot, n_th)
    manifest["transition_eta_empirical"] = "none" if found is None else _fmt(found)
    manifest["eta_critical_analytic"] = _fmt(eta_c)
    manifest["eta_critical_reachable"] = str(eta_c <= 1.0).lower()
    return [scores_path, opt_path]


def cmd_parametric(args, out_dir: Path, manifest: dict) -> list[Path]:
    res = _Resolver(args, {"eta_det": 1.0, "grid_step": 0.01, "workers": 1,
                           "n_tot": None, "n_th": None})
    eta_det = res.get("eta_det")
    step = res.get("grid_step")
    workers = res.get("workers", cast=int)
    n_tot = args.n_tot
    n_th = args.n_th
    if (n_tot is None) != (n_th is None):
        raise InvalidParameterError("give both --n-tot and --n-th to select one scenario")
    scenarios = PARAMETRIC_SCENARIOS if n_tot is None else ((n_tot, n_th),)
    manifest.update({"eta_det": eta_det, "grid_step": step, "workers": workers,
                     "scenarios": ";".join(f"{_fmt(n)}:{_fmt(t)}" for n, t in scenarios)})

    eta_grid, lambda_grid = _grids(step)
    paths = []
    for n, t in scenarios:
        grid = allocation.allocation_grid(n, t, eta_grid, lambda_grid,
                                          eta_det=eta_det, workers=workers)
        path = out_dir / f"parametric_ntot{_fmt(n)}_nth{_fmt(t)}.csv"
        _write_csv(path, ["eta", "lambda_opt"], zip(grid.eta_grid, grid.lambda_opt))
        found = allocation.transition_eta(grid)
        manifest[f"transition_eta_ntot{_fmt(n)}_nth{_fmt(t)}"] = (
            "none" if found is None else _fmt(found)
        )
        paths.append(path)
    return paths


def cmd_fading(args, out_dir: Path, manifest: dict) -> list[Path]:
    res = _Resolver(args, {"alpha": 2.0, "beta": 3.0, "realizations": 10_000,
                           "seed": fading.DEFAULT_SEED, "n_tot": 10.0, "lam": 0.5,
                           "n_th": 2.0, "workers": 1})
    config = fading.FadingConfig(
        alpha=res.get("alpha"),
        beta=res.get("beta"),
        n_realizations=res.get("realizations", cast=int),
        seed=res.get("seed", cast=int),
        probe=ProbeBudget(res.get("n_tot"), res.get("lam")),
        n_th=res.get("n_th"),
    )
    workers = res.get("workers", cast=int)
    manifest.update(res.resolved)

    ensemble = fading.run_ensemble(config, workers=workers)
    real_path = out_dir / "fading_realizations.csv"
    _write_csv(
        real_path,
        ["realization", "eta", "w2_sq", "xi_qbb"],
        ((i, e, w, x) for i, (e, w, x) in enumerate(zip(ensemble.etas, ensemble.w2_sq, ensemble.xi_qbb))),
    )
    paths = [real_path]
    for key in ("eta", "w2_sq", "xi_qbb"):
        hist = ensemble.histograms[key]
        path = out_dir / f"fading_hist_{key}.csv"
        _write_csv(path, ["bin_left", "bin_right", "density"],
                   zip(hist.edges[:-1], hist.edges[1:], hist.density))
        paths.append(path)

    s = ensemble.summary
    if s.iqr_over_median_xi_qbb > 0.0:
        contrast = s.iqr_over_median_w2_sq / s.iqr_over_median_xi_qbb
    else:
        contrast = float("nan")
    manifest.update({
        "mean_eta": _fmt(s.mean_eta),
        "var_eta": _fmt(s.var_eta),
        "mean_w2_sq": _fmt(s.mean_w2_sq),
        "mean_xi_qbb": _fmt(s.mean_xi_qbb),
        "cv_w2_sq": _fmt(s.cv_w2_sq),
        "cv_xi_qbb": _fmt(s.cv_xi_qbb),
        "pearson_w2_eta": _fmt(s.pearson_w2_eta),
        "iqr_over_median_w2_sq": _fmt(s.iqr_over_median_w2_sq),
        "iqr_over_median_xi_qbb": _fmt(s.iqr_over_median_xi_qbb),
        "contrast_iqr_median": _fmt(contrast),
        "saturated_count": s.saturated_count,
    })
    sel = fading.post_select(ensemble, metric="w2", quantile=0.9)
    manifest["postselect_w2_q90_mean_eta"] = _fmt(sel.mean_eta_selected)
    manifest["postselect_w2_q90_efficiency"] = _fmt(sel.efficiency)
    return paths


def cmd_metrics(args, out_dir: Path, manifest: dict) -> list[Path]:
    if args.state0 is not None or args.state1 is not None:
        if args.state0 is None or args.state1 is None:
            raise InvalidParameterError("give both --state0 and --state1")
        state_h0 = _parse_state(args.state0, "state0")
        state_h1 = _parse_state(args.state1, "state1")
        manifest.update({"state0": args.state0, "state1": args.state1})
    elif args.budget is not None:
        parts = [p.strip() for p in args.budget.split(",")]
        if len(parts) not in (2, 3):
            raise InvalidParameterError("budget must be 'n_tot,lambda[,phase]'")
        try:
            n_tot, lam = float(parts[0]), float(parts[1])
            phase = float(parts[2]) if len(parts) == 3 else 0.0
        except ValueError as exc:
            raise InvalidParameterError(f"budget: {exc}") from None
        res = _Resolver(args, {"eta": 1.0, "n_th": 0.0, "eta_det": 1.0, "v_el": 0.0})
        eta = res.get("eta")
        n_th = res.get("n_th")
        eta_det = res.get("eta_det")
        v_el = res.get("v_el")
        n_eff = _noise_for(eta, n_th, eta_det, v_el)
        probe = probe_from_budget(ProbeBudget(n_tot, lam, displacement_phase=phase, lam_max=1.0))
        state_h1 = apply_loss(probe, ChannelParams(eta=eta, n_th=n_eff, eta_det=eta_det))
        state_h0 = thermal_state(n_eff)
        manifest.update(res.resolved)
        manifest.update({"budget_n_tot": n_tot, "budget_lambda": lam, "budget_phase": phase})
    else:
        raise InvalidParameterError("give either --state0/--state1 or --budget")

    rep = metrics.metric_report(state_h1, state_h0)
    for key in ("w2_sq", "displacement_term", "bures_sq", "fidelity",
                "xi_qbb", "xi_qbb_proxy", "xi_qcb", "snr_sq_opt", "theta_opt"):
        value = getattr(rep, key)
        print(f"{key} = {_fmt(value)}")
        manifest[key] = _fmt(value)
    return []


def cmd_threshold(args, out_dir: Path, manifest: dict) -> list[Path]:
    res = _Resolver(args, {"n_tot": 10.0, "n_th": 0.1, "eta_det": 1.0,
                           "v_el": 0.0, "eta": None})
    n_tot = res.get("n_tot")
    n_th = res.get("n_th")
    eta_det = res.get("eta_det")
    v_el = res.get("v_el")
    manifest.update({k: v for k, v in res.resolved.items() if v is not None})

    eta_c = allocation.eta_critical(n_tot, n_th)
    reachable = eta_c <= 1.0
    print(f"eta_critical = {_fmt(eta_c)}")
    print(f"reachable = {str(reachable).lower()}")
    manifest["eta_critical"] = _fmt(eta_c)
    manifest["reachable"] = str(reachable).lower()
    if not reachable:
        print("no quantum regime at any transmissivity")

    if v_el > 0.0 or eta_det < 1.0:
        eta = args.eta
        if eta is None:
            raise InvalidParameterError(
                "detector imperfections need --eta to evaluate the substituted threshold"
            )
        params = ChannelParams(eta=eta, n_th=n_th, eta_det=eta_det, v_el=v_el)
        eta_c_eff = allocation.eta_critical_effective(n_tot, params)
        print(f"eta_critical_effective = {_fmt(eta_c_eff)}")
        print(f"eta_effective = {_fmt(params.eta_eff)}")
        manifest["eta_critical_effective"] = _fmt(eta_c_eff)
        manifest["eta_effective"] = _fmt(params.eta_eff)
    return []


_COMMANDS = {
    "benchmark": cmd_benchmark,
    "heatmap": cmd_heatmap,
    "parametric": cmd_parametric,
    "fading": cmd_fading,
    "metrics": cmd_metrics,
    "threshold": cmd_threshold,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qlidar", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qlidar {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--n-tot", dest="n_tot", type=float, default=None,
                       help="total mean photon budget")
        p.add_argument("--n-th", dest="n_th", type=float, default=None,
                       help="thermal background occupation")
        p.add_argument("--lambda", dest="lam", type=float, default=None,
                       help="squeezing fraction of the budget")
        p.add_argument("--eta", type=float, default=None, help="channel transmissivity")
        p.add_argument("--eta-det", dest="eta_det", type=float, default=None,
                       help="detector efficiency (folded into eta)")
        p.add_argument("--v-el", dest="v_el", type=float, default=None,
                       help="detector electronic noise in shot-noise units")
        p.add_argument("--seed", type=int, default=None, help="RNG seed")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--config", default=None, help="flat key = value config file")
        p.add_argument("--grid-step", dest="grid_step", type=float, default=None,
                       help="grid step for eta and lambda sweeps")
        p.add_argument("--realizations", type=int, default=None,
                       help="number of Monte-Carlo realizations")
        p.add_argument("--workers", type=int, default=None,
                       help="parallel worker processes (results are order-independent)")

    for name, help_text in [
        ("benchmark", "metric sweep over transmissivity"),
        ("heatmap", "Wasserstein score map over (eta, lambda)"),
        ("parametric", "optimal squeezing fraction per power/noise scenario"),
        ("fading", "Monte-Carlo fading ensemble"),
        ("metrics", "all metrics for one state pair"),
        ("threshold", "quantum-advantage threshold"),
    ]:
        p = sub.add_parser(name, help=help_text)
        common(p)
        if name == "fading":
            p.add_argument("--alpha", type=float, default=None, help="Beta shape alpha")
            p.add_argument("--beta", type=float, default=None, help="Beta shape beta")
        if name == "metrics":
            p.add_argument("--state0", default=None,
                           help="H0 state as mu_q,mu_p,sigma_qq,sigma_qp,sigma_pp")
            p.add_argument("--state1", default=None,
                           help="H1 state as mu_q,mu_p,sigma_qq,sigma_qp,sigma_pp")
            p.add_argument("--budget", default=None,
                           help="probe shorthand n_tot,lambda[,phase]; pairs with --eta/--n-th")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    command = args.command

    start = time.perf_counter()
    manifest: dict = {
        "command": command,
        "artifact_version": __version__,
        "status": "error",
    }
    out_dir = Path(args.out)
    outputs: list[Path] = []
    code = EXIT_OK
    try:
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc
        outputs = _COMMANDS[command](args, out_dir, manifest)
        manifest["status"] = "ok"
    except InvalidParameterError as exc:
        manifest["error"] = str(exc)
        print(f"parameter error: {exc}", file=sys.stderr)
        code = EXIT_PARAMETER
    except OSError as exc:
        manifest["error"] = str(exc)
        print(f"i/o error: {exc}", file=sys.stderr)
        code = EXIT_IO
    except (NumericalError, FloatingPointError) as exc:
        manifest["error"] = str(exc)
        print(f"numerical error: {exc}", file=sys.stderr)
        code = EXIT_NUMERICAL
    finally:
        manifest["duration_s"] = f"{time.perf_counter() - start:.3f}"
        for i, path in enumerate(outputs):
            manifest[f"output_{i}"] = str(path)
        try:
            _write_manifest(out_dir / f"{command}_manifest.txt", manifest)
        except OSError:
            if code == EXIT_OK:
                code = EXIT_IO
    return code


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
