"""Command-line front end.

Subcommands: simulate, estimate, mc, kernel, table. All tabular output is
CSV with round-trip (17 significant digit) floats; stdout carries only data,
diagnostics go to stderr, and every error exits nonzero. With --format svg
the report paths additionally render figures next to the CSV files.
"""

from __future__ import annotations

import csv
import json
import math
import os
import sys
from datetime import datetime
from pathlib import Path

import click
import numpy as np

from . import estimators as est
from . import kernel as kern_mod
from .errors import ConfigError, SpecvolError
from .mcharness import ExperimentConfig, path_seeds, run_experiment
from .noise import ObservedSeries, sample_noise
from .sdesim import Grid, SECONDS_PER_TRADING_DAY, TRADING_DAY_YEARS
from .spectral import increments, noise_spectrum, periodogram
from .whittle import WhittleFit, multiscale_ratio

INGESTED_TAGS = ("b", "m1", "w", "s1", "s2")  # u/m2 need the latent path


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return format(x, ".17g")
    return "" if x is None else str(x)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _echo_csv(header, rows) -> None:
    click.echo(",".join(header))
    for row in rows:
        click.echo(",".join(_fmt(v) for v in row))


def _load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"bad JSON in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return ExperimentConfig.from_dict(raw)


def _resolve_threads(flag, cfg_threads: int = 1) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("SPECVOL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"SPECVOL_THREADS must be an integer, got {env!r}")
    return max(1, cfg_threads)


def _handle(func):
    """Run a command body, mapping library errors to exit code 1."""
    try:
        func()
    except SpecvolError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


@click.group()
def main():
    """Integrated-volatility estimation under microstructure noise."""


_out_dir = click.option("--out-dir", type=click.Path(file_okay=False), default=".",
                        show_default=True, help="Directory for output files.")
_fmt_opt = click.option("--format", "fmt", type=click.Choice(["csv", "svg"]),
                        default="csv", show_default=True,
                        help="'svg' also renders figures next to the CSVs.")
_seed_opt = click.option("--seed", type=int, default=None,
                         help="Override the config's master seed.")
_threads_opt = click.option("--threads", type=int, default=None,
                            help="Worker processes (fallback: SPECVOL_THREADS).")


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@_seed_opt
@_out_dir
@_fmt_opt
def simulate(config, seed, out_dir, fmt):
    """Simulate one latent path plus its noisy observation from CONFIG."""

    def body():
        cfg = _load_config(config)
        if seed is not None:
            cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "master_seed": seed})
        path_ss, noise_ss = path_seeds(cfg.master_seed, 0)
        latent = cfg.model.simulate(cfg.grid, path_ss)
        eps = sample_noise(cfg.noise, cfg.grid.n + 1, noise_ss)
        y = latent.x + eps
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        t = cfg.grid.times()
        rows = zip(t.tolist(), latent.x.tolist(), latent.spot_var.tolist(), y.tolist())
        _write_csv(out / "path.csv", ("t", "x", "nu", "y"), rows)
        meta = {"config": cfg.to_dict(), "seed": cfg.master_seed}
        (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
        if fmt == "svg":
            from .plotting import save_lines
            save_lines(out / "path.svg", t, {"observed y": y, "latent x": latent.x},
                       "Simulated path", "time (years)", "log price")
        click.echo(str(out / "path.csv"))
        click.echo(f"seed={cfg.master_seed}", err=True)

    _handle(body)


def _parse_timestamp(raw: str, lineno: int) -> float:
    try:
        return float(raw)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(raw).timestamp()
    except ValueError:
        raise ConfigError(
            f"line {lineno}: timestamp {raw!r} is neither numeric nor ISO-8601")


def _read_series(path: str, log_transform: bool, t_years: float | None):
    """Ingest a price/path CSV and return (ObservedSeries, spacing_in_input_units).

    Accepts the simulate output schema (t,x,nu,y; t already in years) or a
    (timestamp, price) file, with timestamps in seconds or ISO-8601.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip().lower() for h in next(reader)]
        except StopIteration:
            raise ConfigError(f"{path} is empty")
        if "y" in header and "t" in header:
            ti, vi, native_years = header.index("t"), header.index("y"), True
        elif "price" in header and "timestamp" in header:
            ti, vi = header.index("timestamp"), header.index("price")
            native_years = False
        else:
            raise ConfigError(
                f"{path}: expected columns (t, y) or (timestamp, price), got {header}")
        ts, vals = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            ts.append(_parse_timestamp(row[ti], lineno))
            try:
                v = float(row[vi])
            except ValueError:
                raise ConfigError(f"line {lineno}: bad price value {row[vi]!r}")
            if not native_years and v <= 0:
                raise ConfigError(f"line {lineno}: price must be positive, got {v}")
            vals.append(v)
    if len(vals) < 16:
        raise ConfigError(f"{path}: need at least 16 rows, got {len(vals)}")
    ts = np.asarray(ts)
    d = np.diff(ts)
    if np.any(d <= 0):
        raise ConfigError(f"{path}: timestamps must be strictly increasing")
    dt0 = d.mean()
    if np.any(np.abs(d - dt0) > 1e-9 * dt0):
        raise ConfigError(
            f"{path}: irregular sampling (spacing varies by more than 1e-9 "
            "relative); the estimators assume regularly spaced data")
    v = np.asarray(vals, dtype=float)
    if log_transform:
        v = np.log(v)
    n = len(v) - 1
    if n % 2 != 0:
        raise ConfigError(f"{path}: need an even number of increments, got {n}")
    if t_years is not None:
        t = t_years
    elif native_years:
        t = float(ts[-1] - ts[0])
    else:
        # Timestamps in seconds of trading time; convert to years.
        t = float(ts[-1] - ts[0]) / SECONDS_PER_TRADING_DAY * TRADING_DAY_YEARS
    return ObservedSeries(Grid(n, t), v)


@main.command()
@click.argument("series", type=click.Path(exists=True, dir_okay=False))
@click.option("--noise", "noise_model", default="white", show_default=True,
              help="Noise model for the fit: white, ma:q or aicc:qmax.")
@click.option("--estimators", "tags", default="b,m1,w", show_default=True,
              help="Comma-separated estimator tags.")
@click.option("--log-prices", is_flag=True,
              help="Apply a log transform to the price column.")
@click.option("--t-years", type=float, default=None,
              help="Override the inferred sample span (in years).")
@_out_dir
@_fmt_opt
def estimate(series, noise_model, tags, log_prices, t_years, out_dir, fmt):
    """Estimate integrated volatility from a regularly sampled SERIES file."""

    def body():
        wanted = tuple(t.strip() for t in tags.split(",") if t.strip())
        bad = [t for t in wanted if t not in est.ESTIMATOR_TAGS]
        if bad:
            raise click.UsageError(f"unknown estimator tags: {bad}")
        latent_only = [t for t in wanted if t not in INGESTED_TAGS]
        if latent_only:
            raise click.UsageError(
                f"estimators {latent_only} need the latent path and cannot be "
                "computed from ingested data")
        obs = _read_series(series, log_prices, t_years)
        fit = None
        if "m1" in wanted or "w" in wanted:
            fit = est.fit_series(obs, noise_model)
        values = {}
        for tag in wanted:
            if tag == "b":
                values[tag] = est.realized_volatility(obs)
            elif tag == "m1":
                values[tag] = est.m1_from_fit(obs, fit).value
            elif tag == "w":
                values[tag] = est.whittle_w(fit, obs.grid).value
            elif tag == "s1":
                values[tag] = est.tsrv_first_best(obs, obs.grid.t).value
            elif tag == "s2":
                k = est.sparse_optimal_subsample(obs, obs.grid.t)
                values[tag] = est.tsrv_avg(obs, k).value
        rows = [(tag, values[tag]) for tag in wanted]
        _echo_csv(("estimator", "value"), rows)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "estimate.csv", ("estimator", "value"), rows)
        if fit is not None:
            info = {"sig2_x": fit.sig2_x, "sig2_noise": fit.sig2_noise,
                    "theta": list(fit.theta), "q": fit.q, "loglik": fit.loglik,
                    "aicc": fit.aicc, "boundary": fit.boundary}
            (out / "fit.json").write_text(json.dumps(info, indent=2) + "\n")
            click.echo(f"fitted q={fit.q} sig2_x={fit.sig2_x:.6g} "
                       f"sig2_noise={fit.sig2_noise:.6g}", err=True)
            if fmt == "svg":
                from .plotting import save_spectrum_fit
                per = periodogram(increments(obs))
                n = obs.grid.n
                k = np.arange(1, n // 2)
                s_model = fit.sig2_x + noise_spectrum(fit.noise_spec, k, n)
                save_spectrum_fit(out / "spectrum.svg", k, per.s[1:n // 2],
                                  s_model, "Periodogram and fitted spectrum")

    _handle(body)


_PATH_COLS = ("path_id", "true_iv")
_FIT_COLS = ("sig2_x", "sig2_noise", "fit_q", "fit_boundary")
_MISC_COLS = ("k_s1", "k_s2", "s1_degenerate", "excluded")


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@_seed_opt
@_threads_opt
@_out_dir
@_fmt_opt
def mc(config, seed, threads, out_dir, fmt):
    """Run the Monte Carlo experiment described by CONFIG."""

    def body():
        cfg = _load_config(config)
        overrides = cfg.to_dict()
        if seed is not None:
            overrides["master_seed"] = seed
        overrides["threads"] = _resolve_threads(threads, cfg.threads)
        cfg = ExperimentConfig.from_dict(overrides)
        report = run_experiment(cfg)

        summary_rows = [
            (tag, report.summary[tag]["bias"], report.summary[tag]["variance"],
             report.summary[tag]["rmse"])
            for tag in cfg.estimators
        ]
        header = ("estimator", "bias", "variance", "rmse")
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "summary.csv", header, summary_rows)
        _echo_csv(header, summary_rows)

        path_header = _PATH_COLS + cfg.estimators + _FIT_COLS + _MISC_COLS
        path_rows = []
        for r in report.rows:
            vals = [r.values.get(tag) for tag in cfg.estimators]
            f = r.fit
            fit_vals = ([f.sig2_x, f.sig2_noise, f.q, f.boundary]
                        if f is not None else [None] * 4)
            path_rows.append([r.index, r.true_iv] + vals + fit_vals
                             + [r.k_s1, r.k_s2, r.s1_degenerate, r.failed])
        _write_csv(out / "paths.csv", path_header, path_rows)
        click.echo(
            f"paths={cfg.paths} excluded={report.n_excluded} "
            f"threads={cfg.threads} wall={report.wall_time:.1f}s", err=True)
        if fmt == "svg":
            from .plotting import save_error_histograms
            good = [r for r in report.rows if not r.failed]
            errors = {tag: np.array([r.values[tag] - r.true_iv for r in good])
                      for tag in cfg.estimators}
            save_error_histograms(out / "errors.svg", errors,
                                  "Estimation error by estimator")

    _handle(body)


@main.command()
@click.option("--sig2-x", type=float, required=True,
              help="Per-increment signal variance.")
@click.option("--sig2-eps", type=float, required=True,
              help="Marginal noise variance (white noise).")
@click.option("--n", "n_grid", type=int, default=23400, show_default=True,
              help="Number of increments on the circular grid.")
@click.option("--max-lag", type=int, default=200, show_default=True,
              help="Largest lag written to the kernel CSV.")
@_out_dir
@_fmt_opt
def kernel(sig2_x, sig2_eps, n_grid, max_lag, out_dir, fmt):
    """Tabulate the implied smoothing kernel and its closed-form approximations."""

    def body():
        g = Grid(n_grid, TRADING_DAY_YEARS)
        fit = WhittleFit(sig2_x=sig2_x, sig2_noise=sig2_eps, theta=(), q=0,
                         loglik=math.nan, aicc=math.nan, converged=True,
                         n_freq=n_grid // 2 - 1, boundary=False)
        rc = multiscale_ratio(fit, g)
        kern = kern_mod.kernel_from_ratio(rc)
        m = min(max(max_lag, 0), n_grid - 1)
        tau = np.arange(m + 1)
        r = kern_mod.kernel_closed_form(sig2_x, sig2_eps, tau)
        q = kern_mod.kernel_laplace(sig2_x, sig2_eps, tau)
        rows = list(zip(tau.tolist(), kern.l[: m + 1].tolist(),
                        np.asarray(r).tolist(), np.asarray(q).tolist()))
        header = ("tau", "l", "r", "q")
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "kernel.csv", header, rows)
        _echo_csv(header, rows)
        k_half = np.arange(n_grid // 2 + 1)
        _write_csv(out / "ratio.csv", ("k", "l"),
                   zip(k_half.tolist(), rc.l[: n_grid // 2 + 1].tolist()))
        if fmt == "svg":
            from .plotting import save_lines
            save_lines(out / "kernel.svg", tau,
                       {"inverse-DFT kernel": kern.l[: m + 1],
                        "closed form": np.asarray(r),
                        "Laplace window": np.asarray(q)},
                       "Implied smoothing kernel", "lag tau", "weight")
            save_lines(out / "ratio.svg", k_half, {"L_k": rc.l[: n_grid // 2 + 1]},
                       "Frequency-wise shrinkage curve", "frequency index k",
                       "L_k")

    _handle(body)


@main.command()
@click.argument("summary", type=click.Path(exists=True, dir_okay=False))
def table(summary):
    """Pretty-print a summary CSV as an aligned text table."""

    def body():
        with open(summary, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise ConfigError(f"{summary} is empty")
        header, body_rows = rows[0], rows[1:]

        def cell(raw: str) -> str:
            try:
                return format(float(raw), ".4e")
            except ValueError:
                return raw

        formatted = [header] + [[cell(c) for c in r] for r in body_rows]
        widths = [max(len(r[i]) for r in formatted) for i in range(len(header))]
        for r in formatted:
            click.echo("  ".join(c.rjust(w) for c, w in zip(r, widths)))

    _handle(body)


if __name__ == "__main__":
    main()
