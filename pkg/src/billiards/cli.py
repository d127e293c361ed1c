"""Command-line front end: ``billiards <command> ...``.

Every artifact starts with ``#`` metadata lines (package version, table,
parameters, RNG seed) so runs can be reproduced from their outputs.
"""
from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .birkhoff import CHAOS_THRESHOLD, grid_seeds, phase_portrait_scan, random_seeds
from .boundary import (associated_ellipse, builtin_table, eccentricities, format_table_file,
                       min_signed_curvature, read_table_file, TableSpec)
from .ellipse import PhasePoint, ellipse_step
from .errors import BilliardError
from .globalize import grow_manifolds
from .periodic import (ShootVector, multipliers_and_eigvecs, multishoot_residual,
                       newton_periodic)
from .plotting import emit_plot_script
from .realmap import orbit as run_orbit
from .spectral import (SpectralChart, coeff_decay_report, conjugacy_error,
                       newton_parameterization)


class CommandError(click.ClickException):
    """Failure reported as a one-line JSON record on stderr."""

    def __init__(self, kind: str, message: str, exit_code: int = 1):
        super().__init__(message)
        self.kind = kind
        self.exit_code = exit_code

    def show(self, file=None):
        click.echo(json.dumps({"error": self.kind, "message": self.message}),
                   file=file or sys.stderr)


def _resolve_table(table, table_file, fallback: dict | None = None) -> TableSpec:
    if table and table_file:
        raise CommandError("usage", "give either --table or --table-file, not both", 2)
    if table_file:
        try:
            return read_table_file(table_file)
        except (OSError, ValueError) as exc:
            raise CommandError("bad table file", str(exc), 2) from exc
    if table:
        try:
            return builtin_table(table)
        except KeyError as exc:
            raise CommandError("unknown table", f"unknown table {table!r}", 2) from exc
    if fallback:
        return TableSpec.from_dict(fallback)
    raise CommandError("usage", "a table is required (--table A..E or --table-file)", 2)


def table_options(f):
    f = click.option("--table-file", type=click.Path(exists=True, dir_okay=False),
                     help="Plain-text table file with ax.k/bx.k/ay.k/by.k keys.")(f)
    return click.option("--table", help="Built-in table A..E.")(f)


def _meta(spec: TableSpec, params: dict, seed=None) -> list[str]:
    return [f"# billiards {__version__}",
            f"# table: {spec.name} {json.dumps(spec.to_dict(), sort_keys=True)}",
            f"# parameters: {json.dumps(params, sort_keys=True)}",
            f"# seed: {seed}"]


def _write_csv(path, meta: list[str], columns, rows):
    with open(path, "w", newline="") as fh:
        for line in meta:
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)


def _write_json(path, meta: dict, body: dict):
    Path(path).write_text(json.dumps({"meta": meta, **body}, indent=2) + "\n")


def _json_meta(spec: TableSpec, params: dict, seed=None) -> dict:
    return {"version": __version__, "table": spec.name, "parameters": params, "seed": seed}


def _fmt(x) -> str:
    return repr(float(x))


@click.group()
@click.version_option(__version__)
def main():
    """Billiard maps, periodic orbits and invariant manifolds."""


@main.command("table-info")
@table_options
def table_info(table, table_file):
    """Print table coefficients, minimum curvature and associated ellipse."""
    spec = _resolve_table(table, table_file)
    click.echo(format_table_file(spec), nl=False)
    click.echo(f"min_signed_curvature = {min_signed_curvature(spec):.6g}")
    try:
        ell = associated_ellipse(spec)
    except ValueError:
        return
    ecc = eccentricities(ell)
    click.echo(f"associated_ellipse = ({ell.a1:g}, {ell.b1:g})")
    click.echo(f"eccentricity = {ecc['standard']:.4f}")
    click.echo(f"focal_over_minor = {ecc['focal_over_minor']:.4f}")


@main.command()
@table_options
@click.option("--theta0", type=float, required=True)
@click.option("--r0", type=float, required=True)
@click.option("--steps", type=int, default=1000, show_default=True)
@click.option("--reverse", is_flag=True, help="Iterate the inverse map.")
@click.option("--ellipse-only", is_flag=True, help="Exact iteration on the associated ellipse.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def orbit(table, table_file, theta0, r0, steps, reverse, ellipse_only, out):
    """Iterate one orbit; CSV columns step, theta, r, s."""
    spec = _resolve_table(table, table_file)
    params = {"theta0": theta0, "r0": r0, "steps": steps, "reverse": reverse,
              "ellipse_only": ellipse_only}
    rows = []
    try:
        if ellipse_only:
            if reverse:
                raise CommandError("usage", "--reverse is not supported with --ellipse-only", 2)
            ell = associated_ellipse(spec)
            p = PhasePoint(theta0, r0)
            rows.append((0, _fmt(p.theta), _fmt(p.r), ""))
            for k in range(1, steps + 1):
                p, s = ellipse_step(ell, p)
                rows.append((k, _fmt(p.theta), _fmt(p.r), _fmt(s)))
        else:
            o = run_orbit(spec, PhasePoint(theta0, r0), steps, reverse_time=reverse)
            rows.append((0, _fmt(o.theta[0]), _fmt(o.r[0]), ""))
            rows.extend((k, _fmt(o.theta[k]), _fmt(o.r[k]), _fmt(o.s[k - 1]))
                        for k in range(1, len(o)))
    except (BilliardError, ValueError) as exc:
        raise CommandError(type(exc).__name__, str(exc)) from exc
    _write_csv(out, _meta(spec, params), ("step", "theta", "r", "s"), rows)


@main.command()
@table_options
@click.option("--grid-theta", type=int, default=None, help="Seed grid size in theta.")
@click.option("--grid-r", type=int, default=None, help="Seed grid size in r.")
@click.option("--random", "n_random", type=int, default=None,
              help="Use this many uniform random seeds instead of a grid.")
@click.option("--seed", "rng_seed", type=int, default=0, show_default=True)
@click.option("--steps", type=int, default=1000, show_default=True)
@click.option("--threshold", type=float, default=CHAOS_THRESHOLD, show_default=True)
@click.option("--threads", type=int, default=None, envvar="BILLIARDS_THREADS")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--plot-script", type=click.Path(dir_okay=False), default=None)
def scan(table, table_file, grid_theta, grid_r, n_random, rng_seed, steps, threshold,
         threads, out, plot_script):
    """Phase-portrait scan; CSV columns theta0, r0, frequency, chaotic, gap."""
    spec = _resolve_table(table, table_file)
    if threshold <= 0:
        raise CommandError("usage", "--threshold must be positive", 2)
    if n_random is not None:
        seeds = random_seeds(n_random, rng_seed)
    else:
        seeds = grid_seeds(grid_theta or 100, grid_r or 100)
    params = {"grid_theta": grid_theta, "grid_r": grid_r, "random": n_random,
              "steps": steps, "threshold": threshold}
    try:
        res = phase_portrait_scan(spec, seeds, steps, threshold, threads)
    except (BilliardError, ValueError) as exc:
        raise CommandError(type(exc).__name__, str(exc)) from exc
    rows = []
    for c in res:
        if not c.ok:
            continue
        freq = "" if c.frequency is None else _fmt(c.frequency)
        rows.append((_fmt(c.seed.theta), _fmt(c.seed.r), freq, int(c.chaotic), _fmt(c.wba_gap)))
    _write_csv(out, _meta(spec, params, rng_seed if n_random is not None else None),
               ("theta0", "r0", "frequency", "chaotic", "gap"), rows)
    if plot_script:
        emit_plot_script(plot_script, scan=out)


def _parse_seed(text: str) -> ShootVector:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError as exc:
        raise CommandError("usage", f"bad --seed {text!r}", 2) from exc
    if len(vals) < 2 or len(vals) % 2:
        raise CommandError("usage", "--seed needs theta,r pairs", 2)
    return ShootVector(np.reshape(vals, (-1, 2)))


@main.command("find-periodic")
@table_options
@click.option("--period", type=int, required=True)
@click.option("--seed", "seed_text", required=True, help="theta,r[,theta,r...] (K pairs).")
@click.option("--tol", type=float, default=1e-12, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def find_periodic(table, table_file, period, seed_text, tol, out):
    """Multiple-shooting Newton for a period-K saddle; writes orbit JSON."""
    spec = _resolve_table(table, table_file)
    u0 = _parse_seed(seed_text)
    if u0.K != period:
        raise CommandError("usage", f"--seed has {u0.K} points but --period is {period}", 2)
    if tol <= 0:
        raise CommandError("usage", "--tol must be positive", 2)
    try:
        u = newton_periodic(spec, u0, tol=tol)
        eig = multipliers_and_eigvecs(spec, u)
    except BilliardError as exc:
        raise CommandError(type(exc).__name__, str(exc)) from exc
    res = float(np.linalg.norm(multishoot_residual(spec, u), np.inf))
    body = {
        "period": period,
        "points": u.points.tolist(),
        "multipliers": {"alpha": eig.alpha, "beta": eig.beta, "lam": eig.lam, "mu": eig.mu},
        "eigenvectors": {"stable": eig.xi_s.tolist(), "unstable": eig.xi_u.tolist(),
                         "stable_full": eig.vec_s.tolist(), "unstable_full": eig.vec_u.tolist()},
        "residual": res,
        "table": spec.to_dict(),
    }
    _write_json(out, _json_meta(spec, {"period": period, "seed": seed_text, "tol": tol}), body)


@main.command()
@table_options
@click.option("--orbit", "orbit_file", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--kind", type=click.Choice(["stable", "unstable"]), required=True)
@click.option("--scale", type=float, default=None, help="Squared norm of the first coefficient.")
@click.option("--table-scale", type=float, default=None,
              help="Length of the first coefficient (squared to give --scale).")
@click.option("--order", "N", type=int, default=60, show_default=True)
@click.option("--method", type=click.Choice(["fft", "dense"]), default="fft", show_default=True)
@click.option("--tol", type=float, default=1e-11, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def manifold(table, table_file, orbit_file, kind, scale, table_scale, N, method, tol, out):
    """Spectral Newton for a manifold chart; writes chart JSON."""
    data = json.loads(Path(orbit_file).read_text())
    spec = _resolve_table(table, table_file, data.get("table"))
    if (scale is None) == (table_scale is None):
        raise CommandError("usage", "give exactly one of --scale or --table-scale", 2)
    s = scale if scale is not None else table_scale ** 2
    if s <= 0 or tol <= 0:
        raise CommandError("usage", "scale and tolerance must be positive", 2)
    u = ShootVector(data["points"])
    try:
        eig = multipliers_and_eigvecs(spec, u)
        chart = newton_parameterization(spec, u, eig, kind, s, N, tol=tol, method=method)
        err = conjugacy_error(chart)
    except (BilliardError, ValueError, np.linalg.LinAlgError) as exc:
        raise CommandError(type(exc).__name__, str(exc)) from exc
    body = {**chart.to_dict(), "conjugacy_error": err,
            "decay": [[n, v] for n, v in coeff_decay_report(chart)]}
    params = {"kind": kind, "scale": s, "N": N, "method": method, "tol": tol}
    _write_json(out, _json_meta(spec, params), body)


def _branch_label(c) -> str:
    return f"{c.kind[0]}{c.component}{'+' if c.sign > 0 else '-'}"


@main.command()
@click.option("--chart", "chart_file", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--samples", "J", type=int, default=500, show_default=True)
@click.option("--iterates", "M", type=int, default=4, show_default=True)
@click.option("--tail-tol", type=float, default=1e-8, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--scan", "scan_file", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Scan CSV to overlay in the plot script.")
@click.option("--plot-script", type=click.Path(dir_okay=False), default=None)
def globalize(chart_file, J, M, tail_tol, out, scan_file, plot_script):
    """Grow global manifolds; CSV columns branch, iterate, sigma, theta, r."""
    data = json.loads(Path(chart_file).read_text())
    chart = SpectralChart.from_dict(data)
    if chart.spec is None:
        raise CommandError("usage", "chart file carries no table", 2)
    if M < 0:
        raise CommandError("usage", "--iterates must be >= 0", 2)
    try:
        curves = grow_manifolds(chart.spec, chart, J, M, tail_tol)
    except (BilliardError, ValueError) as exc:
        raise CommandError(type(exc).__name__, str(exc)) from exc
    rows = []
    for c in curves:
        label = _branch_label(c)
        for n in range(c.M + 1):
            strand = c.strand(n, wrap=True)
            for sig, (th, r) in zip(c.sigma, strand):
                if np.isfinite(th) and np.isfinite(r):
                    rows.append((label, n, _fmt(sig), _fmt(th), _fmt(r)))
    params = {"chart": Path(chart_file).name, "kind": chart.kind, "J": J, "M": M}
    _write_csv(out, _meta(chart.spec, params), ("branch", "iterate", "sigma", "theta", "r"),
               rows)
    if plot_script:
        emit_plot_script(plot_script, scan=scan_file, manifold=out)


if __name__ == "__main__":  # pragma: no cover
    main()
