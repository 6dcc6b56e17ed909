"""Command-line front end.

Subcommands: exact, asym, residual-sweep, mc, potential, crosscheck.
Outputs CSV (with a '#' provenance header) or flat JSON; numbers are printed
with 17 significant digits so files round-trip.  Exit codes: 0 success,
2 usage, 3 domain/degenerate parameters, 4 numeric-quality failure.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor

import click

from . import __version__
from ._backend import BACKEND
from .asymptotics import (
    DegenerateRegimeError,
    eval_series,
    residual,
    strong_coeffs,
    weak_coeffs,
)
from .ensemble import SampleConfig, run_mc
from .exactprob import EnsembleParams, log_p_nm, ratio_l1_laguerre, ratio_l1_prefactored, rho_traces
from .potential import PotentialParams, find_minimum
from .prekernel import ratio_l1_pfaffian2d
from .specfun import DomainError

EXIT_DOMAIN = 3
EXIT_NUMERIC = 4


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _parse_grid(text: str) -> list:
    """Comma list or lo:hi:step range."""
    out = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if ":" in piece:
            lo, hi, step = (float(v) for v in piece.split(":"))
            if step <= 0:
                raise click.UsageError(f"nonpositive step in range {piece!r}")
            v = lo
            while v <= hi + 1e-12:
                out.append(round(v, 12))
                v += step
        else:
            out.append(float(piece))
    if not out:
        raise click.UsageError(f"empty grid: {text!r}")
    return out


def _parse_int_grid(text: str) -> list:
    return [int(round(v)) for v in _parse_grid(text)]


def _provenance(extra: dict) -> list:
    lines = [f"# eginoe {__version__} backend={BACKEND}"]
    lines += [f"# {k}={v}" for k, v in extra.items()]
    return lines


def _emit(rows: list, header: list, out, fmt: str, prov: dict) -> None:
    if fmt == "json":
        payload = [dict(zip(header, row)) for row in rows]
        text = json.dumps({"provenance": {str(k): str(v) for k, v in prov.items()}, "rows": payload}, indent=1)
    else:
        lines = _provenance(prov)
        lines.append(",".join(header))
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _apply_config(ctx, param, value):
    """--config FILE: key=value lines become defaults; explicit flags win.

    Keys are flag names (e.g. ``n``, ``tau``) and are translated to the
    command's parameter names before entering the default map.
    """
    if not value:
        return value
    alias = {}
    for p in ctx.command.params:
        for opt in p.opts:
            alias[opt.lstrip("-").replace("-", "_")] = p.name
    defaults = {}
    with open(value, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise click.UsageError(f"config line without '=': {line!r}")
            k, v = line.split("=", 1)
            key = k.strip().replace("-", "_")
            defaults[alias.get(key, key)] = v.strip()
    ctx.default_map = {**(ctx.default_map or {}), **defaults}
    return value


_config_option = click.option(
    "--config", type=click.Path(exists=True), callback=_apply_config, expose_value=False,
    is_eager=True, help="key=value defaults file; explicit flags win",
)


def _params_for(n: int, tau, alpha) -> EnsembleParams:
    if (tau is None) == (alpha is None):
        raise click.UsageError("give exactly one of --tau / --alpha")
    if tau is not None:
        return EnsembleParams.strong(n, tau)
    return EnsembleParams.weak(n, alpha)


def _regime_grid(regime: str, tau, alpha) -> list:
    """Grid values for the selected regime; the other flag must be absent."""
    if regime == "strong":
        if tau is None or alpha is not None:
            raise click.UsageError("strong regime takes --tau only")
        return _parse_grid(tau)
    if alpha is None or tau is not None:
        raise click.UsageError("weak regime takes --alpha only")
    return _parse_grid(alpha)


@click.group()
@click.version_option(__version__)
def main():
    """Real-eigenvalue statistics of the real elliptic Ginibre ensemble."""


@main.command("exact")
@_config_option
@click.option("--n", "n_grid", required=True, help="even matrix sizes, e.g. 4 or 2,4,8")
@click.option("--tau", default=None, type=str, help="tau grid (strong regime)")
@click.option("--alpha", default=None, type=str, help="alpha grid (weak regime)")
@click.option("--out", default=None, type=click.Path())
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "json"]))
@click.option("--verify", is_flag=True, help="cross-check l=1 against the second integral route")
def cmd_exact(n_grid, tau, alpha, out, fmt, verify):
    """Exact table of p_{n,m} for all m on the parameter grid."""
    ns = _parse_int_grid(n_grid)
    taus = _parse_grid(tau) if tau is not None else [None]
    alphas = _parse_grid(alpha) if alpha is not None else [None]
    rows = []
    try:
        for n in ns:
            for tv in taus:
                for av in alphas:
                    params = _params_for(n, tv, av)
                    for l in range(n // 2 + 1):
                        lp = log_p_nm(params, l, verify=verify)
                        rows.append(
                            ("strong" if av is None else "weak", n,
                             tv if av is None else av, n - 2 * l, lp.log,
                             math.exp(lp.log), ";".join(lp.flags))
                        )
    except DomainError as exc:
        raise SystemExit(_fail(EXIT_DOMAIN, str(exc)))
    _emit(rows, ["regime", "n", "tau_or_alpha", "m", "log_p", "p", "flags"], out, fmt,
          {"command": "exact", "verify": verify})


def _fail(code: int, msg: str) -> int:
    click.echo(f"error: {msg}", err=True)
    return code


@main.command("asym")
@_config_option
@click.option("--regime", required=True, type=click.Choice(["strong", "weak"]))
@click.option("--n", "n_grid", required=True)
@click.option("--tau", default=None, type=str)
@click.option("--alpha", default=None, type=str)
@click.option("--l", "l_grid", default="1")
@click.option("--order", "M", default=1, type=int, help="series truncation order for l=1")
@click.option("--out", default=None, type=click.Path())
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "json"]))
def cmd_asym(regime, n_grid, tau, alpha, l_grid, M, out, fmt):
    """Asymptotic predictions (coefficients and truncated series)."""
    ns = _parse_int_grid(n_grid)
    ls = _parse_int_grid(l_grid)
    vals = _regime_grid(regime, tau, alpha)
    rows = []
    try:
        for n in ns:
            for v in vals:
                for l in ls:
                    if regime == "strong":
                        params = EnsembleParams.strong(n, v)
                        c = strong_coeffs(v, l)
                        pred = c.a1 * n * n + c.a2 * n + c.a3 * math.log(n)
                        coeffs = (c.a1, c.a2, c.a3)
                    else:
                        params = EnsembleParams.weak(n, v)
                        c = weak_coeffs(v, l)
                        pred = c.b1 * n + c.b2 * math.log(n) + c.b3
                        coeffs = (c.b1, c.b2, c.b3)
                    se = eval_series(params, l, M) if l == 1 else None
                    series_log = (se.prefactor_log if l == 1 else float("nan"))
                    if se is not None and not se.total_log.is_zero():
                        series_log = se.total_log.log_abs
                    rows.append((regime, n, v, l, *coeffs, pred, series_log))
    except DegenerateRegimeError as exc:
        raise SystemExit(_fail(EXIT_DOMAIN, f"degenerate regime: {exc}"))
    except DomainError as exc:
        raise SystemExit(_fail(EXIT_DOMAIN, str(exc)))
    _emit(rows, ["regime", "n", "tau_or_alpha", "l", "c1", "c2", "c3", "prediction_log_p", "series_log_ratio"],
          out, fmt, {"command": "asym", "order": M})


@main.command("residual-sweep")
@_config_option
@click.option("--regime", required=True, type=click.Choice(["strong", "weak"]))
@click.option("--l", "l_grid", default="1")
@click.option("--n", "n_grid", required=True)
@click.option("--tau", default=None, type=str)
@click.option("--alpha", default=None, type=str)
@click.option("--out", default=None, type=click.Path())
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "json"]))
@click.option("--workers", default=1, type=int)
def cmd_residual_sweep(regime, l_grid, n_grid, tau, alpha, out, fmt, workers):
    """Exact log p minus the regime prediction over a parameter grid."""
    ns = _parse_int_grid(n_grid)
    ls = _parse_int_grid(l_grid)
    vals = _regime_grid(regime, tau, alpha)
    grid = [(regime, n, v, l) for n in ns for v in vals for l in ls]
    for _, n, _, l in grid:
        if l >= 2 and n > 64:
            raise SystemExit(_fail(EXIT_DOMAIN, f"zonal route capped at n <= 64 (requested n={n}, l={l})"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_residual_row, grid))
    else:
        rows = [_residual_row(g) for g in grid]
    bad = [r for r in rows if r[-1]]
    _emit(rows, ["regime", "n", "tau_or_alpha", "l", "log_p", "prediction", "residual", "error"],
          out, fmt, {"command": "residual-sweep"})
    if bad:
        raise SystemExit(_fail(EXIT_NUMERIC, f"{len(bad)} grid point(s) failed"))


def _residual_row(point):
    regime, n, v, l = point
    try:
        params = EnsembleParams.strong(n, v) if regime == "strong" else EnsembleParams.weak(n, v)
        lp = log_p_nm(params, l)
        res = residual(params, l, exact_log_p=lp.log)
        return (regime, n, v, l, lp.log, lp.log - res, res, "")
    except (DomainError, DegenerateRegimeError) as exc:
        return (regime, n, v, l, float("nan"), float("nan"), float("nan"), str(exc))


@main.command("mc")
@_config_option
@click.option("--n", required=True, type=int)
@click.option("--tau", default=None, type=float)
@click.option("--alpha", default=None, type=float)
@click.option("--trials", default=100000, type=int)
@click.option("--seed", default=1, type=int)
@click.option("--out", default=None, type=click.Path())
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "json"]))
def cmd_mc(n, tau, alpha, trials, seed, out, fmt):
    """Monte Carlo frequencies of the real-eigenvalue count."""
    try:
        params = _params_for(n, tau, alpha)
        cfg = SampleConfig(params, trials, seed)
        hist = run_mc(cfg)
        exact = {n - 2 * l: math.exp(log_p_nm(params, l).log) for l in range(n // 2 + 1)} if n <= 12 else {}
    except DomainError as exc:
        raise SystemExit(_fail(EXIT_DOMAIN, str(exc)))
    rows = []
    for m in range(n % 2, n + 1, 2):
        lo, hi = hist.ci95(m)
        rows.append((n, m, hist.counts.get(m, 0), hist.frequency(m), lo, hi, exact.get(m, float("nan"))))
    _emit(rows, ["n", "m", "count", "freq", "ci95_lo", "ci95_hi", "p_exact"], out, fmt,
          {"command": "mc", "seed": seed, "trials": trials, "tau": params.tau,
           "mean": hist.mean, "variance": hist.variance})


@main.command("potential")
@_config_option
@click.option("--n", required=True, type=int)
@click.option("--tau", required=True, type=float)
@click.option("--out", default=None, type=click.Path())
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "json"]))
def cmd_potential(n, tau, out, fmt):
    """Minimum of the pair potential: location, gap, Hessian."""
    try:
        rep = find_minimum(PotentialParams(n, tau))
    except DomainError as exc:
        raise SystemExit(_fail(EXIT_DOMAIN, str(exc)))
    (hxx, hxy), (_, hyy) = rep.hessian
    rows = [(n, tau, rep.y_star_n, rep.q_gap, hxx, hxy, hyy)]
    _emit(rows, ["n", "tau", "y_star", "gap", "hess_xx", "hess_xy", "hess_yy"], out, fmt,
          {"command": "potential"})


@main.command("crosscheck")
@_config_option
@click.option("--n", "n_grid", required=True)
@click.option("--tau", required=True, type=str)
@click.option("--out", default=None, type=click.Path())
@click.option("--tol", default=1e-5, type=float)
def cmd_crosscheck(n_grid, tau, out, tol):
    """Pairwise agreement of the four l=1 routes plus the normalization defect."""
    ns = _parse_int_grid(n_grid)
    taus = _parse_grid(tau)
    report = []
    worst = 0.0
    try:
        for n in ns:
            if n > 40:
                raise SystemExit(_fail(EXIT_DOMAIN, "crosscheck supports n <= 40"))
            for tv in taus:
                params = EnsembleParams.strong(n, tv)
                routes = {
                    "laguerre": ratio_l1_laguerre(params).to_real(),
                    "prefactored": ratio_l1_prefactored(params).to_real(),
                    "trace": rho_traces(params, 1).traces[0].to_real(),
                    "pfaffian2d": ratio_l1_pfaffian2d(params).to_real(),
                }
                pair = {}
                names = sorted(routes)
                for i, a in enumerate(names):
                    for b in names[i + 1:]:
                        rel = abs(routes[a] / routes[b] - 1.0)
                        pair[f"{a}_vs_{b}"] = rel
                        worst = max(worst, rel)
                defect = abs(sum(math.exp(log_p_nm(params, l).log) for l in range(n // 2 + 1)) - 1.0)
                worst = max(worst, defect)
                report.append({"n": n, "tau": tv, "routes": routes, "pairwise_rel": pair,
                               "normalization_defect": defect})
    except DomainError as exc:
        raise SystemExit(_fail(EXIT_DOMAIN, str(exc)))
    text = json.dumps({"tolerance": tol, "worst": worst, "points": report}, indent=1, default=float)
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        click.echo(text)
    if worst > tol:
        raise SystemExit(_fail(EXIT_NUMERIC, f"worst relative disagreement {worst:.3e} exceeds {tol:g}"))


if __name__ == "__main__":
    main()
