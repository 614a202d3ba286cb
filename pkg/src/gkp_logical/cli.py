"""Command line front end: channel matrices, sweeps, decay fits, decoder maps, oracle checks and Wigner rasters.

Exit codes: 0 success, 2 usage, 3 convergence, 4 oracle failure.
"""
from __future__ import annotations

import csv
import datetime as _dt
import importlib.metadata
import io
import json
import os
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import __version__
from .errors import ConvergenceError, CutoffError, DomainError, OracleError

EXIT_USAGE = 2
EXIT_CONVERGENCE = 3
EXIT_ORACLE = 4
FORMATS = ("csv", "json", "svg")
DEFAULT_SWEEP_BETAS = (0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4)
DEFAULT_DECAY_BETAS = (0.1, 0.15, 0.2, 0.4)
DEFAULT_ORACLE_BETAS = (0.1, 0.2, 0.4)


class RunFailure(click.ClickException):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.exit_code = code


def _fail_from(exc: Exception) -> RunFailure:
    if isinstance(exc, ConvergenceError):
        return RunFailure(f"convergence error: {exc}", EXIT_CONVERGENCE)
    if isinstance(exc, (OracleError, CutoffError)):
        hint = " (increase --nmax-fock)" if isinstance(exc, CutoffError) else ""
        return RunFailure(f"oracle failure: {exc}{hint}", EXIT_ORACLE)
    return RunFailure(str(exc), EXIT_USAGE)


def _guard(fn):
    """Translate library exceptions into exit codes."""
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except (ConvergenceError, OracleError, DomainError, ValueError) as exc:
            raise _fail_from(exc) from exc
    return wrapper


# ---- output helpers -------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


class Output:
    """Collects written files and writes the run manifest last."""

    def __init__(self, out: str, formats, command: str, params: dict, flags: dict | None = None):
        self.flags = flags or {}
        self.dir = Path(out)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.formats = set(formats or FORMATS)
        self.command = command
        self.params = params
        self.files: list[str] = []

    def write(self, name: str, text: str, kind: str | None = None):
        kind = kind or name.rsplit(".", 1)[-1]
        if kind not in self.formats:
            return None
        path = self.dir / name
        path.write_text(text)
        self.files.append(name)
        return path

    def manifest(self, extra: dict | None = None):
        import scipy

        rerun = ["gkp-logical", self.command]
        for k, v in sorted(self.params.items()):
            flag = self.flags.get(k, "--" + k.replace("_", "-"))
            if isinstance(v, bool):
                if v:
                    rerun.append(flag)
            elif isinstance(v, (list, tuple)):
                for item in v:
                    rerun += [flag, str(item)]
            elif v is not None:
                rerun += [flag, str(v)]
        m = {
            "command": self.command,
            "params": self.params,
            "rerun": rerun,
            "outputs": sorted(self.files),
            "versions": {
                "gkp_logical": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "click": importlib.metadata.version("click"),
                "python": platform.python_version(),
            },
            "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        }
        if extra:
            m.update(extra)
        (self.dir / "manifest.json").write_text(_json_text(m))


def _params(ctx: click.Context) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in ctx.params.items()
            if not k.startswith("corrupt")}


def _output(ctx: click.Context, out, formats) -> "Output":
    flags = {p.name: p.opts[0] for p in ctx.command.params if p.opts}
    return Output(out, formats, ctx.command.name, _params(ctx), flags)


def _quad(radius_cells, nodes_per_cell):
    from .ptd_channel import QuadratureSpec

    if radius_cells is not None and radius_cells < 1:
        raise click.BadParameter("must be >= 1", param_hint="--radius-cells")
    if nodes_per_cell < 2:
        raise click.BadParameter("must be >= 2", param_hint="--nodes-per-cell")
    return QuadratureSpec(radius_cells=radius_cells, nodes_per_cell=nodes_per_cell)


def _channel_summary(g: np.ndarray) -> dict:
    from .qubit_channels import LABELS, avg_gate_fidelity, blocks, is_cptp, pauli_probabilities

    rep = is_cptp(g, 1e-6)
    b = blocks(g)
    probs = pauli_probabilities(g)
    return {
        "pauli_probabilities": {lab: float(p) for lab, p in zip(LABELS, probs)},
        "f_avg": avg_gate_fidelity(g),
        "cptp": {"ok": rep.ok, "tol": 1e-6, "violations": rep.violations,
                 "chi_eigenvalues": rep.chi_eigenvalues},
        "nonunital": b["nonunital"],
    }


def _emit_ptm(o: Output, stem: str, g: np.ndarray, meta: dict) -> dict:
    from .qubit_channels import ptm_to_csv, ptm_to_json

    o.write(f"{stem}.json", ptm_to_json(g, _jsonable(meta)) + "\n")
    o.write(f"{stem}.csv", ptm_to_csv(g))
    summary = _channel_summary(g)
    o.write(f"{stem}_summary.json", _json_text({"meta": meta, **summary}))
    return summary


def _print_ptm(g: np.ndarray, summary: dict):
    click.echo("PTM (order I, X, Y, Z):")
    for row in g:
        click.echo("  " + "  ".join(f"{x: .6f}" for x in row))
    p = summary["pauli_probabilities"]
    click.echo("Pauli probabilities: " + ", ".join(f"p_{k}={v:.6f}" for k, v in p.items()))
    click.echo(f"F_avg = {summary['f_avg']:.8f}; CPTP ok = {summary['cptp']['ok']}")


format_opt = click.option("--format", "formats", multiple=True, type=click.Choice(FORMATS),
                          help="Output formats (repeatable); default all.")
out_opt = click.option("--out", default="out", show_default=True, type=click.Path(file_okay=False),
                       help="Output directory.")
radius_opt = click.option("--radius-cells", type=int, default=None,
                          help="Quadrature window half-width in cells (default from tail bound).")
nodes_opt = click.option("--nodes-per-cell", type=int, default=16, show_default=True,
                         help="Gauss-Legendre nodes per cell and axis.")
workers_opt = click.option("--workers", type=click.IntRange(1, 64), default=min(4, os.cpu_count() or 1),
                           show_default=True, help="Bounded worker pool size.")


@click.group()
@click.version_option(__version__, prog_name="gkp-logical")
def main():
    """Logical channels of finite-energy GKP error correction."""


@main.command("ptm")
@click.option("--beta", type=float, required=True, help="Damping parameter.")
@click.option("--decoder", type=click.Choice(["sb", "opt", "none"]), default="sb", show_default=True)
@radius_opt
@nodes_opt
@click.option("--refine", is_flag=True, help="Certify by re-running with doubled nodes.")
@out_opt
@format_opt
@click.pass_context
@_guard
def cmd_ptm(ctx, beta, decoder, radius_cells, nodes_per_cell, refine, out, formats):
    """Syndrome-averaged PTM of the Pauli-twirled damped channel."""
    from .ptd_channel import PtdQuery, gamma_avg

    if not beta > 0:
        raise click.BadParameter("must be positive", param_hint="--beta")
    q = PtdQuery(beta, decoder, _quad(radius_cells, nodes_per_cell))
    ch = gamma_avg(q, refine=refine)
    o = _output(ctx, out, formats)
    summary = _emit_ptm(o, f"ptm_beta{beta:g}_{decoder}", ch.gamma, ch.meta)
    o.manifest({"resolved": ch.meta})
    _print_ptm(ch.gamma, summary)


@main.command("grn")
@click.option("--sigma2", type=float, default=None, help="Added variance per quadrature.")
@click.option("--beta", type=float, default=None, help="Damping parameter to match.")
@click.option("--convention", type=click.Choice(["twirl", "half_tanh"]), default="half_tanh",
              show_default=True, help="Variance convention used with --beta.")
@out_opt
@format_opt
@click.pass_context
@_guard
def cmd_grn(ctx, sigma2, beta, convention, out, formats):
    """PTM of the Gaussian random noise channel with SB decoding."""
    from .grn_channel import GrnVariance, gamma_grn_avg, sigma_from_beta

    if (sigma2 is None) == (beta is None):
        raise click.UsageError("give exactly one of --sigma2 or --beta")
    if sigma2 is not None:
        if not sigma2 > 0:
            raise click.BadParameter("must be positive", param_hint="--sigma2")
        v = GrnVariance(sigma2, "explicit")
    else:
        if not beta > 0:
            raise click.BadParameter("must be positive", param_hint="--beta")
        v = sigma_from_beta(beta, convention)
    g = gamma_grn_avg(v)
    meta = {"sigma2": v.sigma2, "convention": v.convention}
    if beta is not None:
        meta["beta"] = beta
    o = _output(ctx, out, formats)
    summary = _emit_ptm(o, f"grn_sigma2_{v.sigma2:.6g}", g, meta)
    o.manifest({"resolved": meta})
    click.echo(f"sigma2 = {v.sigma2:.6f} ({v.convention})")
    _print_ptm(g, summary)


def _sweep_point(beta, decoders, quad, convention):
    from .grn_channel import gamma_grn_avg, sigma_from_beta
    from .ptd_channel import ensure_sign_rule, gamma_avg_multi
    from .qubit_channels import avg_gate_fidelity, is_cptp, pauli_probabilities

    ensure_sign_rule()
    rows = []
    ptd = [d for d in decoders if d != "grn"]
    res = gamma_avg_multi(beta, tuple(ptd), quad) if ptd else {}
    mats = {d: res[d].gamma for d in ptd}
    if "grn" in decoders:
        mats["grn"] = gamma_grn_avg(sigma_from_beta(beta, convention))
    for d in decoders:
        g = mats[d]
        if not is_cptp(g, 1e-6):
            raise ConvergenceError(f"averaged channel at beta={beta} ({d}) fails the CPTP check")
        p = pauli_probabilities(g)
        rows.append((beta, d, *p, 1.0 - avg_gate_fidelity(g)))
    return rows


@main.command("sweep")
@click.option("--beta", "betas", type=float, multiple=True, help="Beta values (repeatable).")
@click.option("--decoder", "decoders", type=click.Choice(["sb", "opt", "none", "grn"]), multiple=True,
              help="Decoders (repeatable); default sb, opt, grn.")
@click.option("--convention", type=click.Choice(["twirl", "half_tanh"]), default="half_tanh",
              show_default=True, help="Variance convention of the matched GRN channel.")
@radius_opt
@nodes_opt
@workers_opt
@out_opt
@format_opt
@click.pass_context
@_guard
def cmd_sweep(ctx, betas, decoders, convention, radius_cells, nodes_per_cell, workers, out, formats):
    """Pauli probabilities and infidelity over a beta grid."""
    from .plotting import line_chart_svg

    betas = tuple(betas) or DEFAULT_SWEEP_BETAS
    decoders = tuple(dict.fromkeys(decoders or ("sb", "opt", "grn")))
    if any(not b > 0 for b in betas):
        raise click.BadParameter("must be positive", param_hint="--beta")
    quad = _quad(radius_cells, nodes_per_cell)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda b: _sweep_point(b, decoders, quad, convention), betas))
    rows = sorted((r for rs in results for r in rs), key=lambda r: (r[0], decoders.index(r[1])))
    o = _output(ctx, out, formats)
    o.write("sweep.csv", _csv_text(["beta", "decoder", "p_I", "p_X", "p_Y", "p_Z", "infidelity"], rows))
    infid = {d: {r[0]: r[6] for r in rows if r[1] == d} for d in decoders}
    bs = sorted(set(betas))
    series = {d: (bs, [infid[d][b] for b in bs]) for d in decoders}
    o.write("sweep_infidelity.svg",
            line_chart_svg(series, "beta", "1 - F_avg", "infidelity vs beta", logy=True))
    diffs = {}
    if "sb" in decoders and "opt" in decoders:
        diffs["F(opt) - F(sb)"] = (bs, [infid["sb"][b] - infid["opt"][b] for b in bs])
    if "opt" in decoders and "grn" in decoders:
        diffs["F(grn) - F(opt)"] = (bs, [infid["opt"][b] - infid["grn"][b] for b in bs])
    if diffs:
        o.write("sweep_fidelity_difference.svg",
                line_chart_svg(diffs, "beta", "fidelity difference", "fidelity differences"))
        o.write("sweep_fidelity_difference.csv", _csv_text(
            ["beta"] + sorted(diffs), [[b] + [diffs[k][1][i] for k in sorted(diffs)] for i, b in enumerate(bs)]))
    o.manifest()
    for r in rows:
        click.echo(f"beta={r[0]:<6g} {r[1]:<4} p_I={r[2]:.6f} p_X={r[3]:.6f} p_Y={r[4]:.6f} "
                   f"p_Z={r[5]:.6f} 1-F={r[6]:.3e}")


@main.command("nrounds")
@click.option("--beta", "betas", type=float, multiple=True, help="Beta values (repeatable).")
@click.option("--decoder", type=click.Choice(["sb", "opt", "none"]), default="opt", show_default=True)
@click.option("--n-max", type=int, default=10, show_default=True, help="Number of rounds.")
@radius_opt
@nodes_opt
@workers_opt
@out_opt
@format_opt
@click.pass_context
@_guard
def cmd_nrounds(ctx, betas, decoder, n_max, radius_cells, nodes_per_cell, workers, out, formats):
    """Fidelity after N rounds and the exponential decay fit."""
    from .plotting import line_chart_svg
    from .ptd_channel import PtdQuery, fidelity_sequence, fit_decay, gamma_avg

    if n_max < 2:
        raise click.BadParameter("cannot fit a decay from fewer than two rounds", param_hint="--n-max")
    betas = tuple(betas) or DEFAULT_DECAY_BETAS
    quad = _quad(radius_cells, nodes_per_cell)

    def one(beta):
        g = gamma_avg(PtdQuery(beta, decoder, quad)).gamma
        n = np.arange(1, n_max + 1)
        f = fidelity_sequence(g, n_max)
        return beta, n, f, fit_decay(n, f)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = sorted(pool.map(one, betas), key=lambda r: r[0])
    o = _output(ctx, out, formats)
    fit_rows, pts, fits = [], {}, {}
    for beta, n, f, fit in results:
        o.write(f"nrounds_beta{beta:g}.csv", _csv_text(["N", "F_avg"], [(int(k), float(v)) for k, v in zip(n, f)]))
        fit_rows.append((beta, fit.a, fit.b, fit.residual))
        pts[f"beta={beta:g}"] = (n, f - 0.5)
        nn = np.linspace(0, n_max, 50)
        fits[f"beta={beta:g}"] = (nn, fit.a * np.exp(fit.b * nn))
        click.echo(f"beta={beta:g}: a={fit.a:.6f} b={fit.b:.6f} residual={fit.residual:.2e}")
    o.write("nrounds_fit.csv", _csv_text(["beta", "a", "b", "residual"], fit_rows))
    o.write("nrounds.svg", line_chart_svg(pts, "N", "F_avg - 1/2", f"decay ({decoder})", logy=True, fits=fits))
    o.manifest()


@main.command("decoder-map")
@click.option("--beta", type=float, required=True)
@click.option("--resolution", type=click.IntRange(3, 2001), default=101, show_default=True,
              help="Grid points per cell and axis.")
@click.option("--radius-cells", type=click.IntRange(0, 10), default=2, show_default=True,
              help="Table window half-width in cells.")
@click.option("--reference", type=click.Choice(["opt", "sb"]), default="opt", show_default=True,
              help="Export the optimised table or the SB reference table.")
@out_opt
@format_opt
@click.pass_context
@_guard
def cmd_decoder_map(ctx, beta, resolution, radius_cells, reference, out, formats):
    """Optimised decoder lookup table with SB boundaries overlaid."""
    from .decoders import boundary_offsets, export_decoder_map, optimize_decoder, sb_table

    if not beta > 0:
        raise click.BadParameter("must be positive", param_hint="--beta")
    if reference == "sb":
        t = sb_table(resolution, radius_cells)
    else:
        t = optimize_decoder(beta, resolution, radius_cells=radius_cells)
    o = _output(ctx, out, formats)
    stem = f"decoder_map_beta{beta:g}_{reference}"
    if {"csv", "svg"} & o.formats:
        paths = export_decoder_map(t, o.dir, stem)
        for kind, p in paths.items():
            if kind in o.formats:
                o.files.append(Path(p).name)
            else:
                Path(p).unlink()
    off = boundary_offsets(t)
    step = 1.0 / resolution
    shifts = [c - s for c, s in zip(off["crossings"], off["sb"])]
    summary = {"beta": beta, "resolution": resolution, "radius_cells": radius_cells,
               "provenance": t.provenance, "crossings": off["crossings"], "sb_crossings": off["sb"],
               "offsets": shifts, "grid_step": step,
               "differs_from_sb": int((t.entries != sb_table(resolution, radius_cells).entries).sum())}
    o.write(f"{stem}_summary.json", _json_text(summary))
    o.manifest()
    click.echo(f"decision changes on the p=0 axis (units of sqrt(pi)): {np.round(off['crossings'], 4).tolist()}")
    click.echo(f"SB boundaries:                                 {off['sb']}")
    click.echo(f"offsets: {np.round(shifts, 4).tolist()} (grid step {step:.4f})")


def _corrupted_sign(a_prime, b):
    from .ptd_channel import sign_rule

    s = sign_rule(a_prime, b)
    return -s if (tuple(a_prime), tuple(b)) == ((0, 1), (1, 0)) else s


def _jacobi_sweep(n: int, seed: int = 1234) -> float:
    from .lattice_theta import siegel_theta, siegel_theta_transformed

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        ev = rng.uniform(0.05, 20.0, 2)
        th = rng.uniform(0, np.pi)
        R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        Y = R @ np.diag(ev) @ R.T
        X = rng.uniform(-1, 1, (2, 2))
        tau = 0.5 * (X + X.T) + 1j * Y
        z = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)
        a = siegel_theta(z, tau)
        b = siegel_theta_transformed(z, tau)
        worst = max(worst, abs(a - b) / abs(a))
    return worst


@main.command("oracle-check")
@click.option("--beta", "betas", type=float, multiple=True, help="Beta values (repeatable).")
@click.option("--nmax-fock", type=int, default=120, show_default=True, help="Fock cutoff.")
@click.option("--jacobi-samples", type=int, default=200, show_default=True)
@click.option("--tol", type=float, default=1e-6, show_default=True, help="Ratio tolerance.")
@click.option("--corrupt-sign-table", is_flag=True, hidden=True)
@out_opt
@click.pass_context
@_guard
def cmd_oracle_check(ctx, betas, nmax_fock, jacobi_samples, tol, corrupt_sign_table, out):
    """Cross-check the theta path against the Fock oracle."""
    from .fock_oracle import FockConfig, oracle_damped_trace_ratios, oracle_ratio_check, validate_sign_rule
    from .lattice_theta import damped_pauli_trace
    from .ptd_channel import sign_rule

    betas = tuple(betas) or DEFAULT_ORACLE_BETAS
    cfg = FockConfig(n_max=nmax_fock)
    ax = np.linspace(-np.sqrt(np.pi), np.sqrt(np.pi), 5)
    grid = (ax[:, None] + 1j * ax[None, :]).ravel()
    report = {"betas": list(betas), "n_max": nmax_fock, "tol": tol, "ratio": [], "traces": []}
    ok = True
    try:
        for b in betas:
            r = oracle_ratio_check(b, grid, cfg)
            r["ok"] = r["max_rel_dev"] <= tol
            ok &= r["ok"]
            report["ratio"].append(r)
            click.echo(f"beta={b:g}: element ratios max deviation {r['max_rel_dev']:.2e}")
            o_tr = oracle_damped_trace_ratios(b, cfg)
            t_tr = {lab: damped_pauli_trace(b, i) / damped_pauli_trace(b, 0)
                    for i, lab in enumerate("IXYZ")}
            dev = max(abs(o_tr[k] - t_tr[k]) for k in t_tr)
            report["traces"].append({"beta": b, "max_dev": dev, "ok": dev <= tol})
            ok &= dev <= tol
            click.echo(f"beta={b:g}: damped trace ratios max deviation {dev:.2e}")
        sign = validate_sign_rule(sign_fn=_corrupted_sign if corrupt_sign_table else sign_rule)
    except CutoffError as exc:
        raise RunFailure(f"oracle failure: {exc}; the default --nmax-fock 120 is safe for beta >= 0.1",
                         EXIT_ORACLE) from exc
    report["sign_rule"] = sign
    ok &= sign["ok"]
    n_match = sum(x["match"] for x in sign["outcomes"])
    click.echo(f"sign rule: {n_match}/16 cases match")
    jac = _jacobi_sweep(jacobi_samples) if jacobi_samples > 0 else 0.0
    report["jacobi"] = {"samples": jacobi_samples, "max_rel_dev": jac, "ok": jac <= 1e-10}
    ok &= jac <= 1e-10
    click.echo(f"Jacobi identity: max relative deviation {jac:.2e} over {jacobi_samples} queries")
    report["ok"] = bool(ok)
    o = _output(ctx, out, ("json",))
    o.write("oracle_report.json", _json_text(report))
    o.manifest()
    if not ok:
        raise RunFailure("oracle check failed", EXIT_ORACLE)
    click.echo("all oracle checks passed")


@main.command("wigner")
@click.option("--beta", type=float, required=True)
@click.option("--state", type=click.Choice(["mixed0", "mixed1", "pure0", "pure1"]), default="mixed0",
              show_default=True, help="Envelope-mixed or pure damped codeword.")
@click.option("--extent", type=float, default=None,
              help="Half-width of the q and p range (default covers the envelope to 1e-6).")
@click.option("--points", type=click.IntRange(3, 2001), default=None,
              help="Grid points per axis (default: spacing of at most 0.1).")
@click.option("--nmax-fock", type=int, default=120, show_default=True)
@out_opt
@format_opt
@click.pass_context
@_guard
def cmd_wigner(ctx, beta, state, extent, points, nmax_fock, out, formats):
    """Wigner raster, marginals and envelope-mixture probabilities."""
    from .fock_oracle import FockConfig, build_damped_codeword, twirled_density_matrix, wigner_raster
    from .lattice_theta import envelope_mixture_probabilities
    from .plotting import heatmap_svg

    if not beta > 0:
        raise click.BadParameter("must be positive", param_hint="--beta")
    j = int(state[-1])
    if extent is None:
        extent = float(np.ceil(np.sqrt(np.log(1e6) / np.tanh(beta)) + np.sqrt(np.pi)))
    if points is None:
        points = 2 * int(np.ceil(extent / 0.1)) + 1
    ctx.params.update(extent=extent, points=points)
    cfg = FockConfig(n_max=nmax_fock)
    try:
        if state.startswith("mixed"):
            st = twirled_density_matrix(beta, j, cfg)
        else:
            st = build_damped_codeword(beta, j, cfg)
    except CutoffError as exc:
        raise RunFailure(f"oracle failure: {exc}", EXIT_ORACLE) from exc
    ax = np.linspace(-extent, extent, points)
    wg = wigner_raster(st, ax, ax)
    h = ax[1] - ax[0]
    o = _output(ctx, out, formats)
    stem = f"wigner_beta{beta:g}_{state}"
    Q, P = np.meshgrid(ax, ax, indexing="ij")
    o.write(f"{stem}.csv", _csv_text(["q", "p", "W"], zip(Q.ravel(), P.ravel(), wg.values.ravel())))
    mq = wg.values.sum(axis=1) * h
    mp = wg.values.sum(axis=0) * h
    o.write(f"{stem}_marginals.csv", _csv_text(["x", "P_q", "P_p"], zip(ax, mq, mp)))
    probs = envelope_mixture_probabilities(beta, j)
    rows = [(f"{b[0]}{b[1]}", float(probs[b])) for b in sorted(probs)]
    o.write(f"{stem}_mixture.csv", _csv_text(["b", "probability"], rows))
    centers = [(b[0] * np.sqrt(np.pi), b[1] * np.sqrt(np.pi)) for b in sorted(probs)]
    marks = centers if state.startswith("mixed") else [(0.0, 0.0)]
    o.write(f"{stem}.svg", heatmap_svg(ax, ax, wg.values, f"Wigner function, beta={beta:g}, {state}", marks))
    o.write(f"{stem}_meta.json", _json_text({"beta": beta, "state": state, **wg.meta,
                                             "envelope_centers": centers}), kind="json")
    o.manifest({"raster": wg.meta})
    click.echo("envelope mixture probabilities: "
               + ", ".join(f"b={k}: {v:.4f}" for k, v in rows) + f" (sum {sum(v for _, v in rows):.6f})")
    if "warning" in wg.meta:
        click.echo(f"warning: {wg.meta['warning']}", err=True)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
