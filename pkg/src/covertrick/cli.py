"""Command-line entry point: ``covertrick gen|analyze|cover|bounds|verify``."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from . import bounds
from .metric_core import InstanceError
from .topology import betti1, homology_basis, systole
from .workbench.generators import gen_cycle, gen_genus_surface, gen_grid_torus, gen_sampled
from .workbench.instance_io import dumps, load_instance, save_instance
from .workbench.pipeline import (
    AlphaPolicy,
    PipelineError,
    R0Policy,
    report_to_csv,
    report_to_json,
    run_pipeline,
    verify_report,
)


@click.group()
def main():
    """Admissible-ball covering workbench for finite metric spaces."""


@main.command()
@click.argument("kind", type=click.Choice(["cycle", "torus", "genus", "sampled"]))
@click.option("--k", "k", type=int, default=10, show_default=True, help="cycle length")
@click.option("--m", "m", type=int, default=4, show_default=True, help="torus grid side")
@click.option("--faces/--no-faces", default=True, show_default=True, help="triangulate the torus")
@click.option("--g", "g", type=int, default=2, show_default=True, help="surface genus")
@click.option("--subdiv", type=int, default=1, show_default=True)
@click.option("--surface", type=click.Choice(["torus_embed", "sphere_embed"]), default="torus_embed", show_default=True)
@click.option("--count", type=int, default=200, show_default=True)
@click.option("--knn", type=int, default=6, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False, path_type=Path), required=True)
def gen(kind, k, m, faces, g, subdiv, surface, count, knn, seed, output):
    """Write a generated instance file."""
    try:
        if kind == "cycle":
            s = gen_cycle(k)
        elif kind == "torus":
            s = gen_grid_torus(m, faces)
        elif kind == "genus":
            s = gen_genus_surface(g, subdiv)
        else:
            s = gen_sampled(surface, count, knn, seed)
    except InstanceError as exc:
        raise click.ClickException(str(exc))
    save_instance(s, output)
    click.echo(f"wrote {output}: V={s.n_vertices} E={len(s.edges)} F={len(s.faces)}")


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def analyze(file):
    """Print betti1, systole and the homology basis as JSON."""
    try:
        s = load_instance(file)
        b1 = betti1(s)
        basis = homology_basis(s)
        out = {
            "betti1": b1,
            "homology_notion": "gf2_mod_faces" if s.has_faces else "graph_cycle_rank",
            "systole": systole(s) if b1 else None,
            "basis": [list(lp.vertices) for lp in basis.loops],
            "basis_lengths": [lp.length for lp in basis.loops],
        }
    except InstanceError as exc:
        raise click.ClickException(str(exc))
    click.echo(dumps(out), nl=False)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--r0", "r0", default="sys:0.24", show_default=True, help="absolute radius, or sys:<q> for q * systole")
@click.option("--alpha", "alpha", default="theta", show_default=True, help="growth factor, or 'theta' for the theta rule")
@click.option("-o", "--output", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False, path_type=Path), default=None, help="CSV path (default: report path with .csv)")
def cover(file, r0, alpha, output, csv_path):
    """Run the full pipeline; exit 0 iff every verdict holds."""
    try:
        s = load_instance(file)
        report = run_pipeline(s, R0Policy.parse(r0), AlphaPolicy.parse(alpha))
    except (InstanceError, PipelineError, ValueError) as exc:
        raise click.ClickException(str(exc))
    output.write_text(report_to_json(report), encoding="utf-8")
    (csv_path or output.with_suffix(".csv")).write_text(report_to_csv(report), encoding="utf-8")
    verdicts = report["verdicts"]
    for name, ok in verdicts.items():
        click.echo(f"{name}: {'pass' if ok else 'FAIL'}")
    sys.exit(0 if all(verdicts.values()) else 1)


@main.command("bounds")
@click.option("--n", "n", type=int, default=10, show_default=True, help="print rows for dimensions 1..n")
def bounds_cmd(n):
    """Print the dimension-constant table as CSV."""
    if n < 1:
        raise click.ClickException("--n must be >= 1")
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["n", "sigma_n", "omega_n", "alpha_n", "beta_n", "C_n", "C_n_prime"])
    for d in range(1, n + 1):
        c = bounds.dimension_constants(d)
        writer.writerow([d] + [repr(x) for x in (c.sigma_n, c.omega_n, c.alpha_berger, c.beta_croke, c.C_n, c.C_n_prime)])


@main.command()
@click.argument("report", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def verify(report):
    """Recompute a report from its echoed inputs; exit 0 iff everything matches and holds."""
    try:
        data = json.loads(report.read_text(encoding="utf-8"))
        problems = verify_report(data)
    except (InstanceError, PipelineError, ValueError, KeyError) as exc:
        raise click.ClickException(f"cannot verify {report}: {exc}")
    for p in problems:
        click.echo(p)
    if not problems:
        click.echo("all verdicts verified")
    sys.exit(0 if not problems else 1)


if __name__ == "__main__":
    main()
