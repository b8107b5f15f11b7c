"""Command line interface.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
4 resource limit.
"""

from __future__ import annotations

import functools
import json
import os
import sys

import click

from .campaign import ExperimentConfig, load_config, run_campaign
from .errors import InvalidParameterError, NumericalFailureError, ResourceLimitError
from .plotting import emit_plot
from .sampling import SeedSpec, sample_mps_tensor, sample_peps_tensor
from .states import mps_state, peps_state


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (InvalidParameterError, ValueError) as exc:
            click.echo(f"invalid configuration: {exc}", err=True)
            sys.exit(2)
        except ResourceLimitError as exc:
            click.echo(f"resource limit: {exc}", err=True)
            sys.exit(4)
        except NumericalFailureError as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(3)

    return wrapper


def common_options(fn):
    fn = click.option("--d", "d", type=int, default=50, show_default=True, help="physical dimension")(fn)
    fn = click.option("--D", "D", type=int, default=4, show_default=True, help="bond dimension")(fn)
    fn = click.option("--N", "N", type=int, default=None, help="system size")(fn)
    fn = click.option("--trials", type=int, default=100, show_default=True)(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True, help="master seed")(fn)
    fn = click.option("--out-dir", type=click.Path(), default=".", show_default=True)(fn)
    fn = click.option("--threads", type=int, default=1, show_default=True)(fn)
    return fn


@click.group()
def main():
    """Random tensor network states: sampling, spectra, parent Hamiltonians."""


def _run(experiment, d, D, N, trials, seed, out_dir, threads, **extra):
    config = ExperimentConfig(
        experiment=experiment,
        d=d,
        D=D,
        N=N,
        trials=trials,
        master_seed=seed,
        output_dir=out_dir,
        threads=threads,
        **extra,
    )
    csv_path, json_path = run_campaign(config)
    click.echo(csv_path)
    click.echo(json_path)


@main.command("sample-mps")
@common_options
@_guarded
def sample_mps_cmd(d, D, N, trials, seed, out_dir, threads):
    """Sample one MPS and write its state amplitudes to CSV."""
    if N is None:
        raise InvalidParameterError("sample-mps needs --N")
    tensor = sample_mps_tensor(SeedSpec(seed, 0, "sample-mps"), d, D)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"mps_state_d{d}_D{D}_N{N}.csv")
    mps_state(tensor, N).to_csv(path)
    click.echo(path)


@main.command("sample-peps")
@common_options
@_guarded
def sample_peps_cmd(d, D, N, trials, seed, out_dir, threads):
    """Sample one PEPS on an N x N torus and write amplitudes to CSV."""
    if N is None:
        raise InvalidParameterError("sample-peps needs --N")
    tensor = sample_peps_tensor(SeedSpec(seed, 0, "sample-peps"), d, D)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"peps_state_d{d}_D{D}_N{N}.csv")
    peps_state(tensor, N).to_csv(path)
    click.echo(path)


@main.command("gap-mps")
@common_options
@_guarded
def gap_mps_cmd(d, D, N, trials, seed, out_dir, threads):
    """Transfer-operator gap statistics for random MPS."""
    _run("mps_gap", d, D, None, trials, seed, out_dir, threads)


@main.command("gap-peps")
@common_options
@click.option("--independent", is_flag=True, help="independent tensors per row")
@_guarded
def gap_peps_cmd(d, D, N, trials, seed, out_dir, threads, independent):
    """Column transfer operator statistics for random PEPS."""
    exp = "peps_gap_independent" if independent else "peps_gap"
    _run(exp, d, D, N or 3, trials, seed, out_dir, threads)


@main.command("parent-gap")
@common_options
@click.option("--geometry", type=click.Choice(["ring", "torus"]), default="ring", show_default=True)
@_guarded
def parent_gap_cmd(d, D, N, trials, seed, out_dir, threads, geometry):
    """Parent Hamiltonian gap statistics."""
    exp = "parent_gap_mps" if geometry == "ring" else "parent_gap_peps"
    _run(exp, d, D, N or (3 if geometry == "ring" else 2), trials, seed, out_dir, threads)


@main.command("correlations")
@common_options
@_guarded
def correlations_cmd(d, D, N, trials, seed, out_dir, threads):
    """Correlation decay profiles of random MPS."""
    _run("correlations", d, D, N or 12, trials, seed, out_dir, threads)


@main.command("expander")
@common_options
@_guarded
def expander_cmd(d, D, N, trials, seed, out_dir, threads):
    """Quantum expander parameters of trace-normalized transfer channels."""
    _run("expander", d, D, None, trials, seed, out_dir, threads)


@main.command("wishart")
@common_options
@_guarded
def wishart_cmd(d, D, N, trials, seed, out_dir, threads):
    """Wishart concentration check (n = D^2, s = d)."""
    _run("wishart_check", d, D, None, trials, seed, out_dir, threads)


@main.command("campaign")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--seed", type=int, default=None, help="override master seed")
@click.option("--out-dir", type=click.Path(), default=None)
@click.option("--threads", type=int, default=None)
@_guarded
def campaign_cmd(config_path, seed, out_dir, threads):
    """Run a campaign described by a JSON config file."""
    overrides = {"master_seed": seed, "output_dir": out_dir, "threads": threads}
    config = load_config(config_path, overrides)
    csv_path, json_path = run_campaign(config)
    click.echo(csv_path)
    click.echo(json_path)


@main.command("plot")
@click.option("--csv", "csv_path", type=click.Path(exists=True), required=True)
@click.option("--spec", "spec_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), default=None)
@_guarded
def plot_cmd(csv_path, spec_path, out_path):
    """Render a CSV column pair to a deterministic SVG."""
    with open(spec_path, encoding="utf-8") as fh:
        spec = json.load(fh)
    if out_path is None:
        out_path = os.path.splitext(csv_path)[0] + ".svg"
    click.echo(emit_plot(csv_path, spec, out_path))


if __name__ == "__main__":
    main()
