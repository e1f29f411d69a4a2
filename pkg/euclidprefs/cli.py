"""
Command-line interface for euclidprefs.

Usage:
    euclidprefs recognize election.soc --budget 30 --emit-cert cert.json
    euclidprefs verify election.soc cert.json
    euclidprefs batch preflib/ --summary results.md

Exit codes: 0 definitive verdict (or accepted certificate), 2 unknown,
1 error or rejected certificate.
"""

import json
import sys
from collections import defaultdict
from pathlib import Path

try:
    import click
except ImportError:
    print("Click not installed. Run: pip install click")
    print("Or use the Python API directly: from euclidprefs import run_portfolio")
    sys.exit(1)

import regex
from rich import box
from rich.console import Console
from rich.table import Table

from . import __version__
from .certificate import certificate_to_dict, load_certificate, save_certificate, verify_certificate
from .config import ALL_LANES, load_settings
from .lanes import UNKNOWN
from .log import setup_logging
from .portfolio import run_portfolio
from .soc import load_soc

EXIT_DEFINITIVE = 0
EXIT_ERROR = 1
EXIT_UNKNOWN = 2

# PrefLib file names look like 00004-00000012.soc
DATASET_PREFIX = regex.compile(r"^(\d{5})-")


def search_options(command):
    """--config, --set and -v, shared by every command that runs a search."""
    command = click.option('-v', '--verbose', count=True, help='-v progress, -vv debug')(command)
    command = click.option('--set', 'overrides', multiple=True, metavar='KEY=VALUE',
                           help='Override a setting, e.g. --set ilp.solver=highs')(command)
    command = click.option('--config', 'config_path', type=click.Path(exists=True),
                           help='YAML settings file')(command)
    return command


def _parse_lanes(lanes):
    if not lanes:
        return None
    names = [name.strip() for name in lanes.split(",") if name.strip()]
    unknown = [n for n in names if n not in ALL_LANES]
    if unknown:
        raise ValueError(f"Unknown lane: {', '.join(unknown)}. Available: {', '.join(ALL_LANES)}")
    return names


@click.group()
@click.version_option(version=__version__)
def cli():
    """euclidprefs - decide whether an election is 2-Euclidean.

    Every definitive answer comes with a certificate that `verify` checks
    without searching again: an embedding of the voters and candidates in
    the plane for YES, a forbidden structure or an infeasible constraint
    system for NO.
    """
    pass


@cli.command('recognize')
@click.argument('soc_file', type=click.Path(exists=True))
@click.option('-b', '--budget', type=float, help='Time budget in seconds (default: portfolio.budget)')
@click.option('--lanes', help=f"Comma-separated lanes (default: {','.join(ALL_LANES)})")
@click.option('--emit-cert', type=click.Path(), help='Write the certificate JSON here')
@click.option('--json', 'as_json', is_flag=True, help='Print the certificate JSON instead of a summary')
@search_options
def recognize_cmd(soc_file, budget, lanes, emit_cert, as_json, config_path, overrides, verbose):
    """
    Decide one election.

    Examples:

        euclidprefs recognize election.soc

        euclidprefs recognize election.soc --budget 10 --lanes pattern38,hull,embed

        euclidprefs recognize election.soc --emit-cert cert.json --set ilp.solver=highs
    """
    setup_logging(verbose)
    try:
        settings = load_settings(config_path, overrides)
        election = load_soc(soc_file)
        verdict = run_portfolio(election, settings, lanes=_parse_lanes(lanes), budget=budget)
    except Exception as e:
        click.echo(f"\nError: {e}")
        sys.exit(EXIT_ERROR)

    if emit_cert and verdict.definitive:
        save_certificate(verdict, emit_cert)

    if as_json:
        click.echo(json.dumps(certificate_to_dict(verdict), indent=2, ensure_ascii=False))
    else:
        click.echo(f"Election: {soc_file}")
        click.echo(f"Candidates: {election.m}, distinct votes: {election.n}, voters: {election.total_voters}")
        if verdict.trace.steps:
            click.echo(f"Reduced to {verdict.reduced.m} candidates in {len(verdict.trace)} steps")
        click.echo(f"Verdict: {verdict.status}")
        if verdict.definitive:
            click.echo(f"Certificate: {verdict.kind} (lane {verdict.lane})")
        click.echo(f"Time: {verdict.timings.get('total', sum(verdict.timings.values())):.3f}s")
        if emit_cert and verdict.definitive:
            click.echo(f"Written: {emit_cert}")
        elif emit_cert:
            click.echo("No certificate written (Unknown)")

    sys.exit(EXIT_DEFINITIVE if verdict.definitive else EXIT_UNKNOWN)


@cli.command('verify')
@click.argument('soc_file', type=click.Path(exists=True))
@click.argument('cert_file', type=click.Path(exists=True))
@click.option('--tolerance', type=float, default=None,
              help='Minimum squared gap for embeddings (default: qcp.tolerance)')
@search_options
def verify_cmd(soc_file, cert_file, tolerance, config_path, overrides, verbose):
    """
    Re-check a certificate against an election.

    Replays the reduction trace with every rule precondition checked, then
    checks the certificate itself. Nothing is searched again.

    Example:

        euclidprefs verify election.soc cert.json
    """
    setup_logging(verbose)
    try:
        settings = load_settings(config_path, overrides)
        election = load_soc(soc_file)
        data = load_certificate(cert_file)
        tol = settings.qcp.tolerance if tolerance is None else tolerance
        result = verify_certificate(election, data, tolerance=tol)
    except Exception as e:
        click.echo(f"\nError: {e}")
        sys.exit(EXIT_ERROR)

    if result:
        click.echo(f"Accept: {data.get('status')} ({data.get('kind')})")
        sys.exit(EXIT_DEFINITIVE)
    click.echo("Reject:")
    for reason in result.reasons[:10]:
        click.echo(f"  - {reason}")
    if len(result.reasons) > 10:
        click.echo(f"  ... and {len(result.reasons) - 10} more")
    sys.exit(EXIT_ERROR)


def dataset_of(path: Path) -> str:
    """PrefLib dataset number from the file name, else the parent directory."""
    match = DATASET_PREFIX.match(path.name)
    return match.group(1) if match else path.parent.name


def summary_markdown(rows) -> str:
    lines = [
        "| dataset | unknown | not 2-Euclidean | 2-Euclidean | verified |",
        "|---|---:|---:|---:|---:|",
    ]
    for row in rows:
        lines.append("| " + " | ".join(str(x) for x in row) + " |")
    return "\n".join(lines) + "\n"


@cli.command('batch')
@click.argument('directory', type=click.Path(exists=True, file_okay=False))
@click.option('-b', '--budget', type=float, help='Time budget per election (default: portfolio.budget)')
@click.option('--lanes', help='Comma-separated lanes')
@click.option('--summary', type=click.Path(), help='Also write the table as Markdown')
@search_options
def batch_cmd(directory, budget, lanes, summary, config_path, overrides, verbose):
    """
    Decide every .soc file under a directory and tabulate per dataset.

    Examples:

        euclidprefs batch preflib/

        euclidprefs batch preflib/ --budget 5 --summary results.md
    """
    setup_logging(verbose)
    try:
        settings = load_settings(config_path, overrides)
        lane_names = _parse_lanes(lanes)
    except Exception as e:
        click.echo(f"\nError: {e}")
        sys.exit(EXIT_ERROR)

    files = sorted(Path(directory).rglob("*.soc"))
    if not files:
        click.echo(f"No .soc files under {directory}")
        return

    # dataset → [unknown, not euclidean, euclidean, verified]
    tally = defaultdict(lambda: [0, 0, 0, 0])
    for path in files:
        counts = tally[dataset_of(path)]
        try:
            election = load_soc(path)
            verdict = run_portfolio(election, settings, lanes=lane_names, budget=budget)
        except Exception as e:
            click.echo(f"{path.name}: skipped ({e})")
            continue
        if verdict.status == UNKNOWN:
            counts[0] += 1
        else:
            counts[1 if verdict.status == "NotEuclidean" else 2] += 1
            if verify_certificate(election, verdict, settings.qcp.tolerance):
                counts[3] += 1
        click.echo(f"{path.name}: {verdict.status}" + (f" ({verdict.kind})" if verdict.kind else ""))

    rows = [(name, *tally[name]) for name in sorted(tally)]
    table = Table(title="Results per dataset", box=box.SIMPLE)
    table.add_column("dataset", style="bold cyan")
    for header in ("unknown", "not 2-Euclidean", "2-Euclidean", "verified"):
        table.add_column(header, justify="right")
    for row in rows:
        table.add_row(*(str(x) for x in row))
    Console().print(table)

    if summary:
        Path(summary).write_text(summary_markdown(rows), encoding="utf-8")
        click.echo(f"Summary: {summary}")


@cli.command()
@click.argument('soc_file', type=click.Path(exists=True))
def analyze(soc_file):
    """
    Show the structure the search works with, without searching.

    Prints candidates, distinct votes, the block decomposition, the
    controversity graph and the reduction trace.
    """
    from .detectors import build_controversity_graph
    from .reducer import maximal_block_decomposition, reduce_fixpoint

    try:
        election = load_soc(soc_file)
    except Exception as e:
        click.echo(f"\nError: {e}")
        sys.exit(EXIT_ERROR)

    click.echo(f"\nAnalyzing: {soc_file}")
    click.echo(f"Candidates ({election.m}): {', '.join(election.candidates)}")
    click.echo(f"Distinct votes: {election.n} (voters: {election.total_voters})")
    for i, (vote, count) in enumerate(zip(election.votes[:10], election.counts)):
        click.echo(f"  v{i + 1} x{count}: {election.format_vote(vote, ' ')}")
    if election.n > 10:
        click.echo(f"  ... and {election.n - 10} more")

    blocks = maximal_block_decomposition(election, 3)
    click.echo(f"\nBlocks of size <= 3 at the tail: {len(blocks)}")
    for block in blocks:
        names = sorted(election.name(c) for c in block.candidates)
        click.echo(f"  positions {block.start}-{block.end}: {', '.join(names)}")

    if election.n:
        graph = build_controversity_graph(election)
        click.echo(f"\nControversity graph: {len(graph.vertices)} vertices, {len(graph.edges)} edges")
        for (u, v) in sorted(graph.edges):
            click.echo(f"  v{u + 1} - v{v + 1}")

    reduced, trace = reduce_fixpoint(election)
    click.echo(f"\nReduction: {len(trace)} steps, {reduced.m} candidates, {reduced.n} distinct votes left")
    for step in trace.steps:
        click.echo(f"  rule {step.rule}: removed {', '.join(step.removed)}")


@cli.command()
@click.argument('outdir', type=click.Path(file_okay=False))
@click.option('-n', '--synthetic', type=int, default=50, help='Number of synthetic elections (default: 50)')
@click.option('--seed', type=int, default=0, help='Seed for the synthetic elections')
def fixtures(outdir, synthetic, seed):
    """
    Write the bundled corpus as .soc files.

    Example:

        euclidprefs fixtures corpus/ -n 10
    """
    from .fixtures import fixture_corpus
    from .soc import save_soc

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    corpus = fixture_corpus(synthetic, seed)
    for fixture in corpus:
        save_soc(fixture.election, out / f"{fixture.name}.soc", title=f"{fixture.name}: {fixture.expected}")
    click.echo(f"Wrote {len(corpus)} elections to {out}")


@cli.command()
def check():
    """
    Show which solver backends are available.

    Example:

        euclidprefs check
    """
    import platform

    from .detectors import get_available_detectors
    from .ilp import get_available_solvers

    click.echo("\neuclidprefs Backend Check")
    click.echo("=" * 26)
    click.echo(f"\nPython: {platform.python_version()}")

    click.echo("\n0/1 solvers (ilp.solver):")
    for name, ok in get_available_solvers().items():
        if name == "external":
            click.echo("  [x] external:<command>  (LP file bridge)")
        elif ok:
            click.echo(f"  [x] {name}")
        else:
            click.echo(f"  [ ] {name}: Not installed")
            click.echo(f"      -> Fix: pip install {name}")

    click.echo("\nEmbedding solvers (qcp.solver):")
    click.echo("  [x] builtin  (scipy L-BFGS-B)")
    click.echo("  [x] external:<command>")

    click.echo("\nDetectors:")
    for name, description in get_available_detectors().items():
        click.echo(f"  [x] {name}: {description}")
    click.echo("")


def main():
    """Entry point."""
    cli()


if __name__ == '__main__':
    main()
