"""Command-line entry points.

    fpdesign design   --airport ZUUU --runway 02L --destination GURET
    fpdesign evaluate --airport ZUUU
    fpdesign validate exported_procedure.txt
    fpdesign serve    --port 8000

Exit codes: 1 usage, 2 data errors, 3 backend errors.
"""

from __future__ import annotations

import json
import os
import sys
from importlib import resources
from pathlib import Path

import click

from . import exports, metrics, orchestrator
from .backends import Backend, RemoteBackend, ReplayBackend, ScriptedBackend
from .errors import BackendError, FpDesignError
from .navdata import NavDatabase, load_database
from .orchestrator import FixCommand, SessionConfig, SessionStatus

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_BACKEND = 3


def bundled_dataset_path() -> Path:
    return Path(str(resources.files("fpdesign.data").joinpath("airports.json")))


def _load(navdata: str | None) -> NavDatabase:
    return load_database(Path(navdata) if navdata else bundled_dataset_path())


def _make_backend(kind: str, script: str | None) -> Backend:
    if kind == "scripted":
        return ScriptedBackend()
    if kind == "replay":
        if not script:
            raise click.UsageError("--backend replay requires --script FILE")
        return ReplayBackend.from_transcript_jsonl(Path(script).read_text(encoding="utf-8"))
    if kind == "remote":
        try:
            return RemoteBackend.from_env(os.environ)
        except ValueError as exc:
            raise click.UsageError(str(exc)) from exc
    raise click.UsageError(f"unknown backend {kind!r}")


@click.group()
@click.option("--navdata", type=click.Path(exists=True, dir_okay=False),
              help="Navigation dataset JSON (defaults to the bundled airports).")
@click.pass_context
def cli(ctx, navdata):
    """Automated straight-departure (SID) design engine."""
    ctx.ensure_object(dict)
    ctx.obj["navdata"] = navdata


@cli.command()
@click.option("--airport", required=True, help="ICAO code, e.g. ZUUU")
@click.option("--runway", required=True, help="Runway name, e.g. 02L")
@click.option("--destination", required=True, help="Destination fix, e.g. GURET")
@click.option("--backend", "backend_kind", default="scripted", show_default=True,
              type=click.Choice(["scripted", "remote", "replay"]))
@click.option("--script", type=click.Path(exists=True, dir_okay=False),
              help="Transcript JSONL for the replay backend.")
@click.option("--interactive", is_flag=True,
              help="Pause after every round for a fix/no-fix command on stdin.")
@click.option("--max-rounds", default=8, show_default=True)
@click.option("--out", "out_dir", default="fpdesign_out", show_default=True,
              type=click.Path(file_okay=False))
@click.pass_context
def design(ctx, airport, runway, destination, backend_kind, script, interactive,
           max_rounds, out_dir):
    """Design one departure procedure and write TXT, GeoJSON and a report."""
    db = _load(ctx.obj["navdata"])
    backend = _make_backend(backend_kind, script)
    config = SessionConfig(max_rounds=max_rounds, interactive=interactive)
    session = orchestrator.create_session(db, airport, runway, destination, config=config)

    while session.status in (SessionStatus.PLANNING, SessionStatus.AWAITING_FEEDBACK):
        if session.status is SessionStatus.AWAITING_FEEDBACK:
            click.echo(f"round {session.round}: waypoints "
                       + ", ".join(f"({p.lat:.6f},{p.lon:.6f})" for p in session.waypoints))
            raw = click.prompt("feedback ('no fix' or fix command)", default="no fix")
            try:
                orchestrator.apply_fix(session, FixCommand.parse(raw))
            except FpDesignError as exc:
                click.echo(f"rejected: {exc}", err=True)
            continue
        orchestrator.step(session, backend)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "procedure.txt").write_text(exports.export_txt(session), encoding="utf-8")
    (out / "snapshot.geojson").write_text(exports.render_geojson(session), encoding="utf-8")
    report = metrics.evaluate_run([session])
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out / "transcript.jsonl").write_text(session.transcript_jsonl(), encoding="utf-8")
    click.echo(f"{session.procedure_name}: {session.status.value} "
               f"after {session.round} rounds, {len(session.waypoints)} waypoints")
    click.echo(metrics.format_table(report, label=session.procedure_name))
    click.echo(f"artifacts in {out}/")


@cli.command()
@click.option("--airport", required=True)
@click.option("--backend", "backend_kind", default="scripted", show_default=True,
              type=click.Choice(["scripted", "remote", "replay"]))
@click.option("--script", type=click.Path(exists=True, dir_okay=False))
@click.option("--max-rounds", default=8, show_default=True)
@click.option("--out", "out_file", type=click.Path(dir_okay=False),
              help="Also write the full MetricsReport JSON here.")
@click.pass_context
def evaluate(ctx, airport, backend_kind, script, max_rounds, out_file):
    """Design every dataset procedure of an airport and score the batch."""
    db = _load(ctx.obj["navdata"])
    sessions = []
    for proc in db.airport(airport).procedures.values():
        backend = _make_backend(backend_kind, script)
        session = orchestrator.create_session(
            db, airport, proc.runway, proc.destination,
            config=SessionConfig(max_rounds=max_rounds))
        while session.status is SessionStatus.PLANNING:
            orchestrator.step(session, backend)
        sessions.append(session)
        click.echo(f"  {proc.name:12s} -> {session.status.value} "
                   f"({len(session.waypoints)} waypoints)")
    report = metrics.evaluate_run(sessions)
    click.echo(metrics.format_table(report, label=airport))
    if out_file:
        Path(out_file).write_text(report.to_json(), encoding="utf-8")
        click.echo(f"report written to {out_file}")


@cli.command()
@click.argument("procedure_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def validate(ctx, procedure_file):
    """Safety-assess an exported procedure TXT file."""
    db = _load(ctx.obj["navdata"])
    imported = exports.import_txt(Path(procedure_file).read_text(encoding="utf-8"), db)
    airport = db.airport(imported.icao)
    result = metrics.result_from_waypoints(
        name=imported.name, icao=imported.icao, runway=imported.runway,
        destination=imported.destination,
        obstacles=list(airport.obstacles.values()),
        waypoints=list(imported.waypoints),
        completed=imported.completed, status=imported.status)
    report = metrics.evaluate_results([result])
    click.echo(metrics.format_table(report, label=imported.name))
    click.echo(f"first leg within limits: {result.first_leg_ok}")
    for per_leg in result.violations:
        for violation in per_leg:
            click.echo(f"UNSAFE leg {violation.leg_index}: {violation.obstacle} "
                       f"deficit {violation.deficit:.1f} m")
    if report.fps == 1.0:
        click.echo("all legs safe")


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.pass_context
def serve(ctx, host, port):
    """Run the HTTP session service."""
    import uvicorn

    from .service import create_app

    db = _load(ctx.obj["navdata"])
    uvicorn.run(create_app(db), host=host, port=port, log_level="info")


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False, obj={})
        return 0
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return EXIT_USAGE
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except BackendError as exc:
        click.echo(f"backend error: {exc}", err=True)
        return EXIT_BACKEND
    except (FpDesignError, OSError, json.JSONDecodeError) as exc:
        click.echo(f"data error: {exc}", err=True)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
