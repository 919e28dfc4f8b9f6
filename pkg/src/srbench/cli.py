"""Command-line interface, a thin client over the benchmark service.

Every subcommand talks to the service API; by default the service runs
in-process, and `--server URL` (or SRBENCH_SERVER) targets a remote
instance instead.  Exit codes: 0 success, 1 usage error, 2 runtime failure
(including partial runs with errored records).
"""

from __future__ import annotations

import glob as globmod
import json
import sys
from pathlib import Path

import click

from ._version import __version__
from .client import ServiceClient, ServiceError
from .errors import ConfigError, DatasetError, ImageError, MetricError, SrbenchError

_FORMAT = click.option(
    "--format",
    "fmt",
    type=click.Choice(["human", "json"]),
    default="human",
    show_default=True,
    help="Output format; json is stable for machine consumption.",
)


@click.group(name="srbench")
@click.version_option(__version__, prog_name="srbench")
@click.option(
    "--server",
    envvar="SRBENCH_SERVER",
    default=None,
    metavar="URL",
    help="Base URL of a running srbench service; default runs it in-process.",
)
@click.pass_context
def cli(ctx, server):
    """Super-resolution benchmark harness with explicit evaluation criteria."""
    ctx.obj = {"server": server}


def _client(ctx) -> ServiceClient:
    return ServiceClient(ctx.obj["server"])


def _echo_json(obj) -> None:
    click.echo(json.dumps(obj, indent=2, sort_keys=True))


def _read_json_file(path: Path, what: str) -> dict:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise click.UsageError(f"cannot read {what} {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"{what} {path} is not valid JSON: {exc}") from exc


def _expand_globs(patterns: tuple[str, ...], what: str) -> list[Path]:
    paths: list[Path] = []
    seen = set()
    for pattern in patterns:
        matches = sorted(globmod.glob(pattern))
        if not matches:
            raise click.UsageError(f"{what} {pattern!r} matched no files")
        for match in matches:
            if match not in seen:
                seen.add(match)
                paths.append(Path(match))
    return paths


@cli.command()
@click.option("--hr", "hr_dir", required=True, metavar="DIR", help="Directory of high-resolution PNG images.")
@click.option("--out", "out_root", required=True, metavar="DIR", help="Dataset root to create or update.")
@click.option("--scale", "scales", type=int, multiple=True, required=True, help="Scale to generate; repeatable.")
@click.option("--force", is_flag=True, help="Overwrite files whose checksum does not match the manifest.")
@click.option("--name", default=None, help="Dataset name (default: the output directory name).")
@_FORMAT
@click.pass_context
def prepare(ctx, hr_dir, out_root, scales, force, name, fmt):
    """Generate LR images and a checksum manifest from an HR directory."""
    with _client(ctx) as client:
        result = client.prepare_dataset(hr_dir, out_root, list(scales), force=force, name=name)
    if fmt == "json":
        _echo_json(result)
        return
    click.echo(f"dataset {result['name']!r} at {result['root']}")
    click.echo(f"scales: {', '.join('x' + str(s) for s in result['scales'])}")
    click.echo(f"images: {len(result['stems'])}")
    for note in result["notes"]:
        click.echo(f"note: {note}")


@cli.command()
@click.option("--models", "model_globs", multiple=True, required=True, metavar="GLOB",
              help="Model config file or glob; repeatable.")
@click.option("--dataset", "dataset_root", required=True, metavar="DIR", help="Dataset root directory.")
@click.option("--scale", type=int, required=True, help="Upscaling factor to evaluate.")
@click.option("--criteria", default="y-float-shave-scale", show_default=True,
              help="Criteria preset name or JSON file path.")
@click.option("--timing/--no-timing", default=False, show_default=True,
              help="Measure per-image wall time (serializes the run).")
@click.option("--self-ensemble", "ensemble_mode", type=click.Choice(["force", "config", "off"]),
              default="config", show_default=True,
              help="Geometric self-ensemble: force on, follow each config, or force off.")
@click.option("--records", "records_path", default="records.ndjson", show_default=True,
              metavar="FILE", help="Record file to write (newline-delimited JSON).")
@click.option("--manifest", "manifest_path", default=None, metavar="FILE",
              help="Run manifest path (default: <records>.manifest.json).")
@click.option("--device-label", default="", help="Free-text hardware label stored with timings.")
@click.option("--niqe-model", "niqe_model_path", default=None, metavar="FILE",
              help="Pristine model JSON for NIQE (default: the shipped model).")
@_FORMAT
@click.pass_context
def run(ctx, model_globs, dataset_root, scale, criteria, timing, ensemble_mode,
        records_path, manifest_path, device_label, niqe_model_path, fmt):
    """Run models over a dataset and write per-image records."""
    config_paths = _expand_globs(model_globs, "--models")
    models = [_read_json_file(p, "model config") for p in config_paths]

    criteria_arg: str | dict = criteria
    criteria_path = Path(criteria)
    if criteria_path.suffix == ".json":
        criteria_arg = _read_json_file(criteria_path, "criteria file")

    payload = {
        "models": models,
        "dataset_root": dataset_root,
        "scale": scale,
        "criteria": criteria_arg,
        "timing": timing,
        "ensemble_mode": ensemble_mode,
        "device_label": device_label,
    }
    if niqe_model_path is not None:
        payload["niqe_model"] = _read_json_file(Path(niqe_model_path), "pristine model")

    with _client(ctx) as client:
        result = client.run_benchmark(**payload)
        table_doc = client.table(result["records"], "json" if fmt == "json" else "markdown")

    records_file = Path(records_path)
    records_file.parent.mkdir(parents=True, exist_ok=True)
    with open(records_file, "w", encoding="utf-8") as fh:
        for record in result["records"]:
            fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")
    manifest_file = Path(manifest_path) if manifest_path else records_file.with_suffix(
        records_file.suffix + ".manifest.json"
    )
    manifest_file.write_text(
        json.dumps(result["manifest"], sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )

    error_count = result["error_count"]
    if fmt == "json":
        _echo_json(
            {
                "records_path": str(records_file),
                "manifest_path": str(manifest_file),
                "record_count": len(result["records"]),
                "error_count": error_count,
                "table": json.loads(table_doc),
            }
        )
    else:
        click.echo(table_doc, nl=False)
        click.echo(f"\n{len(result['records'])} records -> {records_file}")
        click.echo(f"manifest -> {manifest_file}")
        if error_count:
            click.echo(f"warning: {error_count} errored records", err=True)
    if error_count:
        ctx.exit(2)


def _read_record_lines(path: Path) -> list[dict]:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise click.UsageError(f"cannot read record file {path}: {exc}") from exc
    records = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise click.UsageError(f"{path}:{number}: bad record line: {exc}") from exc
    if not records:
        raise click.UsageError(f"record file {path} is empty")
    return records


@cli.command()
@click.option("--records", "records_path", required=True, metavar="FILE",
              help="Record file from a previous run.")
@click.option("--table", "table_format", type=click.Choice(["markdown", "csv", "json"]),
              default=None, help="Emit the aggregate table in this format.")
@click.option("--out", "out_path", default=None, metavar="FILE",
              help="Write the table here instead of standard output.")
@click.option("--scatter", "scatter_spec", default=None, metavar="X:Y",
              help="Emit a scatter of model aggregates, e.g. psnr:niqe.")
@click.option("--exclude", "excludes", multiple=True, metavar="MODEL",
              help="Model to exclude from the scatter; repeatable.")
@click.option("--svg-out", default="scatter.svg", show_default=True, metavar="FILE")
@click.option("--csv-out", default="scatter.csv", show_default=True, metavar="FILE")
@_FORMAT
@click.pass_context
def report(ctx, records_path, table_format, out_path, scatter_spec, excludes, svg_out, csv_out, fmt):
    """Render tables and scatter plots from a record file."""
    records = _read_record_lines(Path(records_path))
    if table_format is None and scatter_spec is None:
        table_format = "markdown"
    status: dict = {}
    with _client(ctx) as client:
        if table_format is not None:
            document = client.table(records, table_format)
            if out_path:
                Path(out_path).write_text(document, encoding="utf-8")
                status["table_path"] = out_path
                if fmt == "human":
                    click.echo(f"table -> {out_path}")
            elif fmt == "json" and table_format == "json":
                status["table"] = json.loads(document)
            else:
                click.echo(document, nl=False)
        if scatter_spec is not None:
            parts = scatter_spec.split(":")
            if len(parts) != 2 or not all(parts):
                raise click.UsageError("--scatter expects X:Y metric ids, e.g. psnr:niqe")
            result = client.scatter(records, parts[0], parts[1], list(excludes))
            Path(svg_out).write_text(result["svg"], encoding="utf-8")
            Path(csv_out).write_text(result["csv"], encoding="utf-8")
            status["svg_path"] = svg_out
            status["csv_path"] = csv_out
            if fmt == "human":
                click.echo(f"scatter -> {svg_out}, {csv_out}")
    if fmt == "json":
        _echo_json(status)


@cli.command("list-models")
@click.argument("configs", nargs=-1, required=True, metavar="GLOB...")
@_FORMAT
@click.pass_context
def list_models(ctx, configs, fmt):
    """Summarize and validate model config files."""
    paths = _expand_globs(configs, "config pattern")
    rows = []
    with _client(ctx) as client:
        for path in paths:
            try:
                obj = json.loads(path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                rows.append({"path": str(path), "valid": False, "diagnostics": [str(exc)]})
                continue
            verdict = client.validate_config(obj, where=str(path))
            runner = obj.get("runner", {}) if isinstance(obj, dict) else {}
            rows.append(
                {
                    "path": str(path),
                    "name": obj.get("name") if isinstance(obj, dict) else None,
                    "kind": runner.get("kind") if isinstance(runner, dict) else None,
                    "scales": obj.get("scales") if isinstance(obj, dict) else None,
                    "self_ensemble": obj.get("self_ensemble", False) if isinstance(obj, dict) else None,
                    "valid": verdict["valid"],
                    "diagnostics": verdict["diagnostics"],
                }
            )
    if fmt == "json":
        _echo_json({"models": rows})
        return
    for row in rows:
        if row["valid"]:
            scales = ",".join(str(s) for s in (row["scales"] or []))
            ensemble = " +ensemble" if row.get("self_ensemble") else ""
            click.echo(f"{row['name']}  kind={row['kind']}  scales={scales}{ensemble}  ({row['path']})")
        else:
            click.echo(f"INVALID {row['path']}")
            for diag in row["diagnostics"]:
                click.echo(f"  {diag}")


@cli.command("list-evaluators")
@_FORMAT
@click.pass_context
def list_evaluators_cmd(ctx, fmt):
    """List the registered metric evaluators."""
    with _client(ctx) as client:
        entries = client.evaluators()
    if fmt == "json":
        _echo_json({"evaluators": entries})
        return
    for entry in entries:
        ref = "pair" if entry["needs_reference"] else "no-reference"
        click.echo(f"{entry['id']:10s} {entry['kind']:8s} {ref:13s} {entry['description']}")


@cli.command("validate-config")
@click.argument("path", type=click.Path(path_type=Path))
@_FORMAT
@click.pass_context
def validate_config_cmd(ctx, path, fmt):
    """Check one model config file; exits 1 listing every violation."""
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
        diagnostics = None
    except OSError as exc:
        raise click.UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        diagnostics = [f"{path}: not valid JSON: {exc}"]
    if diagnostics is None:
        with _client(ctx) as client:
            verdict = client.validate_config(obj, where=str(path))
        diagnostics = verdict["diagnostics"]
    if fmt == "json":
        _echo_json({"valid": not diagnostics, "diagnostics": diagnostics})
    elif diagnostics:
        for diag in diagnostics:
            click.echo(diag, err=True)
    else:
        click.echo(f"{path}: valid")
    if diagnostics:
        ctx.exit(1)


@cli.command("fit-niqe")
@click.option("--corpus", "corpus_dir", required=True, metavar="DIR",
              help="Directory of pristine PNG images.")
@click.option("--out", "out_path", required=True, metavar="FILE",
              help="Where to write the fitted pristine model JSON.")
@click.option("--patch-size", default=96, show_default=True, type=int)
@click.option("--sharpness-fraction", default=0.75, show_default=True, type=float)
@click.option("--min-images", default=25, show_default=True, type=int)
@_FORMAT
@click.pass_context
def fit_niqe(ctx, corpus_dir, out_path, patch_size, sharpness_fraction, min_images, fmt):
    """Fit a NIQE pristine model from a corpus of undistorted images."""
    with _client(ctx) as client:
        result = client.fit_niqe(corpus_dir, patch_size, sharpness_fraction, min_images)
    out_file = Path(out_path)
    out_file.parent.mkdir(parents=True, exist_ok=True)
    out_file.write_text(json.dumps(result["model"]) + "\n", encoding="utf-8")
    if fmt == "json":
        _echo_json({"model_path": str(out_file), "images": result["images"]})
    else:
        click.echo(f"pristine model from {result['images']} images -> {out_file}")


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8321, show_default=True, type=int)
def serve(host, port):
    """Run the benchmark service over HTTP."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


def main(argv=None) -> int:
    try:
        # In non-standalone mode click returns ctx.exit codes instead of
        # raising, so the return value matters.
        rv = cli.main(args=argv, standalone_mode=False)
        if isinstance(rv, int):
            return rv
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.NoArgsIsHelpError as exc:
        # Bare invocation: show help, but a command was still required.
        click.echo(exc.format_message(), err=True)
        return 1
    except click.UsageError as exc:
        if exc.ctx is not None:
            click.echo(exc.ctx.get_usage(), err=True)
            click.echo(f"Try '{exc.ctx.command_path} --help' for help.", err=True)
        click.echo(f"Error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("Aborted.", err=True)
        return 2
    except ServiceError as exc:
        click.echo(f"Error: {exc}", err=True)
        return exc.exit_code
    except (ConfigError, DatasetError, ImageError, MetricError) as exc:
        click.echo(f"Error: {exc}", err=True)
        return 1
    except SrbenchError as exc:
        click.echo(f"Error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"Error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
