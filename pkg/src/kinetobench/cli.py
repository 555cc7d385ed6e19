"""Command-line surface: fk, ik, atlas, verify, replay, serve.

Machine-readable JSON goes to stdout; human diagnostics go to stderr, so the
UI and the tests can shell out safely.  Exit codes: 0 ok, 1 verification or
internal failure, 2 domain failure (e.g. unreachable point), 3 usage error.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click

from kinetobench.atlas import DEFAULT_LEVELS, export_atlas, make_atlas
from kinetobench.fivebar import ALL_MODES, WorkingMode, forward_kinematics, inverse_kinematics
from kinetobench.model import ModelError, SerialChainModel, resolve_model
from kinetobench.session import load_session_config, replay_to_log
from kinetobench.verify import run_verification

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_DOMAIN = 2
EXIT_USAGE = 3


class DomainFailure(click.ClickException):
    exit_code = EXIT_DOMAIN


def _echo_json(doc: dict) -> None:
    click.echo(json.dumps(doc, sort_keys=True, allow_nan=False))


def _posture_doc(posture) -> dict:
    return {
        "theta1": posture.theta1,
        "theta2": posture.theta2,
        "theta3": posture.theta3,
        "theta4": posture.theta4,
        "p": list(posture.p),
        "c": list(posture.c),
        "d": list(posture.d),
        "mode": None if posture.mode is None else str(posture.mode),
        "on_boundary": posture.on_boundary,
    }


def _load_fivebar(ref: str):
    model = resolve_model(ref)
    if isinstance(model, SerialChainModel):
        raise click.UsageError(f"{ref} is a serial chain; this command needs a five-bar")
    return model


def _parse_mode(text: str) -> WorkingMode:
    try:
        return WorkingMode.parse(text)
    except ValueError as e:
        raise click.UsageError(str(e)) from e


@click.group()
def cli():
    """Kinetostatic workbench for the five-bar manipulator and serial chains."""


@cli.command()
@click.option("--model", "model_ref", default="fivebar_6_8_5", show_default=True,
              help="Model config path or bundled name.")
@click.option("--mode", "mode_text", default=None,
              help="Working mode like '-+'; omit to take the default assembly.")
@click.option("--assembly", type=click.Choice(["+1", "-1"]), default="+1", show_default=True,
              help="Assembly side when the mode leaves a tie.")
@click.option("--degrees", is_flag=True, help="Interpret the angles in degrees.")
@click.argument("theta1", type=float)
@click.argument("theta2", type=float)
def fk(model_ref, mode_text, assembly, degrees, theta1, theta2):
    """Forward kinematics: posture document for hip angles THETA1 THETA2."""
    model = _load_fivebar(model_ref)
    if degrees:
        theta1, theta2 = math.radians(theta1), math.radians(theta2)
    mode = None if mode_text is None else _parse_mode(mode_text)
    posture = forward_kinematics(model, theta1, theta2, mode=mode, assembly=int(assembly))
    if posture is None:
        raise DomainFailure("no assembly reaches these angles in the requested mode")
    _echo_json(_posture_doc(posture))


@cli.command()
@click.option("--model", "model_ref", default="fivebar_6_8_5", show_default=True)
@click.option("--mode", "mode_text", default="-+", show_default=True)
@click.argument("x", type=float)
@click.argument("y", type=float)
def ik(model_ref, mode_text, x, y):
    """Inverse kinematics: posture document for end point X Y."""
    model = _load_fivebar(model_ref)
    posture = inverse_kinematics(model, (x, y), _parse_mode(mode_text))
    if posture is None:
        raise DomainFailure(f"({x}, {y}) is outside the workspace")
    _echo_json(_posture_doc(posture))


@cli.command()
@click.option("--model", "model_ref", default="fivebar_6_8_5", show_default=True)
@click.option("--field", "field_name", default="inv_kappa_a", show_default=True,
              type=click.Choice(["inv_kappa_a", "inv_kappa_b", "boundary_distance"]))
@click.option("--mode", "mode_text", default="all", show_default=True,
              help="One working mode like '-+', or 'all' for the four of them.")
@click.option("--space", default="cartesian", show_default=True,
              type=click.Choice(["cartesian", "joint"]))
@click.option("--res", default="200x200", show_default=True, help="Grid resolution NxM.")
@click.option("--levels", default=",".join(str(v) for v in DEFAULT_LEVELS), show_default=True,
              help="Comma-separated iso-levels.")
@click.option("--format", "formats", default="csv,png", show_default=True,
              help="Comma-separated outputs: csv, json, svg, png (matplotlib figure).")
@click.option("--out", "out_dir", default="atlas_out", show_default=True,
              type=click.Path(file_okay=False))
def atlas(model_ref, field_name, mode_text, space, res, levels, formats, out_dir):
    """Evaluate iso-conditioning atlases and write them to files."""
    model = _load_fivebar(model_ref)
    try:
        nx, ny = (int(v) for v in res.lower().split("x"))
    except ValueError:
        raise click.UsageError(f"--res must look like 200x200, got {res!r}") from None
    try:
        level_list = [float(v) for v in levels.split(",") if v.strip()]
    except ValueError:
        raise click.UsageError(f"--levels must be comma-separated numbers, got {levels!r}") from None
    fmt_list = [f.strip() for f in formats.split(",") if f.strip()]
    for f in fmt_list:
        if f not in ("csv", "json", "svg", "png"):
            raise click.UsageError(f"unknown format {f!r}")
    modes = list(ALL_MODES) if mode_text == "all" else [_parse_mode(mode_text)]

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = {"field": field_name, "space": space, "res": [nx, ny], "modes": {}}
    for mode in modes:
        atl = make_atlas(model, mode, field_name, nx, ny, level_list, space=space)
        tag = str(mode).replace("+", "p").replace("-", "m")
        files = []
        for f in fmt_list:
            dest = out / f"atlas_{field_name}_{space}_{tag}.{f}"
            if f == "png":
                from kinetobench.figures import render_atlas_figure

                render_atlas_figure(atl, dest)
            else:
                export_atlas(atl, f, dest)
            files.append(str(dest))
        vals = atl.grid.values[atl.grid.mask]
        summary["modes"][str(mode)] = {
            "min_value": float(vals.min()) if vals.size else None,
            "max_value": float(vals.max()) if vals.size else None,
            "unmasked_points": int(atl.grid.mask.sum()),
            "files": files,
        }
        click.echo(f"mode {mode}: {len(files)} file(s) written", err=True)
    _echo_json(summary)


@cli.command()
@click.option("--model", "model_ref", default="fivebar_6_8_5", show_default=True)
@click.option("--serial-model", "serial_ref", default="rrr_planar", show_default=True,
              help="Serial chain for the finite-difference Jacobian check ('' to skip).")
@click.option("--samples", default=10_000, show_default=True)
@click.option("--seed", default=42, show_default=True)
def verify(model_ref, serial_ref, samples, seed):
    """Run the oracle suite; exit 0 iff every check passes."""
    model = _load_fivebar(model_ref)
    serial = None
    if serial_ref:
        serial = resolve_model(serial_ref)
        if not isinstance(serial, SerialChainModel):
            raise click.UsageError(f"{serial_ref} is not a serial chain")
    if samples == 0:
        click.echo("warning: samples = 0, checks pass trivially", err=True)
    results = run_verification(model, serial, samples=samples, seed=seed)
    width = max(len(name) for name in results)
    for name, res in results.items():
        status = "pass" if res.passed else "FAIL"
        click.echo(
            f"{name:<{width}}  {status}  max_error={res.max_error:.3e}  "
            f"tol={res.tolerance:.1e}  samples={res.samples}",
            err=True,
        )
    _echo_json(
        {
            name: {
                "passed": res.passed,
                "max_error": res.max_error,
                "tolerance": res.tolerance,
                "samples": res.samples,
                "worst": res.worst,
            }
            for name, res in results.items()
        }
    )
    if not all(res.passed for res in results.values()):
        failing = {name: res.worst for name, res in results.items() if not res.passed}
        click.echo(f"failing postures: {json.dumps(failing)}", err=True)
        sys.exit(EXIT_FAIL)


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--trace", "trace_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def replay(config_path, trace_path, out_path):
    """Replay a pointer trace into a deterministic snapshot log."""
    config = load_session_config(config_path)
    count = replay_to_log(config, trace_path, out_path)
    click.echo(f"{count} snapshot(s) -> {out_path}", err=True)
    _echo_json({"ticks": count, "log": str(out_path)})


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--endpoint", default="127.0.0.1:8700", show_default=True,
              help="host:port to bind.")
def serve(config_path, endpoint):
    """Serve the real-time session over websockets (blocks until interrupted)."""
    from kinetobench.server import serve as run_server

    config = load_session_config(config_path)
    try:
        host, port_text = endpoint.rsplit(":", 1)
        port = int(port_text)
    except ValueError:
        raise click.UsageError(f"--endpoint must be host:port, got {endpoint!r}") from None
    click.echo(f"serving on ws://{host}:{port}/ws", err=True)
    run_server(config, host=host, port=port)


def main() -> None:
    try:
        cli.main(standalone_mode=False)
    except click.UsageError as e:
        click.echo(f"usage error: {e.format_message()}", err=True)
        sys.exit(EXIT_USAGE)
    except DomainFailure as e:
        click.echo(f"error: {e.format_message()}", err=True)
        sys.exit(EXIT_DOMAIN)
    except click.ClickException as e:
        click.echo(f"error: {e.format_message()}", err=True)
        sys.exit(EXIT_FAIL)
    except click.exceptions.Abort:
        sys.exit(EXIT_FAIL)
    except ModelError as e:
        click.echo(f"model error: {e}", err=True)
        sys.exit(EXIT_USAGE)
    except ValueError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_FAIL)


if __name__ == "__main__":
    main()
