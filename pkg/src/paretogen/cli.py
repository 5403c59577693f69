"""Thin command-line client for the service.

Every subcommand marshals its arguments into the service's request
models and POSTs them.  Without --server the app is mounted in-process
over an ASGI transport, so no socket or separate process is needed;
with --server the same requests go to a remote instance (artifacts are
then written on the server's filesystem).  PARETOGEN_OUT sets the
default output root.
"""

from __future__ import annotations

import json
import sys

import click
import httpx


def _post_inprocess(path: str, payload: dict) -> httpx.Response:
    # one event loop per command; the app is mounted without a socket
    import asyncio

    from .service import app

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport, timeout=None,
                                     base_url="http://paretogen.local") as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _post(server: str | None, path: str, payload: dict) -> dict:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            resp = client.post(path, json=payload)
    else:
        resp = _post_inprocess(path, payload)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except Exception:
            detail = resp.text
        click.echo(f"error ({resp.status_code}): {detail}", err=True)
        sys.exit(1)
    return resp.json()


@click.group()
def main():
    """Multi-objective guided-sampling toolkit."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="YAML or JSON run config.")
@click.option("--seed", type=int, default=None,
              help="Run only this seed instead of the config's list.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Output root (default: config, then $PARETOGEN_OUT, then ./runs).")
@click.option("--server", default=None, help="Remote service URL.")
def run(config_path, seed, out_dir, server):
    """Execute a configured run for each seed."""
    from .configs import load_run_config
    try:
        cfg = load_run_config(config_path)
    except Exception as exc:
        click.echo(f"invalid config: {exc}", err=True)
        sys.exit(2)
    payload = {"config": json.loads(cfg.model_dump_json()), "seed": seed,
               "out_dir": out_dir}
    out = _post(server, "/runs", payload)
    click.echo(json.dumps(out, indent=2))


@main.command()
@click.option("--in", "in_dirs", required=True, multiple=True,
              type=click.Path(), help="Run directory or output root; repeatable.")
@click.option("--out", "out_file", required=True, type=click.Path(),
              help="Summary JSON path (curve CSVs land beside it).")
@click.option("--checkpoint", "checkpoints", multiple=True, type=int,
              help="Explicit budget checkpoints; repeatable.")
@click.option("--server", default=None, help="Remote service URL.")
def summarize(in_dirs, out_file, checkpoints, server):
    """Aggregate runs into a budget-aligned hypervolume table."""
    payload = {"run_dirs": list(in_dirs), "out_file": out_file,
               "checkpoints": list(checkpoints) or None}
    out = _post(server, "/summarize", payload)
    click.echo(json.dumps(out, indent=2))


@main.command()
@click.option("--in", "in_dirs", required=True, multiple=True,
              type=click.Path(), help="Run directory or output root; repeatable.")
@click.option("--combined/--no-combined", default=True,
              help="Write the pooled combined-front CSV.")
@click.option("--out", "out_file", default=None, type=click.Path(),
              help="Combined front CSV path.")
@click.option("--server", default=None, help="Remote service URL.")
def fronts(in_dirs, combined, out_file, server):
    """Combined Pareto-front contribution report across algorithms."""
    payload = {"run_dirs": list(in_dirs), "combined": combined,
               "out_file": out_file}
    out = _post(server, "/fronts", payload)
    click.echo(json.dumps(out, indent=2))


@main.command()
@click.option("--n-vectors", "-N", "n_vectors", required=True, type=int)
@click.option("--objectives", "-n", "n_obj", required=True, type=int)
@click.option("--source", type=click.Choice(["qmc", "mc"]), default="qmc")
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_file", default=None, type=click.Path(),
              help="Optional CSV destination, one vector per row.")
@click.option("--server", default=None, help="Remote service URL.")
def preferences(n_vectors, n_obj, source, seed, out_file, server):
    """Generate clamped preference vectors."""
    payload = {"N": n_vectors, "n": n_obj, "source": source, "seed": seed}
    out = _post(server, "/preferences", payload)
    if out_file:
        import numpy as np
        from .preferences import save_preferences
        save_preferences(out_file, np.asarray(out["vectors"]).T)
        click.echo(f"wrote {out_file} (min geodesic {out['min_geodesic']})")
    else:
        click.echo(json.dumps(out, indent=2))


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Start the HTTP service."""
    import uvicorn
    uvicorn.run("paretogen.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
