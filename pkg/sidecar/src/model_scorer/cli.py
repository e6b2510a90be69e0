"""Service entry point."""

import logging

import click
import uvicorn

from .service import create_app


@click.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8601)
@click.option("--registry", "registry_path", type=click.Path(exists=True), default=None,
              help="Registry YAML mapping metrics to model identifiers.")
@click.option("--device", default="cpu", help="Device for transformer-backed scorers.")
@click.option("--batch-size", type=int, default=32, help="Internal batch size hint.")
@click.option("--verbose", "-v", is_flag=True, default=False)
def main(host, port, registry_path, device, batch_size, verbose):
    """Serve the scorer protocol (/v1/health, /v1/score, /v1/embed)."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING)
    app = create_app(registry_path=registry_path, device=device)
    uvicorn.run(app, host=host, port=port, log_level="info" if verbose else "warning")


if __name__ == "__main__":
    main()
