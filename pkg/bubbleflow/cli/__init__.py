"""bubbleflow command-line interface (`bubbleflow ...`)."""

from bubbleflow.cli.app import app

__all__ = ["app"]
