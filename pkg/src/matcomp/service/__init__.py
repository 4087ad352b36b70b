"""HTTP service wrapper around the completion toolkit."""

from .app import app, create_app

__all__ = ["app", "create_app"]
