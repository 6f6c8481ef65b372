"""HTTP service exposing builds as sessions and discovery as queries."""

from .app import create_app

__all__ = ["create_app"]
