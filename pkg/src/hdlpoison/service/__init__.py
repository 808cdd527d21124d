"""HTTP service layer (FastAPI) over the core toolkit."""

from .app import create_app

__all__ = ["create_app"]
