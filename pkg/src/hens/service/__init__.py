from .app import app, create_app
from .jobs import Job, JobRegistry

__all__ = ["Job", "JobRegistry", "app", "create_app"]
