"""Storage: SQLite run ledger."""

from .database import Database, default_data_dir

__all__ = ["Database", "default_data_dir"]
