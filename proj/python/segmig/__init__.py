"""Esope / FORTRAN 77 to Fortran 2008 migration."""

from ._segmig import (
    MigrationError,
    check,
    dump_model,
    infer_intents,
    migrate,
    run_cli,
)

__all__ = ["MigrationError", "check", "dump_model", "infer_intents", "migrate", "run_cli"]
