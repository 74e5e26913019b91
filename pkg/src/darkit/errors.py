"""Shared error types mapped onto HTTP status codes by the API layer."""

from __future__ import annotations


class DarkitError(Exception):
    """Base for all domain errors; carries a stable machine-readable code."""

    http_status = 500

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


class BadRequestError(DarkitError):
    http_status = 400


class NotFoundError(DarkitError):
    http_status = 404

    def __init__(self, message: str, code: str = "not-found"):
        super().__init__(code, message)


class ConflictError(DarkitError):
    http_status = 409

    def __init__(self, message: str, code: str = "conflict"):
        super().__init__(code, message)


class ValidationError(DarkitError):
    """Semantically invalid input (422): bad spans, bad params, failed checks."""

    http_status = 422
