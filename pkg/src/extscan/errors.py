"""Exception types shared across the scanner, stores, and service."""


class ExtScanError(Exception):
    """Base class for every error this package raises on purpose."""

    code = "ExtScanError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


# --- container / package errors -------------------------------------------

class UnknownContainer(ExtScanError):
    code = "UnknownContainer"


class TruncatedHeader(ExtScanError):
    code = "TruncatedHeader"


class BadVersion(ExtScanError):
    code = "BadVersion"


class MalformedZip(ExtScanError):
    code = "MalformedZip"


class MissingManifest(ExtScanError):
    code = "MissingManifest"


class EmptyKey(ExtScanError):
    code = "EmptyKey"


# --- manifest errors --------------------------------------------------------

class ManifestError(ExtScanError):
    code = "ManifestError"


class NotJson(ManifestError):
    code = "NotJson"


class MissingRequiredField(ManifestError):
    code = "MissingRequiredField"

    def __init__(self, field: str):
        super().__init__(f"manifest is missing required field: {field}")
        self.field = field


class PermissionEntryNotText(ManifestError):
    code = "PermissionEntryNotText"


class UnsupportedManifestVersion(ManifestError):
    code = "UnsupportedManifestVersion"


class NotAPattern(ExtScanError):
    """The text is not a host match pattern (so it is an API permission candidate)."""

    code = "NotAPattern"


class MalformedUrl(ExtScanError):
    code = "MalformedUrl"


# --- corpus / fetch errors --------------------------------------------------

class EmptyCorpus(ExtScanError):
    code = "EmptyCorpus"


class NetworkError(ExtScanError):
    code = "NetworkError"


class NotFound(ExtScanError):
    code = "NotFound"


class NotACrx(ExtScanError):
    code = "NotACrx"


# --- report document errors -------------------------------------------------

class SchemaViolation(ExtScanError):
    code = "SchemaViolation"


class SeverityMismatch(ExtScanError):
    code = "SeverityMismatch"


# --- report store / service errors -------------------------------------------

class MissingId(ExtScanError):
    code = "MissingId"


class StorageFailure(ExtScanError):
    code = "StorageFailure"


# --- install-store errors -----------------------------------------------------

class NotSqlite(ExtScanError):
    code = "NotSqlite"


class SchemaMismatch(ExtScanError):
    code = "SchemaMismatch"


class DuplicateEntry(ExtScanError):
    code = "DuplicateEntry"


class LiveProfileRefused(ExtScanError):
    code = "LiveProfileRefused"
