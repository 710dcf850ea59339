"""Exception types shared across the engine."""


class HemicapError(Exception):
    """Base class for all engine errors."""


class BehindCameraError(HemicapError):
    """A point lies at or behind the camera plane and cannot be projected."""


class DegenerateConfigurationError(HemicapError):
    """Point correspondences do not determine a unique homography."""


class MarkerBehindCameraError(HemicapError):
    """Homography decomposition recovered a non-positive marker depth."""


class WrongMarkerError(HemicapError):
    """Observation marker id does not match the expected marker spec."""


class NotVisibleError(HemicapError):
    """No part of the object projects into the image."""


class AlreadyCollectedError(HemicapError):
    """A patch was marked collected twice; indicates a session-logic bug."""


class ConfigValidationError(HemicapError):
    """Session configuration failed validation.

    ``fields`` maps field names to human-readable messages.
    """

    def __init__(self, fields: dict):
        self.fields = dict(fields)
        details = "; ".join(f"{k}: {v}" for k, v in sorted(self.fields.items()))
        super().__init__(f"invalid session config: {details}")


class SessionStateError(HemicapError):
    """Operation is not allowed in the session's current phase."""


class SessionNotFoundError(HemicapError):
    """No session exists with the given id."""


class StorageError(HemicapError):
    """A datastore write failed."""


class IntegrityError(HemicapError):
    """A datastore write would violate an integrity rule (e.g. duplicate id)."""


class SchemaVersionError(HemicapError):
    """Stored data uses an unknown schema version."""
