"""Exception hierarchy."""


class PrivscribeError(Exception):
    pass


class AudioFormatError(PrivscribeError):
    """Malformed or unreadable WAV data."""


class UnsupportedAudioError(PrivscribeError):
    """Valid WAV container with an encoding we do not handle."""


class ParameterError(PrivscribeError, ValueError):
    pass


class EmptyTranscriptError(PrivscribeError, ValueError):
    pass


class VocabMismatchError(PrivscribeError, ValueError):
    pass


class DummyShortfallError(PrivscribeError):
    """Not enough unused dummy candidates to realize a noise plan.

    ``shortfalls`` is a list of ``(partition, word, needed, available)``.
    """

    def __init__(self, shortfalls):
        self.shortfalls = list(shortfalls)
        detail = ", ".join(f"{w!r} needs {n} has {a} (provider {p})" for p, w, n, a in self.shortfalls)
        super().__init__(f"insufficient dummy candidates: {detail}")


class TransportError(PrivscribeError):
    def __init__(self, provider: str, position: int, attempts: int, reason: str):
        self.provider = provider
        self.position = position
        self.attempts = attempts
        super().__init__(f"provider {provider!r} failed at position {position} after {attempts} attempt(s): {reason}")


class MissingResponseError(PrivscribeError):
    pass
