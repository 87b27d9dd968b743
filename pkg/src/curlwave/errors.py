"""Exception types raised across curlwave."""


class CurlwaveError(Exception):
    """Base class for all curlwave errors."""


class ZeroWaveVector(CurlwaveError, ValueError):
    """An operation needing |w| > 0 got the zero wavevector."""


class DuplicateWaveVector(CurlwaveError, ValueError):
    """Two modes share one wavevector; amplitudes must be summed first."""


class EmptyGrid(CurlwaveError, ValueError):
    pass


class NonFiniteSample(CurlwaveError, ValueError):
    pass


class OffLatticeMode(CurlwaveError, ValueError):
    """A wavevector is not representable on the requested sampling grid."""


class CflViolation(CurlwaveError, ValueError):
    pass


class FormatError(CurlwaveError, ValueError):
    """Malformed input file. Carries the line number or byte offset."""

    def __init__(self, message, *, line=None, offset=None, path=None):
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"byte {offset}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.line = line
        self.offset = offset
        self.path = path


class ConfigError(CurlwaveError, ValueError):
    """Bad run configuration; the message names the offending key."""
