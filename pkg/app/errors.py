# typed errors raised by the toolkit
# invariants of internal models are asserted, everything reachable from user input raises one of these


class InvalidArgumentError(ValueError):
    pass


class DegenerateScaleError(InvalidArgumentError):
    # scale factor larger than image dimension
    pass


class UnsupportedScaleError(InvalidArgumentError):
    # scale factor not among backend trained scales
    pass


class ImageFormatError(InvalidArgumentError):
    # image is not 8-bit / 3-channel
    pass


class IngestionError(ValueError):
    pass


class LayoutError(IngestionError):
    def __init__(self, path: object, message: str) -> None:
        super().__init__(f"{message} (offending path: `{path}`)")
        self.path = path


class BackendUnavailableError(RuntimeError):
    # model artifact missing / corrupt / runtime not installed
    # distinct from "no face found" or per-image failures
    pass


class RunError(RuntimeError):
    # run-level failure (eg. too many failed entries)
    pass


class SpecError(ValueError):
    # invalid experiment / run config, usage error
    pass
