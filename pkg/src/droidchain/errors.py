from __future__ import annotations


class DroidChainError(RuntimeError):
    pass


class LineError(DroidChainError):
    def __init__(self, line_no: int, detail: str = "") -> None:
        self.line_no = line_no
        self.detail = detail
        msg = f"{type(self).__name__} at line {line_no}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class MalformedLine(LineError):
    pass


class EmptySignature(LineError):
    pass


class NonPositiveCount(LineError):
    pass


class UndecodableInput(DroidChainError):
    pass


class InvalidSignature(DroidChainError):
    pass


class ManifestFormatError(DroidChainError):
    pass


class DuplicateAppId(DroidChainError):
    def __init__(self, app_id: str) -> None:
        self.app_id = app_id
        super().__init__(f"duplicate app_id={app_id}")


class UnknownLabel(DroidChainError):
    def __init__(self, label: str, app_id: str = "") -> None:
        self.label = label
        self.app_id = app_id
        super().__init__(f"unknown label={label!r} app_id={app_id}")


class MissingArtifacts(DroidChainError):
    def __init__(self, app_id: str) -> None:
        self.app_id = app_id
        super().__init__(f"app_id={app_id} has neither a static graph nor traces")


class MixedNamespace(DroidChainError):
    pass


class ModeMismatch(DroidChainError):
    pass


class AppIdMismatch(DroidChainError):
    pass


class UnknownState(DroidChainError):
    def __init__(self, label: object) -> None:
        self.label = label
        super().__init__(f"label outside state space: {label}")


class SingleClassTraining(DroidChainError):
    pass


class RaggedMatrix(DroidChainError):
    pass


class DimensionMismatch(DroidChainError):
    pass


class TooFewSamples(DroidChainError):
    pass


class KTooLarge(DroidChainError):
    pass


class MissingVector(DroidChainError):
    def __init__(self, app_id: str) -> None:
        self.app_id = app_id
        super().__init__(f"no feature vector for app_id={app_id}")


class NoCandidate(DroidChainError):
    def __init__(self, app_id: str = "") -> None:
        self.app_id = app_id
        super().__init__(f"no candidate app package app_id={app_id}")


class SchemaMismatch(DroidChainError):
    pass


class IOFailure(DroidChainError):
    pass


class InvalidSpec(DroidChainError):
    pass


class ConfigError(DroidChainError):
    pass
