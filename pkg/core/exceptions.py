class FrameforgeError(Exception):
    """
    Base error of the toolkit. Carries a human readable detail and the
    process exit code the command line reports for it.
    """

    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


# Активации
class NonSmoothAtPoint(FrameforgeError):
    pass


class NonSmoothFamily(FrameforgeError):
    pass


class NotNormalizable(FrameforgeError):
    pass


# Квадратуры
class DimTooLarge(FrameforgeError):
    pass


class NaNEncountered(FrameforgeError):
    pass


class DimMismatch(FrameforgeError):
    pass


# Проверка ядер
class UnstableCertificate(FrameforgeError):
    def __init__(self, detail: str, certificate=None):
        super().__init__(detail)
        self.certificate = certificate


class TooFewValidSamples(FrameforgeError):
    pass


# Словарь
class TooManyPoints(FrameforgeError):
    pass


class EmptyDictionary(FrameforgeError):
    pass


class InvalidExpansion(FrameforgeError):
    pass


# Жадный алгоритм
class GramSingular(FrameforgeError):
    pass


class DictionaryExhausted(FrameforgeError):
    pass


class MissingBound(FrameforgeError):
    pass


# Сети
class EmptyExpansion(FrameforgeError):
    pass


class FitSingular(FrameforgeError):
    pass


class NotSeparable(FrameforgeError):
    pass


# Файлы
class SchemaMismatch(FrameforgeError):
    pass


class MissingNodes(FrameforgeError):
    pass


class PipelineStageError(FrameforgeError):
    def __init__(self, stage: str, cause: FrameforgeError):
        super().__init__(f"Stage '{stage}' failed: {type(cause).__name__}: {cause.detail}")
        self.stage = stage
        self.cause = cause
