class ScenarioFileError(Exception):
    line_number: int | None

    def __init__(self, message: str, line_number: int | None = None) -> None:
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ScenarioSyntaxError(ScenarioFileError):
    pass


class UnknownKeyError(ScenarioFileError):
    key: str

    def __init__(self, key: str, line_number: int) -> None:
        super().__init__(f"unknown key {key}", line_number)
        self.key = key


class DuplicateKeyError(ScenarioFileError):
    key: str

    def __init__(self, key: str, line_number: int) -> None:
        super().__init__(f"duplicate key {key}", line_number)
        self.key = key


class InvalidValueError(ScenarioFileError):
    key: str

    def __init__(self, key: str, value: str, expected: str, line_number: int) -> None:
        super().__init__(f"key {key} expects {expected}, got {value!r}", line_number)
        self.key = key


class MissingKeyError(ScenarioFileError):
    key: str

    def __init__(self, key: str) -> None:
        super().__init__(f"missing required key {key}")
        self.key = key
