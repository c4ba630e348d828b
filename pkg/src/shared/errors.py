"""
Error hierarchy. The CLI maps each family to an exit code:
ConfigError -> 2, DataError -> 3, DivergenceError -> 4.
"""


class ModifyError(Exception):
    """Base class for every error raised by this project."""


class ShapeError(ModifyError, ValueError):
    pass


class ConfigError(ModifyError, ValueError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class DataError(ModifyError, ValueError):
    pass


class DivergenceError(ModifyError, RuntimeError):
    pass


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_DIVERGENCE = 4


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, DivergenceError):
        return EXIT_DIVERGENCE
    if isinstance(exc, DataError):
        return EXIT_DATA
    return 1
