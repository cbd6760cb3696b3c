from enum import Enum


class ExitCode(Enum):
    SUCCESS = 0
    FAILURE = 1
    CONFIG_ERROR = 2
    NUMERICAL_FAILURE = 3
