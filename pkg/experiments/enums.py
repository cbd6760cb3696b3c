from enum import Enum


class RunStatus(Enum):
    PENDING = 'PENDING'
    RUNNING = 'RUNNING'
    COMPLETED = 'COMPLETED'
    FAILED = 'FAILED'

    @classmethod
    def choices(cls):
        return [(key.value, key.name.capitalize()) for key in cls]


class RunCommand(Enum):
    RUN = 'run'
    ABLATE = 'ablate'
    MASKSWEEP = 'masksweep'

    @classmethod
    def choices(cls):
        return [(key.value, key.name.capitalize()) for key in cls]
