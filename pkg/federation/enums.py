from enum import Enum


class Mode(Enum):
    FEDAVG = 'FEDAVG'
    FEDAVG_PL = 'FEDAVG_PL'
    FEDMLP = 'FEDMLP'

    @classmethod
    def choices(cls):
        return [(key.value, key.name) for key in cls]


class Stage(Enum):
    BASELINE = 'baseline'
    WARMUP = 'warmup'
    DETECTION = 'detection'

    @classmethod
    def choices(cls):
        return [(key.value, key.name.capitalize()) for key in cls]


class PriorsSource(Enum):
    LOCAL = 'local'
    GLOBAL_ORACLE = 'global_oracle'

    @classmethod
    def choices(cls):
        return [(key.value, key.name.capitalize()) for key in cls]
