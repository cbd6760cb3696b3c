from enum import Enum


class LossNormalizer(Enum):
    CLASSES = 'classes'
    ACTIVE = 'active'

    @classmethod
    def choices(cls):
        return [(key.value, key.name.capitalize()) for key in cls]
