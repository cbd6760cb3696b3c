from enum import Enum


class LabelState(Enum):
    UNTAGGED = 0
    TAGGED_0 = 1
    TAGGED_1 = 2

    @classmethod
    def choices(cls):
        return [(key.value, key.name.capitalize()) for key in cls]

    @classmethod
    def for_label(cls, label: int) -> "LabelState":
        return cls.TAGGED_1 if label == 1 else cls.TAGGED_0
