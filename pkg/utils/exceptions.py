from typing import Optional

from utils.enums import ExitCode


class ExceptionInterface:
    title: Optional[str] = "Something went wrong"
    exit_code: Optional[int] = ExitCode.FAILURE.value
    message: Optional[str] = "An error occurred while running the simulation"

    def __init__(self, title: Optional[str] = None, message: Optional[str] = None,
                 exit_code: Optional[ExitCode] = None):
        if title is not None:
            self.title = title
        if message is not None:
            self.message = message
        if exit_code is not None:
            self.exit_code = exit_code.value


class ExceptionMessageBuilder(Exception):
    def __init__(self, ex_info: ExceptionInterface):
        self.title = ex_info.title
        self.exit_code = ex_info.exit_code
        self.message = ex_info.message
        self.detail = {"title": self.title, "message": self.message}
        super().__init__(self.message)

    def _build(self, title: str, message: str, exit_code: ExitCode, **context):
        ExceptionMessageBuilder.__init__(self, ExceptionInterface(title, message, exit_code))
        self.detail.update(context)

    def __str__(self):
        return self.message


# Configuration errors (exit code 2)

class InvalidConfigurationException(ExceptionMessageBuilder):
    def __init__(self, message: str = "The experiment configuration is invalid.", **context):
        self._build("Invalid Configuration", message, ExitCode.CONFIG_ERROR, **context)


class InfeasibleMaskPlanException(ExceptionMessageBuilder):
    def __init__(self, clients: int, classes: int, missing: int):
        self._build(
            "Infeasible Mask Plan",
            f"Cannot remove {missing} of {classes} classes from each of {clients} clients "
            f"while keeping every class labeled by at least one client.",
            ExitCode.CONFIG_ERROR,
            clients=clients, classes=classes, missing=missing,
        )


class InvalidSelectionRatioException(ExceptionMessageBuilder):
    def __init__(self, tau0: float, tau1: float):
        self._build(
            "Invalid Selection Ratio",
            f"Selection ratios must be non-negative, got tau0={tau0}, tau1={tau1}.",
            ExitCode.CONFIG_ERROR,
            tau0=tau0, tau1=tau1,
        )


class GenerationException(ExceptionMessageBuilder):
    def __init__(self, message: str = "The synthetic dataset cannot be generated.", **context):
        self._build("Generation Failed", message, ExitCode.CONFIG_ERROR, **context)


class OutputPathException(ExceptionMessageBuilder):
    def __init__(self, path: str, reason: str = "not writable"):
        self._build("Output Path Error", f"Output path {path} is {reason}.", ExitCode.CONFIG_ERROR, path=path)


# Numerical errors (exit code 3)

class DimensionMismatchException(ExceptionMessageBuilder):
    def __init__(self, message: str = "Array shapes are inconsistent.", **context):
        self._build("Dimension Mismatch", message, ExitCode.NUMERICAL_FAILURE, **context)


class NonFiniteValueException(ExceptionMessageBuilder):
    def __init__(self, what: str = "input"):
        self._build("Non-finite Value", f"The {what} contains NaN or infinite entries.",
                    ExitCode.NUMERICAL_FAILURE, what=what)


class DegeneratePriorException(ExceptionMessageBuilder):
    def __init__(self, classes):
        self._build(
            "Degenerate Prior",
            f"Class priors for classes {list(classes)} are exactly 0 or 1; smooth them first.",
            ExitCode.NUMERICAL_FAILURE,
            classes=list(classes),
        )


class InvalidLabelValuesException(ExceptionMessageBuilder):
    def __init__(self):
        self._build("Invalid Labels", "Label matrices may only contain 0 and 1.", ExitCode.NUMERICAL_FAILURE)


class EmptyDatasetException(ExceptionMessageBuilder):
    def __init__(self, what: str = "dataset"):
        self._build("Empty Dataset", f"The {what} has no samples.", ExitCode.NUMERICAL_FAILURE, what=what)


class UndefinedCosineException(ExceptionMessageBuilder):
    def __init__(self, what: str = "prototype"):
        self._build("Undefined Cosine", f"Cosine similarity is undefined for a zero-norm {what}.",
                    ExitCode.NUMERICAL_FAILURE, what=what)


class TrainingDivergedException(ExceptionMessageBuilder):
    def __init__(self, round_index: Optional[int] = None, client_id: Optional[int] = None, what: str = "loss"):
        self._build(
            "Training Diverged",
            f"Non-finite {what} at round {round_index}, client {client_id}.",
            ExitCode.NUMERICAL_FAILURE,
            round=round_index, client=client_id, what=what,
        )


# Protocol errors (exit code 3)

class ProtocolViolationException(ExceptionMessageBuilder):
    def __init__(self, message: str = "The federated protocol was violated.", **context):
        self._build("Protocol Violation", message, ExitCode.NUMERICAL_FAILURE, **context)


class PermanentTagViolationException(ExceptionMessageBuilder):
    def __init__(self, class_id: int, samples):
        self._build(
            "Permanent Tag Violation",
            f"Samples {list(samples)[:10]} already carry a pseudo label for class {class_id}.",
            ExitCode.NUMERICAL_FAILURE,
            class_id=class_id,
        )
