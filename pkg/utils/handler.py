import logging

from django.core.management.base import CommandError

from utils.enums import ExitCode
from utils.exceptions import ExceptionMessageBuilder

logger = logging.getLogger(__name__)


def command_exception_handler(exc: Exception, context: dict) -> CommandError:
    """
    Maps an exception raised inside a management command to a CommandError carrying
    the stable exit code (2 configuration, 3 numerical or protocol failure).
    """
    if isinstance(exc, CommandError):
        return exc

    if isinstance(exc, ExceptionMessageBuilder):
        logger.error(f"{exc.title}: {exc.message} - Details: {exc.detail}, Context: {context}")
        return CommandError(f"{exc.title}: {exc.message}", returncode=exc.exit_code)

    logger.error("Unhandled exception occurred", exc_info=exc)
    return CommandError(f"An unexpected error occurred: {exc}", returncode=ExitCode.FAILURE.value)
