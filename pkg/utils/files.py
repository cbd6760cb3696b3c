import os
import tempfile
from pathlib import Path
from typing import Callable, IO, Union

from utils.exceptions import OutputPathException


def ensure_directory(path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError:
        raise OutputPathException(str(path))
    if not os.access(path, os.W_OK):
        raise OutputPathException(str(path))
    return path


def atomic_write(path: Union[str, Path], writer: Callable[[IO], None], binary: bool = False) -> Path:
    """
    Writes through a temporary file in the target directory and renames it into place.
    """
    path = Path(path)
    directory = ensure_directory(path.parent)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    try:
        mode = "wb" if binary else "w"
        kwargs = {} if binary else {"encoding": "utf-8", "newline": ""}
        with os.fdopen(fd, mode, **kwargs) as handle:
            writer(handle)
        os.replace(tmp_name, path)
    except OSError:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise OutputPathException(str(path))
    except Exception:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    return atomic_write(path, lambda handle: handle.write(text))
