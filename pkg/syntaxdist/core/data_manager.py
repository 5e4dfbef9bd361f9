import csv
import hashlib
import io
import json
import logging
import os
from pathlib import Path
from typing import Any, Iterable, Sequence
from uuid import uuid4

import appdirs

__all__ = [
    "appdir",
    "user_config_file",
    "bundled_data_path",
    "cache_path",
    "command_output_path",
    "logs_path",
    "atomic_write_text",
    "save_json",
    "load_json",
    "save_csv",
    "json_digest",
    "file_digest",
]

log = logging.getLogger("syntaxdist.data_manager")

appdir = appdirs.AppDirs("syntaxdist")
user_config_file = Path(appdir.user_config_dir) / "config.yaml"

CACHE_PATH_APPEND = "cache"
LOGS_PATH_APPEND = "logs"


def bundled_data_path() -> Path:
    """
    Get the path to the "data" directory bundled with the package.

    .. important::

        You should *NEVER* write to this directory.

    Returns
    -------
    pathlib.Path
        Path object to the bundled data folder.

    Raises
    ------
    FileNotFoundError
        If no bundled data folder exists.

    """
    bundled_path = Path(__file__).parent.parent / "data"

    if not bundled_path.is_dir():
        raise FileNotFoundError("No such directory {}".format(bundled_path))

    return bundled_path


def cache_path(output_dir: Path) -> Path:
    path = Path(output_dir) / CACHE_PATH_APPEND
    path.mkdir(exist_ok=True, parents=True)
    return path


def command_output_path(output_dir: Path, command: str) -> Path:
    """Gets the folder a subcommand writes its reports to.

    Parameters
    ----------
    output_dir : pathlib.Path
        The run's output root.
    command : str
        Subcommand name, e.g. ``"cluster"``.

    Returns
    -------
    pathlib.Path
        ``output_dir / command``, created if missing.

    """
    path = Path(output_dir) / command
    path.mkdir(exist_ok=True, parents=True)
    return path


def logs_path(output_dir: Path) -> Path:
    return Path(output_dir) / LOGS_PATH_APPEND


def atomic_write_text(path: Path, text: str) -> None:
    """Write a text file so that readers see either the old or the new content.

    The text goes to a temporary sibling which is flushed and fsynced, then
    replaces ``path``; the directory entry is fsynced afterwards where the
    platform allows it. Line endings are always ``\\n``.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.parent / "{}-{}.tmp".format(path.stem, uuid4().fields[0])
    with tmp_path.open(encoding="utf-8", mode="w", newline="\n") as fs:
        fs.write(text)
        fs.flush()
        os.fsync(fs.fileno())

    tmp_path.replace(path)

    try:
        flag = os.O_DIRECTORY  # pylint: disable=no-member
    except AttributeError:
        pass
    else:
        fd = os.open(path.parent, flag)
        try:
            os.fsync(fd)
        finally:
            os.close(fd)


def dumps_json(data: Any) -> str:
    return json.dumps(data, indent=4, sort_keys=True, ensure_ascii=False) + "\n"


def save_json(path: Path, data: Any) -> None:
    atomic_write_text(path, dumps_json(data))
    log.debug("Wrote %s", path)


def load_json(path: Path) -> Any:
    with Path(path).open(encoding="utf-8") as fs:
        return json.load(fs)


def save_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """Write rows as UTF-8 CSV; floats are written with `repr` so they read back exactly."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    atomic_write_text(path, buffer.getvalue())
    log.debug("Wrote %s", path)


def json_digest(data: Any) -> str:
    """SHA-256 of the canonical JSON form of ``data``."""
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def file_digest(path: Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fs:
        for chunk in iter(lambda: fs.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
