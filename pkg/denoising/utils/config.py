"""``key = value`` run configuration files, read with python-dotenv."""
from pathlib import Path

from dotenv.parser import parse_stream

from ..exceptions import InvalidInputError


def read_config(path):
    """Map of keys to raw string values; ``#`` starts a comment.

    Keys are normalised to the option spelling used by the commands, so
    ``scan-values`` and ``scan_values`` are the same key.
    """
    path = Path(path)
    try:
        stream = path.open(encoding="utf-8")
    except OSError as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc.strerror or exc}") from exc

    values = {}
    with stream:
        for binding in parse_stream(stream):
            if binding.key is None and not binding.error:
                continue
            if binding.error or binding.value is None:
                raise InvalidInputError(f"{path}:{binding.original.line}: expected 'key = value'")
            values[binding.key.replace("-", "_")] = binding.value
    return values


def merge_options(options, file_values, defaults):
    """Explicit options beat the config file, which beats ``defaults``.

    ``options`` holds parsed command-line values with ``None`` for flags the
    user did not give.
    """
    merged = dict(defaults)
    merged.update(file_values)
    merged.update({key: value for key, value in options.items() if value is not None})
    return merged
