import logging
import os
import tempfile
from pathlib import Path

import humanfriendly
import numpy as np

logger = logging.getLogger(__name__)

STEREO_SUFFIXES = ('_left', '_right', '_disp')


def resolve_symlink(path):
    if os.path.islink(path):
        return resolve_symlink(os.path.realpath(path))
    return path


def round_half_away(x):
    """Round to the nearest integer, ties away from zero (numpy rounds ties to even)."""
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def atomic_write(path: str | os.PathLike, data: bytes | str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode('utf-8')
    fd, tmp_path = tempfile.mkstemp(prefix=f'.{path.name}.', dir=path.parent)
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(data)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    logger.info('wrote %s (%s)', path, humanfriendly.format_size(len(data)))


def find_stereo_triples(directory: str | os.PathLike) -> dict[str, dict[str, Path]]:
    """Group `<stem>_left.png`, `<stem>_right.png` and `<stem>_disp.png` files by stem.

    Only complete triples are returned; incomplete stems are logged and skipped.
    """
    directory = Path(resolve_symlink(str(directory)))
    found: dict[str, dict[str, Path]] = {}
    for entry in sorted(directory.glob('*.png')):
        for suffix in STEREO_SUFFIXES:
            if entry.stem.endswith(suffix):
                stem = entry.stem[:-len(suffix)]
                found.setdefault(stem, {})[suffix[1:]] = Path(resolve_symlink(str(entry)))
                break
    triples = {}
    for stem, parts in found.items():
        if len(parts) == len(STEREO_SUFFIXES):
            triples[stem] = parts
        else:
            logger.warning('skipping incomplete stereo triple %s (have %s)', stem, ', '.join(sorted(parts)))
    return triples
