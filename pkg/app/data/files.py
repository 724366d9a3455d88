import logging
import os
import tempfile
from contextlib import ExitStack, contextmanager
from pathlib import Path

logger = logging.getLogger(__name__)


@contextmanager
def atomic_output(path):
    """
    Yield a temporary path next to `path` and move it into place on success.

    The temporary file is removed if the block raises, so a failed run never
    leaves a partial output behind.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=target.suffix, dir=target.parent)
    os.close(fd)
    try:
        yield tmp_name
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise
    logger.info(f"Wrote {target}")


def write_text(path, text: str) -> None:
    with atomic_output(path) as tmp:
        with open(tmp, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)


@contextmanager
def atomic_outputs(*paths):
    """Temporary paths for several outputs; none is moved into place unless the whole block succeeds."""
    with ExitStack() as stack:
        yield [stack.enter_context(atomic_output(path)) for path in paths]
