"""Console logging for the command-line tools.

Library and test code never configures handlers; batch workers inherit nothing.
"""
import logging
import sys
from typing import Optional, TextIO

CONSOLE_HANDLER = "apportion-console"


def configure_logging(verbose: bool = False, quiet: bool = False, stream: Optional[TextIO] = None) -> int:
    """Point the root logger at stderr (or `stream`) and return the level set.

    `verbose` wins over `quiet`. A handler installed by an earlier call is
    replaced, so repeated runs in one process log to the current stream. When
    something else already owns the root handlers only the level changes.
    """
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    root = logging.getLogger()
    for h in [h for h in root.handlers if h.get_name() == CONSOLE_HANDLER]:
        root.removeHandler(h)
    if not root.handlers:
        handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
        handler.set_name(CONSOLE_HANDLER)
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        root.addHandler(handler)
    root.setLevel(level)
    return level
