import logging
import os
import re

LOG_LEVEL = os.getenv("STARISAC_LOG_LEVEL", "INFO").upper()
LOG_FILE = os.getenv("STARISAC_LOG_FILE")


class RunContextFormatter(logging.Formatter):
    """Formatter that tags records with their run context and shortens array dumps."""

    # Attributes passed through ``extra=`` that identify a solve
    CONTEXT_FIELDS = ("variant", "seed", "outer")

    # numpy reprs longer than this are abbreviated
    MAX_ARRAY_CHARS = 160

    _ARRAY_PATTERN = re.compile(r"(array\(|\[)[^\]]{%d,}\]" % MAX_ARRAY_CHARS, re.DOTALL)

    def format(self, record: logging.LogRecord) -> str:
        """Format log record with run context appended and long arrays abbreviated."""
        formatted = super().format(record)

        formatted = self._ARRAY_PATTERN.sub(self._abbreviate, formatted)

        context = [
            f"{name}={getattr(record, name)}"
            for name in self.CONTEXT_FIELDS
            if getattr(record, name, None) is not None
        ]
        if context:
            formatted = f"{formatted} {{{' '.join(context)}}}"

        return formatted

    @classmethod
    def _abbreviate(cls, match: re.Match) -> str:
        text = match.group(0)
        return f"{text[:48]} ... {text[-24:]}"


# Create package logger instance
logger = logging.getLogger("starisac")
logger.setLevel(getattr(logging, LOG_LEVEL, logging.INFO))

# Clear any existing handlers to avoid duplicates
logger.handlers.clear()

context_formatter = RunContextFormatter("[%(asctime)s] [%(levelname)s] %(message)s")

stream_handler = logging.StreamHandler()
stream_handler.setFormatter(context_formatter)
logger.addHandler(stream_handler)

# Optional file handler, only when a path is configured
if LOG_FILE:
    try:
        file_handler = logging.FileHandler(LOG_FILE)
        file_handler.setFormatter(context_formatter)
        logger.addHandler(file_handler)
    except Exception as e:
        # Use a basic message here to avoid potential recursive logging issues
        print(f"Warning: Could not create file logger at {LOG_FILE}: {e}")

# Prevent propagation to avoid duplicate logs
logger.propagate = False
