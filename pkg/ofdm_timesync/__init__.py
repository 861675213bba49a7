import logging
import os
import sys

__version__ = "0.1.0"

log_level = os.environ.get('LOGLEVEL', 'INFO').upper()
logger = logging.getLogger(__name__)
handler = logging.StreamHandler(sys.stderr)
handler.setLevel(log_level)
handler.setFormatter(logging.Formatter("%(asctime)s %(name)s %(levelname)s: %(message)s"))
logger.addHandler(handler)
logger.setLevel(log_level)

# Matplotlib is chatty on debug-level, quiet it.
logging.getLogger("matplotlib").setLevel("WARN")
