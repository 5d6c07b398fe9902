import logging
import sys

# TRACE follows module loading and per-batch updates, mainly useful during development
TRACE = 5
logging.addLevelName(TRACE, "TRACE")

def _trace(self, message, *args, **kws):
    if self.isEnabledFor(TRACE):
        self._log(TRACE, message, args, **kws)

logging.Logger.trace = _trace

def parse_level(name):
    """Numeric level for a --loglevel value (case insensitive), None if unknown"""
    level = logging.getLevelName(str(name).upper())
    return level if isinstance(level, int) else None

class MyFormatter(logging.Formatter):
    """One line per record, the prefix depends on the level.
    Debug and trace lines also name the emitting module.
    """

    PREFIXES = {
        logging.ERROR: "[!]",
        logging.WARNING: "WARNING:",
        logging.INFO: "[*]",
        logging.DEBUG: "DBG:",
        TRACE: "TRACE:",
    }

    def __init__(self, datefmt="%H:%M:%S"):
        super().__init__(datefmt=datefmt)

    def format(self, record):
        prefix = self.PREFIXES.get(record.levelno)
        if prefix is None:
            return f"{self.formatTime(record, self.datefmt)} - {record.getMessage()}"
        where = f" {record.module}:" if record.levelno < logging.INFO else ""
        line = f"({self.formatTime(record, self.datefmt)}) {prefix}{where} {record.getMessage()}"
        if record.exc_info:
            line += "\n" + self.formatException(record.exc_info)
        return line

def install(name="elulab", level=logging.WARNING, stream=None):
    """Attach the stdout handler once and return the named logger"""
    log = logging.getLogger(name)
    if not log.handlers:
        handler = logging.StreamHandler(stream or sys.stdout)
        handler.setFormatter(MyFormatter())
        log.addHandler(handler)
        log.propagate = False
        log.setLevel(level)
    return log
