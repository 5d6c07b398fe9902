import logging

from elulab import logger

# Library use stays quiet, commands raise the level with --loglevel.
# Pass logger.TRACE here to follow module loading.
log = logger.install("elulab", logging.WARNING)

if log.isEnabledFor(logging.DEBUG):
    log.warning(f"logging {logging.getLevelName(log.level)} enabled")

log.trace("elulab/__init__.py")
