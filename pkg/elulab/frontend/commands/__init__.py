import logging

log = logging.getLogger("elulab")
log.trace("commands/__init__.py")
