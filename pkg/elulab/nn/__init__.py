import logging

log = logging.getLogger("elulab")
log.trace("nn/__init__.py")
