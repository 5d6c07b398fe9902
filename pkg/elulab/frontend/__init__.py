import logging

log = logging.getLogger("elulab")
log.trace("frontend/__init__.py")
