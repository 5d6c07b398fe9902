import logging

from elulab.frontend import helpers as h
from elulab.frontend import printutils as pu
from elulab.frontend.commands import elautoencoder
from elulab.frontend.commands import elconfig
from elulab.frontend.commands import elhelp
from elulab.frontend.commands import ellemma
from elulab.frontend.commands import elnatgrad
from elulab.frontend.commands import elshow
from elulab.frontend.commands import eltrace
from elulab.frontend.commands import eltrain

log = logging.getLogger("elulab")
log.trace("frontend_cli.py")

class frontend_cli:
    """Register the commands and dispatch a command line to one of them"""

    def __init__(self, elu):

        # The below dictates in what order they will be shown by "help"
        self.cmds = []
        self.cmds.append(elconfig.elconfig(elu))
        self.cmds.append(eltrain.eltrain(elu))
        self.cmds.append(elautoencoder.elautoencoder(elu))
        self.cmds.append(eltrace.eltrace(elu))
        self.cmds.append(elnatgrad.elnatgrad(elu))
        self.cmds.append(ellemma.ellemma(elu))
        self.cmds.append(elshow.elshow(elu))

        self.help = elhelp.elhelp(elu, self.cmds)
        self.commands = {cmd.name: cmd for cmd in self.cmds + [self.help]}

    def dispatch(self, argv):
        """:return: the command's exit code"""
        if not argv or argv[0] in ("-h", "--help"):
            return self.help.invoke([])
        name = argv[0]
        if name not in self.commands:
            pu.print_error(f"unknown command '{name}', expected {h.prepare_list(sorted(self.commands))}")
            return h.EXIT_USAGE
        log.debug(f"frontend_cli.dispatch({name})")
        return self.commands[name].invoke(argv[1:])
