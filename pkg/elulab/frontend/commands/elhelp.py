import logging

from elulab.frontend import helpers as h
from elulab.frontend import printutils as pu
from elulab.frontend.commands import elcmd

log = logging.getLogger("elulab")
log.trace("elhelp.py")

class elhelp(elcmd.elcmd):
    """Command to list all available commands"""

    def __init__(self, elu, commands=[]):
        log.debug("elhelp.__init__()")
        super(elhelp, self).__init__(elu, "help")

        self.cmds = commands
        self.description = "List all elulab commands"

    @h.catch_exceptions
    def invoke(self, argv):
        """Print the usage of all the commands"""

        pu.print_header("{:<20}".format(self.name), end="")
        print(self.description)
        for cmd in self.cmds:
            if cmd.parser != None:
                # Only keep the first line of the description which should be short
                description = cmd.parser.description.split("\n")[0]
            elif cmd.description != None:
                description = cmd.description
            else:
                description = "Unknown"
            pu.print_header("{:<20}".format(cmd.name), end="")
            print(description)
        print("Note: Use a command name with -h to get additional help")
        return h.EXIT_OK
