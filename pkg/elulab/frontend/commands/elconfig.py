import logging
import os

from elulab.frontend import helpers as h
from elulab.frontend import printutils as pu
from elulab.frontend import settings as st
from elulab.frontend.commands import elcmd

log = logging.getLogger("elulab")
log.trace("elconfig.py")

class elconfig(elcmd.elcmd):
    """Command to show the effective configuration"""

    def __init__(self, elu):
        log.debug("elconfig.__init__()")
        super(elconfig, self).__init__(elu, "config")

        self.new_parser(
            description="""Show the effective configuration

Options come from elulab.cfg, overridden by a --config JSON file; command
flags override both when a command runs.""",
            epilog="""E.g.
  elulab config
  elulab config --config desk.json
  elulab config -s Train""")
        self.parser.add_argument(
            "-s", "--section", dest="section", type=str, default=None,
            help="Only show this section"
        )
        self.add_config_argument()

    @h.catch_exceptions
    @elcmd.elcmd.init_and_cleanup
    def invoke(self, argv):
        log.debug("elconfig.invoke()")

        current = None
        for section, option, value in self.settings.items():
            if self.args.section is not None and section != self.args.section:
                continue
            if section != current:
                pu.print_title(f"[{section}]")
                current = section
            pu.print_header("{:<24}".format(option), end="")
            source = self.settings.source(section, option)
            print(value if source == "elulab.cfg" else f"{value}  ({source})")

        env = os.environ.get(st.MNIST_DIR_ENV)
        if env and self.args.section in (None, "Data"):
            pu.print_header("{:<24}".format(st.MNIST_DIR_ENV), end="")
            print(env)
        return h.EXIT_OK
