import sys

from elulab.frontend import frontend_cli as fc
from elulab.frontend import settings as st

class pyelulab:
    """Entry point of elulab"""

    def __init__(self, config_path=None):

        # Defaults of every command, a --config JSON file can override them per run
        self.config = st.read_config(config_path)

        # Register commands
        self.frontend = fc.frontend_cli(self)

    def run(self, argv):
        return self.frontend.dispatch(list(argv))

def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    return pyelulab().run(argv)

if __name__ == "__main__":
    sys.exit(main())
