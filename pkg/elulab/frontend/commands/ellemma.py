import argparse
import logging

from elulab.frontend import artifacts as ar
from elulab.frontend import helpers as h
from elulab.frontend import printutils as pu
from elulab.frontend.commands import elcmd
from elulab.nn import lemmas as lm

log = logging.getLogger("elulab")
log.trace("ellemma.py")

class ellemma(elcmd.elcmd):
    """Command to run the randomized block inverse / Sherman-Morrison checks"""

    section = "Lemma"

    def __init__(self, elu):
        log.debug("ellemma.__init__()")
        super(ellemma, self).__init__(elu, "lemma-check")

        self.new_parser(
            description="""Check the Fisher matrix algebra against a brute-force dense inverse

Runs seeded random cases of: the block inverse, the bound and the identity
relating E(a a^T)^-1 and Var(a)^-1, the two forms of k, the unit natural
gradient and the bias shift decomposition on small trained networks.
Exits with 0 only if every maximum deviation is within 1e-9.""",
            epilog="""E.g.
  elulab lemma-check
  elulab lemma-check --cases 1000 --seeds 0-4 -o lemmas.json""")
        self.parser.add_argument(
            "--cases", dest="cases", type=h.check_positive, default=None,
            help="Random cases per algebraic check (default: 100)"
        )
        self.parser.add_argument(
            "--network-cases", dest="network_cases", type=int, default=None,
            help="Trained networks for the natural gradient checks, 0 to skip (default: 50)"
        )
        self.parser.add_argument(
            "--seeds", dest="seeds", type=h.check_seeds, default=None,
            help="Seeds, e.g. 0 or 0-4"
        )
        self.parser.add_argument(
            "-o", "--out", dest="out", type=str, default=None,
            help="Also write the results to this JSON file"
        )
        # perturbs every assembled block inverse, to see the failure path
        self.parser.add_argument(
            "--corrupt", dest="corrupt", action="store_true", default=False,
            help=argparse.SUPPRESS
        )
        self.add_config_argument()

    @h.catch_exceptions
    @elcmd.elcmd.init_and_cleanup
    def invoke(self, argv):
        log.debug("ellemma.invoke()")

        cases = self.settings.get(self.section, "cases", self.args.cases, convert=int)
        network_cases = self.settings.get(self.section, "network_cases", self.args.network_cases, convert=int)
        seeds = self.settings.get(self.section, "seeds", self.args.seeds, convert=h.check_seeds)

        report = []
        passed = True
        for seed in seeds:
            pu.print_title(f"seed {seed}")
            for r in lm.run_all(cases, seed, network_cases=network_cases, corrupt=self.args.corrupt):
                pu.print_header("{:<40}".format(r.name), end="")
                print(f"{r.cases:>6} cases  max deviation {r.max_deviation:.3e}  {pu.status(r.passed)}")
                passed = passed and r.passed
                entry = r.to_json()
                entry["seed"] = seed
                report.append(entry)

        if self.args.out:
            ar.write_json(self.args.out, report)
        return h.EXIT_OK if passed else h.EXIT_FAILURE
