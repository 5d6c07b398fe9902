import argparse
import logging
import multiprocessing
import traceback
from functools import wraps

from elulab.frontend import printutils as pu
from elulab.nn import activations as act
from elulab.nn import errors as e

log = logging.getLogger("elulab")
log.trace("helpers.py")

# Exit codes
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

def show_last_exception(err):
    """Print the backtrace of err, innermost frame first"""
    frames = traceback.extract_tb(err.__traceback__)
    print(pu.color_title(f"{type(err).__name__}: {err}"))
    for fs in reversed(frames):
        print(f"  {fs.filename}:{fs.lineno} in {fs.name}()")
        if fs.line:
            print(f"      {fs.line}")

# https://stackoverflow.com/questions/2556108/rreplace-how-to-replace-the-last-occurrence-of-an-expression-in-a-string
def rreplace(s, old, new, occurrence):
    li = s.rsplit(old, occurrence)
    return new.join(li)

def prepare_list(L):
    return rreplace(', '.join([str(x) for x in L]), ',', ' or', 1)

def catch_exceptions(f):
    """Decorator for a command's invoke(): turn errors into a message and an exit code

    Missing input files are usage errors (2), anything else failing is 1
    """

    @wraps(f)
    def _catch_exceptions(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except FileNotFoundError as err:
            pu.print_error(f"file not found: {err.filename or err}")
            return EXIT_USAGE
        except (e.ElulabError, OSError) as err:
            pu.print_error(f"{type(err).__name__}: {err}")
            if log.isEnabledFor(logging.DEBUG):
                show_last_exception(err)
            return EXIT_FAILURE
        except Exception as err:
            pu.print_error(f"unexpected {type(err).__name__}: {err}")
            show_last_exception(err)
            return EXIT_FAILURE
    return _catch_exceptions

def check_positive(value):
    try:
        ivalue = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value} is not an int")
    if ivalue <= 0:
        raise argparse.ArgumentTypeError(f"{value} must be > 0")
    return ivalue

def check_positive_float(value):
    try:
        fvalue = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError("%s is an invalid float value" % value)
    if not fvalue > 0:
        raise argparse.ArgumentTypeError("%s must be > 0" % value)
    return fvalue

def check_float_list(value):
    """Comma separated floats, e.g. "1e-2,1e-3" """
    try:
        values = [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("%s is not a comma separated list of floats" % value)
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values

def check_seeds(value):
    """Seeds as "0,1,2" or a range "0-4" (inclusive)"""
    seeds = []
    try:
        for part in value.split(","):
            part = part.strip()
            if not part:
                continue
            if "-" in part[1:]:
                first, last = part.split("-", 1)
                seeds += list(range(int(first), int(last) + 1))
            else:
                seeds.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError("%s is not a list of seeds (e.g. 0,1,2 or 0-4)" % value)
    if not seeds:
        raise argparse.ArgumentTypeError("at least one seed is required")
    if min(seeds) < 0:
        raise argparse.ArgumentTypeError(f"seeds must be >= 0, got {min(seeds)}")
    return seeds

def check_activation(value):
    """Activation as "elu", "relu", "lrelu", "srelu" with optional ":alpha" """
    try:
        kind = act.activation_kind.parse(value)
    except e.ConfigError as err:
        raise argparse.ArgumentTypeError(str(err))
    if kind.name not in act.KINDS:
        raise argparse.ArgumentTypeError(
            "%s is not one of %s" % (value, prepare_list(act.KINDS))
        )
    return kind

def check_hidden(value):
    """Hidden layers as "WIDTHxCOUNT" (e.g. 128x8) or a comma list of widths"""
    try:
        if "x" in value:
            width, count = value.lower().split("x")
            widths = [int(width)] * int(count)
        else:
            widths = [int(v) for v in value.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("%s is not a hidden layer spec (e.g. 128x8)" % value)
    if not widths or any(w <= 0 for w in widths):
        raise argparse.ArgumentTypeError("%s has no valid hidden layer" % value)
    return widths

def map_jobs(fn, jobs, workers=1):
    """Run fn over independent jobs, in worker processes if workers > 1

    Results keep the order of jobs whatever the number of workers
    """
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with multiprocessing.Pool(min(workers, len(jobs))) as pool:
        return pool.map(fn, jobs)
