import os
import re
import sys

# Colors only on a terminal, NO_COLOR disables them (doc.sh, piped CSV/JSON paths)
colors_enabled = sys.stdout.isatty() and "NO_COLOR" not in os.environ

STYLES = {
    "normal": "\x1b[0m",
    "red": "\x1b[31m",
    "green": "\x1b[32m",
    "yellow": "\x1b[33m",
    "blue": "\x1b[34m",
    "underline": "\x1b[4m",
}
RESET = re.compile(re.escape(STYLES["normal"]))

def colorize(x, *styles):
    """Wrap str(x) in the given styles, nested resets re-apply them"""
    text = str(x)
    if not colors_enabled or not styles:
        return text
    start = "".join(STYLES[s] for s in styles)
    return start + RESET.sub(STYLES["normal"] + start, text) + STYLES["normal"]

def red(x):
    return colorize(x, "red")

def green(x):
    return colorize(x, "green")

def color_title(s):
    return colorize(s, "green", "underline")

def color_value(s):
    return colorize(s, "blue")

def status(ok):
    """PASS/FAILED marker of lemma-check and natgrad-check rows"""
    return green("ok") if ok else red("FAILED")

def print_error(s, end="\n"):
    print(red(f"[!] {s}"), end=end, file=sys.stderr)

def print_title(s, end="\n"):
    print(color_title(s), end=end)

def print_header(s, end=""):
    print(colorize(s, "yellow"), end=end)
