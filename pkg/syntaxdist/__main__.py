#!/usr/bin/env python
import sys

from syntaxdist import MIN_PYTHON_VERSION


def main():
    if sys.version_info < MIN_PYTHON_VERSION:
        print(
            "syntaxdist needs Python {} or newer.".format(".".join(map(str, MIN_PYTHON_VERSION))),
            file=sys.stderr,
        )
        sys.exit(1)
    from syntaxdist.core.cli import cli

    cli(prog_name="syntaxdist")


if __name__ == "__main__":
    main()
