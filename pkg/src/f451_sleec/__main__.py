"""Entry point for 'python -m f451_sleec' and the 'f451_sleec' script."""

import sys

from .cli import main as cli_main


def main():
    sys.exit(cli_main())


# =========================================================
#                    M A I N   A P P
# =========================================================
if __name__ == '__main__':
    main()
